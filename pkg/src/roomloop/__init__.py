"""roomloop: an ambient music engine driven by a simulated room.

Virtual objects bounce around a box room; every collision becomes a
pitched, panned note. When enough collisions land close together they
seed a two-bar melody loop that slowly mutates as it repeats, and the
dominant color of the scene steers the key and scale. Modules talk to
each other over OSC, a browser UI attaches over a WebSocket bridge,
and every session can be exported as a standard MIDI file.
"""

__version__ = "0.1.0"

from roomloop.theory import KeyScale, Mode, scale_set

__all__ = ["KeyScale", "Mode", "scale_set", "__version__"]
