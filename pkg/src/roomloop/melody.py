"""Melody loop machinery: windowing, continuation, latent codec, mutation.

A melody is 32 sixteenth-note tokens (2 bars of 4/4): REST, HOLD, or
NOTE(48..84), an alphabet of 39. A burst of collision notes becomes
bar 1 of a base melody; a model fills bar 2; the result loops, and at
every loop completion it is regenerated from a noise-perturbed latent
encoding of itself, so the tune drifts instead of repeating forever.

The default model is deliberately non-learned: a quantized-grid codec
(each token owns a 1/39 slice of [0,1), encoded at slice centers, so
decode(encode(s)) == s exactly) plus an order-2 Markov continuation
trained at load from a bundled corpus. Anything implementing
MelodyModel can replace it, e.g. a bridge to an external process.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

from roomloop._util import clamp, round_half_up
from roomloop.sonify import PITCH_HI, PITCH_LO, NoteEvent
from roomloop.theory import KeyScale, quantize_to_scale, scale_set

REST = 0
HOLD = 1
ALPHABET_SIZE = 2 + (PITCH_HI - PITCH_LO) + 1  # 39

SEQUENCE_LEN = 32       # 2 bars of sixteenths
BAR_LEN = 16
LATENT_DIM = SEQUENCE_LEN

LatentVec = tuple[float, ...]


def note_token(pitch: int) -> int:
    """Token code for NOTE(pitch)."""
    if not PITCH_LO <= pitch <= PITCH_HI:
        raise ValueError(f"pitch out of range {PITCH_LO}..{PITCH_HI}: {pitch}")
    return 2 + (pitch - PITCH_LO)


def token_pitch(token: int) -> int | None:
    """The NOTE pitch of a token, or None for REST/HOLD."""
    return PITCH_LO + token - 2 if token >= 2 else None


def token_name(token: int) -> str:
    if token == REST:
        return "R"
    if token == HOLD:
        return "H"
    return f"N{token_pitch(token)}"


def parse_token(name: str) -> int:
    if name == "R":
        return REST
    if name == "H":
        return HOLD
    if name.startswith("N"):
        return note_token(int(name[1:]))
    raise ValueError(f"bad token name: {name!r}")


@dataclass(frozen=True)
class TokenSequence:
    """Exactly 32 tokens; index 0 is never HOLD (nothing to sustain)."""

    tokens: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if len(self.tokens) != SEQUENCE_LEN:
            raise ValueError(f"need {SEQUENCE_LEN} tokens, got {len(self.tokens)}")
        for i, tok in enumerate(self.tokens):
            if not 0 <= tok < ALPHABET_SIZE:
                raise ValueError(f"token {tok} at step {i} outside alphabet")
        if self.tokens[0] == HOLD:
            raise ValueError("sequence must not start with HOLD")

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, idx):
        return self.tokens[idx]

    def notes(self):
        """Yield (step, pitch, duration_steps); HOLDs extend the note."""
        i = 0
        while i < SEQUENCE_LEN:
            pitch = token_pitch(self.tokens[i])
            if pitch is None:
                i += 1
                continue
            dur = 1
            while i + dur < SEQUENCE_LEN and self.tokens[i + dur] == HOLD:
                dur += 1
            yield i, pitch, dur
            i += dur

    def names(self) -> str:
        return " ".join(token_name(t) for t in self.tokens)

    @classmethod
    def from_names(cls, text: str) -> "TokenSequence":
        return cls(tuple(parse_token(n) for n in text.split()))


# -- collision windowing ---------------------------------------------


def window_collisions(
    events: Sequence[NoteEvent],
    bpm: float = 120.0,
    min_events: int = 4,
    window_seconds: float = 3.0,
) -> TokenSequence | None:
    """Turn a dense burst of collision notes into bar 1 of a base melody.

    When at least ``min_events`` events fall within a sliding
    ``window_seconds`` window, the window's notes are quantized to the
    sixteenth grid of bar 1 (times relative to the first event, steps
    clamped to 0..15, same-step conflicts keep the louder note). Steps
    without an onset hold the previous note, or rest before the first
    one. Bar 2 is left all-REST for the continuation model. Returns
    None while the threshold is not met.
    """
    times = [e.timestamp for e in events]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("events must be time-ordered")
    start = None
    j = 0
    for i in range(len(events)):
        if j < i + min_events:
            j = i + min_events
        if j - 1 < len(events) and times[j - 1] - times[i] <= window_seconds:
            start = i
            break
    if start is None:
        return None
    t0 = times[start]
    grid = 60.0 / bpm / 4.0
    best: dict[int, NoteEvent] = {}
    for e in events[start:]:
        if e.timestamp - t0 > window_seconds:
            break
        step = clamp(round_half_up((e.timestamp - t0) / grid), 0, BAR_LEN - 1)
        held = best.get(step)
        if held is None or e.velocity > held.velocity:
            best[step] = e
    tokens = [REST] * SEQUENCE_LEN
    sounding = False
    for step in range(BAR_LEN):
        if step in best:
            tokens[step] = note_token(clamp(best[step].pitch, PITCH_LO, PITCH_HI))
            sounding = True
        elif sounding:
            tokens[step] = HOLD
    return TokenSequence(tuple(tokens))


# -- latent codec ----------------------------------------------------


def encode_sequence(seq: TokenSequence) -> LatentVec:
    """Token sequence to a 32-dim latent in [0,1): slice centers."""
    return tuple((tok + 0.5) / ALPHABET_SIZE for tok in seq)


def decode_sequence(z: Sequence[float]) -> TokenSequence:
    """Latent back to tokens: floor into slices, clamp, repair leading HOLD."""
    if len(z) != LATENT_DIM:
        raise ValueError(f"latent must have {LATENT_DIM} dims, got {len(z)}")
    tokens = []
    for i, value in enumerate(z):
        if not math.isfinite(value):
            raise ValueError(f"non-finite latent component at {i}: {value}")
        tokens.append(clamp(math.floor(value * ALPHABET_SIZE), 0, ALPHABET_SIZE - 1))
    if tokens[0] == HOLD:
        tokens[0] = REST
    return TokenSequence(tuple(tokens))


def reincarnate(
    seq: TokenSequence,
    noise_scale: float,
    rng: random.Random,
    model: "MelodyModel | None" = None,
) -> TokenSequence:
    """Regenerate a loop from its noise-perturbed latent encoding.

    Noise is one-sided uniform [0, noise_scale) per component. Under
    the grid codec any noise_scale below the slice half-width
    (0.5/39 ~ 0.0128) is an exact no-op; the shipping default 0.05
    flips roughly three quarters of the steps to a neighboring token.
    """
    if noise_scale < 0:
        raise ValueError(f"noise_scale must be >= 0: {noise_scale}")
    enc = model.encode if model is not None else encode_sequence
    dec = model.decode if model is not None else decode_sequence
    z = enc(seq)
    z_noisy = tuple(value + rng.random() * noise_scale for value in z)
    return dec(z_noisy)


def requantize_to_key(seq: TokenSequence, key: KeyScale) -> TokenSequence:
    """Snap every NOTE to the nearest scale member (ties downward)."""
    tokens = []
    for tok in seq:
        pitch = token_pitch(tok)
        if pitch is None:
            tokens.append(tok)
        else:
            tokens.append(note_token(quantize_to_scale(pitch, key, PITCH_LO, PITCH_HI)))
    return TokenSequence(tuple(tokens))


# -- continuation models ---------------------------------------------


class MelodyModel(Protocol):
    def continue_melody(
        self, base: TokenSequence, key: KeyScale, rng: random.Random
    ) -> TokenSequence: ...

    def encode(self, seq: TokenSequence) -> LatentVec: ...

    def decode(self, z: Sequence[float]) -> TokenSequence: ...


def _scale_note_tokens(key: KeyScale) -> list[int]:
    members = scale_set(key)
    return [note_token(p) for p in range(PITCH_LO, PITCH_HI + 1) if p % 12 in members]


class MarkovMelodyModel:
    """Order-2 Markov chain over tokens, trained from a corpus file.

    Falls back to order-1 for unseen contexts, then to a uniform draw
    over the active scale's NOTE tokens. The latent codec is the grid
    codec, so the lossless roundtrip contract holds.
    """

    def __init__(self, melodies: Sequence[Sequence[int]]):
        self.trigrams: dict[tuple[int, int], dict[int, int]] = {}
        self.bigrams: dict[int, dict[int, int]] = {}
        for melody in melodies:
            for a, b, c in zip(melody, melody[1:], melody[2:]):
                self.trigrams.setdefault((a, b), {})[c] = (
                    self.trigrams.get((a, b), {}).get(c, 0) + 1
                )
                self.bigrams.setdefault(b, {})[c] = self.bigrams.get(b, {}).get(c, 0) + 1

    @classmethod
    def from_corpus_file(cls, path) -> "MarkovMelodyModel":
        melodies = []
        with open(path, "r", encoding="utf-8") as fh:
            for raw in fh:
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                melodies.append([parse_token(n) for n in line.split()])
        if not melodies:
            raise ValueError(f"{path}: empty melody corpus")
        return cls(melodies)

    def _draw(self, context: tuple[int, int], key: KeyScale, rng: random.Random) -> int:
        table = self.trigrams.get(context) or self.bigrams.get(context[1])
        if table:
            tokens = sorted(table)
            weights = [table[t] for t in tokens]
            return rng.choices(tokens, weights=weights)[0]
        return rng.choice(_scale_note_tokens(key))

    def continue_melody(
        self, base: TokenSequence, key: KeyScale, rng: random.Random
    ) -> TokenSequence:
        tokens = list(base.tokens[:BAR_LEN])
        for _ in range(BAR_LEN, SEQUENCE_LEN):
            tokens.append(self._draw((tokens[-2], tokens[-1]), key, rng))
        return TokenSequence(tuple(tokens))

    def encode(self, seq: TokenSequence) -> LatentVec:
        return encode_sequence(seq)

    def decode(self, z: Sequence[float]) -> TokenSequence:
        return decode_sequence(z)


def fallback_continuation(base: TokenSequence, key: KeyScale) -> TokenSequence:
    """Rule-based stand-in: bar 2 repeats bar 1 snapped to the scale."""
    bar1 = list(base.tokens[:BAR_LEN])
    bar2 = []
    for tok in bar1:
        pitch = token_pitch(tok)
        if pitch is None:
            bar2.append(tok)
        else:
            bar2.append(note_token(quantize_to_scale(pitch, key, PITCH_LO, PITCH_HI)))
    if bar2[0] == HOLD:
        bar2[0] = REST  # bar boundary: nothing carries across the repeat
    return TokenSequence(tuple(bar1 + bar2))


def continue_melody(
    base: TokenSequence,
    model: MelodyModel | None,
    key: KeyScale,
    rng: random.Random,
) -> TokenSequence:
    """Fill bar 2 of a base melody; bar 1 always survives unchanged.

    Requires at least one NOTE in bar 1. A missing or failing model
    degrades to the rule-based repeat rather than silencing the loop.
    """
    if not any(token_pitch(t) is not None for t in base.tokens[:BAR_LEN]):
        raise ValueError("bar 1 must contain at least one NOTE")
    if model is None:
        return fallback_continuation(base, key)
    try:
        generated = model.continue_melody(base, key, rng)
    except Exception:
        return fallback_continuation(base, key)
    return TokenSequence(base.tokens[:BAR_LEN] + generated.tokens[BAR_LEN:])


# -- loop scheduling -------------------------------------------------


@dataclass(frozen=True)
class LoopNote:
    """One melody note due now: global step index plus duration in steps."""

    step: int
    pitch: int
    duration_steps: int


class LoopScheduler:
    """Plays the active loop on the sixteenth grid and evolves it.

    Swaps are bar-synchronous: a pending base melody or key change
    only takes effect when a bar boundary comes around, so no bar
    mixes two loops or two keys. After every ``loops_before_mutation``
    complete passes the loop is replaced by ``mutate(loop)``.
    """

    def __init__(
        self,
        mutate: Callable[[TokenSequence], TokenSequence],
        requantize: Callable[[TokenSequence, KeyScale], TokenSequence] = requantize_to_key,
        loops_before_mutation: int = 1,
    ):
        if loops_before_mutation < 1:
            raise ValueError("loops_before_mutation must be >= 1")
        self._mutate = mutate
        self._requantize = requantize
        self.loops_before_mutation = loops_before_mutation
        self.active: TokenSequence | None = None
        self.pending: TokenSequence | None = None
        self.pending_key: KeyScale | None = None
        self.position = 0
        self.loops_completed = 0

    def set_pending(self, seq: TokenSequence) -> None:
        """Queue a new base melody; it starts at the next bar boundary."""
        self.pending = seq

    def request_key(self, key: KeyScale) -> None:
        """Queue a requantization of the loop for the next bar boundary."""
        self.pending_key = key

    def on_step(self, global_step: int) -> list[LoopNote]:
        """Advance one sixteenth step; return loop notes starting now."""
        if global_step % BAR_LEN == 0:
            if self.pending is not None:
                self.active = self.pending
                self.pending = None
                self.position = 0
                self.loops_completed = 0
            if self.pending_key is not None:
                if self.active is not None:
                    self.active = self._requantize(self.active, self.pending_key)
                self.pending_key = None
        if self.active is None:
            return []
        if self.position >= SEQUENCE_LEN:
            self.position = 0
            self.loops_completed += 1
            if self.loops_completed >= self.loops_before_mutation:
                self.active = self._mutate(self.active)
                self.loops_completed = 0
        token = self.active[self.position]
        notes = []
        pitch = token_pitch(token)
        if pitch is not None:
            dur = 1
            while (
                self.position + dur < SEQUENCE_LEN
                and self.active[self.position + dur] == HOLD
            ):
                dur += 1
            notes.append(LoopNote(global_step, pitch, dur))
        self.position += 1
        return notes
