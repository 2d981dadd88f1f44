"""Collision-to-note mapping: pitch, velocity, pan, stereo gains."""

import math

import pytest
from hypothesis import given, strategies as st

from roomloop.room import CollisionEvent, ObjectKind
from roomloop.sonify import (
    PITCH_HI,
    PITCH_LO,
    Listener,
    NoteEvent,
    pitch_from_height,
    sonify,
    spatialize,
    stereo_gains,
    velocity_from_speed,
)
from roomloop.theory import C_MAJOR, KeyScale, Mode, quantize_to_scale, scale_set


# -- scale quantization ----------------------------------------------


def test_quantize_identity_on_scale_members():
    for p in range(48, 85):
        if p % 12 in scale_set(C_MAJOR):
            assert quantize_to_scale(p, C_MAJOR) == p


def test_quantize_ties_break_downward():
    # F#4 sits exactly between F and G in C major
    assert quantize_to_scale(66, C_MAJOR) == 65
    # C between B and C# in B major
    assert quantize_to_scale(48, KeyScale(11, Mode.MAJOR)) == 47


def test_quantize_respects_bounds():
    assert quantize_to_scale(0, C_MAJOR, lo=60, hi=72) == 60
    with pytest.raises(ValueError):
        quantize_to_scale(60, C_MAJOR, lo=61, hi=61)  # C# only


@given(st.integers(0, 127), st.integers(0, 11), st.sampled_from(list(Mode)))
def test_quantize_lands_on_scale_within_semitone_bound(pitch, tonic, mode):
    key = KeyScale(tonic, mode)
    q = quantize_to_scale(pitch, key)
    assert q % 12 in scale_set(key)
    # major/minor scales have no gap wider than 2 semitones
    assert abs(q - pitch) <= 1


# -- pitch and velocity ----------------------------------------------


def test_pitch_endpoints():
    assert pitch_from_height(0.0, 3.0, C_MAJOR) == PITCH_LO
    assert pitch_from_height(3.0, 3.0, C_MAJOR) == PITCH_HI
    assert pitch_from_height(99.0, 3.0, C_MAJOR) == PITCH_HI  # clamped


def test_pitch_midpoint_quantized():
    # raw 48 + 36 * 0.5 = 66 (F#), tie resolves down to F
    assert pitch_from_height(1.5, 3.0, C_MAJOR) == 65


def test_pitch_rejects_bad_room_height():
    with pytest.raises(ValueError):
        pitch_from_height(1.0, 0.0, C_MAJOR)


@given(st.floats(0.0, 3.0), st.integers(0, 11), st.sampled_from(list(Mode)))
def test_pitch_stays_near_three_octave_band(height, tonic, mode):
    p = pitch_from_height(height, 3.0, KeyScale(tonic, mode))
    assert PITCH_LO - 1 <= p <= PITCH_HI + 1  # quantization may nudge one semitone
    assert p % 12 in scale_set(KeyScale(tonic, mode))


def test_velocity_saturates_and_floors():
    assert velocity_from_speed(0.0) == 1  # audible floor
    assert velocity_from_speed(2.5, v_max=5.0) == 64  # 63.5 rounds half up
    assert velocity_from_speed(5.0, v_max=5.0) == 127
    assert velocity_from_speed(50.0, v_max=5.0) == 127
    with pytest.raises(ValueError):
        velocity_from_speed(1.0, v_max=0.0)


@given(st.floats(0.0, 100.0, allow_nan=False))
def test_velocity_in_midi_range(speed):
    assert 1 <= velocity_from_speed(speed) <= 127


# -- spatialization --------------------------------------------------

EAR = Listener((2.0, 1.6, 2.5), (0.0, 0.0, 1.0))


def test_pan_straight_ahead_is_center():
    pan, gain = spatialize((2.0, 1.6, 4.5), EAR)
    assert pan == pytest.approx(0.0, abs=1e-12)
    assert gain == pytest.approx(0.5)  # 2 m away


def test_pan_hard_right_and_left():
    pan, _ = spatialize((4.0, 1.6, 2.5), EAR)  # 90 degrees right
    assert pan == pytest.approx(1.0)
    pan, _ = spatialize((0.0, 1.6, 2.5), EAR)
    assert pan == pytest.approx(-1.0)


def test_pan_behind_collapses_to_center():
    pan, _ = spatialize((2.0, 1.6, 0.5), EAR)
    assert pan == pytest.approx(0.0, abs=1e-12)


def test_gain_clamps_inside_unit_sphere():
    _, gain = spatialize((2.1, 1.6, 2.5), EAR)
    assert gain == 1.0
    pan, gain = spatialize(EAR.position, EAR)  # degenerate: at the ear
    assert (pan, gain) == (0.0, 1.0)


def test_listener_forward_validation():
    with pytest.raises(ValueError):
        Listener((0.0, 0.0, 0.0), (0.0, 1.0, 0.0))
    with pytest.raises(ValueError):
        Listener((0.0, 0.0, 0.0), (0.0, 0.0, 0.0))
    ear = Listener((0.0, 0.0, 0.0), (3.0, 0.0, 4.0))  # normalized on entry
    assert math.hypot(ear.forward[0], ear.forward[2]) == pytest.approx(1.0)


@given(
    st.floats(-10.0, 10.0),
    st.floats(0.0, 3.0),
    st.floats(-10.0, 10.0),
)
def test_pan_and_gain_ranges(x, y, z):
    pan, gain = spatialize((x, y, z), EAR)
    assert -1.0 <= pan <= 1.0
    assert 0.0 < gain <= 1.0


@given(st.floats(-1.0, 1.0))
def test_stereo_gains_constant_power(pan):
    gl, gr = stereo_gains(pan)
    assert gl * gl + gr * gr == pytest.approx(1.0, abs=1e-12)
    assert gl >= 0 and gr >= 0


def test_stereo_gains_extremes():
    assert stereo_gains(-1.0) == pytest.approx((1.0, 0.0), abs=1e-12)
    assert stereo_gains(1.0) == pytest.approx((0.0, 1.0), abs=1e-12)
    gl, gr = stereo_gains(0.0)
    assert gl == pytest.approx(gr)


# -- composition -----------------------------------------------------


def test_sonify_composes_fields():
    ev = CollisionEvent(
        kind=ObjectKind.TYPE_B,
        speed=2.5,
        position=(4.0, 1.5, 2.5),
        surface="wall",
        timestamp=1.25,
    )
    note = sonify(ev, EAR, C_MAJOR, room_height=3.0, v_max=5.0)
    assert note.pitch == 65
    assert note.velocity == 64
    assert note.channel == int(ObjectKind.TYPE_B)
    assert note.pan == pytest.approx(1.0)
    assert note.timestamp == 1.25


def test_note_event_validation():
    with pytest.raises(ValueError):
        NoteEvent(pitch=200, velocity=64, channel=0, pan=0.0, gain=1.0, timestamp=0.0)
    with pytest.raises(ValueError):
        NoteEvent(pitch=60, velocity=0, channel=0, pan=0.0, gain=1.0, timestamp=0.0)
    with pytest.raises(ValueError):
        NoteEvent(pitch=60, velocity=64, channel=16, pan=0.0, gain=1.0, timestamp=0.0)
