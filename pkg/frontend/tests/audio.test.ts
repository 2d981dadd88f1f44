import { afterEach, describe, expect, it, vi } from "vitest";

import {
  AudioContextLike,
  NotePlayer,
  pitchToFrequency,
  stereoGains,
} from "../src/audio";

interface FakeOscillator {
  type: string;
  frequency: { value: number };
  started: boolean;
  stopped: boolean;
  connect(node: unknown): void;
  start(when?: number): void;
  stop(when?: number): void;
}

class FakeContext implements AudioContextLike {
  currentTime = 0;
  destination = { sink: true };
  state = "suspended";
  resumed = 0;
  oscillators: FakeOscillator[] = [];
  gainRamps: string[] = [];

  resume = () => {
    this.resumed += 1;
    this.state = "running";
    return Promise.resolve();
  };

  createOscillator(): FakeOscillator {
    const osc: FakeOscillator = {
      type: "sine",
      frequency: { value: 0 },
      started: false,
      stopped: false,
      connect: () => undefined,
      start: () => {
        osc.started = true;
      },
      stop: () => {
        osc.stopped = true;
      },
    };
    this.oscillators.push(osc);
    return osc;
  }

  createGain() {
    const ramps = this.gainRamps;
    return {
      gain: {
        value: 1,
        setValueAtTime: () => {
          ramps.push("set");
        },
        linearRampToValueAtTime: () => {
          ramps.push("linear");
        },
        exponentialRampToValueAtTime: () => {
          ramps.push("exponential");
        },
      },
      connect: () => undefined,
    };
  }

  createChannelMerger() {
    return { connect: () => undefined };
  }
}

function note(pitch: number) {
  return { channel: 0, pitch, velocity: 96, pan: 0, gain: 0.8 };
}

afterEach(() => {
  vi.restoreAllMocks();
});

describe("pitchToFrequency", () => {
  it("maps concert pitch exactly", () => {
    expect(pitchToFrequency(69)).toBe(440);
  });

  it("maps middle C to about 261.63 Hz", () => {
    expect(pitchToFrequency(60)).toBeCloseTo(261.63, 2);
  });

  it("doubles per octave", () => {
    expect(pitchToFrequency(81)).toBeCloseTo(880, 9);
    expect(pitchToFrequency(57)).toBeCloseTo(220, 9);
  });
});

describe("stereoGains", () => {
  it("centers with equal gains", () => {
    const [gl, gr] = stereoGains(0);
    expect(gl).toBeCloseTo(Math.SQRT1_2, 9);
    expect(gr).toBeCloseTo(Math.SQRT1_2, 9);
  });

  it("pins hard left and hard right", () => {
    expect(stereoGains(-1)[0]).toBeCloseTo(1, 9);
    expect(stereoGains(-1)[1]).toBeCloseTo(0, 9);
    expect(stereoGains(1)[0]).toBeCloseTo(0, 9);
    expect(stereoGains(1)[1]).toBeCloseTo(1, 9);
  });

  it("keeps constant power across the field and clamps outside it", () => {
    for (const pan of [-1, -0.6, -0.1, 0, 0.3, 0.8, 1]) {
      const [gl, gr] = stereoGains(pan);
      expect(gl * gl + gr * gr).toBeCloseTo(1, 9);
    }
    expect(stereoGains(-5)).toEqual(stereoGains(-1));
    expect(stereoGains(5)).toEqual(stereoGains(1));
  });
});

describe("NotePlayer", () => {
  it("renders one oscillator per note at the right frequency", () => {
    const ctx = new FakeContext();
    const player = new NotePlayer(() => ctx);
    expect(player.play(note(69))).toBe(true);
    expect(player.play(note(60))).toBe(true);
    expect(player.played).toBe(2);
    expect(ctx.oscillators).toHaveLength(2);
    expect(ctx.oscillators[0].frequency.value).toBe(440);
    expect(ctx.oscillators[1].frequency.value).toBeCloseTo(261.63, 2);
    for (const osc of ctx.oscillators) {
      expect(osc.started).toBe(true);
      expect(osc.stopped).toBe(true);
    }
    // attack then release on the envelope
    expect(ctx.gainRamps.slice(0, 3)).toEqual(["set", "linear", "exponential"]);
  });

  it("warns and drops out-of-range pitches without touching audio", () => {
    const warn = vi.spyOn(console, "warn").mockImplementation(() => undefined);
    const ctx = new FakeContext();
    const player = new NotePlayer(() => ctx);
    expect(player.play(note(128))).toBe(false);
    expect(player.play(note(-1))).toBe(false);
    expect(player.played).toBe(0);
    expect(ctx.oscillators).toHaveLength(0);
    expect(warn).toHaveBeenCalledTimes(2);
    expect(String(warn.mock.calls[0][0])).toContain("128");
  });

  it("creates the context lazily and only once", () => {
    let builds = 0;
    const ctx = new FakeContext();
    const player = new NotePlayer(() => {
      builds += 1;
      return ctx;
    });
    expect(builds).toBe(0);
    player.play(note(60));
    player.play(note(64));
    expect(builds).toBe(1);
  });

  it("resumes a suspended context on unlock", () => {
    const ctx = new FakeContext();
    const player = new NotePlayer(() => ctx);
    player.unlock();
    expect(ctx.resumed).toBe(1);
    player.unlock();
    expect(ctx.resumed).toBe(1); // already running
  });
});
