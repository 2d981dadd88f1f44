// Note playback: one oscillator plus an amplitude envelope per note,
// split into left/right gains for constant-power panning. Fidelity is
// deliberately out of scope; any serious synth should sit on the OSC
// stream instead.

import { NotePayload } from "./protocol";

export function pitchToFrequency(pitch: number): number {
  return 440 * Math.pow(2, (pitch - 69) / 12);
}

/** Constant-power stereo gains for pan in [-1, 1]: gL² + gR² = 1. */
export function stereoGains(pan: number): [number, number] {
  const clamped = Math.max(-1, Math.min(1, pan));
  const theta = ((clamped + 1) * Math.PI) / 4;
  return [Math.cos(theta), Math.sin(theta)];
}

// The slice of the WebAudio surface we touch, so tests can fake it.
export interface AudioContextLike {
  currentTime: number;
  destination: unknown;
  state?: string;
  resume?: () => Promise<void>;
  createOscillator(): {
    type: string;
    frequency: { value: number };
    connect(node: unknown): void;
    start(when?: number): void;
    stop(when?: number): void;
  };
  createGain(): {
    gain: {
      value: number;
      setValueAtTime(v: number, t: number): void;
      linearRampToValueAtTime(v: number, t: number): void;
      exponentialRampToValueAtTime(v: number, t: number): void;
    };
    connect(node: unknown, output?: number, input?: number): void;
  };
  createChannelMerger(channels: number): {
    connect(node: unknown): void;
  };
}

const ATTACK = 0.005;
const RELEASE = 0.6;

export class NotePlayer {
  private ctx: AudioContextLike | null = null;
  played = 0;

  constructor(
    private makeContext: () => AudioContextLike = () =>
      new AudioContext() as unknown as AudioContextLike,
  ) {}

  /** Lazily create (and resume) the context; browsers gate autoplay. */
  unlock(): void {
    if (!this.ctx) this.ctx = this.makeContext();
    if (this.ctx.state === "suspended") void this.ctx.resume?.();
  }

  /** Render one note. Returns false when the payload was dropped. */
  play(note: NotePayload): boolean {
    if (note.pitch < 0 || note.pitch > 127) {
      console.warn(`dropping note with out-of-range pitch ${note.pitch}`);
      return false;
    }
    if (!this.ctx) this.unlock();
    const ctx = this.ctx!;
    const now = ctx.currentTime;

    const osc = ctx.createOscillator();
    osc.type = "triangle";
    osc.frequency.value = pitchToFrequency(note.pitch);

    const peak = Math.max(0.0001, (note.velocity / 127) * note.gain * 0.4);
    const envelope = ctx.createGain();
    envelope.gain.setValueAtTime(0.0001, now);
    envelope.gain.linearRampToValueAtTime(peak, now + ATTACK);
    envelope.gain.exponentialRampToValueAtTime(0.0001, now + ATTACK + RELEASE);

    const [gl, gr] = stereoGains(note.pan);
    const left = ctx.createGain();
    left.gain.value = gl;
    const right = ctx.createGain();
    right.gain.value = gr;
    const merger = ctx.createChannelMerger(2);

    osc.connect(envelope);
    envelope.connect(left);
    envelope.connect(right);
    left.connect(merger, 0, 0);
    right.connect(merger, 0, 1);
    merger.connect(ctx.destination);

    osc.start(now);
    osc.stop(now + ATTACK + RELEASE + 0.05);
    this.played += 1;
    return true;
  }
}
