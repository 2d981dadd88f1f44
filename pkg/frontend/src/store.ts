// Client-side session state. Object positions are whatever the server
// last said, interpolated between the two latest snapshots for at most
// INTERP_WINDOW_MS; the client never integrates physics on its own.

import {
  GRAVITY,
  KEY,
  NOTE,
  WAVE,
  NotePayload,
  ObjectState,
  RoomInfo,
  ServerFrame,
  Vec3,
  isOsc,
  noteFromArgs,
  waveFromArgs,
} from "./protocol";

export const INTERP_WINDOW_MS = 100;
export const WAVE_LIFETIME_MS = 1500;

export interface TrackedObject {
  id: string;
  kind: number;
  radius: number;
  held: boolean;
  current: Vec3;
  previous: Vec3;
  updatedAt: number; // ms timestamp of the `current` snapshot
}

export interface Wave {
  seq: number;
  height: number;
  pitch: number;
  startedAt: number;
}

export type Effect =
  | { kind: "note"; note: NotePayload }
  | { kind: "wave"; wave: Wave };

export class UiStore {
  room: RoomInfo | null = null;
  objects = new Map<string, TrackedObject>();
  keyName = "C Major";
  keyFlashes = 0;
  gravity: Vec3 = [0, -9.8, 0];
  waves: Wave[] = [];
  notesRendered = 0;
  banner: string | null = null;
  private waveSeq = 0;

  /** Fold one server frame in; returns the side effects to perform. */
  applyFrame(frame: ServerFrame, now: number): Effect[] {
    if (isOsc(frame)) {
      return this.applyOsc(frame.address, frame.args, now);
    }
    switch (frame.type) {
      case "hello":
        this.room = frame.room;
        this.applySnapshot(frame.state.objects, now);
        this.keyName = frame.state.key.name;
        this.gravity = frame.state.gravity;
        break;
      case "state":
        this.applySnapshot(frame.objects, now);
        break;
      case "error":
        this.banner = frame.detail;
        break;
      case "ack":
        break;
    }
    return [];
  }

  private applyOsc(
    address: string,
    args: (number | string)[],
    now: number,
  ): Effect[] {
    if (address === NOTE) {
      const note = noteFromArgs(args);
      if (!note) return [];
      this.notesRendered += 1;
      return [{ kind: "note", note }];
    }
    if (address === WAVE) {
      const parsed = waveFromArgs(args);
      if (!parsed) return [];
      const wave: Wave = { seq: this.waveSeq++, startedAt: now, ...parsed };
      this.waves.push(wave);
      return [{ kind: "wave", wave }];
    }
    if (address === KEY) {
      const [tonic, mode] = args;
      if (typeof tonic === "number" && typeof mode === "string") {
        this.keyName = `${PITCH_NAMES[((tonic % 12) + 12) % 12]} ${mode[0].toUpperCase()}${mode.slice(1)}`;
        this.keyFlashes += 1;
      }
    } else if (address === GRAVITY) {
      if (args.length === 3 && args.every((a) => typeof a === "number")) {
        this.gravity = args as Vec3;
      }
    }
    return [];
  }

  private applySnapshot(objects: ObjectState[], now: number): void {
    const seen = new Set<string>();
    for (const obj of objects) {
      seen.add(obj.id);
      const tracked = this.objects.get(obj.id);
      if (tracked) {
        tracked.previous = tracked.current;
        tracked.current = obj.position;
        tracked.updatedAt = now;
        tracked.held = obj.held;
      } else {
        this.objects.set(obj.id, {
          id: obj.id,
          kind: obj.kind,
          radius: obj.radius,
          held: obj.held,
          current: obj.position,
          previous: obj.position,
          updatedAt: now,
        });
      }
    }
    for (const id of [...this.objects.keys()]) {
      if (!seen.has(id)) this.objects.delete(id);
    }
  }

  /**
   * Render position: previous -> current over the interpolation window,
   * then pinned at the authoritative position (no extrapolation).
   */
  renderPosition(obj: TrackedObject, now: number): Vec3 {
    const age = now - obj.updatedAt;
    if (age >= INTERP_WINDOW_MS) return obj.current;
    const t = Math.max(0, age / INTERP_WINDOW_MS);
    return [
      obj.previous[0] + (obj.current[0] - obj.previous[0]) * t,
      obj.previous[1] + (obj.current[1] - obj.previous[1]) * t,
      obj.previous[2] + (obj.current[2] - obj.previous[2]) * t,
    ];
  }

  /** Drop expired wave animations; call once per render frame. */
  pruneWaves(now: number): void {
    this.waves = this.waves.filter((w) => now - w.startedAt < WAVE_LIFETIME_MS);
  }
}

const PITCH_NAMES = [
  "C",
  "C#",
  "D",
  "D#",
  "E",
  "F",
  "F#",
  "G",
  "G#",
  "A",
  "A#",
  "B",
];
