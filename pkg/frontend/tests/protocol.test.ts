import { describe, expect, it } from "vitest";

import {
  COLLISION,
  GRAVITY,
  KEY,
  NOTE,
  SCENE_COLOR,
  WAVE,
  isOsc,
  noteFromArgs,
  parseFrame,
  waveFromArgs,
} from "../src/protocol";

describe("addresses", () => {
  it("pins the wire contract verbatim", () => {
    expect(COLLISION).toBe("/mr4mr/collision");
    expect(NOTE).toBe("/mr4mr/note");
    expect(WAVE).toBe("/mr4mr/wave");
    expect(SCENE_COLOR).toBe("/mr4mr/scene/color");
    expect(KEY).toBe("/mr4mr/key");
    expect(GRAVITY).toBe("/mr4mr/gravity");
  });
});

describe("parseFrame", () => {
  it("reads an OSC mirror frame", () => {
    const frame = parseFrame(
      '{"time": 1.25, "address": "/mr4mr/note", "args": [0, 60, 96, 0.0, 0.8]}',
    );
    expect(frame).not.toBeNull();
    expect(isOsc(frame!)).toBe(true);
    if (isOsc(frame!)) {
      expect(frame.address).toBe(NOTE);
      expect(frame.args).toEqual([0, 60, 96, 0.0, 0.8]);
      expect(frame.time).toBe(1.25);
    }
  });

  it("reads typed frames", () => {
    for (const type of ["state", "hello", "ack", "error"]) {
      const frame = parseFrame(JSON.stringify({ type, detail: "x" }));
      expect(frame).not.toBeNull();
      expect(isOsc(frame!)).toBe(false);
    }
  });

  it("rejects junk", () => {
    expect(parseFrame("not json")).toBeNull();
    expect(parseFrame("42")).toBeNull();
    expect(parseFrame("null")).toBeNull();
    expect(parseFrame('{"type": "mystery"}')).toBeNull();
    expect(parseFrame('{"address": 3, "args": []}')).toBeNull();
    expect(parseFrame('{"address": "/a"}')).toBeNull();
  });
});

describe("noteFromArgs", () => {
  it("accepts the pinned i i i f f shape", () => {
    const note = noteFromArgs([3, 71, 96, -0.5, 0.9]);
    expect(note).toEqual({
      channel: 3,
      pitch: 71,
      velocity: 96,
      pan: -0.5,
      gain: 0.9,
    });
  });

  it("rejects wrong arity or types", () => {
    expect(noteFromArgs([0, 60, 96, 0.0])).toBeNull();
    expect(noteFromArgs([0, 60, 96, 0.0, 0.8, 1])).toBeNull();
    expect(noteFromArgs([0, "60", 96, 0.0, 0.8])).toBeNull();
    expect(noteFromArgs([])).toBeNull();
  });

  it("leaves range checks to the player", () => {
    // structurally valid, musically absurd; the player warns and drops
    expect(noteFromArgs([0, 300, 96, 0.0, 0.8])?.pitch).toBe(300);
  });
});

describe("waveFromArgs", () => {
  it("accepts height and pitch", () => {
    expect(waveFromArgs([1.4, 67])).toEqual({ height: 1.4, pitch: 67 });
  });

  it("rejects wrong arity or types", () => {
    expect(waveFromArgs([1.4])).toBeNull();
    expect(waveFromArgs([1.4, 67, 0])).toBeNull();
    expect(waveFromArgs(["1.4", 67])).toBeNull();
  });
});
