// Frame types for the WebSocket bridge. Frames carrying an `address`
// mirror the server's OSC log one-to-one; typed frames carry state
// snapshots and acknowledgements. Keep shapes in sync with the HTTP
// API models on the Python side.

export const COLLISION = "/mr4mr/collision";
export const NOTE = "/mr4mr/note";
export const WAVE = "/mr4mr/wave";
export const SCENE_COLOR = "/mr4mr/scene/color";
export const KEY = "/mr4mr/key";
export const GRAVITY = "/mr4mr/gravity";

export type Vec3 = [number, number, number];

export interface OscFrame {
  time: number;
  address: string;
  args: (number | string)[];
}

export interface KeyInfo {
  tonic: number;
  mode: string;
  name: string;
}

export interface ObjectState {
  id: string;
  kind: number;
  position: Vec3;
  velocity: Vec3;
  radius: number;
  held: boolean;
}

export interface SessionState {
  time: number;
  ticks: number;
  key: KeyInfo;
  gravity: Vec3;
  objects: ObjectState[];
  bases_created: number;
  mode: string;
}

export interface RoomInfo {
  size: Vec3;
  furniture: { label: string; lo: Vec3; hi: Vec3 }[];
}

export interface StateFrame extends SessionState {
  type: "state";
}

export interface HelloFrame {
  type: "hello";
  room: RoomInfo;
  state: SessionState;
}

export interface AckFrame {
  type: "ack";
  [extra: string]: unknown;
}

export interface ErrorFrame {
  type: "error";
  detail: string;
}

export type ServerFrame =
  | OscFrame
  | StateFrame
  | HelloFrame
  | AckFrame
  | ErrorFrame;

export interface Interaction {
  kind: "spawn" | "impulse" | "throw" | "grab" | "move" | "release" | "listener";
  id?: string;
  object_kind?: "A" | "B" | "C";
  position?: Vec3;
  vector?: Vec3;
  forward?: Vec3;
  radius?: number;
}

export function parseFrame(line: string): ServerFrame | null {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null) return null;
  const obj = raw as Record<string, unknown>;
  if (typeof obj.address === "string" && Array.isArray(obj.args)) {
    return obj as unknown as OscFrame;
  }
  if (
    obj.type === "state" ||
    obj.type === "hello" ||
    obj.type === "ack" ||
    obj.type === "error"
  ) {
    return obj as unknown as ServerFrame;
  }
  return null;
}

export function isOsc(frame: ServerFrame): frame is OscFrame {
  return typeof (frame as OscFrame).address === "string";
}

export interface NotePayload {
  channel: number;
  pitch: number;
  velocity: number;
  pan: number;
  gain: number;
}

// Null when the payload does not have the pinned i i i f f shape.
// Range checks stay out of here: a structurally valid note with a wild
// pitch must still reach the player so it can warn and drop it.
export function noteFromArgs(args: (number | string)[]): NotePayload | null {
  if (args.length !== 5) return null;
  const [channel, pitch, velocity, pan, gain] = args;
  if (
    typeof channel !== "number" ||
    typeof pitch !== "number" ||
    typeof velocity !== "number" ||
    typeof pan !== "number" ||
    typeof gain !== "number"
  ) {
    return null;
  }
  return { channel, pitch, velocity, pan, gain };
}

export function waveFromArgs(
  args: (number | string)[],
): { height: number; pitch: number } | null {
  if (args.length !== 2) return null;
  const [height, pitch] = args;
  if (typeof height !== "number" || typeof pitch !== "number") return null;
  return { height, pitch };
}
