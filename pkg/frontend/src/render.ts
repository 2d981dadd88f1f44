// 2.5D orthographic room view: x runs right, y runs up, z recedes at a
// fixed oblique angle. Pure projection math lives here so it can be
// tested without a canvas.

import { RoomInfo, Vec3 } from "./protocol";
import { TrackedObject, UiStore, Wave, WAVE_LIFETIME_MS } from "./store";

export interface View {
  scale: number; // px per meter
  originX: number; // screen x of room corner (0,0,0)
  originY: number; // screen y of room corner (0,0,0)
  depthX: number; // screen x shift per meter of z
  depthY: number; // screen y shift per meter of z
}

export function fitView(
  room: RoomInfo,
  width: number,
  height: number,
): View {
  const [w, h, d] = room.size;
  const depthX = 0.45;
  const depthY = 0.28;
  const spanX = w + d * depthX;
  const spanY = h + d * depthY;
  const scale = Math.min((width * 0.9) / spanX, (height * 0.9) / spanY);
  return {
    scale,
    originX: (width - spanX * scale) / 2,
    originY: height - (height - spanY * scale) / 2,
    depthX,
    depthY,
  };
}

export function project(p: Vec3, view: View): [number, number] {
  const [x, y, z] = p;
  return [
    view.originX + (x + z * view.depthX) * view.scale,
    view.originY - (y + z * view.depthY) * view.scale,
  ];
}

/** Inverse of project on the plane z = zPlane (pointer picking). */
export function unproject(
  sx: number,
  sy: number,
  zPlane: number,
  view: View,
): [number, number] {
  const x = (sx - view.originX) / view.scale - zPlane * view.depthX;
  const y = (view.originY - sy) / view.scale - zPlane * view.depthY;
  return [x, y];
}

const KIND_COLORS = ["#e4a33c", "#5fa8e0", "#c76fd1"];

export function drawScene(
  ctx: CanvasRenderingContext2D,
  store: UiStore,
  now: number,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  if (!store.room) {
    ctx.fillStyle = "#888";
    ctx.font = "16px system-ui, sans-serif";
    ctx.fillText("connecting...", 20, 30);
    return;
  }
  const view = fitView(store.room, width, height);
  drawRoom(ctx, store.room, view);
  for (const wave of store.waves) drawWave(ctx, wave, store.room, view, now);
  const objects = [...store.objects.values()].sort(
    (a, b) => b.current[2] - a.current[2],
  );
  for (const obj of objects) drawObject(ctx, obj, store, view, now);
}

function drawRoom(
  ctx: CanvasRenderingContext2D,
  room: RoomInfo,
  view: View,
): void {
  const [w, h, d] = room.size;
  ctx.lineWidth = 1;

  // floor
  poly(ctx, [
    project([0, 0, 0], view),
    project([w, 0, 0], view),
    project([w, 0, d], view),
    project([0, 0, d], view),
  ]);
  ctx.fillStyle = "#e8e4da";
  ctx.fill();
  ctx.strokeStyle = "#b5b0a4";
  ctx.stroke();

  // back and side walls, light wash
  poly(ctx, [
    project([0, 0, d], view),
    project([w, 0, d], view),
    project([w, h, d], view),
    project([0, h, d], view),
  ]);
  ctx.fillStyle = "#f2efe8";
  ctx.fill();
  ctx.stroke();
  poly(ctx, [
    project([0, 0, 0], view),
    project([0, 0, d], view),
    project([0, h, d], view),
    project([0, h, 0], view),
  ]);
  ctx.fillStyle = "#ece8df";
  ctx.fill();
  ctx.stroke();

  for (const item of room.furniture) {
    drawBox(ctx, item.lo, item.hi, view, "#c9b896", "#9a8b6d");
  }
}

function drawBox(
  ctx: CanvasRenderingContext2D,
  lo: Vec3,
  hi: Vec3,
  view: View,
  fill: string,
  stroke: string,
): void {
  ctx.fillStyle = fill;
  ctx.strokeStyle = stroke;
  // top face, then front face; enough depth cueing for desk furniture
  poly(ctx, [
    project([lo[0], hi[1], lo[2]], view),
    project([hi[0], hi[1], lo[2]], view),
    project([hi[0], hi[1], hi[2]], view),
    project([lo[0], hi[1], hi[2]], view),
  ]);
  ctx.fill();
  ctx.stroke();
  poly(ctx, [
    project([lo[0], lo[1], lo[2]], view),
    project([hi[0], lo[1], lo[2]], view),
    project([hi[0], hi[1], lo[2]], view),
    project([lo[0], hi[1], lo[2]], view),
  ]);
  ctx.fill();
  ctx.stroke();
}

function drawObject(
  ctx: CanvasRenderingContext2D,
  obj: TrackedObject,
  store: UiStore,
  view: View,
  now: number,
): void {
  const pos = store.renderPosition(obj, now);
  const [sx, sy] = project(pos, view);
  const radius = Math.max(4, obj.radius * view.scale);

  const [gx, gy] = project([pos[0], 0, pos[2]], view);
  ctx.beginPath();
  ctx.ellipse(gx, gy, radius * 0.9, radius * 0.35, 0, 0, Math.PI * 2);
  ctx.fillStyle = "rgba(0,0,0,0.15)";
  ctx.fill();

  ctx.beginPath();
  ctx.arc(sx, sy, radius, 0, Math.PI * 2);
  ctx.fillStyle = KIND_COLORS[obj.kind % KIND_COLORS.length];
  ctx.fill();
  ctx.strokeStyle = obj.held ? "#222" : "rgba(0,0,0,0.3)";
  ctx.lineWidth = obj.held ? 2.5 : 1;
  ctx.stroke();
}

function drawWave(
  ctx: CanvasRenderingContext2D,
  wave: Wave,
  room: RoomInfo,
  view: View,
  now: number,
): void {
  const age = (now - wave.startedAt) / WAVE_LIFETIME_MS;
  if (age >= 1) return;
  const [w, , d] = room.size;
  const [sx, sy] = project([w / 2, wave.height, d], view);
  const spread = (0.2 + age * 1.4) * view.scale;
  ctx.beginPath();
  ctx.arc(sx, sy, spread, Math.PI, Math.PI * 2);
  ctx.strokeStyle = `rgba(70, 130, 220, ${(1 - age) * 0.8})`;
  ctx.lineWidth = 2;
  ctx.stroke();
}

function poly(ctx: CanvasRenderingContext2D, points: [number, number][]): void {
  ctx.beginPath();
  ctx.moveTo(points[0][0], points[0][1]);
  for (const [x, y] of points.slice(1)) ctx.lineTo(x, y);
  ctx.closePath();
}
