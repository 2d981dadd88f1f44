// Entry point: wires the bridge, store, audio, canvas, and controls.

import { NotePlayer } from "./audio";
import { Bridge } from "./bridge";
import { drawScene, fitView, project, unproject } from "./render";
import { UiStore } from "./store";
import { Vec3 } from "./protocol";
import { uploadSceneImage } from "./upload";

const canvas = document.getElementById("room") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const keyLabel = document.getElementById("key")!;
const statusDot = document.getElementById("status")!;
const bannerBox = document.getElementById("banner")!;
const fileInput = document.getElementById("scene-file") as HTMLInputElement;

const sameOrigin = location.protocol.startsWith("http");
const apiBase = sameOrigin ? "" : "http://127.0.0.1:8000";
const wsUrl = sameOrigin
  ? `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`
  : "ws://127.0.0.1:8000/ws";

const store = new UiStore();
const player = new NotePlayer();
let bannerTimer: number | undefined;

function showBanner(text: string): void {
  store.banner = text;
  window.clearTimeout(bannerTimer);
  bannerTimer = window.setTimeout(() => {
    store.banner = null;
  }, 4000);
}

const bridge = new Bridge(wsUrl, {
  onFrame: (frame) => {
    for (const effect of store.applyFrame(frame, performance.now())) {
      if (effect.kind === "note") player.play(effect.note);
    }
  },
  onStatus: (status) => {
    statusDot.dataset.state = status;
    statusDot.title = status;
  },
  onBanner: showBanner,
});
bridge.connect();
window.setInterval(() => {
  if (bridge.status === "closed") bridge.connect();
}, 2000);

// -- spawning --------------------------------------------------------

let spawnCounter = 0;
for (const kind of ["A", "B", "C"] as const) {
  document.getElementById(`spawn-${kind}`)!.addEventListener("click", () => {
    player.unlock();
    if (!store.room) return;
    const [w, , d] = store.room.size;
    const jitter = () => (Math.random() - 0.5) * 0.6;
    bridge.sendInteraction({
      kind: "spawn",
      id: `ui-${Date.now()}-${spawnCounter++}`,
      object_kind: kind,
      position: [w / 2 + jitter(), store.room.size[1] * 0.7, d / 2 + jitter()],
    });
  });
}

// -- grab / move / release / throw ----------------------------------

interface DragSession {
  id: string;
  zPlane: number;
  samples: { t: number; world: Vec3 }[];
  lastSent: number;
}

let drag: DragSession | null = null;

function viewNow() {
  return store.room ? fitView(store.room, canvas.width, canvas.height) : null;
}

function pickObject(sx: number, sy: number): string | null {
  const view = viewNow();
  if (!view) return null;
  let bestId: string | null = null;
  let bestDist = Infinity;
  const now = performance.now();
  for (const obj of store.objects.values()) {
    const pos = store.renderPosition(obj, now);
    const [ox, oy] = project(pos, view);
    const reach = Math.max(12, obj.radius * view.scale * 1.6);
    const dist = Math.hypot(sx - ox, sy - oy);
    if (dist < reach && dist < bestDist) {
      bestDist = dist;
      bestId = obj.id;
    }
  }
  return bestId;
}

function canvasPoint(ev: PointerEvent): [number, number] {
  const rect = canvas.getBoundingClientRect();
  return [
    ((ev.clientX - rect.left) / rect.width) * canvas.width,
    ((ev.clientY - rect.top) / rect.height) * canvas.height,
  ];
}

canvas.addEventListener("pointerdown", (ev) => {
  player.unlock();
  const [sx, sy] = canvasPoint(ev);
  const id = pickObject(sx, sy);
  if (!id) return;
  const obj = store.objects.get(id)!;
  drag = { id, zPlane: obj.current[2], samples: [], lastSent: 0 };
  canvas.setPointerCapture(ev.pointerId);
  bridge.sendInteraction({ kind: "grab", id, position: obj.current });
});

canvas.addEventListener("pointermove", (ev) => {
  if (!drag) return;
  const view = viewNow();
  if (!view) return;
  const [sx, sy] = canvasPoint(ev);
  const [x, y] = unproject(sx, sy, drag.zPlane, view);
  const world: Vec3 = [x, Math.max(0.05, y), drag.zPlane];
  const t = performance.now();
  drag.samples.push({ t, world });
  while (drag.samples.length > 8) drag.samples.shift();
  if (t - drag.lastSent > 33) {
    drag.lastSent = t;
    bridge.sendInteraction({ kind: "move", id: drag.id, position: world });
  }
});

canvas.addEventListener("pointerup", () => {
  if (!drag) return;
  const vector = flickVector(drag.samples);
  const speed = Math.hypot(...vector);
  if (speed > 0.4) {
    bridge.sendInteraction({ kind: "release", id: drag.id, vector });
  } else {
    bridge.sendInteraction({ kind: "release", id: drag.id });
  }
  drag = null;
});

function flickVector(samples: { t: number; world: Vec3 }[]): Vec3 {
  if (samples.length < 2) return [0, 0, 0];
  const last = samples[samples.length - 1];
  let first = samples[0];
  for (const s of samples) {
    if (last.t - s.t <= 120) {
      first = s;
      break;
    }
  }
  const dt = (last.t - first.t) / 1000;
  if (dt <= 0) return [0, 0, 0];
  const k = 0.35; // drag speed to impulse
  return [
    ((last.world[0] - first.world[0]) / dt) * k,
    ((last.world[1] - first.world[1]) / dt) * k,
    ((last.world[2] - first.world[2]) / dt) * k,
  ];
}

// -- scene upload ----------------------------------------------------

fileInput.addEventListener("change", async () => {
  const file = fileInput.files?.[0];
  fileInput.value = "";
  if (!file) return;
  const result = await uploadSceneImage(file, apiBase);
  if (!result.ok) {
    showBanner(result.error);
  } else if (!result.changed) {
    showBanner(`Scene still reads as ${result.keyName}`);
  }
  // on success the key display updates from the /mr4mr/key frame
});

// -- render loop -----------------------------------------------------

let lastKeyFlashes = 0;

function frame(): void {
  const now = performance.now();
  store.pruneWaves(now);
  drawScene(ctx, store, now, canvas.width, canvas.height);

  keyLabel.textContent = store.keyName;
  if (store.keyFlashes !== lastKeyFlashes) {
    lastKeyFlashes = store.keyFlashes;
    keyLabel.classList.remove("flash");
    void (keyLabel as HTMLElement).offsetWidth; // restart the animation
    keyLabel.classList.add("flash");
  }

  if (store.banner) {
    bannerBox.textContent = store.banner;
    bannerBox.hidden = false;
  } else {
    bannerBox.hidden = true;
  }
  requestAnimationFrame(frame);
}

requestAnimationFrame(frame);
