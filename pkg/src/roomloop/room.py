"""Simulated room physics: spheres bouncing inside a box under gravity.

Stand-in for a head-mounted scene scanner: the room is an axis-aligned
box, furniture is a set of static labeled boxes, and virtual objects
are spheres integrated with semi-implicit Euler. Contacts are resolved
sub-tick (advance to the contact time, reflect with restitution,
continue with the remaining time), which keeps kinetic + potential
energy non-increasing instead of injecting potential energy through
positional clamping. Every resolved impact emits a CollisionEvent.

Furniture collision uses the sphere-center vs radius-inflated-box
approximation (Minkowski sum with square corners), so corner hits are
slightly generous; faces are exact.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import IntEnum

Vec3 = tuple[float, float, float]

#: Default downward gravity, m/s^2.
DEFAULT_GRAVITY: Vec3 = (0.0, -9.8, 0.0)

#: Gravity magnitude range for collision-triggered mutation, m/s^2.
GRAVITY_MUTATION_RANGE = (1.0, 12.0)

_FACE_NAMES = {
    (0, 0): "wall_xmin",
    (0, 1): "wall_xmax",
    (1, 0): "floor",
    (1, 1): "ceiling",
    (2, 0): "wall_zmin",
    (2, 1): "wall_zmax",
}

_EPS = 1e-9


class ObjectKind(IntEnum):
    """The three spawnable object kinds. TYPE_C mutates gravity on impact."""

    TYPE_A = 0
    TYPE_B = 1
    TYPE_C = 2


@dataclass(frozen=True)
class Box:
    lo: Vec3
    hi: Vec3

    def __post_init__(self):
        for a in range(3):
            if not self.lo[a] < self.hi[a]:
                raise ValueError(f"degenerate box: {self.lo} .. {self.hi}")

    def contains_box(self, other: "Box") -> bool:
        return all(
            self.lo[a] <= other.lo[a] and other.hi[a] <= self.hi[a] for a in range(3)
        )


@dataclass(frozen=True)
class Furniture:
    label: str
    box: Box


@dataclass(frozen=True)
class RoomGeometry:
    """The room box (origin corner at (0,0,0), +y up) plus static furniture."""

    size: Vec3
    furniture: tuple[Furniture, ...] = ()

    def __post_init__(self):
        w, h, d = self.size
        if min(w, h, d) <= 0:
            raise ValueError(f"room dimensions must be positive: {self.size}")
        for item in self.furniture:
            if not self.box.contains_box(item.box):
                raise ValueError(f"furniture {item.label!r} sticks out of the room")

    @property
    def box(self) -> Box:
        return Box((0.0, 0.0, 0.0), self.size)

    @property
    def height(self) -> float:
        return self.size[1]


@dataclass(frozen=True)
class GravityState:
    g: Vec3 = DEFAULT_GRAVITY

    def __post_init__(self):
        if not all(abs(c) < 1e6 and c == c for c in self.g):
            raise ValueError(f"gravity components must be finite: {self.g}")


@dataclass(frozen=True)
class CollisionEvent:
    """One impact: object kind, approach speed |v.n|, contact point, surface."""

    kind: ObjectKind
    speed: float
    position: Vec3
    surface: str
    timestamp: float


@dataclass
class VirtualObject:
    id: str
    kind: ObjectKind
    position: list[float]
    velocity: list[float]
    radius: float = 0.15
    held: bool = False

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"radius must be positive: {self.radius}")


class UnknownObjectError(KeyError):
    pass


def maybe_mutate_gravity(event: CollisionEvent, rng: random.Random) -> GravityState | None:
    """New gravity when a TYPE_C object collides, else None.

    Magnitude is uniform over GRAVITY_MUTATION_RANGE, direction stays
    straight down; deterministic for a given RNG state.
    """
    if event.kind is not ObjectKind.TYPE_C:
        return None
    magnitude = rng.uniform(*GRAVITY_MUTATION_RANGE)
    return GravityState((0.0, -magnitude, 0.0))


class RoomWorld:
    """All mutable simulation state: objects, gravity, and the clock.

    Stepping is single-threaded; interaction commands are expected to
    be applied between ticks by the owner.
    """

    def __init__(
        self,
        geometry: RoomGeometry,
        restitution: float = 0.8,
        rest_threshold: float = 0.05,
        gravity: GravityState = GravityState(),
    ):
        if not 0.0 <= restitution <= 1.0:
            raise ValueError(f"restitution must be in [0, 1]: {restitution}")
        self.geometry = geometry
        self.restitution = restitution
        self.rest_threshold = rest_threshold
        self.gravity = gravity
        self.time = 0.0
        self.objects: dict[str, VirtualObject] = {}

    # -- interaction -------------------------------------------------

    def spawn(
        self,
        object_id: str,
        kind: ObjectKind,
        position: Vec3,
        radius: float = 0.15,
        velocity: Vec3 = (0.0, 0.0, 0.0),
    ) -> VirtualObject:
        if object_id in self.objects:
            raise ValueError(f"object id already exists: {object_id!r}")
        obj = VirtualObject(object_id, ObjectKind(kind), list(position), list(velocity), radius)
        self._settle_inside(obj)
        self.objects[object_id] = obj
        return obj

    def _get(self, object_id: str) -> VirtualObject:
        try:
            return self.objects[object_id]
        except KeyError:
            raise UnknownObjectError(object_id) from None

    def apply_impulse(self, object_id: str, impulse: Vec3) -> VirtualObject:
        """Add impulse to the object's velocity; position unchanged."""
        obj = self._get(object_id)
        for a in range(3):
            obj.velocity[a] += impulse[a]
        return obj

    def grab_move(self, object_id: str, position: Vec3) -> bool:
        """Hold the object at a position with zero velocity.

        Returns True when the requested position had to be clamped back
        inside the room (inset by radius).
        """
        obj = self._get(object_id)
        obj.position = list(position)
        obj.velocity = [0.0, 0.0, 0.0]
        obj.held = True
        return self._settle_inside(obj)

    def release(self, object_id: str, impulse: Vec3 = (0.0, 0.0, 0.0)) -> VirtualObject:
        """Let go of a held object, optionally throwing it."""
        obj = self._get(object_id)
        obj.held = False
        return self.apply_impulse(object_id, impulse)

    def _settle_inside(self, obj: VirtualObject) -> bool:
        """Clamp into the room inset by radius and out of furniture."""
        clamped = False
        lo, hi = self.geometry.box.lo, self.geometry.box.hi
        for a in range(3):
            bound_lo, bound_hi = lo[a] + obj.radius, hi[a] - obj.radius
            if obj.position[a] < bound_lo:
                obj.position[a] = bound_lo
                clamped = True
            elif obj.position[a] > bound_hi:
                obj.position[a] = bound_hi
                clamped = True
        for item in self.geometry.furniture:
            clamped = self._push_out(obj, item) or clamped
        return clamped

    def _push_out(self, obj: VirtualObject, item: Furniture) -> bool:
        """Move a center out of an inflated furniture box along the cheapest axis."""
        blo = [item.box.lo[a] - obj.radius for a in range(3)]
        bhi = [item.box.hi[a] + obj.radius for a in range(3)]
        if not all(blo[a] < obj.position[a] < bhi[a] for a in range(3)):
            return False
        best_axis, best_target, best_cost = 0, blo[0], float("inf")
        for a in range(3):
            for target in (blo[a], bhi[a]):
                cost = abs(obj.position[a] - target)
                if cost < best_cost:
                    best_axis, best_target, best_cost = a, target, cost
        obj.position[best_axis] = best_target
        return True

    # -- stepping ----------------------------------------------------

    def step(self, dt: float) -> list[CollisionEvent]:
        """Advance the world by dt seconds, returning impacts in order.

        Velocity gains g dt per tick; positions drift at the half-kicked
        (midpoint) velocity, so free flight conserves energy exactly at
        tick boundaries. Contacts are resolved at their sub-tick time
        with the instantaneous velocity u = v0 + g t: v' = u - (1+e)(u.n)n,
        which keeps impact-speed sequences on the ideal geometric decay
        and makes a collision tick strictly dissipative. Approach below
        the rest threshold is support, not impact: the normal velocity
        dies, the face's normal force cancels gravity, and no event is
        emitted, so settled objects stay put silently.
        """
        if dt <= 0:
            raise ValueError(f"dt must be positive: {dt}")
        events: list[CollisionEvent] = []
        for obj in self.objects.values():
            if not obj.held:
                self._march(obj, dt, events)
        self.time += dt
        return events

    def _march(self, obj: VirtualObject, dt: float, events: list[CollisionEvent]) -> None:
        lo, hi = self.geometry.box.lo, self.geometry.box.hi
        g = self.gravity.g
        pos, vel, r = obj.position, obj.velocity, obj.radius
        remaining = dt
        supported: set[tuple[int, float]] = set()  # faces carrying the object
        for _ in range(16):
            geff = [0.0, 0.0, 0.0]  # gravity minus resting-face normal forces
            for a in range(3):
                into_support = ((a, 1.0) in supported and g[a] < 0.0) or (
                    (a, -1.0) in supported and g[a] > 0.0
                )
                if not into_support:
                    geff[a] = g[a]
            entry = list(vel)
            for a in range(3):
                vel[a] = entry[a] + 0.5 * geff[a] * remaining  # drift velocity
            hit = self._earliest_contact(pos, vel, r, remaining)
            if hit is None:
                for a in range(3):
                    pos[a] += vel[a] * remaining
                    vel[a] += 0.5 * geff[a] * remaining  # trailing half kick
                break
            t_hit, axis, normal_sign, boundary, surface = hit
            for a in range(3):
                pos[a] += vel[a] * t_hit
                vel[a] = entry[a] + geff[a] * t_hit  # instantaneous at contact
            remaining -= t_hit
            approach = -vel[axis] * normal_sign
            if approach < self.rest_threshold:
                vel[axis] = 0.0
                supported.add((axis, normal_sign))
            else:
                vel[axis] = self.restitution * approach * normal_sign
                contact = list(pos)
                contact[axis] = boundary - normal_sign * r
                events.append(
                    CollisionEvent(
                        kind=obj.kind,
                        speed=approach,
                        position=tuple(contact),
                        surface=surface,
                        timestamp=self.time + (dt - remaining),
                    )
                )
            pos[axis] = boundary + normal_sign * _EPS
            if remaining <= 0.0:
                break
        else:
            obj.velocity = [0.0, 0.0, 0.0]
        # Guard against fp dust; moves are at most ~1e-9 so no energy impact.
        for a in range(3):
            if pos[a] < lo[a] + r:
                pos[a] = lo[a] + r
            elif pos[a] > hi[a] - r:
                pos[a] = hi[a] - r

    def _earliest_contact(self, pos, vel, r, remaining):
        """(t, axis, normal_sign, center_boundary, surface) of the next contact.

        normal_sign is the contact normal's sign on the axis, pointing
        back into the allowed region; center_boundary is the center
        coordinate at contact.
        """
        lo, hi = self.geometry.box.lo, self.geometry.box.hi
        best = None
        for a in range(3):
            v = vel[a]
            if v < 0.0:
                t = (pos[a] - (lo[a] + r)) / -v
                cand = (max(0.0, t), a, 1.0, lo[a] + r, _FACE_NAMES[(a, 0)])
            elif v > 0.0:
                t = ((hi[a] - r) - pos[a]) / v
                cand = (max(0.0, t), a, -1.0, hi[a] - r, _FACE_NAMES[(a, 1)])
            else:
                continue
            if cand[0] <= remaining and (best is None or cand[0] < best[0]):
                best = cand
        for item in self.geometry.furniture:
            cand = self._box_entry(pos, vel, r, item, remaining)
            if cand is not None and (best is None or cand[0] < best[0]):
                best = cand
        return best

    @staticmethod
    def _box_entry(pos, vel, r, item: Furniture, remaining):
        blo = [item.box.lo[a] - r for a in range(3)]
        bhi = [item.box.hi[a] + r for a in range(3)]
        t_enter, t_exit = 0.0, remaining
        axis = -1
        for a in range(3):
            v = vel[a]
            if v == 0.0:
                if not blo[a] < pos[a] < bhi[a]:
                    return None
                continue
            t1 = (blo[a] - pos[a]) / v
            t2 = (bhi[a] - pos[a]) / v
            if t1 > t2:
                t1, t2 = t2, t1
            if t1 > t_enter or (t1 == t_enter and axis < 0):
                t_enter, axis = t1, a
            t_exit = min(t_exit, t2)
            if t_enter > t_exit:
                return None
        if axis < 0:
            return None  # started inside; _settle_inside handles that case
        sign = -1.0 if vel[axis] > 0 else 1.0
        boundary = blo[axis] if sign < 0 else bhi[axis]
        return (t_enter, axis, sign, boundary, item.label)

    # -- diagnostics -------------------------------------------------

    def energy(self) -> float:
        """Kinetic + potential energy per unit mass (vertical gravity)."""
        g_mag = abs(self.gravity.g[1])
        total = 0.0
        for obj in self.objects.values():
            v2 = sum(c * c for c in obj.velocity)
            total += 0.5 * v2 + g_mag * obj.position[1]
        return total


def load_room_file(path) -> RoomGeometry:
    """Parse a room description file.

    Line format (``#`` comments allowed)::

        room <width> <height> <depth>
        furniture <label> <x0> <y0> <z0> <x1> <y1> <z1>
    """
    size = None
    furniture = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                if parts[0] == "room" and len(parts) == 4:
                    size = tuple(float(p) for p in parts[1:4])
                elif parts[0] == "furniture" and len(parts) == 8:
                    nums = [float(p) for p in parts[2:8]]
                    furniture.append(Furniture(parts[1], Box(tuple(nums[:3]), tuple(nums[3:]))))
                else:
                    raise ValueError(f"unrecognized directive {parts[0]!r}")
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if size is None:
        raise ValueError(f"{path}: missing 'room' line")
    return RoomGeometry(size, tuple(furniture))
