"""Kinematic climbing-robot simulator: adhesion feasibility, corner IR
sensing, the edge-avoidance maneuver state machine, and capture scheduling.

Units: meters, radians, kgf.  The wheel footprint is the safety-checked
rectangle; the IR sensors sit at the corners of a slightly larger sensing
rectangle so an out-of-band reading fires before any wheel reaches the
plate edge.  Odometers count ticks of 1.667 cm (so 5 cm ~ 3 ticks and
3 cm ~ 2 ticks).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

__all__ = [
    "RobotSpec",
    "Plate",
    "SimWorld",
    "RobotState",
    "SimError",
    "TICK_LENGTH_M",
    "CAPTURE_INTERVAL_M",
    "required_force",
    "check_stability",
    "min_contact_check",
    "sensor_positions",
    "footprint_corners",
    "read_ir",
    "edge_avoidance_step",
    "capture_count",
    "run_sim",
]

TICK_LENGTH_M = 0.05 / 3.0          # one odometer tick, 1.667 cm
CAPTURE_INTERVAL_M = 0.12           # stop-and-capture spacing
CAPTURE_FOOTPRINT_M = (0.18, 0.14)  # camera coverage per capture
MIN_CONTACT_MM = (20.3, 28.0)       # per-wheel steel contact floor
REVERSE_DISTANCE_M = 0.05
ROTATE_ARC_M = 0.03

# IR sensor order is fixed: front-right, front-left, rear-right, rear-left.
SENSOR_NAMES = ("front_right", "front_left", "rear_right", "rear_left")


class SimError(Exception):
    """Refused start or invalid simulation input."""


@dataclass(frozen=True)
class RobotSpec:
    weight: float = 6.0           # P, kgf
    magnetic_force: float = 16.0  # F_mag, kgf
    friction: float = 0.5         # mu, in (0, 2]
    com_height: float = 0.05      # d, m
    wheelbase: float = 0.20       # L, m
    footprint: tuple = (0.30, 0.25)   # wheel rectangle (length, width), m
    sensor_margin: float = 0.05       # IR corners beyond the wheel rectangle, m

    def __post_init__(self):
        if min(self.weight, self.magnetic_force, self.com_height,
               self.wheelbase, self.sensor_margin) <= 0:
            raise ValueError("all robot dimensions and forces must be positive")
        if not 0 < self.friction <= 2:
            raise ValueError("friction must be in (0, 2]")


@dataclass(frozen=True)
class Plate:
    """Axis-aligned steel rectangle with its inclination."""

    x0: float
    y0: float
    x1: float
    y1: float
    incline: float = 0.0

    def __post_init__(self):
        if self.x1 <= self.x0 or self.y1 <= self.y0:
            raise ValueError("plate must be non-degenerate")
        if not 0 <= self.incline <= math.pi / 2:
            raise ValueError("incline must be in [0, pi/2]")

    def contains(self, p):
        return self.x0 <= p[0] <= self.x1 and self.y0 <= p[1] <= self.y1


@dataclass(frozen=True)
class SimWorld:
    plates: tuple

    def on_surface(self, p):
        return any(plate.contains(p) for plate in self.plates)


@dataclass
class RobotState:
    x: float = 0.0
    y: float = 0.0
    heading: float = 0.0
    odometers: list = field(default_factory=lambda: [0.0, 0.0, 0.0, 0.0])
    ir_cal: list = field(default_factory=lambda: [0.10, 0.10, 0.10, 0.10])
    ir: list = field(default_factory=lambda: [0.10, 0.10, 0.10, 0.10])
    mode: str = "moving"  # moving | avoiding | stopped


def required_force(spec: RobotSpec, alpha) -> float:
    """Adhesion demand at inclination alpha: the larger of the sliding and
    turn-over requirements."""
    if not 0 <= alpha <= math.pi / 2:
        raise ValueError("alpha must be in [0, pi/2]")
    if spec.friction == 0:
        raise ValueError("friction must be nonzero")
    sliding = spec.weight * math.sin(alpha) / spec.friction + spec.weight * math.cos(alpha)
    turnover = 2.0 * spec.weight * spec.com_height / spec.wheelbase
    return max(sliding, turnover)


def check_stability(spec: RobotSpec, alpha):
    """(stable, margin): magnetic force must strictly exceed the requirement."""
    req = required_force(spec, alpha)
    margin = spec.magnetic_force - req
    return spec.magnetic_force > req, margin


def min_contact_check(contact_mm) -> bool:
    """True iff the steel contact patch meets the per-wheel floor in either
    orientation pairing."""
    a, b = contact_mm
    fa, fb = MIN_CONTACT_MM
    return (a >= fa and b >= fb) or (a >= fb and b >= fa)


def _corners(state, half_len, half_wid):
    c, s = math.cos(state.heading), math.sin(state.heading)
    out = []
    for fx, fy in ((half_len, -half_wid), (half_len, half_wid),
                   (-half_len, -half_wid), (-half_len, half_wid)):
        out.append((state.x + c * fx - s * fy, state.y + s * fx + c * fy))
    return out


def footprint_corners(state: RobotState, spec: RobotSpec):
    """Wheel-rectangle corners in world coordinates (FR, FL, RR, RL)."""
    return _corners(state, spec.footprint[0] / 2, spec.footprint[1] / 2)


def sensor_positions(state: RobotState, spec: RobotSpec):
    """IR sensor positions: wheel rectangle inflated by the sensor margin."""
    return _corners(state,
                    spec.footprint[0] / 2 + spec.sensor_margin,
                    spec.footprint[1] / 2 + spec.sensor_margin)


def read_ir(world: SimWorld, state: RobotState, spec: RobotSpec, epsilon):
    """Four range readings: calibration value over steel, +10*epsilon over void."""
    readings = []
    for i, p in enumerate(sensor_positions(state, spec)):
        cal = state.ir_cal[i]
        readings.append(cal if world.on_surface(p) else cal + 10.0 * epsilon)
    return readings


def edge_avoidance_step(state: RobotState, readings, epsilon):
    """One decision of the edge-avoidance policy.

    Returns ('continue',), ('avoid', corner_index) for exactly one
    out-of-band corner, or ('stop_wait',) for two or more.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    out = [i for i in range(4)
           if not (state.ir_cal[i] - epsilon <= readings[i] <= state.ir_cal[i] + epsilon)]
    if not out:
        return ("continue",)
    if len(out) == 1:
        return ("avoid", out[0])
    return ("stop_wait",)


def capture_count(prev_travel, new_travel, interval=CAPTURE_INTERVAL_M) -> int:
    """How many capture triggers fire as forward travel crosses 12 cm multiples."""
    if new_travel < prev_travel:
        raise ValueError("travel must be monotone")
    return int(new_travel / interval) - int(prev_travel / interval)


@dataclass
class _Maneuver:
    # Scripted response to one out-of-band corner: reverse (front corners) or
    # advance (rear corners) 5 cm, then pivot away until the inner wheel arc
    # reaches 3 cm, then resume.
    corner: int
    phase: str = "translate"
    remaining: float = REVERSE_DISTANCE_M
    direction: float = -1.0  # translation sign along heading
    turn_sign: float = 1.0   # +1 = rotate left


def _start_maneuver(corner):
    direction = -1.0 if corner in (0, 1) else 1.0
    # Right-side corners (FR, RR) rotate left, left-side rotate right.
    turn_sign = 1.0 if corner in (0, 2) else -1.0
    return _Maneuver(corner=corner, direction=direction, turn_sign=turn_sign)


@dataclass
class SimResult:
    trajectory: list   # (t, x, y, heading, mode) per step
    captures: list     # (t, x, y, heading) per trigger
    mode_changes: list # (t, mode)


def run_sim(world: SimWorld, spec: RobotSpec, policy="forward", steps=1000,
            dt=0.01, speed=0.2, ir_epsilon=0.01):
    """Fixed-timestep loop: read IR, run edge avoidance, integrate kinematics.

    Refuses to start if the plate inclination violates the adhesion
    condition or the sensing rectangle is not fully on steel.
    """
    if policy != "forward":
        raise SimError(f"unknown policy {policy!r}")
    state = RobotState()
    # Caller positions the robot via world coordinates of plate 0's center
    # unless a custom state is threaded through run_sim_from.
    plate = world.plates[0]
    state.x = (plate.x0 + plate.x1) / 2
    state.y = (plate.y0 + plate.y1) / 2
    return run_sim_from(world, spec, state, steps=steps, dt=dt, speed=speed,
                        ir_epsilon=ir_epsilon)


def run_sim_from(world: SimWorld, spec: RobotSpec, state: RobotState,
                 steps=1000, dt=0.01, speed=0.2, ir_epsilon=0.01) -> SimResult:
    """run_sim with an explicit start state."""
    for plate in world.plates:
        stable, _ = check_stability(spec, plate.incline)
        if not stable:
            raise SimError(
                f"adhesion condition violated at inclination {plate.incline:.3f} rad")
    if not all(world.on_surface(p) for p in sensor_positions(state, spec)):
        raise SimError("robot must start fully on a plate")

    track = spec.footprint[1]
    maneuver = None
    travel = 0.0
    trajectory, captures, mode_changes = [], [], []
    last_mode = None

    for step in range(steps):
        t = step * dt
        state.ir = read_ir(world, state, spec, ir_epsilon)

        if state.mode == "stopped":
            pass
        elif maneuver is None:
            action = edge_avoidance_step(state, state.ir, ir_epsilon)
            if action[0] == "continue":
                state.mode = "moving"
                d = speed * dt
                state.x += math.cos(state.heading) * d
                state.y += math.sin(state.heading) * d
                for i in range(4):
                    state.odometers[i] += d / TICK_LENGTH_M
                new_travel = travel + d
                for _ in range(capture_count(travel, new_travel)):
                    captures.append((t, state.x, state.y, state.heading))
                travel = new_travel
            elif action[0] == "avoid":
                state.mode = "avoiding"
                maneuver = _start_maneuver(action[1])
            else:
                state.mode = "stopped"
        else:
            state.mode = "avoiding"
            d = speed * dt
            if maneuver.phase == "translate":
                move = maneuver.direction * min(d, maneuver.remaining)
                state.x += math.cos(state.heading) * move
                state.y += math.sin(state.heading) * move
                for i in range(4):
                    state.odometers[i] += abs(move) / TICK_LENGTH_M
                maneuver.remaining -= abs(move)
                # Abort the translation early if the trailing sensors leave
                # the surface; rotating away is still safe.
                trailing = (2, 3) if maneuver.direction < 0 else (0, 1)
                ir_now = read_ir(world, state, spec, ir_epsilon)
                trailing_out = any(
                    abs(ir_now[i] - state.ir_cal[i]) > ir_epsilon for i in trailing)
                if maneuver.remaining <= 1e-12 or trailing_out:
                    maneuver.phase = "rotate"
                    maneuver.remaining = ROTATE_ARC_M
            elif maneuver.phase == "rotate":
                # In-place rotation: wheels counter-rotate, each logging the
                # same arc; stop once the inner-side wheels have arced 3 cm.
                arc = min(d, maneuver.remaining)
                state.heading += maneuver.turn_sign * arc / (track / 2.0)
                for i in range(4):
                    state.odometers[i] += arc / TICK_LENGTH_M
                maneuver.remaining -= arc
                if maneuver.remaining <= 1e-12:
                    maneuver = None
                    state.mode = "moving"

        if state.mode != last_mode:
            mode_changes.append((t, state.mode))
            last_mode = state.mode
        trajectory.append((t, state.x, state.y, state.heading, state.mode))
    return SimResult(trajectory, captures, mode_changes)
