"""Ground-truth continuous dynamics and their geometric realizations.

Each system bundles a vector field z' = f(z), default parameters, an initial
condition sampler, and a mapping from state to a renderable scene.  All
systems are integrated with classical RK4 at a fixed step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Pose, Shape
from .scene import SceneState


class UnknownSystemError(KeyError):
    pass


class IntegrationError(RuntimeError):
    """Non-finite state during integration; carries the failing step index."""

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


@dataclass
class StateTrajectory:
    system: str
    dt: float
    states: np.ndarray  # (n_steps + 1, dim)
    initial_condition: np.ndarray

    def __len__(self):
        return self.states.shape[0]


def _merge(defaults: dict, params: dict | None) -> dict:
    if not params:
        return dict(defaults)
    unknown = set(params) - set(defaults)
    if unknown:
        raise KeyError(f"unknown parameters {sorted(unknown)}")
    out = dict(defaults)
    out.update(params)
    return out


def _thin_rod(p0: np.ndarray, p1: np.ndarray, width: float, color=None) -> Shape:
    """Rectangle of the given width joining two points."""
    d = p1 - p0
    length = np.linalg.norm(d)
    if length <= 0:
        raise ValueError("rod endpoints coincide")
    u = d / length
    n = np.array([-u[1], u[0]]) * (width / 2.0)
    verts = [p0 - n, p1 - n, p1 + n, p0 + n]
    return Shape.polygon([tuple(v) for v in verts], color=color)


class System:
    name: str = ""
    dim: int = 0
    default_params: dict = {}
    default_dt: float = 0.05

    def f(self, z: np.ndarray, p: dict) -> np.ndarray:
        raise NotImplementedError

    def scene(self, z: np.ndarray, p: dict) -> SceneState:
        raise NotImplementedError

    def sample_ic(self, rng: np.random.Generator, p: dict) -> np.ndarray:
        raise NotImplementedError


class CircularMotion(System):
    """A disc moving at constant angular speed on a circle; state is the phase."""

    name = "circular_motion"
    dim = 1
    default_params = {
        "omega": 1.0, "center_x": 0.5, "center_y": 0.5,
        "orbit_radius": 0.3, "disc_radius": 0.06,
    }
    default_dt = 0.1

    def f(self, z, p):
        return np.array([p["omega"]])

    def scene(self, z, p):
        phi = float(z[0])
        cx = p["center_x"] + p["orbit_radius"] * math.cos(phi)
        cy = p["center_y"] + p["orbit_radius"] * math.sin(phi)
        return SceneState(shapes=[Shape.disc((cx, cy), p["disc_radius"])],
                          poses=[Pose()])

    def sample_ic(self, rng, p):
        return np.array([rng.uniform(0.0, 2.0 * math.pi)])


class DampedPendulum(System):
    """Rigid-rod pendulum with viscous damping: th'' = -(3g/2L) sin th - k th'."""

    name = "damped_pendulum"
    dim = 2
    default_params = {
        "m": 1.0, "L": 0.125, "k": 0.8, "g": 9.8,
        "pivot_x": 0.5, "pivot_y": 0.5, "arm_render": 0.3,
        "bob_radius": 0.06, "rod_width": 0.024,
    }
    default_dt = 1.0 / 60.0

    def f(self, z, p):
        theta, omega = z
        acc = -1.5 * p["g"] / p["L"] * math.sin(theta) - p["k"] * omega
        return np.array([omega, acc])

    def energy(self, z, p):
        theta, omega = z
        kinetic = p["m"] * p["L"] ** 2 * omega ** 2 / 6.0
        potential = -0.5 * p["m"] * p["g"] * p["L"] * math.cos(theta)
        return kinetic + potential

    def scene(self, z, p):
        theta = float(z[0])
        pivot = np.array([p["pivot_x"], p["pivot_y"]])
        direction = np.array([math.sin(theta), -math.cos(theta)])
        bob = pivot + p["arm_render"] * direction
        rod_end = pivot + (p["arm_render"] - p["bob_radius"] - 0.01) * direction
        shapes = [_thin_rod(pivot, rod_end, p["rod_width"]),
                  Shape.disc(tuple(bob), p["bob_radius"])]
        return SceneState(shapes=shapes, poses=[Pose(), Pose()])

    def sample_ic(self, rng, p):
        return np.array([rng.uniform(-2.4, 2.4), rng.uniform(-2.0, 2.0)])


class TwoBody(System):
    """Planar gravitational two-body problem in barycentric coordinates."""

    name = "two_body"
    dim = 8
    default_params = {
        "G": 1.0, "m1": 1.0, "m2": 1.0,
        "center_x": 0.5, "center_y": 0.5, "scale": 0.22,
        "r1": 0.05, "r2": 0.05,
    }
    default_dt = 0.05

    def f(self, z, p):
        r1, r2, v1, v2 = z[0:2], z[2:4], z[4:6], z[6:8]
        d = r2 - r1
        dist3 = float(np.linalg.norm(d)) ** 3
        if dist3 == 0.0:
            raise FloatingPointError("two-body collision")
        a1 = p["G"] * p["m2"] * d / dist3
        a2 = -p["G"] * p["m1"] * d / dist3
        return np.concatenate([v1, v2, a1, a2])

    def angular_momentum(self, z, p):
        r1, r2, v1, v2 = z[0:2], z[2:4], z[4:6], z[6:8]
        return p["m1"] * (r1[0] * v1[1] - r1[1] * v1[0]) + \
            p["m2"] * (r2[0] * v2[1] - r2[1] * v2[0])

    def scene(self, z, p):
        c = np.array([p["center_x"], p["center_y"]])
        pos1 = c + p["scale"] * z[0:2]
        pos2 = c + p["scale"] * z[2:4]
        shapes = [Shape.disc(tuple(pos1), p["r1"]), Shape.disc(tuple(pos2), p["r2"])]
        return SceneState(shapes=shapes, poses=[Pose(), Pose()])

    def sample_ic(self, rng, p):
        # near-circular orbit of separation 2a around the barycenter
        a = rng.uniform(0.4, 0.55)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        speed = math.sqrt(p["G"] * p["m2"] / (4.0 * a)) * rng.uniform(0.9, 1.05)
        u = np.array([math.cos(phase), math.sin(phase)])
        t = np.array([-u[1], u[0]])
        return np.concatenate([a * u, -a * u, speed * t, -speed * t])


class DoublePendulum(System):
    """Two rigid point-mass arms; state (th1, th2, w1, w2)."""

    name = "double_pendulum"
    dim = 4
    default_params = {
        "m1": 1.0, "m2": 1.0, "l1": 0.14, "l2": 0.14, "g": 9.8,
        "pivot_x": 0.5, "pivot_y": 0.66, "bob_radius": 0.045, "rod_width": 0.02,
    }
    default_dt = 1.0 / 60.0

    def f(self, z, p):
        t1, t2, w1, w2 = z
        m1, m2, l1, l2, g = p["m1"], p["m2"], p["l1"], p["l2"], p["g"]
        delta = t1 - t2
        den = 2.0 * m1 + m2 - m2 * math.cos(2.0 * delta)
        a1 = (-g * (2.0 * m1 + m2) * math.sin(t1)
              - m2 * g * math.sin(t1 - 2.0 * t2)
              - 2.0 * math.sin(delta) * m2
              * (w2 * w2 * l2 + w1 * w1 * l1 * math.cos(delta))) / (l1 * den)
        a2 = (2.0 * math.sin(delta)
              * (w1 * w1 * l1 * (m1 + m2) + g * (m1 + m2) * math.cos(t1)
                 + w2 * w2 * l2 * m2 * math.cos(delta))) / (l2 * den)
        return np.array([w1, w2, a1, a2])

    def energy(self, z, p):
        t1, t2, w1, w2 = z
        m1, m2, l1, l2, g = p["m1"], p["m2"], p["l1"], p["l2"], p["g"]
        kinetic = 0.5 * m1 * (l1 * w1) ** 2 + 0.5 * m2 * (
            (l1 * w1) ** 2 + (l2 * w2) ** 2
            + 2.0 * l1 * l2 * w1 * w2 * math.cos(t1 - t2))
        potential = -(m1 + m2) * g * l1 * math.cos(t1) - m2 * g * l2 * math.cos(t2)
        return kinetic + potential

    def _positions(self, z, p):
        pivot = np.array([p["pivot_x"], p["pivot_y"]])
        b1 = pivot + p["l1"] * np.array([math.sin(z[0]), -math.cos(z[0])])
        b2 = b1 + p["l2"] * np.array([math.sin(z[1]), -math.cos(z[1])])
        return pivot, b1, b2

    def scene(self, z, p):
        pivot, b1, b2 = self._positions(z, p)
        r, gap = p["bob_radius"], 0.008
        shapes, poses = [], []
        for a, b in ((pivot, b1), (b1, b2)):
            u = (b - a) / np.linalg.norm(b - a)
            shapes.append(_thin_rod(a + (r + gap) * u if (a != pivot).any() else a,
                                    b - (r + gap) * u, p["rod_width"]))
            poses.append(Pose())
        shapes += [Shape.disc(tuple(b1), r), Shape.disc(tuple(b2), r)]
        poses += [Pose(), Pose()]
        return SceneState(shapes=shapes, poses=poses)

    def sample_ic(self, rng, p):
        return np.array([rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2),
                         rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)])


class ElasticDoublePendulum(System):
    """Rigid first arm, spring second arm; state (th1, x2, y2, th1', x2', y2').

    The second bob moves freely under gravity plus the spring joining it to
    the first bob (rest length L2, stiffness k2); positions are relative to
    the pivot.
    """

    name = "elastic_double_pendulum"
    dim = 6
    default_params = {
        "m1": 1.0, "m2": 1.0, "L1": 0.16, "L2": 0.14, "k2": 40.0, "g": 9.8,
        "pivot_x": 0.5, "pivot_y": 0.66, "bob_radius": 0.04, "rod_width": 0.018,
    }
    default_dt = 1.0 / 60.0

    def f(self, z, p):
        t1, x2, y2, w1, vx2, vy2 = z
        m1, m2, L1, L2, k2, g = p["m1"], p["m2"], p["L1"], p["L2"], p["k2"], p["g"]
        p1 = np.array([L1 * math.sin(t1), -L1 * math.cos(t1)])
        p2 = np.array([x2, y2])
        d = p2 - p1
        dist = float(np.linalg.norm(d))
        if dist == 0.0:
            raise FloatingPointError("spring endpoints coincide")
        pull = k2 * (dist - L2) * d / dist  # force on bob 1, toward bob 2
        a2 = (-pull - np.array([0.0, m2 * g])) / m2
        torque = p1[0] * (pull[1] - m1 * g) - p1[1] * pull[0]
        return np.array([w1, vx2, vy2, torque / (m1 * L1 * L1), a2[0], a2[1]])

    def scene(self, z, p):
        pivot = np.array([p["pivot_x"], p["pivot_y"]])
        b1 = pivot + np.array([p["L1"] * math.sin(z[0]), -p["L1"] * math.cos(z[0])])
        b2 = pivot + np.array([z[1], z[2]])
        r, gap = p["bob_radius"], 0.008
        u1 = (b1 - pivot) / np.linalg.norm(b1 - pivot)
        u2 = (b2 - b1) / np.linalg.norm(b2 - b1)
        shapes = [
            _thin_rod(pivot, b1 - (r + gap) * u1, p["rod_width"]),
            _thin_rod(b1 + (r + gap) * u2, b2 - (r + gap) * u2, p["rod_width"]),
            Shape.disc(tuple(b1), r),
            Shape.disc(tuple(b2), r),
        ]
        return SceneState(shapes=shapes, poses=[Pose()] * 4)

    def sample_ic(self, rng, p):
        t1 = rng.uniform(-0.9, 0.9)
        b1 = np.array([p["L1"] * math.sin(t1), -p["L1"] * math.cos(t1)])
        t2 = t1 + rng.uniform(-0.7, 0.7)
        stretch = p["L2"] * rng.uniform(0.95, 1.1)
        b2 = b1 + stretch * np.array([math.sin(t2), -math.cos(t2)])
        return np.array([t1, b2[0], b2[1], 0.0, 0.0, 0.0])


class SlidingBar(System):
    """Vertical bar (x, x+width] x (0, 1] in uniform horizontal motion."""

    name = "bar"
    dim = 1
    default_params = {"speed": 1.0, "width": 0.125}
    default_dt = 0.01

    def f(self, z, p):
        return np.array([p["speed"]])

    def scene(self, z, p):
        x = float(z[0])
        bar = Shape.rectangle(x, 0.0, x + p["width"], 1.0, half_open=True)
        return SceneState(shapes=[bar], poses=[Pose()])

    def sample_ic(self, rng, p):
        return np.array([rng.uniform(0.0, 0.5 - p["width"])])


SYSTEMS: dict[str, System] = {
    s.name: s for s in (CircularMotion(), DampedPendulum(), TwoBody(),
                        DoublePendulum(), ElasticDoublePendulum(), SlidingBar())
}


def get_system(name: str) -> System:
    try:
        return SYSTEMS[name]
    except KeyError:
        raise UnknownSystemError(
            f"unknown system {name!r}; available: {sorted(SYSTEMS)}") from None


def vector_field(system: str, z, params: dict | None = None) -> np.ndarray:
    """Evaluate dz/dt for the named system at state z."""
    sys_ = get_system(system)
    z = np.asarray(z, dtype=float)
    if z.shape != (sys_.dim,):
        raise ValueError(f"{system} expects state of dimension {sys_.dim}, got shape {z.shape}")
    return sys_.f(z, _merge(sys_.default_params, params))


def state_to_scene(system: str, z, params: dict | None = None) -> SceneState:
    """Deterministic geometric realization of a state."""
    sys_ = get_system(system)
    z = np.asarray(z, dtype=float)
    if z.shape != (sys_.dim,):
        raise ValueError(f"{system} expects state of dimension {sys_.dim}, got shape {z.shape}")
    return sys_.scene(z, _merge(sys_.default_params, params))


def integrate(system: str, z0, dt: float, n_steps: int, substeps: int = 1,
              params: dict | None = None) -> StateTrajectory:
    """Classical RK4 with step dt/substeps; returns n_steps + 1 states."""
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    sys_ = get_system(system)
    p = _merge(sys_.default_params, params)
    z = np.asarray(z0, dtype=float).copy()
    if z.shape != (sys_.dim,):
        raise ValueError(f"{system} expects state of dimension {sys_.dim}, got shape {z.shape}")
    h = dt / substeps
    out = np.empty((n_steps + 1, sys_.dim))
    out[0] = z
    for n in range(1, n_steps + 1):
        for _ in range(substeps):
            z = _rk4_step(sys_.f, z, h, p)
        if not np.all(np.isfinite(z)):
            raise IntegrationError(f"non-finite state at step {n}", step=n)
        out[n] = z
    return StateTrajectory(system=system, dt=dt, states=out,
                           initial_condition=np.asarray(z0, dtype=float))


def _rk4_step(f, z, h, p):
    k1 = f(z, p)
    k2 = f(z + 0.5 * h * k1, p)
    k3 = f(z + 0.5 * h * k2, p)
    k4 = f(z + h * k3, p)
    return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def sample_initial_conditions(system: str, count: int, seed: int = 0,
                              params: dict | None = None) -> np.ndarray:
    """Draw initial states from the system's documented ranges."""
    sys_ = get_system(system)
    p = _merge(sys_.default_params, params)
    rng = np.random.default_rng(seed)
    return np.stack([sys_.sample_ic(rng, p) for _ in range(count)])


def trajectory_scenes(traj: StateTrajectory, params: dict | None = None) -> list[SceneState]:
    return [state_to_scene(traj.system, z, params) for z in traj.states]
