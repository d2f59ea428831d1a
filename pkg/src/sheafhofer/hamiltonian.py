"""Hamiltonian dynamics on T*R^n: flows, the Hofer norm, displacement.

Conventions: dq/dt = dH/dp, dp/dt = -dH/dq.  States are arrays of shape
``(..., 2n)`` laid out as ``(q_1..q_n, p_1..p_n)``.  Gradients are centered
finite differences, so any pointwise-evaluable Hamiltonian can be flowed.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .ball import GridSpec, generating_function_grad
from .barcode import EpigraphSheaf, epigraph_distance
from .rng import DEFAULT_SEED, make_rng

__all__ = [
    "HamiltonianSpec",
    "FlowResult",
    "HoferResult",
    "Ball",
    "DisplacementCertificate",
    "SpecFamily",
    "UpperBound",
    "StabilityReport",
    "bump",
    "box_bump",
    "zero_spec",
    "quadratic_spec",
    "rotation_spec",
    "flow",
    "time_one_map",
    "hofer_norm",
    "displaces",
    "vertical_shift_spec",
    "vertical_shift_family",
    "zero_section_samples",
    "verify_generating_function",
    "displacement_energy_upper",
    "stability_experiment",
    "jacobian_determinant",
]


def _load_profile():
    text = resources.files("sheafhofer").joinpath("data/bump_profile.json").read_text()
    return json.loads(text)


_PROFILE = _load_profile()
_SHOULDER = np.polynomial.Polynomial(_PROFILE["shoulder_coefficients"])
FD_STEP = float(_PROFILE["fd_step"])


@dataclass
class HamiltonianSpec:
    """A Hamiltonian ``evaluate(s, q, p)`` vectorized over leading axes.

    ``q`` and ``p`` have shape ``(N, n)``; ``s`` is a scalar time in [0, 1].
    ``support_box`` lists 2n closed intervals (q's then p's) outside which the
    function vanishes.
    """

    n: int
    evaluate: Callable
    support_box: tuple
    autonomous: bool = False
    smoothness_note: str = ""
    params: dict = field(default_factory=dict)

    def __call__(self, s, x):
        x = np.asarray(x, float)
        flat = x.reshape(-1, 2 * self.n)
        out = np.asarray(self.evaluate(s, flat[:, : self.n], flat[:, self.n :]), float)
        return np.broadcast_to(out, flat.shape[:1]).reshape(x.shape[:-1])

    def bounded(self):
        return all(math.isfinite(lo) and math.isfinite(hi) for lo, hi in self.support_box)

    def check_support(self, samples: int = 200, seed: int = DEFAULT_SEED) -> bool:
        """Spot-check that the function vanishes just outside the support box."""
        if not self.bounded():
            return True
        rng = make_rng(seed, "support")
        box = np.array(self.support_box, float)
        width = box[:, 1] - box[:, 0]
        x = rng.uniform(box[:, 0] - 0.5 * width, box[:, 1] + 0.5 * width, size=(samples, 2 * self.n))
        k = rng.integers(0, 2 * self.n, samples)
        side = rng.integers(0, 2, samples)
        gap = rng.uniform(1e-9, 0.5, samples) * width[k]
        x[np.arange(samples), k] = np.where(side == 1, box[k, 1] + gap, box[k, 0] - gap)
        return all(np.all(self(s, x) == 0) for s in (0.0, 0.5, 1.0))


# -- bumps and simple Hamiltonians ---------------------------------------------

def bump(x, plateau, cutoff):
    """C^1 plateau bump: 1 on ``plateau``, 0 outside ``cutoff``, cubic shoulders."""
    x = np.asarray(x, float)
    a, b = plateau
    A, B = cutoff
    if not (A < a <= b < B):
        raise ValueError("need cutoff[0] < plateau[0] <= plateau[1] < cutoff[1]")
    u_left = np.clip((a - x) / (a - A), 0.0, 1.0)
    u_right = np.clip((x - b) / (B - b), 0.0, 1.0)
    u = np.maximum(u_left, u_right)
    out = _SHOULDER(u)
    return np.where(u >= 1.0, 0.0, np.where(u <= 0.0, 1.0, out))


def box_bump(x, plateau_box, cutoff_box):
    """Product of one-dimensional bumps over the coordinates of ``x``."""
    x = np.asarray(x, float)
    out = np.ones(x.shape[:-1])
    for k, (pl, cu) in enumerate(zip(plateau_box, cutoff_box)):
        out = out * bump(x[..., k], pl, cu)
    return out


def zero_spec(n: int = 1) -> HamiltonianSpec:
    return HamiltonianSpec(n, lambda s, q, p: np.zeros(q.shape[0]), ((-1.0, 1.0),) * (2 * n), True, "identically zero")


def quadratic_spec(n: int = 1) -> HamiltonianSpec:
    """F = |q|^2 + |p|^2 on all of T*R^n (not compactly supported)."""
    inf = math.inf
    return HamiltonianSpec(
        n,
        lambda s, q, p: np.sum(q * q, axis=1) + np.sum(p * p, axis=1),
        ((-inf, inf),) * (2 * n),
        True,
        "polynomial",
    )


def rotation_spec(radius: float = 2.0, shoulder: float = 0.5, n: int = 1) -> HamiltonianSpec:
    """q^2 + p^2 cut off radially: unchanged on the ball of ``radius``, zero beyond radius + shoulder."""
    outer = radius + shoulder

    def ev(s, q, p):
        rho = np.sqrt(np.sum(q * q, axis=1) + np.sum(p * p, axis=1))
        return (rho * rho) * bump(rho, (-radius, radius), (-outer, outer))

    return HamiltonianSpec(n, ev, ((-outer, outer),) * (2 * n), True, "C^1 radial cutoff", {"radius": radius})


# -- integration ---------------------------------------------------------------

def _vector_field(spec: HamiltonianSpec, s, x, h=FD_STEP):
    n = spec.n
    d = 2 * n
    N = x.shape[0]
    offsets = np.zeros((2 * d, 1, d))
    for k in range(d):
        offsets[2 * k, 0, k] = h
        offsets[2 * k + 1, 0, k] = -h
    vals = spec(s, (x[None, :, :] + offsets).reshape(-1, d)).reshape(2 * d, N)
    grad = ((vals[0::2] - vals[1::2]) / (2 * h)).T
    return np.concatenate([grad[:, n:], -grad[:, :n]], axis=1)


def _rk4(spec, x, t0, t1, steps, record=False):
    dt = (t1 - t0) / steps
    traj = [x.copy()] if record else None
    h0 = spec(t0, x) if spec.autonomous else None
    drift = 0.0
    t = t0
    for _ in range(steps):
        k1 = _vector_field(spec, t, x)
        k2 = _vector_field(spec, t + dt / 2, x + dt / 2 * k1)
        k3 = _vector_field(spec, t + dt / 2, x + dt / 2 * k2)
        k4 = _vector_field(spec, t + dt, x + dt * k3)
        x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + (t1 - t0) * (_ + 1) / steps
        if not np.all(np.isfinite(x)):
            raise FloatingPointError("non-finite state during integration")
        if h0 is not None:
            drift = max(drift, float(np.max(np.abs(spec(t, x) - h0))))
        if record:
            traj.append(x.copy())
    return x, traj, drift


@dataclass
class FlowResult:
    endpoints: np.ndarray
    trajectories: Optional[np.ndarray]
    conserved_drift: Optional[float]
    steps: int
    change: float = 0.0


def flow(spec: HamiltonianSpec, x0, t1: float = 1.0, steps: Optional[int] = None, record: bool = False, t0: float = 0.0, tol: float = 1e-8, max_doublings: int = 6) -> FlowResult:
    """Time-t1 image of ``x0`` (shape ``(2n,)`` or ``(N, 2n)``) under RK4.

    With ``steps=None`` the integration starts at 1000 steps per unit time and
    doubles until the endpoints move by less than ``tol``.
    """
    x = np.asarray(x0, float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[-1] != 2 * spec.n or not np.all(np.isfinite(x)):
        raise ValueError("initial states must be finite with 2n coordinates")
    if steps is not None:
        if steps < 1:
            raise ValueError("steps must be positive")
        end, traj, drift = _rk4(spec, x, t0, t1, int(steps), record)
        change = math.nan
    else:
        steps = max(1, int(math.ceil(1000 * abs(t1 - t0))))
        end, traj, drift = _rk4(spec, x, t0, t1, steps, record)
        change = math.inf
        for _ in range(max_doublings):
            steps *= 2
            new, traj, drift = _rk4(spec, x, t0, t1, steps, record)
            change = float(np.max(np.abs(new - end)))
            end = new
            if change < tol:
                break
    out = end[0] if single else end
    tr = None
    if record:
        tr = np.stack(traj, axis=-2)
        tr = tr[0] if single else tr
    return FlowResult(out, tr, drift if spec.autonomous else None, steps, change)


def time_one_map(spec: HamiltonianSpec, steps: int = 1000):
    return lambda x: flow(spec, x, 1.0, steps).endpoints


def jacobian_determinant(spec: HamiltonianSpec, points, steps: Optional[int] = None, h: float = 1e-5, t1: float = 1.0):
    """Determinant of the finite-difference Jacobian of the time-t1 map.

    By default the integration is refined until the stencil images converge;
    on C^1 cutoff shoulders a fixed 1000 steps leaves errors near 1e-4.
    """
    pts = np.atleast_2d(np.asarray(points, float))
    d = 2 * spec.n
    stencil = []
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        stencil.append(pts + e)
        stencil.append(pts - e)
    images = flow(spec, np.concatenate(stencil), t1, steps).endpoints.reshape(2 * d, len(pts), d)
    J = np.empty((len(pts), d, d))
    for k in range(d):
        J[:, :, k] = (images[2 * k] - images[2 * k + 1]) / (2 * h)
    return np.linalg.det(J)


# -- Hofer norm ----------------------------------------------------------------

@dataclass
class HoferResult:
    value: float
    delta: float
    time_steps: int
    grid_nodes: tuple

    def __float__(self):
        return self.value


def _oscillation(spec, s, pts):
    v = spec(s, pts)
    return max(float(v.max()), 0.0) - min(float(v.min()), 0.0)


def hofer_norm(spec: HamiltonianSpec, space_grid: Optional[GridSpec] = None, time_steps: int = 8, rtol: float = 1e-3, max_doublings: int = 10) -> HoferResult:
    """Mean oscillation int_0^1 (max H_s - min H_s) ds on a space grid.

    The extrema always include 0, the value of a compactly supported function
    off its support.  The time integral is the trapezoid rule, doubled until
    the relative change drops below ``rtol``.
    """
    if space_grid is None:
        if not spec.bounded():
            raise ValueError("an unbounded Hamiltonian needs an explicit grid")
        space_grid = GridSpec(spec.support_box, (201,) * (2 * spec.n))
    if space_grid.dim != 2 * spec.n:
        raise ValueError("space grid dimension must be 2n")
    if spec.bounded() and not space_grid.covers(spec.support_box):
        raise ValueError("space grid does not cover the support box")
    pts = np.stack([g.ravel() for g in space_grid.mesh()], axis=1)
    cache = {}

    def osc(s):
        if spec.autonomous:
            s = 0.0
        if s not in cache:
            cache[s] = _oscillation(spec, s, pts)
        return cache[s]

    def trap(m):
        vals = np.array([osc(k / m) for k in range(m + 1)])
        w = np.full(m + 1, 1.0 / m)
        w[0] = w[-1] = 0.5 / m
        return float(np.sum(w * vals))

    m = max(1, int(time_steps))
    value = trap(m)
    delta = math.inf
    for _ in range(max_doublings):
        m *= 2
        new = trap(m)
        delta = abs(new - value)
        value = new
        if delta <= rtol * abs(value) or value == 0:
            break
    return HoferResult(value, delta, m, space_grid.nodes)


# -- displacement --------------------------------------------------------------

@dataclass(frozen=True)
class Ball:
    """Open ball B(r) = {|x| < r} in (q, p) coordinates."""

    r: float
    center: tuple = ()

    def clearance(self, x):
        x = np.atleast_2d(np.asarray(x, float))
        c = np.asarray(self.center, float) if self.center else np.zeros(x.shape[1])
        return np.linalg.norm(x - c, axis=1) - self.r

    def contains(self, x):
        return self.clearance(x) < 0

    def describe(self):
        return f"open ball of radius {self.r!r}"


@dataclass
class DisplacementCertificate:
    spec: HamiltonianSpec
    A_samples: np.ndarray
    B_descriptor: str
    margin: float
    verified: bool
    hofer_value: float
    clearance: float
    quadrature_meta: dict
    family_params: dict = field(default_factory=dict)
    reason: str = ""

    def to_dict(self):
        return {
            "verified": bool(self.verified),
            "hofer_value": float(self.hofer_value),
            "margin": float(self.margin),
            "clearance": float(self.clearance),
            "resolutions": dict(self.quadrature_meta),
            "family_params": dict(self.family_params),
            "reason": self.reason,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def displaces(spec: HamiltonianSpec, A_samples, B_test, margin: float, steps: int = 1000, space_grid: Optional[GridSpec] = None, time_steps: int = 8) -> DisplacementCertificate:
    """Certify on samples that the time-1 map moves A off B with clearance ``margin``."""
    A = np.atleast_2d(np.asarray(A_samples, float))
    if A.size == 0:
        raise ValueError("need at least one sample of A")
    if not margin > 0:
        raise ValueError("margin must be positive")
    hofer = hofer_norm(spec, space_grid, time_steps)
    meta = {"rk4_steps": int(steps), "space_nodes": list(hofer.grid_nodes), "time_steps": hofer.time_steps, "hofer_delta": hofer.delta, "samples": int(len(A))}
    try:
        images = flow(spec, A, 1.0, steps).endpoints
    except FloatingPointError as exc:
        return DisplacementCertificate(spec, A, B_test.describe(), margin, False, hofer.value, -math.inf, meta, dict(spec.params), f"integration failed: {exc}")
    clear = float(np.min(B_test.clearance(images)))
    ok = clear >= margin
    reason = "" if ok else f"minimum clearance {clear:.6g} below margin {margin}"
    return DisplacementCertificate(spec, A, B_test.describe(), margin, ok, hofer.value, clear, meta, dict(spec.params), reason)


def zero_section_samples(half_width: float, n: int = 1, count: int = 301) -> np.ndarray:
    """Points (q, 0) of the zero section with q on a grid over [-w, w]^n."""
    axis = np.linspace(-half_width, half_width, count)
    qs = np.stack([g.ravel() for g in np.meshgrid(*([axis] * n), indexing="ij")], axis=1)
    return np.concatenate([qs, np.zeros_like(qs)], axis=1)


def _max_slope(plateau, cutoff):
    """Largest |d/dx bump| of the one-dimensional profile."""
    slope = np.max(np.abs(_SHOULDER.deriv()(np.linspace(0.0, 1.0, 2001))))
    return slope / min(plateau[0] - cutoff[0], cutoff[1] - plateau[1])


def vertical_shift_spec(r: float, kappa: float, cutoff_box=None, plateau_box=None, n: int = 1) -> HamiltonianSpec:
    """H = -kappa q_1 chi(q, p): on the plateau the flow is p_1 -> p_1 + kappa t.

    Boxes may list only the n q-intervals (default plateau [-1.2 r, 1.2 r],
    cutoff [-1.5 r, 1.5 r]); the p-intervals are then chosen so that every
    q-shoulder point keeps p inside the plateau, which keeps q fixed and
    makes the time-1 map p -> p + kappa d/dq1 (q1 chi(q)) exactly.  The
    p-extent does not change the Hofer norm.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    d = 2 * n
    if plateau_box is None:
        plateau_box = ((-1.2 * r, 1.2 * r),) * n
    if cutoff_box is None:
        cutoff_box = ((-1.5 * r, 1.5 * r),) * n
    plateau_box = tuple((float(a), float(b)) for a, b in plateau_box)
    cutoff_box = tuple((float(a), float(b)) for a, b in cutoff_box)
    if len(plateau_box) != len(cutoff_box) or len(plateau_box) not in (n, d):
        raise ValueError("boxes need n (q only) or 2n intervals")
    for (a, b), (A, B) in zip(plateau_box, cutoff_box):
        if not A < a <= b < B:
            raise ValueError("plateau must sit strictly inside the cutoff box")
    kappa = float(kappa)
    qpl, qcu = plateau_box[:n], cutoff_box[:n]
    # swept p-range: |dp_k/dt| <= |kappa| (1 + max|q1| * max slope)
    reach = abs(kappa) * (1 + max(abs(qcu[0][0]), abs(qcu[0][1])) * max(_max_slope(a, b) for a, b in zip(qpl, qcu)))
    if len(plateau_box) == n:
        P = max(1.2 * r, reach + 0.1 * r)
        w = min(a - A for (a, _), (A, _) in zip(qpl, qcu))
        plateau_box = qpl + ((-P, P),) * n
        cutoff_box = qcu + ((-P - w, P + w),) * n
    if any(a > -r or b < r for a, b in plateau_box[:n]) or any(a > -r or b < r for a, b in plateau_box[n:]):
        raise ValueError("plateau too small: it must cover B(r)")
    if any(a > -reach or b < reach for a, b in plateau_box[n:]):
        raise ValueError(f"plateau too small: p must stay within +-{reach:.6g} for the shear to be exact")

    def ev(s, q, p):
        x = np.concatenate([q, p], axis=1)
        return -kappa * q[:, 0] * box_bump(x, plateau_box, cutoff_box)

    return HamiltonianSpec(
        n, ev, cutoff_box, True, "C^1 (cubic-shoulder product bump)",
        {"kappa": kappa, "r": float(r), "plateau": [list(b) for b in plateau_box], "cutoff": [list(b) for b in cutoff_box]},
    )


# -- generating function -------------------------------------------------------

def verify_generating_function(samples: int = 1000, tolerance: float = 1e-6, steps: int = 2000, seed: int = DEFAULT_SEED, delta: float = 1e-3):
    """Max residuals of p1 = -dS/dq1 and p2 = dS/dq2 along the flow of q^2 + p^2.

    Returns ``(max residual, passed)``.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = make_rng(seed, "genfun")
    s = rng.uniform(delta, math.pi / 2 - delta, samples)
    q1 = rng.uniform(-1, 1, samples)
    p1 = rng.uniform(-1, 1, samples)
    spec = quadratic_spec(1)
    # per-sample end times: integrate in rescaled time u in [0, 1]
    scaled = HamiltonianSpec(1, spec.evaluate, spec.support_box, True)
    x = np.stack([q1, p1], axis=1)
    dt = s / steps
    for _ in range(steps):
        k1 = _vector_field(scaled, 0.0, x)
        k2 = _vector_field(scaled, 0.0, x + (dt / 2)[:, None] * k1)
        k3 = _vector_field(scaled, 0.0, x + (dt / 2)[:, None] * k2)
        k4 = _vector_field(scaled, 0.0, x + dt[:, None] * k3)
        x = x + (dt / 6)[:, None] * (k1 + 2 * k2 + 2 * k3 + k4)
    q2, p2 = x[:, 0], x[:, 1]
    d1, d2 = generating_function_grad(s, q1, q2)
    res = float(max(np.max(np.abs(p1 + d1)), np.max(np.abs(p2 - d2))))
    return res, res <= tolerance


# -- upper bounds by search ----------------------------------------------------

@dataclass
class SpecFamily:
    """Parameterized Hamiltonians: ``build(params) -> spec or None`` over a grid of values."""

    name: str
    build: Callable
    grid: dict
    box: dict

    def is_empty(self):
        return not self.grid or any(len(v) == 0 for v in self.grid.values())


@dataclass
class UpperBound:
    best: float
    best_params: Optional[dict]
    certificates: list
    evaluations: int


def vertical_shift_family(r: float = 1.0, kappas=None, plateaus=None, n: int = 1, shoulder: float = 0.3) -> SpecFamily:
    """Vertical shifts with parameters kappa and plateau half-width (square plateau)."""
    if kappas is None:
        kappas = [1.1 * r, 1.2 * r, 1.3 * r]
    if plateaus is None:
        plateaus = [1.1 * r, 1.2 * r, 1.35 * r]

    def build(params):
        w = params["plateau"]
        k = params["kappa"]
        if w < r:
            return None
        c = w + shoulder * r
        return vertical_shift_spec(r, k, ((-c, c),) * n, ((-w, w),) * n, n)

    box = {"kappa": (0.5 * r, 2.0 * r), "plateau": (r, 2.0 * r)}
    return SpecFamily("vertical-shift", build, {"kappa": list(kappas), "plateau": list(plateaus)}, box)


def displacement_energy_upper(family: SpecFamily, A_samples, B_test, budget: int = 12, margin: float = 0.05, steps: int = 1000, time_steps: int = 8, space_nodes: int = 201) -> UpperBound:
    """Smallest Hofer norm over verified certificates: grid search, then coordinate descent.

    Each certificate evaluation counts against ``budget`` after the initial grid.
    """
    if family is None or family.is_empty():
        return UpperBound(math.inf, None, [], 0)
    certs = []
    seen = {}

    def evaluate(params):
        key = tuple(sorted((k, round(float(v), 12)) for k, v in params.items()))
        if key in seen:
            return seen[key]
        spec = family.build(params)
        if spec is None:
            seen[key] = None
            return None
        grid = GridSpec(spec.support_box, (space_nodes,) * (2 * spec.n))
        cert = displaces(spec, A_samples, B_test, margin, steps, grid, time_steps)
        cert.family_params = {k: float(v) for k, v in sorted(params.items())}
        certs.append(cert)
        seen[key] = cert
        return cert

    names = sorted(family.grid)
    best, best_params = math.inf, None
    for values in itertools.product(*(family.grid[k] for k in names)):
        params = dict(zip(names, values))
        c = evaluate(params)
        if c is not None and c.verified and c.hofer_value < best:
            best, best_params = c.hofer_value, params
    used = 0
    if best_params is not None:
        step = {k: (family.box[k][1] - family.box[k][0]) / 8 for k in names}
        while used < budget and max(step.values()) > 1e-3:
            improved = False
            for k in names:
                for sign in (-1, 1):
                    if used >= budget:
                        break
                    trial = dict(best_params)
                    lo, hi = family.box[k]
                    trial[k] = min(hi, max(lo, trial[k] + sign * step[k]))
                    if trial[k] == best_params[k]:
                        continue
                    used += 1
                    c = evaluate(trial)
                    if c is not None and c.verified and c.hofer_value < best:
                        best, best_params, improved = c.hofer_value, trial, True
                        break
            if not improved:
                step = {k: v / 2 for k, v in step.items()}
    return UpperBound(best, best_params, certs, len(certs))


# -- stability -----------------------------------------------------------------

@dataclass
class StabilityReport:
    distance: float
    hofer_value: float
    gap: float
    relative_gap: float
    passed: bool
    hofer: HoferResult


def _extended_grid(V: EpigraphSheaf, cutoff_box, p_nodes):
    """Grid through V's nodes extended by whole steps past the cutoff in q."""
    axes = []
    for k, ax in enumerate(V.axes):
        ax = np.asarray(ax, float)
        h = (ax[-1] - ax[0]) / (len(ax) - 1)
        lo, hi = cutoff_box[k]
        left = int(math.ceil((ax[0] - lo) / h - 1e-9))
        right = int(math.ceil((hi - ax[-1]) / h - 1e-9))
        axes.append((ax[0] - left * h, ax[-1] + right * h, len(ax) + left + right))
    n = len(V.axes)
    for k in range(n):
        lo, hi = cutoff_box[n + k]
        axes.append((lo, hi, p_nodes))
    return GridSpec(tuple((a, b) for a, b, _ in axes), tuple(m for _, _, m in axes))


def stability_experiment(V: EpigraphSheaf, cutoff_box=None, plateau_box=None, tolerance: float = 1e-9, p_nodes: int = 41) -> StabilityReport:
    """Compare d(k_{z >= 0}, k_{z >= V}) with the Hofer norm of H = V(q) chi(q, p).

    V is interpolated between nodes and held at its boundary values beyond
    the grid.  The default plateau covers V's grid exactly in q and
    [-1, 1] in p, with unit shoulders.
    """
    n = len(V.axes)
    qbox = [(float(ax[0]), float(ax[-1])) for ax in V.axes]
    if plateau_box is None:
        plateau_box = tuple(qbox) + ((-1.0, 1.0),) * n
    if cutoff_box is None:
        cutoff_box = tuple((a - 1.0, b + 1.0) for a, b in plateau_box)
    plateau_box = tuple(tuple(map(float, b)) for b in plateau_box)
    cutoff_box = tuple(tuple(map(float, b)) for b in cutoff_box)
    for k, (a, b) in enumerate(qbox):
        pa, pb = plateau_box[k]
        if pa > a + 1e-12 or pb < b - 1e-12:
            raise ValueError("plateau smaller than the grid of V")
    values = np.asarray(V.values, float)
    interp = RegularGridInterpolator(tuple(np.asarray(ax, float) for ax in V.axes), values, method="linear")
    lo = np.array([a for a, _ in qbox])
    hi = np.array([b for _, b in qbox])

    def ev(s, q, p):
        x = np.concatenate([q, p], axis=1)
        return interp(np.clip(q, lo, hi)) * box_bump(x, plateau_box, cutoff_box)

    spec = HamiltonianSpec(n, ev, cutoff_box, True, "V(q) times a C^1 product bump")
    grid = _extended_grid(V, cutoff_box, p_nodes)
    hofer = hofer_norm(spec, grid)
    dist = epigraph_distance(EpigraphSheaf.zero_like(V), V)
    gap = hofer.value - dist
    rel = gap / dist if dist > 0 else (0.0 if hofer.value == 0 else math.inf)
    return StabilityReport(dist, hofer.value, gap, rel, gap >= -tolerance, hofer)
