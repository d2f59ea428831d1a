"""Closed-form projector data for the Darboux ball B(r) in T*R^n.

The Hamiltonian flow of F = q^2 + p^2 has generating function

    S_s(q1, q2) = cos(2s) / (2 sin(2s)) * (q1^2 + q2^2) - q1 q2 / sin(2s),

and the region Sigma over N = [-r, r]^2 is bounded by the two stationary
values of f(s) = -S_s - s r^2.  With xi = cos(2s) the stationarity condition
is the quadratic r^2 xi^2 - 2 q1 q2 xi + (q1^2 + q2^2 - r^2) = 0.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .barcode import Bar, Barcode

__all__ = [
    "CLAMP_TOL",
    "GridSpec",
    "CriticalTimes",
    "SigmaField",
    "ProjectorWindow",
    "generating_function",
    "generating_function_grad",
    "critical_times",
    "discriminant",
    "f_value",
    "f_critical_values",
    "f_limit_richardson",
    "scan_critical_times",
    "sigma_field",
    "fiber_restrict",
    "projector_window",
]

CLAMP_TOL = 1e-12
HALF_PI = math.pi / 2

NONE, DIAGONAL, ANTIDIAGONAL, ORIGIN = "none", "diagonal-limit", "antidiagonal-limit", "origin"


@dataclass(frozen=True)
class GridSpec:
    """Rectilinear grid: ``bounds[k] = (lo, hi)`` sampled with ``nodes[k]`` points."""

    bounds: tuple
    nodes: tuple

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        nodes = tuple(int(n) for n in self.nodes)
        if len(bounds) != len(nodes) or not bounds:
            raise ValueError("grid needs one node count per axis")
        for (lo, hi), n in zip(bounds, nodes):
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"bad grid axis ({lo}, {hi})")
            if n < 2:
                raise ValueError("grid needs at least 2 nodes per axis")
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def square(cls, r: float, nodes: int = 101, dim: int = 2) -> "GridSpec":
        return cls(((-r, r),) * dim, (nodes,) * dim)

    @property
    def dim(self):
        return len(self.nodes)

    def axis(self, k: int) -> np.ndarray:
        """Node coordinates; symmetric boxes give exactly antisymmetric nodes."""
        lo, hi = self.bounds[k]
        n = self.nodes[k]
        i = np.arange(n)
        if lo == -hi:
            return hi * (2 * i - (n - 1)) / (n - 1)
        return lo + (hi - lo) * i / (n - 1)

    def axes(self):
        return [self.axis(k) for k in range(self.dim)]

    def mesh(self):
        return np.meshgrid(*self.axes(), indexing="ij")

    def covers(self, box) -> bool:
        return all(lo <= blo and bhi <= hi for (lo, hi), (blo, bhi) in zip(self.bounds, box))


@dataclass(frozen=True)
class CriticalTimes:
    s1: float
    s2: float
    exists: bool
    degenerate: str = NONE
    xi_plus: float = math.nan
    xi_minus: float = math.nan


# -- formulas ------------------------------------------------------------------

def _check_time(s):
    s = np.asarray(s, dtype=float)
    if np.any(~((s > 0) & (s < HALF_PI))):
        raise ValueError("generating function needs 0 < s < pi/2")
    return s


def generating_function(s, q1, q2):
    """S_s(q1, q2); the numerator is written to stay accurate near both ends."""
    s = _check_time(s)
    q1, q2 = np.asarray(q1, float), np.asarray(q2, float)
    sq = q1 * q1 + q2 * q2
    num = np.where(
        s <= math.pi / 4,
        (q1 - q2) ** 2 - 2 * np.sin(s) ** 2 * sq,
        2 * np.cos(s) ** 2 * sq - (q1 + q2) ** 2,
    )
    out = num / (2 * np.sin(2 * s))
    return float(out) if out.ndim == 0 else out


def generating_function_grad(s, q1, q2):
    """(dS/dq1, dS/dq2)."""
    s = _check_time(s)
    c, sn = np.cos(2 * s), np.sin(2 * s)
    return (c * q1 - q2) / sn, (c * q2 - q1) / sn


def f_value(s, q1, q2, r):
    """f(s)(q1, q2) = -S_s(q1, q2) - s r^2."""
    return -generating_function(s, q1, q2) - np.asarray(s, float) * r * r


def discriminant(q1, q2, r):
    """Factored discriminant (r^2 - q1^2)(r^2 - q2^2) of the critical quadratic."""
    return (r * r - q1 * q1) * (r * r - q2 * q2)


def _check_inside(q1, q2, r):
    if r <= 0:
        raise ValueError("radius must be positive")
    lim = r * (1 + CLAMP_TOL)
    if np.any(np.abs(q1) > lim) or np.any(np.abs(q2) > lim):
        raise ValueError(f"point outside N = [-{r}, {r}]^2")


def _critical_arrays(q1, q2, r):
    q1 = np.asarray(q1, float)
    q2 = np.asarray(q2, float)
    _check_inside(q1, q2, r)
    r2 = r * r
    D = discriminant(q1, q2, r)
    exists = D >= -CLAMP_TOL * r2 * r2
    sq = np.sqrt(np.maximum(D, 0.0))
    xi_p = (q1 * q2 + sq) / r2
    xi_m = (q1 * q2 - sq) / r2
    # 1 - xi+ and 1 + xi- without cancellation
    den_p = r2 - q1 * q2 + sq
    den_m = r2 + q1 * q2 + sq
    with np.errstate(invalid="ignore", divide="ignore"):
        one_m = np.where(den_p > 0, (q1 - q2) ** 2 / np.where(den_p > 0, den_p, 1), 0.0)
        one_p = np.where(den_m > 0, (q1 + q2) ** 2 / np.where(den_m > 0, den_m, 1), 0.0)
    one_m = np.clip(one_m, 0.0, 2.0)
    one_p = np.clip(one_p, 0.0, 2.0)
    exists &= (np.abs(xi_p) <= 1 + CLAMP_TOL) & (np.abs(xi_m) <= 1 + CLAMP_TOL)
    s1 = np.arcsin(np.sqrt(one_m / 2))
    s2 = np.arccos(np.sqrt(one_p / 2))
    tol = CLAMP_TOL * r
    diag = np.abs(q1 - q2) <= tol
    anti = np.abs(q1 + q2) <= tol
    s1 = np.where(diag, 0.0, s1)
    s2 = np.where(anti, HALF_PI, s2)
    deg = np.full(np.shape(q1), NONE, dtype=object)
    deg[diag] = DIAGONAL
    deg[anti] = ANTIDIAGONAL
    deg[diag & anti] = ORIGIN
    return s1, s2, exists, deg, np.clip(xi_p, -1, 1), np.clip(xi_m, -1, 1)


def critical_times(q1: float, q2: float, r: float) -> CriticalTimes:
    """The two stationary times 0 <= s1 <= s2 <= pi/2 of s -> f(s)(q1, q2)."""
    s1, s2, ex, deg, xp, xm = _critical_arrays(q1, q2, r)
    return CriticalTimes(float(s1), float(s2), bool(ex), str(deg[()]), float(xp), float(xm))


def _f_at(s, q1, q2, r):
    """f at a critical time; the ends s = 0, pi/2 take their closed-form limits.

    A critical time sits at s = 0 only on the diagonal, where f(s) -> 0, and
    at s = pi/2 only on the antidiagonal, where f(s) -> -(pi/2) r^2.
    """
    inner = (s > 0) & (s < HALF_PI)
    safe = np.where(inner, s, math.pi / 4)
    ends = np.where(s <= 0, 0.0, -HALF_PI * r * r)
    return np.where(inner, f_value(safe, q1, q2, r), ends)


def f_critical_values(q1, q2, r):
    """(f1, f2, exists, degenerate) at f's two stationary times."""
    s1, s2, ex, deg, _, _ = _critical_arrays(q1, q2, r)
    q1 = np.asarray(q1, float)
    q2 = np.asarray(q2, float)
    return _f_at(s1, q1, q2, r), _f_at(s2, q1, q2, r), ex, deg


def f_limit_richardson(end: str, q1: float, q2: float, r: float, eps: float = 1e-5) -> float:
    """One-sided limit of f at s = 0 or s = pi/2 by Richardson extrapolation.

    Only finite on the diagonal (s -> 0) or antidiagonal (s -> pi/2); used
    to cross-check the closed-form end values.
    """
    if end == "0":
        g = lambda h: float(f_value(h, q1, q2, r))
    elif end == "pi/2":
        g = lambda h: float(f_value(HALF_PI - h, q1, q2, r))
    else:
        raise ValueError("end must be '0' or 'pi/2'")
    return 2 * g(eps / 2) - g(eps)


def scan_critical_times(q1: float, q2: float, r: float, step: float = 1e-5):
    """Stationary points of f(s) found by a dense scan plus root refinement.

    Independent of the quadratic: f is evaluated on a grid, its derivative by
    central differences, sign changes bracketed and refined with brentq.
    """
    h = 1e-6
    s = np.arange(step, HALF_PI - step / 2, step)

    def deriv(x):
        return (f_value(x + h, q1, q2, r) - f_value(x - h, q1, q2, r)) / (2 * h)

    g = deriv(s)
    idx = np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) <= 0)[0]
    roots = []
    for i in idx:
        a, b = s[i], s[i + 1]
        if g[i] == 0:
            roots.append(float(a))
            continue
        roots.append(brentq(lambda x: float(deriv(x)), a, b, xtol=1e-13))
    out = []
    for x in roots:
        if not out or x - out[-1] > 10 * step:
            out.append(x)
    return out


# -- the field over N ----------------------------------------------------------

@dataclass
class SigmaField:
    r: float
    n: int
    grid: GridSpec
    q1: np.ndarray
    q2: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    exists: np.ndarray
    degenerate: np.ndarray

    @property
    def shape(self):
        return self.f1.shape

    def origin_index(self):
        i = self.grid.nodes[0] // 2
        j = self.grid.nodes[1] // 2
        return i, j

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("q1,q2,f1,f2,exists,degenerate\n")
        for i in range(self.shape[0]):
            for j in range(self.shape[1]):
                buf.write(
                    f"{float(self.q1[i])!r},{float(self.q2[j])!r},{float(self.f1[i, j])!r},"
                    f"{float(self.f2[i, j])!r},{str(bool(self.exists[i, j])).lower()},{self.degenerate[i, j]}\n"
                )
        return buf.getvalue()


def sigma_field(r: float, n: int = 1, grid: Optional[GridSpec] = None) -> SigmaField:
    if grid is None:
        grid = GridSpec.square(r)
    if n < 1:
        raise ValueError("dimension n must be positive")
    if grid.dim != 2:
        raise ValueError("sigma field lives on a 2-D grid over N")
    for lo, hi in grid.bounds:
        if not (math.isclose(lo, -r, rel_tol=1e-12) and math.isclose(hi, r, rel_tol=1e-12)):
            raise ValueError(f"grid must cover N = [-{r}, {r}]^2 exactly, got {grid.bounds}")
    if any(k % 2 == 0 for k in grid.nodes):
        raise ValueError("grid needs an odd node count per axis so the origin is a node")
    grid = GridSpec(((-r, r), (-r, r)), grid.nodes)
    a1, a2 = grid.axes()
    Q1, Q2 = np.meshgrid(a1, a2, indexing="ij")
    f1, f2, ex, deg = f_critical_values(Q1, Q2, r)
    bad = ex & (f2 > f1 + CLAMP_TOL * r * r)
    if bad.any():
        i, j = map(int, np.argwhere(bad)[0])
        raise AssertionError(f"f(s1) < f(s2) at node ({i}, {j})")
    return SigmaField(float(r), int(n), grid, a1, a2, f1, f2, ex, deg)


def _node(field: SigmaField, node):
    i, j = node
    ni, nj = field.shape
    if not (isinstance(i, (int, np.integer)) and isinstance(j, (int, np.integer)) and 0 <= i < ni and 0 <= j < nj):
        raise ValueError(f"{node} is not a grid node")
    return int(i), int(j)


def _sigma_bar(field: SigmaField, i, j, shift=0.0, degree=0):
    if not field.exists[i, j]:
        return []
    lo, hi = float(field.f2[i, j]) + shift, float(field.f1[i, j]) + shift
    if hi - lo <= CLAMP_TOL * field.r * field.r:
        return []
    return [Bar(lo, hi, degree)]


@dataclass
class ProjectorWindow:
    """Window m of the periodic projector, as fiberwise graded layers.

    Layer one is Sigma translated by m (pi/2) r^2; layer two is the
    reflection (q1, q2) -> (q1, -q2) of Sigma, translated by a further
    (pi/2) r^2 and shifted by n.  Stored degrees grow by n per window.
    """

    field: SigmaField
    m: int

    @property
    def period(self):
        return HALF_PI * self.field.r ** 2

    def layers(self, i, j):
        F = self.field
        n = F.n
        base = self.m * self.period
        first = _sigma_bar(F, i, j, base, self.m * n)
        jr = F.shape[1] - 1 - j
        second = _sigma_bar(F, i, jr, base + self.period, self.m * n + n)
        return Barcode(first), Barcode(second)


def projector_window(field: SigmaField, m: int) -> ProjectorWindow:
    return ProjectorWindow(field, int(m))


def fiber_restrict(field, node) -> Barcode:
    """Restriction to the line {node} x R: the bar [f2, f1), or both window layers."""
    if isinstance(field, ProjectorWindow):
        i, j = _node(field.field, node)
        a, b = field.layers(i, j)
        return Barcode(list(a) + list(b))
    i, j = _node(field, node)
    return Barcode(_sigma_bar(field, i, j))
