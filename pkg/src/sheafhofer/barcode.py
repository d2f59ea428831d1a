"""Graded barcodes as models of interval-decomposable Tamarkin objects.

A bar ``[birth, death)`` of degree ``d`` stands for the constant sheaf on the
half-open interval placed in cohomological degree ``d``; a shift ``[m]`` of
the sheaf lowers the stored degree by ``m``.  Morphisms are counted over
GF(2).  The closed-form hom rule used here is checked against the cellular
oracle (``sheafhofer.cellular``):

===========  =================================  ========
Ext group    condition for I=[a,b), J=[c,d)     dim
===========  =================================  ========
Ext^0(I,J)   a <= c < b <= d                    1
Ext^1(I,J)   c < a <= d < b                     1
===========  =================================  ========

All other Ext groups vanish (the category of constructible sheaves on the
line is hereditary).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Iterable, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = [
    "ATOL",
    "Bar",
    "Barcode",
    "InterleavingCertificate",
    "EpigraphSheaf",
    "translate",
    "tau_is_zero",
    "ext_dims",
    "hom_dims",
    "hom0_nonzero",
    "covers",
    "is_interleaved",
    "interleaving_split",
    "verify_certificate",
    "interleaving_distance",
    "distance_to_zero",
    "epigraph_distance",
    "epigraph_distance_by_interleaving",
]

ATOL = 1e-12
INF = math.inf


def _exact(*xs) -> bool:
    return all(isinstance(x, (int, Fraction)) for x in xs)


def _le(x, y) -> bool:
    """``x <= y`` with absolute tolerance for floating endpoints."""
    if x == y:
        return True
    if math.isinf(x) or math.isinf(y) or _exact(x, y):
        return x < y
    return x - y <= ATOL


def _lt(x, y) -> bool:
    return not _le(y, x)


def _parse_endpoint(v):
    if isinstance(v, str):
        if v in ("inf", "+inf", "Infinity"):
            return INF
        return Fraction(v)
    if isinstance(v, bool):
        raise TypeError("boolean is not an endpoint")
    if isinstance(v, (int, Fraction)):
        return v
    return float(v)


def _dump_endpoint(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return v


@dataclass(frozen=True)
class Bar:
    birth: Real
    death: Real = INF
    degree: int = 0
    mult: int = 1

    def __post_init__(self):
        if math.isinf(self.birth) or math.isnan(self.birth):
            raise ValueError(f"birth must be finite, got {self.birth}")
        if math.isnan(self.death) or not _lt(self.birth, self.death):
            raise ValueError(f"need birth < death, got [{self.birth}, {self.death})")
        if self.mult < 1:
            raise ValueError("multiplicity must be positive")

    @property
    def length(self):
        return self.death - self.birth

    @property
    def is_ray(self) -> bool:
        return math.isinf(self.death)

    def shifted(self, c) -> "Bar":
        return Bar(self.birth + c, self.death + c, self.degree, self.mult)

    def key(self):
        return (self.birth, self.death, self.degree)


class Barcode:
    """Finite multiset of bars in canonical (birth, death, degree) order."""

    __slots__ = ("bars",)

    def __init__(self, bars: Iterable[Bar] = ()):
        counts: dict = {}
        for b in bars:
            counts[b.key()] = counts.get(b.key(), 0) + b.mult
        self.bars = tuple(
            Bar(k[0], k[1], k[2], m) for k, m in sorted(counts.items(), key=lambda kv: kv[0])
        )

    @classmethod
    def from_tuples(cls, items) -> "Barcode":
        """Build from ``(birth, death)`` or ``(birth, death, degree[, mult])`` tuples."""
        return cls(Bar(*t) for t in items)

    def __iter__(self):
        return iter(self.bars)

    def __len__(self):
        return len(self.bars)

    def __bool__(self):
        return bool(self.bars)

    def __eq__(self, other):
        if not isinstance(other, Barcode):
            return NotImplemented
        return self.bars == other.bars

    def __hash__(self):
        return hash(self.bars)

    def __repr__(self):
        inner = ", ".join(
            f"[{b.birth}, {b.death})" + (f"^{b.degree}" if b.degree else "") + (f"x{b.mult}" if b.mult > 1 else "")
            for b in self.bars
        )
        return f"Barcode({inner})"

    def expanded(self) -> list[Bar]:
        """One unit-multiplicity bar per summand."""
        return [Bar(b.birth, b.death, b.degree) for b in self.bars for _ in range(b.mult)]

    def degrees(self) -> set[int]:
        return {b.degree for b in self.bars}

    def in_degree(self, d: int) -> "Barcode":
        return Barcode(b for b in self.bars if b.degree == d)

    def shift_degree(self, k: int) -> "Barcode":
        return Barcode(Bar(b.birth, b.death, b.degree + k, b.mult) for b in self.bars)

    def endpoints(self) -> list:
        pts = set()
        for b in self.bars:
            pts.add(b.birth)
            if not b.is_ray:
                pts.add(b.death)
        return sorted(pts)

    def isclose(self, other: "Barcode", atol: float = 1e-9) -> bool:
        if len(self.bars) != len(other.bars):
            return False
        for x, y in zip(self.bars, other.bars):
            if (x.degree, x.mult) != (y.degree, y.mult) or abs(x.birth - y.birth) > atol:
                return False
            if x.is_ray != y.is_ray or (not x.is_ray and abs(x.death - y.death) > atol):
                return False
        return True

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "bars": [
                {"birth": _dump_endpoint(b.birth), "death": _dump_endpoint(b.death), "degree": b.degree, "mult": b.mult}
                for b in self.bars
            ]
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Barcode":
        return cls(
            Bar(_parse_endpoint(x["birth"]), _parse_endpoint(x["death"]), int(x.get("degree", 0)), int(x.get("mult", 1)))
            for x in d["bars"]
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_json(cls, s: str) -> "Barcode":
        return cls.from_dict(json.loads(s))


# -- translation and tau -------------------------------------------------------

def translate(F: Barcode, c) -> Barcode:
    """Apply the translation functor: every bar moves by ``c``."""
    return Barcode(b.shifted(c) for b in F)


def tau_is_zero(F: Barcode, c) -> bool:
    """Is the canonical morphism F -> T_c F zero?

    Each bar contributes the restriction onto its translate, which vanishes
    exactly when the bar is no longer than ``c``.
    """
    if c < 0:
        raise ValueError("tau_c needs c >= 0")
    return all(not b.is_ray and _le(b.length, c) for b in F)


# -- hom spaces ----------------------------------------------------------------

def hom0_nonzero(I: Bar, J: Bar) -> bool:
    """Degree-0 morphisms between the underlying (unshifted) interval sheaves."""
    return _le(I.birth, J.birth) and _lt(J.birth, I.death) and _le(I.death, J.death)


def _ext1_nonzero(I: Bar, J: Bar) -> bool:
    return _lt(J.birth, I.birth) and _le(I.birth, J.death) and _lt(J.death, I.death)


def ext_dims(I: Bar, J: Bar) -> tuple[int, int]:
    """(dim Ext^0, dim Ext^1) of the unshifted interval sheaves, times multiplicities."""
    m = I.mult * J.mult
    return (m if hom0_nonzero(I, J) else 0, m if _ext1_nonzero(I, J) else 0)


def hom_dims(I: Bar, J: Bar) -> dict[int, int]:
    """Graded dimensions ``k -> dim Hom(I, J[k])`` including the stored degrees."""
    e0, e1 = ext_dims(I, J)
    out = {}
    if e0:
        out[J.degree - I.degree] = e0
    if e1:
        k = J.degree - I.degree + 1
        out[k] = out.get(k, 0) + e1
    return out


def covers(I: Bar, J: Bar, c) -> bool:
    """J lets tau_c(I) factor as I -> J -> T_c I with nonzero composite."""
    if I.is_ray != J.is_ray:
        return False
    if not (_le(I.birth, J.birth) and _le(J.birth, I.birth + c)):
        return False
    if I.is_ray:
        return True
    return _le(I.death, J.death) and _le(J.death, I.death + c)


# -- interleavings -------------------------------------------------------------

@dataclass
class Factorization:
    """Witness for tau_{a+b}(source) = T(beta) o alpha through ``middle``.

    ``alpha[j, i]`` is the coefficient of the basis morphism source_i ->
    middle_j and ``beta[k, j]`` that of middle_j -> T source_k, where both
    lists are the unit-multiplicity expansions of the barcodes.
    """

    source: list[Bar]
    middle: list[Bar]
    c: float
    alpha: Optional[np.ndarray] = None
    beta: Optional[np.ndarray] = None
    unmatched: list[Bar] = field(default_factory=list)

    @property
    def exists(self) -> bool:
        return self.alpha is not None


@dataclass
class InterleavingCertificate:
    a: float
    b: float
    verdict: bool
    forward: Factorization
    backward: Factorization

    @property
    def failing(self) -> Optional[str]:
        """Name of an unsatisfiable factorization, if any."""
        if not self.forward.exists:
            return "forward"
        if not self.backward.exists:
            return "backward"
        return None

    def __bool__(self):
        return self.verdict


def _factor(source: list[Bar], middle: list[Bar], c) -> Factorization:
    long_idx = [i for i, I in enumerate(source) if I.is_ray or _lt(c, I.length)]
    fac = Factorization(source, middle, c)
    alpha = np.zeros((len(middle), len(source)), dtype=np.uint8)
    beta = np.zeros((len(source), len(middle)), dtype=np.uint8)
    if long_idx:
        if not middle:
            fac.unmatched = [source[i] for i in long_idx]
            return fac
        ok = np.array(
            [[covers(source[i], middle[j], c) for j in range(len(middle))] for i in long_idx], dtype=bool
        )
        if not ok.any(axis=1).all():
            fac.unmatched = [source[i] for i, row in zip(long_idx, ok) if not row.any()]
            return fac
        # maximum matching as a min-cost assignment; cost 1 marks a forbidden pair
        rows, cols = linear_sum_assignment(np.where(ok, 0, 1))
        bad = [r for r, col in zip(rows, cols) if not ok[r, col]]
        if bad or len(rows) < len(long_idx):
            matched = {r for r, col in zip(rows, cols) if ok[r, col]}
            fac.unmatched = [source[i] for r, i in enumerate(long_idx) if r not in matched]
            return fac
        for r, col in zip(rows, cols):
            i = long_idx[r]
            alpha[col, i] = 1
            beta[i, col] = 1
    fac.alpha, fac.beta = alpha, beta
    return fac


def is_interleaved(F: Barcode, G: Barcode, a, b) -> InterleavingCertificate:
    """Decide (a, b)-interleaving of F and G.

    Both factorizations are independent: tau_{a+b}(F) through T_a G and
    tau_{a+b}(G) through T_b F.  Morphisms between bars of different degree
    never contribute to the composites that must equal tau, so each
    factorization is the perfect matching of the long bars onto covering
    bars, degree by degree.
    """
    if a < 0 or b < 0:
        raise ValueError("interleaving parameters must be nonnegative")
    c = a + b
    fwd = _factor_graded(F, translate(G, a), c)
    bwd = _factor_graded(G, translate(F, b), c)
    return InterleavingCertificate(a, b, fwd.exists and bwd.exists, fwd, bwd)


def _factor_graded(source: Barcode, middle: Barcode, c) -> Factorization:
    src, mid = source.expanded(), middle.expanded()
    alpha = np.zeros((len(mid), len(src)), dtype=np.uint8)
    beta = np.zeros((len(src), len(mid)), dtype=np.uint8)
    unmatched: list[Bar] = []
    for d in sorted(source.degrees() | middle.degrees()):
        si = [i for i, x in enumerate(src) if x.degree == d]
        mi = [j for j, x in enumerate(mid) if x.degree == d]
        part = _factor([src[i] for i in si], [mid[j] for j in mi], c)
        if not part.exists:
            unmatched.extend(part.unmatched)
            continue
        alpha[np.ix_(mi, si)] = part.alpha
        beta[np.ix_(si, mi)] = part.beta
    if unmatched:
        return Factorization(src, mid, c, unmatched=unmatched)
    return Factorization(src, mid, c, alpha, beta)


def _compose_coeff(I: Bar, J: Bar, K: Bar) -> int:
    """Coefficient of the basis morphism I -> K in (basis J -> K) o (basis I -> J)."""
    if I.degree != J.degree or J.degree != K.degree:
        return 0
    return int(hom0_nonzero(I, J) and hom0_nonzero(J, K) and hom0_nonzero(I, K))


def verify_factorization(fac: Factorization) -> bool:
    """Multiply the witness out over GF(2) and compare with tau_c."""
    if not fac.exists:
        return False
    src, mid, c = fac.source, fac.middle, fac.c
    target = [x.shifted(c) for x in src]
    for j, J in enumerate(mid):
        for i, I in enumerate(src):
            if fac.alpha[j, i] and not (I.degree == J.degree and hom0_nonzero(I, J)):
                return False
        for k, K in enumerate(target):
            if fac.beta[k, j] and not (J.degree == K.degree and hom0_nonzero(J, K)):
                return False
    for k, K in enumerate(target):
        for i, I in enumerate(src):
            total = 0
            for j, J in enumerate(mid):
                if fac.alpha[j, i] and fac.beta[k, j]:
                    total ^= _compose_coeff(I, J, K)
            want = int(i == k and (I.is_ray or _lt(c, I.length)))
            if not (I.degree == K.degree and hom0_nonzero(I, K)):
                continue  # the hom space is zero, so the entry vanishes regardless
            if total != want:
                return False
    return True


def verify_certificate(cert: InterleavingCertificate) -> bool:
    return cert.verdict and verify_factorization(cert.forward) and verify_factorization(cert.backward)


# -- distances -----------------------------------------------------------------

def _differences(F: Barcode, G: Barcode) -> list:
    pts = F.endpoints() + G.endpoints()
    return sorted({x - y for x in pts for y in pts})


def _sum_candidates(F: Barcode, G: Barcode) -> list:
    diffs = [d for d in _differences(F, G) if d >= 0]
    lengths = [b.length for b in list(F) + list(G) if not b.is_ray]
    return sorted({0, *lengths, *(x + y for x in diffs for y in diffs)})


def _feasible_sum(F: Barcode, G: Barcode, c, diffs) -> Optional[tuple]:
    splits = {0, c}
    for d in diffs:
        for a in (d, c - d):
            if 0 <= a <= c:
                splits.add(a)
    for a in sorted(splits):
        if is_interleaved(F, G, a, c - a).verdict:
            return a, c - a
    return None


def interleaving_split(F: Barcode, G: Barcode, c) -> Optional[tuple]:
    """Some (a, b) with a + b = c at which F and G interleave, or None.

    For fixed c each constraint flips only where a or c - a equals an
    endpoint difference, so those splits are exhaustive.
    """
    return _feasible_sum(F, G, c, _differences(F, G))


def interleaving_distance(F: Barcode, G: Barcode, method: str = "enumerate", tol: float = 1e-9):
    """inf{a + b : (F, G) is (a, b)-interleaving}; ``math.inf`` if none.

    ``enumerate`` searches the finite candidate set of sums of two
    endpoint differences (every matching constraint is a lower bound on a
    or on b alone, so the optimum lies there).  ``bisect`` is a tolerance
    based fallback over the same split candidates.
    """
    if not F and not G:
        return 0
    diffs = [d for d in _differences(F, G)]
    sums = _sum_candidates(F, G)
    if _feasible_sum(F, G, sums[-1], diffs) is None:
        return INF
    if method == "enumerate":
        lo, hi = 0, len(sums) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if _feasible_sum(F, G, sums[mid], diffs) is not None:
                hi = mid
            else:
                lo = mid + 1
        return sums[lo]
    if method == "bisect":
        lo, hi = 0.0, float(sums[-1])
        if _feasible_sum(F, G, 0, diffs) is not None:
            return 0.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if _feasible_sum(F, G, mid, diffs) is not None:
                hi = mid
            else:
                lo = mid
        return hi
    raise ValueError(f"unknown method {method!r}")


def distance_to_zero(F: Barcode):
    """d(0, F): the longest bar, infinite when a ray is present."""
    if any(b.is_ray for b in F):
        return INF
    return max((b.length for b in F), default=0)


# -- epigraph sheaves ----------------------------------------------------------

@dataclass
class EpigraphSheaf:
    """Sampled model of the constant sheaf on {z >= V(q)} over a box in q-space."""

    axes: tuple
    values: np.ndarray

    def __post_init__(self):
        self.axes = tuple(np.asarray(ax, dtype=float) for ax in self.axes)
        self.values = np.asarray(self.values, dtype=float)
        if any(len(ax) < 2 for ax in self.axes):
            raise ValueError("each grid axis needs at least 2 nodes")
        if any(np.any(np.diff(ax) <= 0) for ax in self.axes):
            raise ValueError("grid axes must be strictly increasing")
        if self.values.shape != tuple(len(ax) for ax in self.axes):
            raise ValueError("values do not match the grid shape")

    @classmethod
    def sample(cls, func, *axes) -> "EpigraphSheaf":
        mesh = np.meshgrid(*axes, indexing="ij")
        return cls(tuple(axes), func(*mesh))

    @classmethod
    def zero_like(cls, other: "EpigraphSheaf") -> "EpigraphSheaf":
        return cls(other.axes, np.zeros_like(other.values))

    def same_grid(self, other: "EpigraphSheaf") -> bool:
        return len(self.axes) == len(other.axes) and all(
            x.shape == y.shape and np.array_equal(x, y) for x, y in zip(self.axes, other.axes)
        )

    def fiber(self, index) -> Barcode:
        return Barcode([Bar(float(self.values[index]))])


def epigraph_distance(V: EpigraphSheaf, W: EpigraphSheaf) -> float:
    if not V.same_grid(W):
        raise ValueError("epigraph sheaves live on different grids")
    diff = W.values - V.values
    return max(float(diff.max()), 0.0) + max(float((-diff).max()), 0.0)


def epigraph_distance_by_interleaving(V: EpigraphSheaf, W: EpigraphSheaf) -> float:
    """Same quantity through fiberwise ``is_interleaved`` with common (a, b).

    Candidates for a and b are the fiber gaps; feasibility is monotone in b
    for fixed a, so each a is paired with the least feasible b by bisection.
    """
    if not V.same_grid(W):
        raise ValueError("epigraph sheaves live on different grids")
    fibers = [(V.fiber(ix), W.fiber(ix)) for ix in np.ndindex(V.values.shape)]
    gaps = sorted({0.0, *np.abs(W.values - V.values).ravel().tolist()})

    def ok(a, b):
        return all(is_interleaved(f, g, a, b).verdict for f, g in fibers)

    best = INF
    for a in gaps:
        if not ok(a, gaps[-1]):
            continue
        lo, hi = 0, len(gaps) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if ok(a, gaps[mid]):
                hi = mid
            else:
                lo = mid + 1
        best = min(best, a + gaps[lo])
    return best
