"""Brute-force constructible sheaves on the real line.

A sheaf constructible with respect to breakpoints ``x_0 < ... < x_{k-1}`` is
a representation of the cell poset: cells are alternately open intervals
``e_0, e_1, ..., e_k`` (the two ends unbounded) and points ``v_i = {x_i}``,
with generization maps ``F(v_i) -> F(e_i)`` (left) and ``F(v_i) -> F(e_{i+1})``
(right).  Cell ``2i`` is ``e_i`` and cell ``2i + 1`` is ``v_i``.

Everything here is exact: coordinates are ``Fraction`` (floats convert
exactly) and linear algebra is over GF(2).  Nothing in this module uses the
closed-form rules of ``sheafhofer.barcode``; it is the independent side of
those checks.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import gf2
from .barcode import Bar, Barcode

__all__ = [
    "OracleError",
    "CellLayer",
    "CellComplexSheaf",
    "build_cellular",
    "skyscraper",
    "refine",
    "translate_cellular",
    "ext_layers",
    "oracle_hom",
    "hom_basis",
    "compose",
    "is_zero_morphism",
    "tau_morphism",
    "oracle_tau_factors",
    "oracle_tau",
    "oracle_convolve",
    "window_stable_convolve",
]


class OracleError(ValueError):
    pass


def _fr(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _zeros(r, c):
    return np.zeros((r, c), dtype=np.uint8)


@dataclass
class CellLayer:
    """One sheaf (a single cohomological degree) on the cell structure.

    ``left[i]`` and ``right[i]`` are the generization matrices out of the
    point ``v_i``, shaped ``(dim target, dim source)``.
    """

    stalks: list
    left: list
    right: list

    def ncells(self):
        return len(self.stalks)

    def check(self):
        k = (len(self.stalks) - 1) // 2
        if len(self.left) != k or len(self.right) != k:
            raise OracleError("wrong number of generization maps")
        for i in range(k):
            v = self.stalks[2 * i + 1]
            if self.left[i].shape != (self.stalks[2 * i], v) or self.right[i].shape != (self.stalks[2 * i + 2], v):
                raise OracleError(f"generization map at breakpoint {i} has inconsistent shape")

    def is_zero(self):
        return not any(self.stalks)


@dataclass
class CellComplexSheaf:
    """Graded cellular sheaf: a direct sum of shifted layers."""

    breakpoints: tuple
    window: tuple
    layers: dict = field(default_factory=dict)
    clipped: bool = False

    def __post_init__(self):
        self.breakpoints = tuple(_fr(x) for x in self.breakpoints)
        self.window = (_fr(self.window[0]), _fr(self.window[1]))
        if any(b <= a for a, b in zip(self.breakpoints, self.breakpoints[1:])):
            raise OracleError("breakpoints must be strictly increasing")
        for layer in self.layers.values():
            if layer.ncells() != 2 * len(self.breakpoints) + 1:
                raise OracleError("layer does not match the cell structure")
            layer.check()

    @property
    def ncells(self):
        return 2 * len(self.breakpoints) + 1

    def cell_of(self, z) -> int:
        z = _fr(z)
        i = bisect.bisect_left(self.breakpoints, z)
        if i < len(self.breakpoints) and self.breakpoints[i] == z:
            return 2 * i + 1
        return 2 * i

    def representative(self, cell: int) -> Fraction:
        bp = self.breakpoints
        if cell % 2 == 1:
            return bp[cell // 2]
        i = cell // 2
        if not bp:
            return Fraction(0)
        if i == 0:
            return bp[0] - 1
        if i == len(bp):
            return bp[-1] + 1
        return (bp[i - 1] + bp[i]) / 2

    def bounded(self) -> bool:
        last = self.ncells - 1
        return all(layer.stalks[0] == 0 and layer.stalks[last] == 0 for layer in self.layers.values())

    def nonzero_layers(self):
        return {d: L for d, L in sorted(self.layers.items()) if not L.is_zero()}


# -- construction --------------------------------------------------------------

def _interval_layer(breakpoints, bars, clip_at=None):
    """Direct sum of constant sheaves on half-open intervals (one basis vector per bar)."""
    ncells = 2 * len(breakpoints) + 1
    cells = [(i // 2, i % 2) for i in range(ncells)]
    members = []
    for birth, death in bars:
        if death == math.inf and clip_at is not None:
            death = clip_at
        inside = []
        for idx, (j, is_pt) in enumerate(cells):
            if is_pt:
                x = breakpoints[j]
                inside.append(birth <= x < death)
            else:
                lo = breakpoints[j - 1] if j > 0 else None
                hi = breakpoints[j] if j < len(breakpoints) else None
                ok_lo = lo is not None and birth <= lo
                ok_hi = death == math.inf or (hi is not None and hi <= death)
                inside.append(ok_lo and ok_hi)
        members.append(inside)
    basis = [[b for b in range(len(bars)) if members[b][c]] for c in range(ncells)]
    stalks = [len(x) for x in basis]

    def incl(src, dst):
        m = _zeros(len(basis[dst]), len(basis[src]))
        for col, b in enumerate(basis[src]):
            if b in basis[dst]:
                m[basis[dst].index(b), col] = 1
        return m

    k = len(breakpoints)
    left = [incl(2 * i + 1, 2 * i) for i in range(k)]
    right = [incl(2 * i + 1, 2 * i + 2) for i in range(k)]
    return CellLayer(stalks, left, right)


def build_cellular(F: Barcode, window, clip: bool = False) -> CellComplexSheaf:
    """Cellular model of a barcode on breakpoints = window ends and bar endpoints.

    Rays are modelled exactly by the unbounded right cell; with ``clip=True``
    they are cut at the right window end instead (needed for convolution).
    """
    lo, hi = _fr(window[0]), _fr(window[1])
    if not lo < hi:
        raise OracleError("empty window")
    pts = {lo, hi}
    has_ray = False
    for b in F:
        for x in (b.birth, b.death):
            if x == math.inf:
                has_ray = True
                continue
            if not lo <= _fr(x) <= hi:
                raise OracleError(f"endpoint {x} lies outside the window [{lo}, {hi}]")
            pts.add(_fr(x))
    bps = tuple(sorted(pts))
    layers = {}
    for d in sorted(F.degrees()):
        bars = [(_fr(b.birth), b.death if b.death == math.inf else _fr(b.death)) for b in F.in_degree(d).expanded()]
        layers[d] = _interval_layer(bps, bars, clip_at=hi if clip else None)
    return CellComplexSheaf(bps, (lo, hi), layers, clipped=clip and has_ray)


def skyscraper(point, window, degree: int = 0) -> CellComplexSheaf:
    """The sheaf k on the single point (unit for convolution when point = 0)."""
    lo, hi, p = _fr(window[0]), _fr(window[1]), _fr(point)
    bps = tuple(sorted({lo, hi, p}))
    i = bps.index(p)
    stalks = [0] * (2 * len(bps) + 1)
    stalks[2 * i + 1] = 1
    left = [_zeros(stalks[2 * j], stalks[2 * j + 1]) for j in range(len(bps))]
    right = [_zeros(stalks[2 * j + 2], stalks[2 * j + 1]) for j in range(len(bps))]
    return CellComplexSheaf(bps, (lo, hi), {degree: CellLayer(stalks, left, right)})


def _refine_layer(sheaf: CellComplexSheaf, layer: CellLayer, new_bps):
    """Pull a layer back to a finer cell structure (new points inside old edges)."""
    old = sheaf
    ncells = 2 * len(new_bps) + 1
    src = []
    for c in range(ncells):
        if c % 2 == 1:
            src.append(old.cell_of(new_bps[c // 2]))
        else:
            tmp = CellComplexSheaf.__new__(CellComplexSheaf)
            tmp.breakpoints = new_bps
            src.append(old.cell_of(tmp.representative(c)))
    stalks = [layer.stalks[s] for s in src]

    def gen(s_from, s_to):
        if s_from == s_to:
            return np.eye(layer.stalks[s_from], dtype=np.uint8)
        i = s_from // 2
        if s_to == s_from - 1:
            return layer.left[i]
        if s_to == s_from + 1:
            return layer.right[i]
        raise OracleError("refinement is not compatible with the cell structure")

    k = len(new_bps)
    left = [gen(src[2 * i + 1], src[2 * i]) for i in range(k)]
    right = [gen(src[2 * i + 1], src[2 * i + 2]) for i in range(k)]
    return CellLayer(stalks, left, right)


def refine(F: CellComplexSheaf, breakpoints) -> CellComplexSheaf:
    new = tuple(sorted(set(_fr(x) for x in breakpoints) | set(F.breakpoints)))
    layers = {d: _refine_layer(F, L, new) for d, L in F.layers.items()}
    return CellComplexSheaf(new, F.window, layers, F.clipped)


def translate_cellular(F: CellComplexSheaf, c) -> CellComplexSheaf:
    c = _fr(c)
    return CellComplexSheaf(
        tuple(x + c for x in F.breakpoints),
        (F.window[0] + c, F.window[1] + c),
        {d: CellLayer(list(L.stalks), list(L.left), list(L.right)) for d, L in F.layers.items()},
        F.clipped,
    )


def _common(F: CellComplexSheaf, G: CellComplexSheaf):
    bps = sorted(set(F.breakpoints) | set(G.breakpoints))
    return refine(F, bps), refine(G, bps)


# -- hom -----------------------------------------------------------------------

def _hom_differential(M: CellLayer, N: CellLayer):
    """Matrix of C^0 -> C^1 for the zigzag hom complex, plus block offsets."""
    ncells = M.ncells()
    off0 = [0]
    for c in range(ncells):
        off0.append(off0[-1] + N.stalks[c] * M.stalks[c])
    arrows = []
    for i in range((ncells - 1) // 2):
        arrows.append((2 * i + 1, 2 * i, M.left[i], N.left[i]))
        arrows.append((2 * i + 1, 2 * i + 2, M.right[i], N.right[i]))
    off1 = [0]
    for v, e, _, _ in arrows:
        off1.append(off1[-1] + N.stalks[e] * M.stalks[v])
    D = _zeros(off1[-1], off0[-1])
    for a, (v, e, Mm, Nm) in enumerate(arrows):
        mv, ne = M.stalks[v], N.stalks[e]
        if mv == 0 or ne == 0:
            continue
        r0 = off1[a]
        # phi_v -> N_{v->e} phi_v ; phi_e -> phi_e M_{v->e}   (vectorized row-major)
        if N.stalks[v]:
            D[r0 : r0 + ne * mv, off0[v] : off0[v + 1]] ^= np.kron(Nm, np.eye(mv, dtype=np.uint8))
        if M.stalks[e]:
            D[r0 : r0 + ne * mv, off0[e] : off0[e + 1]] ^= np.kron(np.eye(ne, dtype=np.uint8), Mm.T)
    return D, off0


def ext_layers(M: CellLayer, N: CellLayer) -> tuple[int, int]:
    """(dim Ext^0, dim Ext^1) between two single-degree layers."""
    D, off0 = _hom_differential(M, N)
    r = gf2.rank(D) if D.size else 0
    return off0[-1] - r, D.shape[0] - r


def oracle_hom(F: CellComplexSheaf, G: CellComplexSheaf) -> dict[int, int]:
    """Graded dimensions ``k -> dim Hom(F, G[k])``, zero entries dropped."""
    if F.window != G.window:
        raise OracleError("oracle_hom needs a common window")
    Fr, Gr = _common(F, G)
    out: dict[int, int] = {}
    for p, M in Fr.layers.items():
        for q, N in Gr.layers.items():
            e0, e1 = ext_layers(M, N)
            for i, e in ((0, e0), (1, e1)):
                if e:
                    k = i + q - p
                    out[k] = out.get(k, 0) + e
    return dict(sorted(out.items()))


def hom_basis(M: CellLayer, N: CellLayer) -> list[list[np.ndarray]]:
    """Basis of degree-0 morphisms M -> N as per-cell matrices."""
    D, off0 = _hom_differential(M, N)
    if off0[-1] == 0:
        return []
    ns = gf2.nullspace(D) if D.shape[0] else np.eye(off0[-1], dtype=np.uint8)
    out = []
    for vec in ns:
        out.append(
            [vec[off0[c] : off0[c + 1]].reshape(N.stalks[c], M.stalks[c]) for c in range(M.ncells())]
        )
    return out


def compose(g, f):
    """Cellwise composite g o f of two morphisms given as per-cell matrices."""
    return [gf2.matmul(gc, fc) if gc.size and fc.size else _zeros(gc.shape[0], fc.shape[1]) for gc, fc in zip(g, f)]


def is_zero_morphism(f) -> bool:
    return not any(m.any() for m in f)


# -- tau -----------------------------------------------------------------------

def _check_tamarkin(layer: CellLayer):
    for i, R in enumerate(layer.right):
        if R.shape[0] != R.shape[1] or (R.size and gf2.rank(R) != R.shape[0]):
            raise OracleError(f"layer is not of Tamarkin type at breakpoint {i}")


def _step_left(layer: CellLayer, cell: int):
    """Matrix moving a stalk one cell to the left (backward propagation)."""
    if cell % 2 == 1:
        return layer.left[cell // 2]
    i = cell // 2 - 1  # left endpoint v_i of e_{i+1}
    R = layer.right[i]
    return gf2.inverse(R) if R.size else _zeros(R.shape[1], R.shape[0])


def _transport(layer: CellLayer, src: int, dst: int):
    m = np.eye(layer.stalks[src], dtype=np.uint8)
    for cell in range(src, dst, -1):
        m = gf2.matmul(_step_left(layer, cell), m) if m.size else _zeros(layer.stalks[cell - 1], m.shape[1])
    return m


def tau_morphism(F: CellComplexSheaf, c, extra_breakpoints=()):
    """The canonical morphism F -> T_c F on the common refinement.

    Returns ``(refined F, refined T_c F, {degree: per-cell matrices})``.  The
    component at a cell with representative z is the backward propagation
    F_z -> F_{z-c}; it is checked to commute with all generization maps.
    """
    c = _fr(c)
    if c < 0:
        raise OracleError("tau_c needs c >= 0")
    T = translate_cellular(F, c)
    bps = sorted(set(F.breakpoints) | set(T.breakpoints) | {_fr(x) for x in extra_breakpoints})
    Fr, Tr = refine(F, bps), refine(T, bps)
    comps = {}
    for d, layer in F.layers.items():
        _check_tamarkin(layer)
        mats = []
        for cell in range(Fr.ncells):
            z = Fr.representative(cell)
            mats.append(_transport(layer, F.cell_of(z), F.cell_of(z - c)))
        for i in range(len(bps)):
            v = 2 * i + 1
            for e, Fm, Tm in ((v - 1, Fr.layers[d].left[i], Tr.layers[d].left[i]), (v + 1, Fr.layers[d].right[i], Tr.layers[d].right[i])):
                lhs = gf2.matmul(Tm, mats[v]) if Tm.size and mats[v].size else _zeros(Tm.shape[0], mats[v].shape[1])
                rhs = gf2.matmul(mats[e], Fm) if mats[e].size and Fm.size else _zeros(mats[e].shape[0], Fm.shape[1])
                if not np.array_equal(lhs, rhs):
                    raise OracleError("backward propagation is not a sheaf morphism")
        comps[d] = mats
    return Fr, Tr, comps


def _support_top(F: CellComplexSheaf):
    """Largest breakpoint strictly inside the window where some stalk is nonzero nearby."""
    top = None
    for layer in F.layers.values():
        for i, x in enumerate(F.breakpoints):
            if x >= F.window[1]:
                continue
            if any(layer.stalks[c] for c in (2 * i, 2 * i + 1, 2 * i + 2)):
                top = x if top is None else max(top, x)
    return top


def oracle_tau(F: CellComplexSheaf, c, degree=None) -> int:
    """Rank of tau_c(F): the number of interval summands of its image.

    Zero exactly when tau_c(F) is the zero morphism.  ``degree`` restricts
    the count to one stored degree.
    """
    c = _fr(c)
    top = _support_top(F)
    if top is not None and top + c > F.window[1]:
        raise OracleError(f"translate by {c} leaves the window [{F.window[0]}, {F.window[1]}]")
    Fr, Tr, comps = tau_morphism(F, c)
    total = 0
    for d, mats in comps.items():
        if degree is not None and d != degree:
            continue
        layer = Tr.layers[d]
        prev = None
        for e in reversed(range(0, Fr.ncells, 2)):
            r = gf2.rank(mats[e]) if mats[e].size else 0
            total += r
            if prev is not None and r and mats[prev].size:
                # summands already counted on the edge to the right
                step = _transport(layer, prev, e)
                if step.size:
                    total -= gf2.rank(gf2.matmul(step, mats[prev]))
            prev = e
    return total


def oracle_tau_factors(F: CellComplexSheaf, G: CellComplexSheaf, a, c, max_alpha: int = 1 << 14) -> bool:
    """Does tau_c(F) factor as F -> T_a G -> T_c F?  Exhaustive over alpha.

    Cross-degree components compose to zero on the diagonal, so the search
    runs degree by degree.  Every alpha in Hom(F, T_a G) is enumerated; for
    each, solvability of beta o alpha = tau_c is a linear system in beta.
    """
    a, c = _fr(a), _fr(c)
    TG = translate_cellular(G, a)
    TF = translate_cellular(F, c)
    bps = sorted(set(F.breakpoints) | set(TG.breakpoints) | set(TF.breakpoints))
    Fr, _, taus = tau_morphism(F, c, bps)
    Gr, Pr = refine(TG, bps), refine(TF, bps)
    for d, tau in taus.items():
        M, P = Fr.layers[d], Pr.layers[d]
        if d not in Gr.layers:
            N = CellLayer([0] * M.ncells(), [_zeros(0, 0) for _ in M.left], [_zeros(0, 0) for _ in M.right])
        else:
            N = Gr.layers[d]
        target = np.concatenate([m.ravel() for m in tau]) if tau else np.zeros(0, np.uint8)
        if not target.any():
            continue
        A = hom_basis(M, N)
        B = hom_basis(N, P)
        if not A or not B:
            return False
        if len(A) > 14 or (1 << len(A)) > max_alpha:
            raise OracleError("hom space too large for exhaustive search")
        found = False
        for bits in range(1, 1 << len(A)):
            alpha = None
            for k, basis in enumerate(A):
                if bits >> k & 1:
                    alpha = basis if alpha is None else [x ^ y for x, y in zip(alpha, basis)]
            cols = [np.concatenate([m.ravel() for m in compose(b, alpha)]) for b in B]
            if gf2.solve(np.stack(cols, axis=1), target) is not None:
                found = True
                break
        if not found:
            return False
    return True


# -- convolution ---------------------------------------------------------------

class _Plane:
    """Cells of the plane (x, t = x + y) cut by x = x_i, t - x = y_j and t = t_k.

    Inside an open horizontal slab the vertical and diagonal lines do not
    cross (they meet only on the lines t = t_k), so each slab is a row of
    trapezoids/triangles and each horizontal line a row of points and
    segments.
    """

    def __init__(self, M: CellComplexSheaf, N: CellComplexSheaf, ml: CellLayer, nl: CellLayer):
        self.M, self.N, self.ml, self.nl = M, N, ml, nl
        xs, ys = M.breakpoints, N.breakpoints
        self.ts = sorted({x + y for x in xs for y in ys})
        # lines as (kind, value): position at height t
        self.lines = [("v", x) for x in xs] + [("d", y) for y in ys]
        self.line_cells = []  # per k: (vertex xs, edge (x_lo, x_hi) pairs)
        for t in self.ts:
            X = sorted({x for x in xs} | {t - y for y in ys})
            self.line_cells.append(X)
        self.slab_order = []
        for k in range(len(self.ts) - 1):
            tm = (self.ts[k] + self.ts[k + 1]) / 2
            order = sorted(self.lines, key=lambda L: self._pos(L, tm))
            self.slab_order.append(order)

    @staticmethod
    def _pos(L, t):
        return L[1] if L[0] == "v" else t - L[1]

    def product_cell(self, x, t):
        return self.M.cell_of(x), self.N.cell_of(t - x)

    def stalk(self, pc):
        return self.ml.stalks[pc[0]] * self.nl.stalks[pc[1]]

    def _gen1(self, layer, a, b):
        if a == b:
            return np.eye(layer.stalks[a], dtype=np.uint8)
        i = a // 2
        if a % 2 == 1 and b == a - 1:
            return layer.left[i]
        if a % 2 == 1 and b == a + 1:
            return layer.right[i]
        raise OracleError("cells are not incident")

    def gen(self, pa, pb):
        A = self._gen1(self.ml, pa[0], pb[0])
        B = self._gen1(self.nl, pa[1], pb[1])
        return np.kron(A, B)

    # cell enumeration restricted to a range of line indices / slabs
    def cells(self, k_lines, k_slabs):
        """Cells by dimension; each item is (key, point (x, t), product cell)."""
        c0, c1, c2 = [], [], []
        for k in k_lines:
            t = self.ts[k]
            X = self.line_cells[k]
            for x in X:
                c0.append((("pt", k, x), self.product_cell(x, t)))
            for a, b in zip(X, X[1:]):
                c1.append((("he", k, a, b), self.product_cell((a + b) / 2, t)))
        for k in k_slabs:
            tm = (self.ts[k] + self.ts[k + 1]) / 2
            order = self.slab_order[k]
            for j, L in enumerate(order):
                c1.append((("seg", k, L), self.product_cell(self._pos(L, tm), tm)))
            for j in range(len(order) - 1):
                xm = (self._pos(order[j], tm) + self._pos(order[j + 1], tm)) / 2
                c2.append((("face", k, j), self.product_cell(xm, tm)))
        keep = lambda cs: [c for c in cs if self.stalk(c[1])]
        return keep(c0), keep(c1), keep(c2)

    def cofaces(self, key):
        """Codimension-one cofaces of a cell (regardless of support)."""
        kind = key[0]
        out = []
        if kind == "pt":
            _, k, x = key
            X = self.line_cells[k]
            i = X.index(x)
            if i > 0:
                out.append(("he", k, X[i - 1], x))
            if i + 1 < len(X):
                out.append(("he", k, x, X[i + 1]))
            for ks in (k - 1, k):
                if 0 <= ks < len(self.slab_order):
                    for L in self.slab_order[ks]:
                        if self._pos(L, self.ts[k]) == x:
                            out.append(("seg", ks, L))
        elif kind == "he":
            _, k, a, b = key
            for ks, tb in ((k, k), (k - 1, k)):
                if not 0 <= ks < len(self.slab_order):
                    continue
                order = self.slab_order[ks]
                for j in range(len(order) - 1):
                    lo = self._pos(order[j], self.ts[tb])
                    hi = self._pos(order[j + 1], self.ts[tb])
                    if (lo, hi) == (a, b):
                        out.append(("face", ks, j))
        elif kind == "seg":
            _, ks, L = key
            j = self.slab_order[ks].index(L)
            if j > 0:
                out.append(("face", ks, j - 1))
            if j + 1 < len(self.slab_order[ks]):
                out.append(("face", ks, j))
        return out

    def assemble(self):
        """Global coboundaries with cells sorted by height (line k -> 2k, slab k -> 2k+1)."""
        K = len(self.ts)
        levels = self.cells(range(K), range(K - 1))

        def height(key):
            return 2 * key[1] + (0 if key[0] in ("pt", "he") else 1)

        self.pos, self.hbounds = [], []
        for cs in levels:
            cs = sorted(cs, key=lambda c: height(c[0]))
            pos, off = {}, 0
            starts = [0] * (2 * K + 1)
            for key, pc in cs:
                pos[key] = (off, pc)
                off += self.stalk(pc)
                starts[height(key) + 1] = off
            for h in range(1, len(starts)):
                starts[h] = max(starts[h], starts[h - 1])
            self.pos.append((pos, off))
            self.hbounds.append(starts)
        self.D = []
        for d in (0, 1):
            src_pos, n_src = self.pos[d]
            dst_pos, n_dst = self.pos[d + 1]
            D = _zeros(n_dst, n_src)
            for key, (o, pc) in src_pos.items():
                for cf in self.cofaces(key):
                    if cf in dst_pos:
                        o2, pc2 = dst_pos[cf]
                        blk = self.gen(pc, pc2)
                        D[o2 : o2 + blk.shape[0], o : o + blk.shape[1]] ^= blk
            self.D.append(D)
        if self.D[0].size and self.D[1].size and gf2.matmul(self.D[1], self.D[0]).any():
            raise OracleError("cellular coboundary does not square to zero")

    def _span(self, d, h0, h1):
        st = self.hbounds[d]
        return st[h0], st[h1 + 1]

    def cochain_ranks(self, h0, h1):
        """dims H^0, H^1, H^2 of compactly supported cochains on heights h0..h1."""
        s0, s1, s2 = (self._span(d, h0, h1) for d in range(3))
        A = self.D[0][s1[0] : s1[1], s0[0] : s0[1]]
        B = self.D[1][s2[0] : s2[1], s1[0] : s1[1]]
        n0, n1, n2 = s0[1] - s0[0], s1[1] - s1[0], s2[1] - s2[0]
        r0 = gf2.rank(A) if A.size else 0
        r1 = gf2.rank(B) if B.size else 0
        return (n0 - r0, n1 - r0 - r1, n2 - r1)

    def stalk_dims(self, k):
        """Cohomology of the fiber over the breakpoint sum t_k."""
        return self.cochain_ranks(2 * k, 2 * k)[:2]

    def slab_stalk_dims(self, k):
        """Cohomology of a fiber inside slab k: segments in degree 0, faces in degree 1."""
        return self.cochain_ranks(2 * k + 1, 2 * k + 1)[1:]


def _convolve_layers(M, N, ml, nl) -> Barcode:
    P = _Plane(M, N, ml, nl)
    P.assemble()
    ts = P.ts
    K = len(ts)
    S = [P.stalk_dims(k) for k in range(K)]  # S[k][m]: degree-m bars alive at t_k

    # B[m][(i, j)] = #{degree-m bars with a <= t_i < b <= t_j}, from strips (t_i, t_j]
    B = {0: {}, 1: {}}
    Hc = {}
    for i in range(K):
        for j in range(i + 1, K):
            h = P.cochain_ranks(2 * i + 1, 2 * j)
            Hc[i, j] = h
            b0 = h[0] - (S[j][0] - S[i][0])
            b1 = h[2]
            if b0 < 0 or b1 < 0 or b0 + b1 != h[1] - (S[j][1] - S[i][1]):
                raise OracleError("strip cohomology is inconsistent with a half-open barcode")
            B[0][i, j], B[1][i, j] = b0, b1

    def getB(m, i, j):
        if i < 0 or j <= i:
            return 0
        return B[m][i, j]

    bars = []
    for m in (0, 1):
        for i in range(K):
            for j in range(i + 1, K):
                n = (getB(m, i, j) - getB(m, i, j - 1)) - (getB(m, i - 1, j) - getB(m, i - 1, j - 1))
                if n < 0:
                    raise OracleError("negative bar multiplicity")
                if n:
                    bars.append(Bar(ts[i], ts[j], m, n))
    out = Barcode(bars)
    _check_reconstruction(P, out, S, Hc)
    return out


def _check_reconstruction(P, out: Barcode, S, Hc):
    ts = P.ts
    for k, t in enumerate(ts):
        pred = [sum(b.mult for b in out if b.degree == m and b.birth <= t < b.death) for m in (0, 1)]
        if tuple(pred) != tuple(S[k]):
            raise OracleError("reconstructed barcode misses stalk dimensions")
    for k in range(len(ts) - 1):
        tm = (ts[k] + ts[k + 1]) / 2
        pred = tuple(sum(b.mult for b in out if b.degree == m and b.birth <= tm < b.death) for m in (0, 1))
        if pred != P.slab_stalk_dims(k):
            raise OracleError("reconstructed barcode misses generic stalk dimensions")


def oracle_convolve(F: CellComplexSheaf, G: CellComplexSheaf) -> Barcode:
    """Barcode of F * G = Rs_!(F x G) for the sum map s(z1, z2) = z1 + z2.

    Stalks are compactly supported cochains of the fibers; bars are read off
    the compactly supported cohomology of the half-open strips
    s^{-1}((t_i, t_j]) through proper base change.
    """
    for X in (F, G):
        if not X.bounded():
            raise OracleError("convolution needs bounded supports (clip rays first)")
    bars = []
    for p, ml in F.nonzero_layers().items():
        for q, nl in G.nonzero_layers().items():
            part = _convolve_layers(F, G, ml, nl)
            bars.extend(part.shift_degree(p + q))
    return Barcode(bars)


def window_stable_convolve(F: Barcode, G: Barcode, window) -> Barcode:
    """Convolution of barcodes with rays clipped, keeping only window-stable bars.

    The window's right end is doubled (away from its left end); bars that do
    not move are reported, matching the clip-flag contract.
    """
    lo, hi = _fr(window[0]), _fr(window[1])
    first = oracle_convolve(build_cellular(F, (lo, hi), clip=True), build_cellular(G, (lo, hi), clip=True))
    wide = (lo, hi + (hi - lo))
    second = oracle_convolve(build_cellular(F, wide, clip=True), build_cellular(G, wide, clip=True))
    keep = {b.key(): b.mult for b in second}
    return Barcode(Bar(b.birth, b.death, b.degree, min(b.mult, keep[b.key()])) for b in first if b.key() in keep)
