import math
from fractions import Fraction as Fr

import numpy as np
import pytest

from sheafhofer import cellular as cel
from sheafhofer import golden
from sheafhofer.barcode import Bar, Barcode, translate

from conftest import random_bar, random_barcode

INF = math.inf


def test_build_interval_model():
    F = cel.build_cellular(Barcode([Bar(0, 1)]), (-1, 2))
    assert F.breakpoints == (-1, 0, 1, 2)
    # cells: e0 v(-1) e1 v(0) e2 v(1) e3 v(2) e4
    assert F.layers[0].stalks == [0, 0, 0, 1, 1, 0, 0, 0, 0]
    assert F.bounded()


def test_build_empty_and_graded():
    E = cel.build_cellular(Barcode(), (0, 1))
    assert E.layers == {}
    G = cel.build_cellular(Barcode([Bar(0, 2), Bar(1, 3, -1)]), (-1, 4))
    assert sorted(G.layers) == [-1, 0]
    assert G.layers[-1].stalks[G.cell_of(Fr(3, 2))] == 1
    assert G.layers[0].stalks[G.cell_of(Fr(5, 2))] == 0


def test_build_errors():
    with pytest.raises(cel.OracleError):
        cel.build_cellular(Barcode([Bar(0, 5)]), (-1, 2))
    with pytest.raises(cel.OracleError):
        cel.CellComplexSheaf((1, 0), (0, 1))
    bad = cel.CellLayer([1, 1, 1], [np.zeros((2, 1), np.uint8)], [np.zeros((1, 1), np.uint8)])
    with pytest.raises(cel.OracleError):
        cel.CellComplexSheaf((0,), (0, 1), {0: bad})


def test_ray_models():
    exact = cel.build_cellular(Barcode([Bar(0, INF)]), (-1, 2))
    assert not exact.bounded() and not exact.clipped
    clip = cel.build_cellular(Barcode([Bar(0, INF)]), (-1, 2), clip=True)
    assert clip.bounded() and clip.clipped


def test_hom_examples():
    w = (-1, 7)
    k01 = cel.build_cellular(Barcode([Bar(0, 1)]), w)
    assert cel.oracle_hom(k01, k01)[0] >= 1
    assert cel.oracle_hom(cel.build_cellular(Barcode([Bar(0, 2)]), w), cel.build_cellular(Barcode([Bar(1, 3)]), w)) == {0: 1}
    assert cel.oracle_hom(k01, cel.build_cellular(Barcode([Bar(5, 6)]), w)) == {}
    with pytest.raises(cel.OracleError):
        cel.oracle_hom(k01, cel.build_cellular(Barcode([Bar(0, 1)]), (-2, 7)))


def test_endomorphisms_nonzero(rng):
    for _ in range(40):
        F = random_barcode(rng, 3)
        if not F:
            continue
        M = cel.build_cellular(F, (-1, 20))
        assert cel.oracle_hom(M, M).get(0, 0) >= 1


def test_tau_examples():
    w = (-1, 2)
    k01 = cel.build_cellular(Barcode([Bar(0, 1)]), w)
    assert cel.oracle_tau(k01, 0) == 1
    assert cel.oracle_tau(k01, 1) == 0
    ray = cel.build_cellular(Barcode([Bar(0, INF)]), w, clip=True)
    assert cel.oracle_tau(ray, Fr(1, 2)) == 1
    with pytest.raises(cel.OracleError):
        cel.oracle_tau(k01, 3)


def test_tau_rank_nonincreasing(rng):
    for _ in range(40):
        F = cel.build_cellular(random_barcode(rng, 3), (-1, 30))
        ranks = [cel.oracle_tau(F, Fr(k, 2)) for k in range(0, 12)]
        assert all(x >= y for x, y in zip(ranks, ranks[1:]))


def test_tau_rank_counts_surviving_bars():
    F = Barcode([Bar(0, 1), Bar(0, 3), Bar(2, 6, 1)])
    M = cel.build_cellular(F, (-1, 12))
    assert [cel.oracle_tau(M, c) for c in (0, 1, 2, 3, 4)] == [3, 2, 2, 1, 0]
    assert cel.oracle_tau(M, 2, degree=1) == 1


def test_tau_is_a_morphism_on_mixed_models():
    F = cel.build_cellular(Barcode([Bar(0, 2, 0, 2), Bar(1, INF), Bar(Fr(1, 2), 3, -1)]), (-1, 9))
    Fr_, Tr_, comps = cel.tau_morphism(F, Fr(3, 2))
    assert set(comps) == {-1, 0}


def test_factorization_oracle_matches_examples():
    w = (-1, 20)
    zero = cel.build_cellular(Barcode(), w)
    k01 = cel.build_cellular(Barcode([Bar(0, 1)]), w)
    ray = cel.build_cellular(Barcode([Bar(0, INF)]), w)
    assert cel.oracle_tau_factors(k01, zero, 0, 1)
    assert not cel.oracle_tau_factors(k01, zero, 0, Fr(1, 2))
    assert not cel.oracle_tau_factors(ray, zero, 3, 7)
    assert cel.oracle_tau_factors(k01, k01, 0, 0)


# -- convolution ------------------------------------------------------------------

def conv(F, G, w=(0, 12)):
    return cel.oracle_convolve(cel.build_cellular(F, w), cel.build_cellular(G, w))


def test_convolution_of_two_unit_intervals():
    assert conv(Barcode([Bar(0, 1)]), Barcode([Bar(0, 1)])) == Barcode([Bar(0, 1), Bar(1, 2, 1)])


def test_unit_law(rng):
    for _ in range(30):
        F = random_barcode(rng, 3, hi=8, max_len=6, ray_prob=0, degrees=(-1, 0, 1))
        w = (0, 12)
        unit = cel.skyscraper(0, w)
        assert cel.oracle_convolve(cel.build_cellular(F, w), unit) == F
        assert cel.oracle_convolve(unit, cel.build_cellular(F, w)) == F


def test_skyscraper_translates():
    F = Barcode([Bar(1, 2), Bar(2, 4, 1)])
    w = (0, 12)
    assert cel.oracle_convolve(cel.build_cellular(F, w), cel.skyscraper(3, w)) == translate(F, 3)


def test_convolution_with_clipped_ray_is_translation():
    F = Barcode([Bar(1, 2), Bar(Fr(1, 2), 3, 1)])
    ray = Barcode([Bar(Fr(3, 2), INF)])
    got = cel.window_stable_convolve(F, ray, (0, 10))
    assert got == translate(F, Fr(3, 2))


def test_convolution_rejects_unclipped_rays():
    with pytest.raises(cel.OracleError):
        cel.oracle_convolve(cel.build_cellular(Barcode([Bar(0, INF)]), (0, 4)), cel.skyscraper(0, (0, 4)))


def test_convolution_closed_form_for_interval_pairs(rng):
    for _ in range(40):
        I = random_bar(rng, hi=6, max_len=6, ray_prob=0, degrees=(-1, 0, 1))
        J = random_bar(rng, hi=6, max_len=6, ray_prob=0, degrees=(-1, 0, 1))
        a, b, c, d = I.birth, I.death, J.birth, J.death
        k = I.degree + J.degree
        want = Barcode([Bar(a + c, min(a + d, b + c), k), Bar(max(a + d, b + c), b + d, k + 1)])
        assert conv(Barcode([I]), Barcode([J])) == want


def test_convolution_commutative_and_associative(rng):
    w = (0, 12)
    for _ in range(50):
        F, G, H = (Barcode([random_bar(rng, hi=3, max_len=4, ray_prob=0)]) for _ in range(3))
        FG = conv(F, G, w)
        assert FG == conv(G, F, w)
        assert conv(FG, H, w) == conv(F, conv(G, H, w), w)


def test_golden_files_verify():
    assert all(golden.verify().values())


def test_golden_convolution_records_match():
    for rec in golden.load("convolution"):
        F = Barcode.from_dict(rec["inputs"]["F"])
        G = Barcode.from_dict(rec["inputs"]["G"])
        I, J = F.bars[0], G.bars[0]
        a, b, c, d = I.birth, I.death, J.birth, J.death
        k = I.degree + J.degree
        want = Barcode([Bar(a + c, min(a + d, b + c), k), Bar(max(a + d, b + c), b + d, k + 1)])
        assert Barcode.from_dict(rec["output"]) == want
