import json
import math
from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sheafhofer import cellular as cel
from sheafhofer.barcode import (
    Bar,
    Barcode,
    EpigraphSheaf,
    distance_to_zero,
    epigraph_distance,
    epigraph_distance_by_interleaving,
    hom_dims,
    interleaving_distance,
    interleaving_split,
    is_interleaved,
    tau_is_zero,
    translate,
    verify_certificate,
)

from conftest import barcodes, bars, random_bar, random_barcode

INF = math.inf
W = (-1, 40)


# -- basic types ----------------------------------------------------------------

def test_bar_validation():
    with pytest.raises(ValueError):
        Bar(1, 1)
    with pytest.raises(ValueError):
        Bar(2, 1)
    with pytest.raises(ValueError):
        Bar(0, 1, 0, 0)


def test_canonical_order_and_merging():
    a = Barcode([Bar(1, 2), Bar(0, 3), Bar(1, 2)])
    b = Barcode([Bar(1, 2, 0, 2), Bar(0, 3)])
    assert a == b and a.to_json() == b.to_json()
    assert [x.birth for x in a] == [0, 1]
    assert not Barcode()


@given(barcodes())
def test_json_round_trip(F):
    assert Barcode.from_json(F.to_json()) == F
    d = json.loads(F.to_json())
    assert set(d) == {"bars"}
    for x in d["bars"]:
        assert set(x) == {"birth", "death", "degree", "mult"}


def test_json_endpoint_forms():
    F = Barcode([Bar(Fr(1, 3), INF, 2), Bar(0.25, 1.5)])
    d = F.to_dict()
    assert d["bars"][0] == {"birth": 0.25, "death": 1.5, "degree": 0, "mult": 1}
    assert d["bars"][1] == {"birth": "1/3", "death": "inf", "degree": 2, "mult": 1}


# -- translation and tau ----------------------------------------------------------

def test_translate_examples():
    assert translate(Barcode([Bar(0, 1)]), 2) == Barcode([Bar(2, 3)])
    F = Barcode([Bar(0, 1), Bar(2, INF, 1)])
    assert translate(F, 0) == F
    g = translate(Barcode([Bar(-math.pi / 2, 0.0)]), math.pi / 2)
    assert g.isclose(Barcode([Bar(0.0, math.pi / 2)]), 1e-15)


@given(barcodes(), halves := st.integers(-8, 8).map(lambda k: Fr(k, 2)), st.integers(-8, 8).map(lambda k: Fr(k, 2)))
def test_translate_composes(F, a, b):
    assert translate(translate(F, a), b) == translate(F, a + b)


def test_tau_examples():
    assert tau_is_zero(Barcode([Bar(0, 1)]), 1)
    assert not tau_is_zero(Barcode([Bar(0, 1)]), 0)
    assert not tau_is_zero(Barcode([Bar(0, INF)]), 1e6)
    assert tau_is_zero(Barcode(), 0)
    with pytest.raises(ValueError):
        tau_is_zero(Barcode(), -1)


@given(barcodes(), st.integers(0, 20).map(lambda k: Fr(k, 2)), st.integers(0, 10).map(lambda k: Fr(k, 2)))
def test_tau_is_zero_monotone(F, c, dc):
    if tau_is_zero(F, c):
        assert tau_is_zero(F, c + dc)


def test_tau_rule_matches_oracle_rank(rng):
    for _ in range(150):
        F = random_barcode(rng, 3)
        c = Fr(int(rng.integers(0, 13)), 2)
        assert tau_is_zero(F, c) == (cel.oracle_tau(cel.build_cellular(F, W), c) == 0)


# -- hom --------------------------------------------------------------------------

def test_hom_examples():
    assert hom_dims(Bar(0, 1), Bar(0, 1)) == {0: 1}
    assert hom_dims(Bar(0, 1), Bar(5, 6)) == {}
    # rule table fixed by the oracle
    assert hom_dims(Bar(0, 2), Bar(1, 3)) == {0: 1}
    assert hom_dims(Bar(1, 3), Bar(0, 2)) == {1: 1}
    assert hom_dims(Bar(1, 3, 1), Bar(0, 2)) == {0: 1}


def test_hom_rule_matches_oracle_per_degree(rng):
    for _ in range(150):
        I = random_bar(rng, degrees=(-1, 0, 1), ray_prob=0.2)
        J = random_bar(rng, degrees=(-1, 0, 1), ray_prob=0.2)
        want = cel.oracle_hom(cel.build_cellular(Barcode([I]), W), cel.build_cellular(Barcode([J]), W))
        assert hom_dims(I, J) == want, (I, J)


def test_hom_rule_matches_golden_table():
    from sheafhofer import golden

    for rec in golden.load("hom"):
        I = Barcode.from_dict(rec["inputs"]["I"]).bars[0]
        J = Barcode.from_dict(rec["inputs"]["J"]).bars[0]
        assert {str(k): v for k, v in hom_dims(I, J).items()} == rec["output"]


def test_tau_rule_matches_golden_table():
    from sheafhofer import golden

    for rec in golden.load("tau"):
        F = Barcode.from_dict(rec["inputs"]["F"])
        assert tau_is_zero(F, Fr(rec["inputs"]["c"])) == (rec["output"] == 0)


def test_hom_multiplicity_scales():
    assert hom_dims(Bar(0, 2, 0, 2), Bar(1, 3, 0, 3)) == {0: 6}


# -- interleaving -------------------------------------------------------------------

def test_interleaving_examples():
    F = Barcode([Bar(0, 2), Bar(1, 3, 1)])
    assert is_interleaved(F, F, 0, 0).verdict
    G = Barcode([Bar(0, 1)])
    for a in (0, Fr(1, 4), Fr(1, 2), 1):
        cert = is_interleaved(Barcode(), G, a, 1 - a)
        assert cert.verdict and verify_certificate(cert)
    ray = Barcode([Bar(0, INF)])
    for a, b in [(0, 0), (5, 7), (100, 1e6)]:
        cert = is_interleaved(Barcode(), ray, a, b)
        assert not cert.verdict and cert.failing


def test_no_verdict_names_the_failing_factorization():
    cert = is_interleaved(Barcode([Bar(0, 3)]), Barcode(), 1, 1)
    assert not cert.verdict
    assert cert.failing == "forward"


def test_matching_decision_matches_exhaustive_search(rng):
    """The bar-matching decision equals brute force over all alpha in GF(2)."""
    yes = 0
    for _ in range(250):
        F = random_barcode(rng, 3, hi=8, max_len=6, ray_prob=0.15)
        G = random_barcode(rng, 3, hi=8, max_len=6, ray_prob=0.15)
        a, b = Fr(int(rng.integers(0, 5)), 2), Fr(int(rng.integers(0, 5)), 2)
        cert = is_interleaved(F, G, a, b)
        fwd = cel.oracle_tau_factors(cel.build_cellular(F, W), cel.build_cellular(G, W), a, a + b)
        bwd = cel.oracle_tau_factors(cel.build_cellular(G, W), cel.build_cellular(F, W), b, a + b)
        assert (cert.forward.exists, cert.backward.exists) == (fwd, bwd), (F, G, a, b)
        if cert.verdict:
            yes += 1
            assert verify_certificate(cert)
    assert yes > 30


@given(barcodes(3), barcodes(3), st.integers(0, 8).map(lambda k: Fr(k, 2)), st.integers(0, 8).map(lambda k: Fr(k, 2)),
       st.integers(0, 4).map(lambda k: Fr(k, 2)), st.integers(0, 4).map(lambda k: Fr(k, 2)))
def test_interleaving_monotone(F, G, a, b, da, db):
    if is_interleaved(F, G, a, b).verdict:
        assert is_interleaved(F, G, a + da, b + db).verdict


def test_witness_multiplies_out():
    F = Barcode([Bar(0, 3), Bar(1, 2), Bar(2, INF, 1)])
    G = Barcode([Bar(Fr(1, 2), 3), Bar(Fr(5, 2), INF, 1)])
    d = interleaving_distance(F, G)
    cert = is_interleaved(F, G, *_split_at(F, G, d))
    assert cert.verdict and verify_certificate(cert)


def _split_at(F, G, c):
    split = interleaving_split(F, G, c)
    assert split is not None
    return split


# -- distances ------------------------------------------------------------------------

def test_distance_examples():
    F = Barcode([Bar(0, 1), Bar(3, INF, 1)])
    assert interleaving_distance(F, F) == 0
    assert interleaving_distance(Barcode(), Barcode([Bar(Fr(1, 2), Fr(11, 4))])) == Fr(9, 4)
    assert interleaving_distance(Barcode(), Barcode([Bar(0, INF)])) == INF
    assert distance_to_zero(Barcode()) == 0
    assert distance_to_zero(Barcode([Bar(0, 1), Bar(0, 3)])) == 3
    assert distance_to_zero(Barcode([Bar(0.0, math.pi / 2, -2)])) == pytest.approx(math.pi / 2, abs=1e-15)


def test_distance_is_not_symmetric_in_general():
    F, G = Barcode([Bar(0, 1)]), Barcode([Bar(Fr(1, 2), Fr(17, 10))])
    assert interleaving_distance(F, G) == Fr(7, 10)
    assert interleaving_distance(G, F) == interleaving_distance(F, G)  # sum a + b is symmetric


def test_distance_to_zero_equals_interleaving_distance(rng):
    for _ in range(200):
        F = random_barcode(rng, 4)
        assert distance_to_zero(F) == interleaving_distance(Barcode(), F)


def test_enumeration_and_bisection_agree(rng):
    for _ in range(60):
        F, G = random_barcode(rng, 3), random_barcode(rng, 3)
        e = interleaving_distance(F, G)
        b = interleaving_distance(F, G, method="bisect")
        assert e == b or abs(e - b) <= 1e-8


def test_distance_is_attained(rng):
    for _ in range(40):
        F, G = random_barcode(rng, 3, ray_prob=0), random_barcode(rng, 3, ray_prob=0)
        d = interleaving_distance(F, G)
        a, b = _split_at(F, G, d)
        assert is_interleaved(F, G, a, b).verdict
        if d > 0:
            eps = Fr(1, 100)
            assert not any(is_interleaved(F, G, x, d - eps - x).verdict for x in np.linspace(0, float(d - eps), 9) if x <= d - eps)


def test_float_endpoints():
    F = Barcode([Bar(0.1, 0.7)])
    G = Barcode([Bar(0.3, 0.9)])
    assert interleaving_distance(F, G) == pytest.approx(0.2, abs=1e-12)


# -- epigraph sheaves ----------------------------------------------------------------------

def test_epigraph_examples():
    ax = np.linspace(-math.pi, math.pi, 201)
    V = EpigraphSheaf.sample(np.zeros_like, ax)
    assert epigraph_distance(V, V) == 0
    W = EpigraphSheaf.sample(lambda q: np.full_like(q, 0.75), ax)
    assert epigraph_distance(V, W) == 0.75
    S = EpigraphSheaf.sample(np.sin, ax)
    assert epigraph_distance(V, S) == 2.0


def test_epigraph_grid_mismatch():
    a = EpigraphSheaf.sample(np.sin, np.linspace(0, 1, 5))
    b = EpigraphSheaf.sample(np.sin, np.linspace(0, 1, 6))
    with pytest.raises(ValueError):
        epigraph_distance(a, b)
    with pytest.raises(ValueError):
        EpigraphSheaf((np.array([0.0]),), np.array([1.0]))


def test_epigraph_closed_form_matches_interleaving_route(rng):
    ax = np.linspace(-1, 1, 7)
    for _ in range(25):
        v = rng.integers(-4, 5, 7) / 4
        w = rng.integers(-4, 5, 7) / 4
        V, Wf = EpigraphSheaf((ax,), v), EpigraphSheaf((ax,), w)
        assert epigraph_distance(V, Wf) == epigraph_distance_by_interleaving(V, Wf)
    Z = EpigraphSheaf.zero_like(V)
    C = EpigraphSheaf((ax,), np.full(7, 0.5))
    assert epigraph_distance_by_interleaving(Z, C) == 0.5


@given(st.lists(st.integers(-6, 6), min_size=3, max_size=6), st.lists(st.integers(-6, 6), min_size=3, max_size=6))
def test_epigraph_symmetric_and_definite(v, w):
    n = min(len(v), len(w))
    ax = np.arange(n, dtype=float)
    V, Wf = EpigraphSheaf((ax,), np.array(v[:n], float)), EpigraphSheaf((ax,), np.array(w[:n], float))
    assert epigraph_distance(V, Wf) == epigraph_distance(Wf, V)
    assert (epigraph_distance(V, Wf) == 0) == np.array_equal(V.values, Wf.values)
