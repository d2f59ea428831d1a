import os
from fractions import Fraction

import pytest
from hypothesis import settings
from hypothesis import strategies as st

from sheafhofer.barcode import Bar, Barcode
from sheafhofer.rng import DEFAULT_SEED, make_rng

settings.register_profile("repo", derandomize=True, deadline=None, max_examples=60, print_blob=True)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))

CRITERIA_LINES = []


def random_bar(rng, lo=0, hi=12, max_len=8, ray_prob=0.1, degrees=(0, 1)):
    birth = Fraction(int(rng.integers(lo, hi + 1)), 2)
    degree = int(rng.choice(degrees))
    if rng.random() < ray_prob:
        return Bar(birth, float("inf"), degree)
    return Bar(birth, birth + Fraction(int(rng.integers(1, max_len + 1)), 2), degree)


def random_barcode(rng, max_bars=4, **kw):
    return Barcode(random_bar(rng, **kw) for _ in range(int(rng.integers(0, max_bars + 1))))


@pytest.fixture
def rng(request):
    return make_rng(DEFAULT_SEED, request.node.name)


halves = st.integers(0, 24).map(lambda k: Fraction(k, 2))


@st.composite
def bars(draw, rays=True):
    b = draw(halves)
    deg = draw(st.integers(-1, 1))
    if rays and draw(st.integers(0, 9)) == 0:
        return Bar(b, float("inf"), deg, draw(st.integers(1, 2)))
    return Bar(b, b + draw(st.integers(1, 16).map(lambda k: Fraction(k, 2))), deg, draw(st.integers(1, 2)))


def barcodes(max_size=4, rays=True):
    return st.lists(bars(rays), max_size=max_size).map(Barcode)


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA_LINES:
            terminalreporter.write_line(line)
