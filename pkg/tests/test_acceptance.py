"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""

import math
import sys
from fractions import Fraction as Fr
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import CRITERIA_LINES, random_bar, random_barcode  # noqa: E402

from sheafhofer import cellular as cel  # noqa: E402
from sheafhofer import golden  # noqa: E402
from sheafhofer.ball import GridSpec, critical_times, discriminant, fiber_restrict, scan_critical_times, sigma_field  # noqa: E402
from sheafhofer.barcode import (  # noqa: E402
    Bar,
    Barcode,
    EpigraphSheaf,
    distance_to_zero,
    hom_dims,
    interleaving_distance,
    is_interleaved,
    tau_is_zero,
)
from sheafhofer.cli import main as cli_main  # noqa: E402
from sheafhofer.energy import categorical_hofer_check, energy_lower_bound  # noqa: E402
from sheafhofer.hamiltonian import (  # noqa: E402
    Ball,
    displacement_energy_upper,
    displaces,
    flow,
    jacobian_determinant,
    rotation_spec,
    stability_experiment,
    vertical_shift_family,
    vertical_shift_spec,
    verify_generating_function,
    zero_section_samples,
)
from sheafhofer.rng import DEFAULT_SEED, make_rng  # noqa: E402

HP = math.pi / 2
RADII = (0.5, 1.0, 2.0)
_shared = {}


def _record(capsys, number, title, ok, detail):
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    CRITERIA_LINES.append(line)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def _rng(number):
    return make_rng(DEFAULT_SEED, f"acceptance-{number}")


def test_criterion_01_origin_fiber(capsys):
    worst = 0.0
    for r in RADII:
        F = sigma_field(r)
        (bar,) = fiber_restrict(F, F.origin_index()).bars
        worst = max(worst, abs(bar.birth + HP * r * r), abs(bar.death))
    _record(capsys, 1, "origin fiber of the sigma field", worst <= 1e-9, f"max endpoint error {worst:.3g} (tol 1e-9)")


def _canonical_report():
    if "report" not in _shared:
        _shared["report"] = energy_lower_bound(1.0)
    return _shared["report"]


def test_criterion_02_energy(capsys):
    errs, scale = [], []
    base = None
    for r in RADII:
        rep = energy_lower_bound(r)
        errs.append(abs(rep.origin_value - HP * r * r))
        v = rep.origin_value / (r * r)
        base = v if base is None else base
        scale.append(abs(v - base) / base)
    ok = max(errs) <= 1e-9 and max(scale) <= 1e-9
    _record(capsys, 2, "categorical energy of the zero section", ok, f"max error {max(errs):.3g}, r^2-scaling rel error {max(scale):.3g}")


def test_criterion_03_critical_times(capsys):
    rng = _rng(3)
    worst, missing = 0.0, 0
    r = 1.0
    pts = rng.uniform(-r, r, (100, 2))
    for q1, q2 in pts:
        c = critical_times(q1, q2, r)
        roots = scan_critical_times(q1, q2, r)
        if len(roots) != 2:
            missing += 1
            continue
        worst = max(worst, abs(roots[0] - c.s1), abs(roots[1] - c.s2))
    disc_worst = 0.0
    for r in RADII:
        q = rng.uniform(-r, r, (10000, 2))
        q1, q2 = q[:, 0], q[:, 1]
        # expanded discriminant of xi^2 r^2 - 2 q1 q2 xi + (q1^2 + q2^2 - r^2) over 4
        expanded = (q1 * q2) ** 2 - r * r * (q1 * q1 + q2 * q2 - r * r)
        disc_worst = max(disc_worst, float(np.max(np.abs(expanded - discriminant(q1, q2, r)))) / r**4)
    ok = missing == 0 and worst <= 1e-6 and disc_worst <= 1e-12
    _record(capsys, 3, "critical times vs dense scan", ok, f"max |ds| {worst:.3g} over 100 points ({missing} unmatched); discriminant identity {disc_worst:.3g} r^4")


def test_criterion_04_generating_function(capsys):
    res, ok = verify_generating_function(samples=1000, tolerance=1e-6, steps=2000)
    _record(capsys, 4, "generating function of the rotation flow", ok, f"max residual {res:.3g} (tol 1e-6, 1000 samples, 2000 RK4 steps)")


def _family_search():
    if "search" not in _shared:
        fam = vertical_shift_family(1.0)
        A = zero_section_samples(1.5)
        _shared["search"] = displacement_energy_upper(fam, A, Ball(1.0), budget=12, margin=0.05, steps=1000)
    return _shared["search"]


def test_criterion_05_energy_capacity(capsys):
    up = _family_search()
    verified = [c for c in up.certificates if c.verified]
    below = [c for c in verified if c.hofer_value < HP - 1e-3]
    cert = displaces(vertical_shift_spec(1.0, 1.1), zero_section_samples(1.5), Ball(1.0), 0.05, steps=1000)
    (rec,) = golden.load("vertical_shift")
    dev = abs(cert.hofer_value - rec["output"]["hofer_value"])
    ok = bool(verified) and not below and up.best >= HP - 1e-3 and cert.verified and dev <= 1e-6
    _record(
        capsys, 5, "energy-capacity instance check", ok,
        f"{len(verified)} verified of {len(up.certificates)}, best {up.best:.6f} >= pi/2; canonical {cert.hofer_value:.9f} vs golden ({dev:.2g})",
    )


def test_criterion_06_categorical_hofer(capsys, tmp_path):
    rep = _canonical_report()
    verified = [c for c in _family_search().certificates if c.verified]
    fails = [c for c in verified if not categorical_hofer_check(rep, c.hofer_value, certificate=c)]
    code = cli_main([
        "capacity", "--kappas", "1.1", "--plateaus", "1.2", "--budget", "0",
        "--inject-fake-certificate", "1.0", "--out", str(tmp_path),
    ])
    ok = bool(verified) and not fails and code == 1
    _record(capsys, 6, "categorical-Hofer consistency", ok, f"{len(verified) - len(fails)}/{len(verified)} checks pass; injected violation exit code {code}")


def test_criterion_07_oracle_equivalence(capsys):
    rng = _rng(7)
    W = (-1, 40)
    hom_bad = tau_bad = 0
    for _ in range(120):
        I = random_bar(rng, degrees=(-1, 0, 1), ray_prob=0.2)
        J = random_bar(rng, degrees=(-1, 0, 1), ray_prob=0.2)
        want = cel.oracle_hom(cel.build_cellular(Barcode([I]), W), cel.build_cellular(Barcode([J]), W))
        hom_bad += hom_dims(I, J) != want
        F = Barcode([I, J])
        c = Fr(int(rng.integers(0, 13)), 2)
        tau_bad += tau_is_zero(F, c) != (cel.oracle_tau(cel.build_cellular(F, W), c) == 0)
    unit_bad = 0
    for _ in range(30):
        F = random_barcode(rng, 3, hi=8, max_len=6, ray_prob=0, degrees=(-1, 0, 1))
        w = (0, 12)
        unit = cel.skyscraper(0, w)
        unit_bad += cel.oracle_convolve(cel.build_cellular(F, w), unit) != F
    files = golden.verify()
    ok = hom_bad == 0 and tau_bad == 0 and unit_bad == 0 and all(files.values())
    _record(
        capsys, 7, "oracle equivalence", ok,
        f"hom mismatches {hom_bad}/120, tau mismatches {tau_bad}/120, unit-law failures {unit_bad}/30, golden {files}",
    )


def test_criterion_08_interleaving_properties(capsys):
    rng = _rng(8)
    kw = dict(hi=10, max_len=6, ray_prob=0.1)
    fails = {"self": 0, "triangle": 0, "zero": 0, "monotone": 0}
    for _ in range(200):
        F, G, H = (random_barcode(rng, 3, **kw) for _ in range(3))
        fails["self"] += interleaving_distance(F, F) != 0
        dFH = interleaving_distance(F, H)
        dFG = interleaving_distance(F, G)
        dGH = interleaving_distance(G, H)
        fails["triangle"] += not dFH <= dFG + dGH
        fails["zero"] += distance_to_zero(F) != interleaving_distance(Barcode(), F)
        a, b = (Fr(int(x), 2) for x in rng.integers(0, 9, 2))
        if is_interleaved(F, G, a, b).verdict:
            da, db = (Fr(int(x), 2) for x in rng.integers(0, 5, 2))
            fails["monotone"] += not is_interleaved(F, G, a + da, b + db).verdict
    ok = not any(fails.values())
    _record(capsys, 8, "interleaving distance properties", ok, f"failures {fails} over 200 triples")


def test_criterion_09_stability(capsys):
    axis = -math.pi + 2 * math.pi * np.arange(201) / 200
    rep = stability_experiment(EpigraphSheaf.sample(np.sin, axis))
    ok = rep.distance == 2.0 and 2.0 <= rep.hofer_value <= 2.1
    _record(capsys, 9, "stability near equality for sin", ok, f"distance {rep.distance!r}, hofer {rep.hofer_value:.6f} (gap {100 * rep.relative_gap:.2f}%)")


def test_criterion_10_dynamics(capsys):
    rng = _rng(10)
    spec = rotation_spec()
    x0 = rng.uniform(-2.5, 2.5, (100, 2))
    drift = flow(spec, x0, math.pi, steps=2000).conserved_drift
    det = jacobian_determinant(spec, rng.uniform(-2.5, 2.5, (100, 2)))
    dev = float(np.max(np.abs(det - 1)))
    ok = drift <= 1e-6 and dev <= 1e-4
    _record(capsys, 10, "dynamics sanity", ok, f"energy drift {drift:.3g} over [0, pi]; max |det - 1| {dev:.3g}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
