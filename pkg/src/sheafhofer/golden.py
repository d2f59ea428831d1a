"""Frozen oracle outputs.

Each golden file is a JSON array of ``{"inputs": ..., "output": ...}``
records produced by the cellular oracle (and, for the displacer, by the
Hofer quadrature).  Regeneration is deterministic in the seed, so
verification is a byte comparison.
"""

from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import cellular as cel
from .barcode import Bar, Barcode
from .rng import DEFAULT_SEED, make_rng

__all__ = ["KINDS", "golden_dir", "generate", "render", "write", "verify", "load"]

KINDS = ("hom", "tau", "convolution", "vertical_shift")

HOM_WINDOW = (-1, 13)
TAU_WINDOW = (-1, 20)
CONV_WINDOW = (0, 10)


def golden_dir() -> Path:
    return Path(str(resources.files("sheafhofer").joinpath("data/golden")))


def _bc(bars) -> dict:
    return Barcode(bars).to_dict()


def _random_bar(rng, lo=0, hi=8, max_len=4, ray_prob=0.15, degrees=(-1, 0, 1)):
    birth = Fraction(int(rng.integers(2 * lo, 2 * hi + 1)), 2)
    degree = int(rng.choice(degrees))
    if rng.random() < ray_prob:
        return Bar(birth, float("inf"), degree)
    return Bar(birth, birth + Fraction(int(rng.integers(1, 2 * max_len + 1)), 2), degree)


def _hom_records(seed):
    rng = make_rng(seed, "golden-hom")
    pairs = [
        (Bar(0, 2), Bar(1, 3)),
        (Bar(0, 1), Bar(5, 6)),
        (Bar(0, 1), Bar(0, 1)),
    ]
    pairs += [(_random_bar(rng), _random_bar(rng)) for _ in range(150)]
    out = []
    for I, J in pairs:
        F = cel.build_cellular(Barcode([I]), HOM_WINDOW)
        G = cel.build_cellular(Barcode([J]), HOM_WINDOW)
        dims = cel.oracle_hom(F, G)
        out.append({
            "inputs": {"I": _bc([I]), "J": _bc([J]), "window": list(HOM_WINDOW)},
            "output": {str(k): v for k, v in dims.items()},
        })
    return out


def _tau_records(seed):
    rng = make_rng(seed, "golden-tau")
    cases = [
        (Barcode([Bar(0, 1)]), Fraction(0)),
        (Barcode([Bar(0, 1)]), Fraction(1)),
        (Barcode([Bar(0, float("inf"))]), Fraction(1, 2)),
    ]
    for _ in range(120):
        F = Barcode(_random_bar(rng) for _ in range(int(rng.integers(1, 4))))
        cases.append((F, Fraction(int(rng.integers(0, 11)), 2)))
    out = []
    for F, c in cases:
        rank = cel.oracle_tau(cel.build_cellular(F, TAU_WINDOW), c)
        out.append({"inputs": {"F": F.to_dict(), "c": str(c), "window": list(TAU_WINDOW)}, "output": rank})
    return out


def _conv_records(seed):
    rng = make_rng(seed, "golden-conv")
    cases = [
        (Barcode([Bar(0, 1)]), Barcode([Bar(0, 1)])),
        (Barcode([Bar(0, 2)]), Barcode([Bar(1, 3)])),
    ]
    for _ in range(40):
        F = Barcode([_random_bar(rng, 0, 2, 3, 0.0)])
        G = Barcode([_random_bar(rng, 0, 2, 3, 0.0)])
        cases.append((F, G))
    out = []
    for F, G in cases:
        res = cel.oracle_convolve(cel.build_cellular(F, CONV_WINDOW), cel.build_cellular(G, CONV_WINDOW))
        out.append({"inputs": {"F": F.to_dict(), "G": G.to_dict(), "window": list(CONV_WINDOW)}, "output": res.to_dict()})
    return out


def _vertical_shift_records(seed):
    from .hamiltonian import Ball, displaces, vertical_shift_spec, zero_section_samples

    spec = vertical_shift_spec(1.0, 1.1)
    cert = displaces(spec, zero_section_samples(1.5), Ball(1.0), 0.05, steps=1000)
    return [{
        "inputs": {"r": 1.0, "kappa": 1.1, "margin": 0.05, "samples": 301, "rk4_steps": 1000, "space_nodes": 201},
        "output": {"verified": cert.verified, "hofer_value": cert.hofer_value},
    }]


_GENERATORS = {
    "hom": _hom_records,
    "tau": _tau_records,
    "convolution": _conv_records,
    "vertical_shift": _vertical_shift_records,
}


def generate(kind: str, seed: int = DEFAULT_SEED) -> list:
    return _GENERATORS[kind](seed)


def render(records: list) -> str:
    return json.dumps(records, sort_keys=True, indent=1) + "\n"


def _path(directory, kind) -> Path:
    return Path(directory) / f"{kind}.json"


def write(directory=None, seed: int = DEFAULT_SEED, kinds=KINDS) -> list:
    directory = Path(directory) if directory is not None else golden_dir()
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for kind in kinds:
        p = _path(directory, kind)
        p.write_text(render(generate(kind, seed)))
        paths.append(p)
    return paths


def verify(directory=None, seed: int = DEFAULT_SEED, kinds=KINDS) -> dict:
    """``kind -> True`` when the stored bytes equal a fresh regeneration."""
    directory = Path(directory) if directory is not None else golden_dir()
    result = {}
    for kind in kinds:
        p = _path(directory, kind)
        result[kind] = p.is_file() and p.read_text() == render(generate(kind, seed))
    return result


def load(kind: str, directory=None) -> list:
    directory = Path(directory) if directory is not None else golden_dir()
    return json.loads(_path(directory, kind).read_text())
