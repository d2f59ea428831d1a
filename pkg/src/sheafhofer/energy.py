"""Fiberwise categorical energy of the zero-section sheaf relative to B(r).

The fiber of E_{B,Sigma}(F) over (q1, q2) is the bar [-f1, -f2) shifted by
n + 1, i.e. stored in degree -(n + 1).  The energy is bounded below by the
distance to zero of the origin fiber.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .ball import GridSpec, f_critical_values, sigma_field
from .barcode import Bar, Barcode, distance_to_zero

__all__ = [
    "EnergyReport",
    "HoferVerdict",
    "UncertifiedError",
    "e_sigma_fiber",
    "energy_lower_bound",
    "categorical_hofer_check",
]

DEFAULT_TOL = 1e-9


class UncertifiedError(ValueError):
    pass


def _fiber_bar(f1, f2, r, n):
    if f1 - f2 <= 1e-12 * r * r:
        return Barcode()
    return Barcode([Bar(-f1, -f2, -(n + 1))])


def e_sigma_fiber(q1: float, q2: float, r: float, n: int = 1) -> Barcode:
    f1, f2, ex, _ = f_critical_values(q1, q2, r)
    if not bool(ex):
        return Barcode()
    return _fiber_bar(float(f1), float(f2), r, n)


@dataclass(frozen=True)
class EnergyReport:
    r: float
    n: int
    origin_value: float
    grid_sup: float
    argmax: tuple
    tolerance: float = DEFAULT_TOL

    def __post_init__(self):
        if self.origin_value > self.grid_sup + self.tolerance:
            raise ValueError("origin value exceeds the grid supremum")

    def to_json(self) -> str:
        d = asdict(self)
        d["argmax"] = list(self.argmax)
        return json.dumps(d, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "EnergyReport":
        d = json.loads(text)
        d["argmax"] = tuple(d["argmax"])
        return cls(**d)


def energy_lower_bound(r: float, n: int = 1, grid: Optional[GridSpec] = None, tolerance: float = DEFAULT_TOL) -> EnergyReport:
    field = sigma_field(r, n, grid)
    i0, j0 = field.origin_index()
    origin = e_sigma_fiber(float(field.q1[i0]), float(field.q2[j0]), r, n)
    lengths = np.where(field.exists, field.f1 - field.f2, 0.0)
    flat = int(np.argmax(lengths))
    i, j = np.unravel_index(flat, lengths.shape)
    return EnergyReport(float(r), int(n), float(distance_to_zero(origin)), float(lengths[i, j]), (int(i), int(j)), tolerance)


@dataclass(frozen=True)
class HoferVerdict:
    passed: bool
    origin_value: float
    hofer_value: float
    tolerance: float
    detail: str = ""

    def __bool__(self):
        return self.passed


def categorical_hofer_check(report: EnergyReport, hofer_value: float, certificate=None, certified: Optional[bool] = None) -> HoferVerdict:
    """Instance check of e_B(F) <= ||H|| for a certified displacer.

    ``certificate`` (a DisplacementCertificate) or ``certified`` must attest
    that ``hofer_value`` belongs to a verified displacement.
    """
    if certificate is not None:
        certified = bool(certificate.verified)
        if not math.isclose(certificate.hofer_value, hofer_value, rel_tol=0, abs_tol=1e-12):
            raise UncertifiedError("hofer value does not match its certificate")
    if not certified:
        raise UncertifiedError("hofer value is not backed by a verified displacement certificate")
    if not (hofer_value >= 0 and math.isfinite(hofer_value)):
        raise ValueError("hofer value must be a finite nonnegative number")
    ok = report.origin_value <= hofer_value + report.tolerance
    detail = "" if ok else (
        f"falsification: origin value {report.origin_value!r} exceeds hofer value {hofer_value!r} "
        f"(r={report.r}, n={report.n}, tolerance={report.tolerance})"
    )
    return HoferVerdict(ok, report.origin_value, float(hofer_value), report.tolerance, detail)
