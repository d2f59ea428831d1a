"""Sheaf-theoretic energy bounds and Hofer-norm experiments at desk scale."""

from .barcode import (
    Bar,
    Barcode,
    EpigraphSheaf,
    InterleavingCertificate,
    distance_to_zero,
    epigraph_distance,
    hom_dims,
    interleaving_distance,
    is_interleaved,
    tau_is_zero,
    translate,
)

__version__ = "0.1.0"

__all__ = [
    "Bar",
    "Barcode",
    "EpigraphSheaf",
    "InterleavingCertificate",
    "distance_to_zero",
    "epigraph_distance",
    "hom_dims",
    "interleaving_distance",
    "is_interleaved",
    "tau_is_zero",
    "translate",
]
