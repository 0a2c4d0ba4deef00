"""Conserved mod-k occupation structure and symmetry-sector splitting.

A drive that changes the occupation only in steps of k conserves n mod k,
so the Fock-basis matrix decomposes into k independent blocks.  Parity is
the k = 2 case; purely diagonal Hamiltonians conserve n itself, flagged by
the ``MOD_ALL`` sentinel (every basis state is its own sector).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import BandedSymMatrix, OperatorPoly

__all__ = [
    "MOD_ALL",
    "SymmetryViolation",
    "Sector",
    "SectorDecomposition",
    "detect_modulus",
    "split",
]

# Sentinel modulus for diagonal Hamiltonians: each n is conserved separately.
MOD_ALL = "all"

# Assembly is exact, so any off-sector entry above this is a logic bug.
VIOLATION_TOL = 1e-14


class SymmetryViolation(ValueError):
    """A matrix entry contradicts the claimed mod-k conservation."""


def detect_modulus(poly: OperatorPoly) -> int | str:
    """Conserved occupation modulus of a Hermitian polynomial.

    Returns the gcd of all occupation steps |p - q| over terms with nonzero
    coefficient, ``MOD_ALL`` when every term is diagonal, and 1 when
    incompatible steps coexist.
    """
    if not poly.is_hermitian():
        raise ValueError("modulus detection expects a Hermitian polynomial")
    g = 0
    for t in poly.terms:
        if t.coeff != 0.0:
            g = math.gcd(g, abs(t.step))
    return MOD_ALL if g == 0 else g


@dataclass(frozen=True)
class Sector:
    """One symmetry block: Fock states with n = residue (mod k)."""

    residue: int
    indices: np.ndarray
    block: BandedSymMatrix

    def __post_init__(self) -> None:
        idx = np.asarray(self.indices, dtype=int).copy()
        idx.flags.writeable = False
        object.__setattr__(self, "indices", idx)

    @property
    def dim(self) -> int:
        return self.block.dim


@dataclass(frozen=True)
class SectorDecomposition:
    """Full matrix split into mod-k blocks; index maps partition 0..n_max."""

    k: int | str
    sectors: tuple[Sector, ...]

    def sector(self, residue: int) -> Sector:
        for s in self.sectors:
            if s.residue == residue:
                return s
        raise KeyError(f"no sector with residue {residue}")


def split(matrix: BandedSymMatrix, k: int | str) -> SectorDecomposition:
    """Split a banded symmetric matrix into its mod-k sector blocks.

    Raises SymmetryViolation if any stored entry sits on a diagonal whose
    offset is not a multiple of k (or off the main diagonal for MOD_ALL).
    """
    if k == MOD_ALL:
        _check_zero_offsets(matrix, range(1, matrix.bandwidth + 1))
        sectors = tuple(
            Sector(
                residue=n,
                indices=np.array([n]),
                block=BandedSymMatrix(1, 0, (matrix.diagonal[n : n + 1].copy(),)),
            )
            for n in range(matrix.dim)
        )
        return SectorDecomposition(MOD_ALL, sectors)

    if not isinstance(k, int) or k < 1:
        raise ValueError(f"modulus must be a positive integer or MOD_ALL, got {k!r}")
    _check_zero_offsets(
        matrix, (d for d in range(1, matrix.bandwidth + 1) if d % k != 0)
    )
    local_b = matrix.bandwidth // k
    sectors = []
    for r in range(min(k, matrix.dim)):
        indices = np.arange(r, matrix.dim, k)
        dim_r = len(indices)
        local_diags = []
        for dd in range(local_b + 1):
            want = max(dim_r - dd, 0)
            if dd * k > matrix.bandwidth or want == 0:
                local_diags.append(np.zeros(want))
            else:
                local_diags.append(matrix.diagonals[dd * k][r::k][:want].copy())
        sectors.append(
            Sector(residue=r, indices=indices, block=BandedSymMatrix(dim_r, local_b, tuple(local_diags)))
        )
    return SectorDecomposition(k, tuple(sectors))


def _check_zero_offsets(matrix: BandedSymMatrix, offsets) -> None:
    for d in offsets:
        diag = matrix.diagonals[d]
        if len(diag) and np.max(np.abs(diag)) > VIOLATION_TOL:
            i = int(np.argmax(np.abs(diag)))
            raise SymmetryViolation(
                f"entry ({i + d}, {i}) = {diag[i]:.3e} violates the claimed modulus"
            )
