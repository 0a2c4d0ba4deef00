"""Compact two-boson (auxiliary-boson) picture of the driven Kerr oscillator.

Adjoining an auxiliary boson s to the physical mode a embeds the problem in
a finite u(2) representation |[N], n> with n + n_s = N.  This module builds
the so(2) generator a^dag s + s^dag a, its quadratic Casimir, the su(2)
pairing operator, the parity-resolved classification of -(a^dag^2 + a^2)
with its representation doubling, and the large-N contraction check back to
the single-mode Fock Hamiltonian.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .eigensolve import eigen
from .fock import BandedSymMatrix, FockSpace, HamiltonianSpec, assemble, pairing_poly
from .sectors import split

__all__ = [
    "U2Rep",
    "So2Label",
    "CasimirLevel",
    "PairingBranchLevel",
    "ParityBranch",
    "RepClassification",
    "so2_generator",
    "casimir_matrix",
    "pairing_prime_matrix",
    "casimir_spectrum",
    "pairing_prime_spectrum",
    "classify_pairing_sp2",
    "u2_generators",
    "u2_hamiltonian",
    "contraction_check",
]


@dataclass(frozen=True)
class U2Rep:
    """Symmetric u(2) representation [N]: basis |[N], n>, n = 0..N."""

    N: int

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError("representation label N must be positive")

    @property
    def dim(self) -> int:
        return self.N + 1

    @property
    def j(self) -> Fraction:
        return Fraction(self.N, 2)


@dataclass(frozen=True)
class So2Label:
    """so(2) quantum numbers of one state within [N]: sigma, m = sigma/2, v."""

    N: int
    sigma: int

    def __post_init__(self) -> None:
        if abs(self.sigma) > self.N or (self.N - self.sigma) % 2:
            raise ValueError(f"sigma={self.sigma} not in the [N={self.N}] ladder")

    @property
    def m(self) -> Fraction:
        return Fraction(self.sigma, 2)

    @property
    def pi_prime(self) -> int:
        return 1 if self.sigma > 0 else (-1 if self.sigma < 0 else 0)

    @property
    def v(self) -> int:
        """Vibrational index (N - |sigma|)/2, counted down from |sigma| = N."""
        return (self.N - abs(self.sigma)) // 2


class CasimirLevel(NamedTuple):
    v: int
    pi_prime: int
    value: float


class PairingLevel(NamedTuple):
    v: int
    value: float


def _pair_amplitude(n, N: int):
    """Coupling <n+2| a^dag^2 s^2 |n> = sqrt((n+1)(n+2)(N-n)(N-n-1)).

    Shared by the Casimir and pairing constructions so their off-diagonal
    entries cancel bit for bit in C2 + P2' = N^2.
    """
    return np.sqrt((n + 1.0) * (n + 2.0)) * np.sqrt((N - n) * (N - n - 1.0))


def so2_generator(rep: U2Rep) -> np.ndarray:
    """Dense symmetric matrix of a^dag s + s^dag a on |[N], n>."""
    N = rep.N
    g = np.zeros((rep.dim, rep.dim))
    n = np.arange(N)
    amp = np.sqrt((n + 1.0) * (N - n))
    g[n + 1, n] = amp
    g[n, n + 1] = amp
    return g


def casimir_matrix(rep: U2Rep) -> np.ndarray:
    """Quadratic so(2) Casimir (a^dag s + s^dag a)^2 from its boson expansion."""
    N = rep.N
    c = np.zeros((rep.dim, rep.dim))
    n = np.arange(rep.dim, dtype=float)
    c[np.arange(rep.dim), np.arange(rep.dim)] = 2.0 * n * (N - n) + N
    m = np.arange(N - 1)
    amp = _pair_amplitude(m, N)
    c[m + 2, m] = amp
    c[m, m + 2] = amp
    return c


def pairing_prime_matrix(rep: U2Rep) -> np.ndarray:
    """su(2) pairing operator from its four-term boson definition."""
    N = rep.N
    p = np.zeros((rep.dim, rep.dim))
    n = np.arange(rep.dim, dtype=float)
    p[np.arange(rep.dim), np.arange(rep.dim)] = n * (n - 1.0) + (N - n) * (N - n - 1.0)
    m = np.arange(N - 1)
    amp = _pair_amplitude(m, N)
    p[m + 2, m] = -amp
    p[m, m + 2] = -amp
    return p


def u2_generators(rep: U2Rep) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """su(2) ladder pair and weight generator (f_plus, f_minus, f_z).

    f_z carries eigenvalue (n - n_s)/2 so that the standard relations
    [f_z, f_pm] = +-f_pm and [f_plus, f_minus] = 2 f_z hold.
    """
    N = rep.N
    fp = np.zeros((rep.dim, rep.dim))
    n = np.arange(N)
    fp[n + 1, n] = np.sqrt((n + 1.0) * (N - n))
    fz = np.diag((np.arange(rep.dim) - (N - np.arange(rep.dim))) / 2.0)
    return fp, fp.T.copy(), fz


def casimir_spectrum(rep: U2Rep, tol: float = 1e-6) -> list[CasimirLevel]:
    """Casimir eigenvalues labeled (v, pi_prime), checked against (N - 2v)^2.

    Values are doubly degenerate in the branch sign, except sigma = 0 for
    even N.
    """
    N = rep.N
    vals = np.linalg.eigvalsh(casimir_matrix(rep))
    order = np.argsort(vals)[::-1]  # largest first: v = 0 pair leads
    vals = vals[order]
    out: list[CasimirLevel] = []
    pos = 0
    for v in range(N // 2 + 1):
        sigma = N - 2 * v
        expect = float(sigma * sigma)
        signs = (1, -1) if sigma > 0 else (0,)
        for sign in signs:
            got = float(vals[pos])
            if abs(got - expect) > tol * max(1.0, N * N):
                raise ValueError(
                    f"Casimir eigenvalue {got} does not match sigma^2={expect} at v={v}"
                )
            out.append(CasimirLevel(v, sign, got))
            pos += 1
    return out


def pairing_prime_spectrum(rep: U2Rep) -> list[PairingLevel]:
    """Pairing eigenvalues 4Nv(1 - v/N) labeled by v, with branch doubling.

    The operator is built both as N^2 - C2 and from its boson definition;
    the two matrices must agree exactly.
    """
    N = rep.N
    boson = pairing_prime_matrix(rep)
    from_casimir = N * N * np.eye(rep.dim) - casimir_matrix(rep)
    if not np.array_equal(boson, from_casimir):
        raise ValueError("pairing operator: boson form and N^2 - C2 disagree")
    vals = np.sort(np.linalg.eigvalsh(boson))  # ascending: v = 0 pair first
    out: list[PairingLevel] = []
    pos = 0
    for v in range(N // 2 + 1):
        count = 2 if N - 2 * v > 0 else 1
        for _ in range(count):
            out.append(PairingLevel(v, float(vals[pos])))
            pos += 1
    return out


@dataclass(frozen=True)
class PairingBranchLevel:
    """One eigenstate of -(a^dag^2 + a^2) within a parity branch."""

    v: int
    m: Fraction
    pi_prime: int
    energy: float


@dataclass(frozen=True)
class ParityBranch:
    parity: int
    j: Fraction
    levels: tuple[PairingBranchLevel, ...]

    @property
    def count(self) -> int:
        return len(self.levels)


@dataclass(frozen=True)
class RepClassification:
    """Parity-resolved quasi-spin content of -(a^dag^2 + a^2) at truncation N."""

    N: int
    even: ParityBranch
    odd: ParityBranch


def _doubled_j(N: int, parity: int) -> Fraction:
    if N % 2 == 0:
        return Fraction(N, 4) if parity == +1 else Fraction(N, 4) - Fraction(1, 2)
    return Fraction(N - 1, 4)


def classify_pairing_sp2(n_max: int) -> RepClassification:
    """Diagonalize -(a^dag^2 + a^2) on the truncated Fock space, by parity.

    Each parity branch is assigned its quasi-spin j from the residue of the
    truncation N mod 4 and its levels are indexed by v = j - m in ascending
    energy order.  In the untruncated limit the branch spectrum approaches
    the straight line -2m between -N and +N, but the approach is very slow
    and is not asserted here.
    """
    N = n_max
    decomp = split(assemble(pairing_poly(2, -1.0), FockSpace(N)), 2)
    branches = {}
    for parity, residue in ((+1, 0), (-1, 1)):
        block = decomp.sector(residue).block
        vals = eigen(block).eigenvalues
        j = _doubled_j(N, parity)
        if Fraction(2) * j + 1 != block.dim:
            raise ValueError(
                f"branch dimension {block.dim} inconsistent with j={j} at N={N}"
            )
        levels = []
        for v, e in enumerate(vals):
            m = j - v
            sign = 1 if m > 0 else (-1 if m < 0 else 0)
            levels.append(PairingBranchLevel(v, m, sign, float(e)))
        branches[parity] = ParityBranch(parity, j, tuple(levels))
    return RepClassification(N, branches[+1], branches[-1])


def u2_hamiltonian(eta: float, xi: float, N: int) -> BandedSymMatrix:
    """Driven-Kerr Hamiltonian in the u(2) basis with squeeze a^dag^2 s^2 + h.c.

    The compact squeeze strength is normalized to xi / N so the contracted
    (N -> infinity) Hamiltonian matches the Fock one at equal xi.
    """
    n = np.arange(N + 1, dtype=float)
    diag0 = -eta * n + n * (n - 1.0)
    eps2 = xi / N
    m = np.arange(N - 1)
    diag2 = -eps2 * _pair_amplitude(m, N)
    return BandedSymMatrix(N + 1, 2, (diag0, np.zeros(N), diag2))


def contraction_check(spec: HamiltonianSpec, N: int, n_levels: int) -> float:
    """Max deviation of the lowest u(2) excitation energies from the Fock ones.

    The Fock reference is diagonalized at the same occupation cutoff with a
    probe basis certifying convergence of the compared levels.  The deviation
    must shrink as N grows.
    """
    if spec.xi3 or spec.xi4 or spec.xi2p or spec.higher is not None:
        raise ValueError("contraction check is defined for the two-photon drive only")
    if not 0 < n_levels <= N:
        raise ValueError("need 0 < n_levels <= N")

    compact = eigen(u2_hamiltonian(spec.eta, spec.xi, N)).eigenvalues
    compact_exc = compact[:n_levels] - compact[0]

    from .eigensolve import converged_spectrum

    ref = converged_spectrum(spec, n_max=N, n_probe=N + 100, tol_conv=1e-10)
    if not np.all(ref.converged[:n_levels]):
        raise ValueError(f"Fock reference not converged for {n_levels} levels at N={N}")
    ref_exc = ref.excitations[:n_levels]
    return float(np.max(np.abs(compact_exc - ref_exc)))
