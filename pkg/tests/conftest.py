"""Shared brute-force oracles: dense ladder matrices multiplied directly."""

import numpy as np
import pytest

from kerrspec.fock import OperatorPoly


def lowering_matrix(n_max: int) -> np.ndarray:
    """Dense annihilation operator: a|n> = sqrt(n)|n-1>."""
    a = np.zeros((n_max + 1, n_max + 1))
    n = np.arange(1, n_max + 1)
    a[n - 1, n] = np.sqrt(n)
    return a


def dense_term_oracle(coeff, p, q, weight, n_max) -> np.ndarray:
    """coeff * a^dag^p w(n) a^q as an explicit matrix product."""
    a = lowering_matrix(n_max)
    ad = a.T.copy()
    w = np.diag(np.polyval(list(reversed(weight)), np.arange(n_max + 1.0)))
    return coeff * (
        np.linalg.matrix_power(ad, p) @ w @ np.linalg.matrix_power(a, q)
    )


def dense_poly_oracle(poly: OperatorPoly, n_max: int) -> np.ndarray:
    out = np.zeros((n_max + 1, n_max + 1))
    for t in poly.terms:
        out += dense_term_oracle(t.coeff, t.p, t.q, t.weight, n_max)
    return out


@pytest.fixture
def oracle():
    return dense_term_oracle
