"""Continuous-time Lyapunov equation for 2x2 systems.

Solves ``A.T @ P + P @ A = -Q`` by reducing it to a 3x3 linear system in the
upper-triangle unknowns ``(p11, p12, p22)`` and applying Cramer's rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonFinite, NotHurwitz, SingularSystem

_SINGULAR_RTOL = 1e-13


@dataclass(frozen=True)
class PMatrix:
    """Symmetric 2x2 matrix stored as its upper triangle."""

    p11: float
    p12: float
    p22: float

    @property
    def p21(self) -> float:
        return self.p12

    def as_array(self) -> np.ndarray:
        return np.array([[self.p11, self.p12], [self.p12, self.p22]])

    def quad(self, e1: float, e2: float) -> float:
        return self.p11 * e1 * e1 + 2.0 * self.p12 * e1 * e2 + self.p22 * e2 * e2


def _as_matrix2(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFinite("matrix has non-finite entries")
    return A


def is_hurwitz(A) -> bool:
    """True iff both eigenvalues of the 2x2 matrix have negative real part."""
    A = _as_matrix2(A)
    trace = A[0, 0] + A[1, 1]
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    return bool(trace < 0.0 and det > 0.0)


def is_positive_definite(P: PMatrix) -> bool:
    return P.p11 > 0.0 and P.p11 * P.p22 - P.p12 * P.p12 > 0.0


def solve_lyapunov(A, Q=None) -> PMatrix:
    """Return the SPD solution P of ``A.T P + P A = -Q``.

    ``Q`` defaults to the identity. Raises NotHurwitz when A is not stable
    and SingularSystem when the reduced 3x3 system is numerically singular.
    """
    A = _as_matrix2(A)
    Q = np.eye(2) if Q is None else _as_matrix2(Q)
    if not is_hurwitz(A):
        raise NotHurwitz(f"A is not Hurwitz: {A.tolist()}")
    a, b = (float(v) for v in A[0])
    c, d = (float(v) for v in A[1])
    # rows: (1,1), (1,2), (2,2) entries of A.T P + P A
    M = (
        (2.0 * a, 2.0 * c, 0.0),
        (b, a + d, c),
        (0.0, 2.0 * b, 2.0 * d),
    )
    rhs = (-float(Q[0, 0]), -0.5 * float(Q[0, 1] + Q[1, 0]), -float(Q[1, 1]))

    det = _det3(M)
    scale = max(abs(v) for row in M for v in row) ** 3
    if not math.isfinite(det) or abs(det) <= _SINGULAR_RTOL * scale:
        raise SingularSystem(f"reduced Lyapunov system is singular (det={det:g})")

    p = []
    for col in range(3):
        Mc = [list(row) for row in M]
        for r in range(3):
            Mc[r][col] = rhs[r]
        p.append(float(_det3(Mc) / det))
    return PMatrix(p[0], p[1], p[2])


def _det3(M) -> float:
    return (
        M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1])
        - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0])
        + M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0])
    )


def lyapunov_residual(A, P: PMatrix, Q=None) -> float:
    """Max-norm of ``A.T P + P A + Q``."""
    A = np.asarray(A, dtype=float)
    Q = np.eye(2) if Q is None else np.asarray(Q, dtype=float)
    Pm = P.as_array()
    return float(np.max(np.abs(A.T @ Pm + Pm @ A + Q)))
