"""Small dense Hermitian linear algebra: real-root cubics and eigensystems.

Everything here is fixed-size (3x3 or 4x4) and pure; the cubic solver is the
closed-form route to the spectrum, the numeric eigensolver is its independent
cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, NonRealRoots

# Discriminant window below which roots are treated as degenerate.  Chosen to
# absorb cancellation noise at level crossings without misclassifying genuine
# near-degeneracies.
_DEGENERATE_DISC = 1e-13


@dataclass(frozen=True)
class CubicCoefficients:
    """Monic cubic E^3 + c2*E^2 + c1*E + c0 with real coefficients."""

    c2: float
    c1: float
    c0: float

    def __post_init__(self):
        if not all(np.isfinite([self.c2, self.c1, self.c0])):
            raise ValueError("cubic coefficients must be finite")

    def evaluate(self, x):
        return ((x + self.c2) * x + self.c1) * x + self.c0


def solve_cubic_three_real(coeffs: CubicCoefficients, tol: float = 1e-9) -> np.ndarray:
    """All three real roots of a monic cubic, ascending.

    Uses the trigonometric branch (stable when all roots are real) and falls
    back to the closed-form double/triple-root expressions when the
    discriminant is inside the degeneracy window.  Each root gets one Newton
    polish step and must satisfy |p(r)| <= tol*(1 + |r|^3).

    Raises NonRealRoots if the discriminant says the cubic has a complex
    pair beyond tolerance (impossible for Hermitian characteristic
    polynomials, so it flags malformed input).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    c2, c1, c0 = coeffs.c2, coeffs.c1, coeffs.c0
    # depressed form x^3 + p x + q with E = x - c2/3
    shift = c2 / 3.0
    p = c1 - c2 * c2 / 3.0
    q = 2.0 * c2**3 / 27.0 - c2 * c1 / 3.0 + c0
    disc = -4.0 * p**3 - 27.0 * q * q
    scale = max(4.0 * abs(p) ** 3, 27.0 * q * q, np.finfo(float).tiny)

    if disc < -_DEGENERATE_DISC * scale:
        raise NonRealRoots(
            f"discriminant {disc:.3e} < 0: cubic has a complex conjugate pair"
        )
    if abs(disc) <= _DEGENERATE_DISC * scale:
        if abs(p) ** 1.5 <= _DEGENERATE_DISC * max(1.0, abs(q)):
            xs = np.zeros(3)
        else:
            # (x - a)^2 (x + 2a) with a = -3q/(2p)
            a = -1.5 * q / p
            xs = np.array([a, a, -2.0 * a])
    else:
        m = 2.0 * np.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)  # = cos(3 theta), clipped against rounding
        arg = min(1.0, max(-1.0, arg))
        theta = np.arccos(arg) / 3.0
        k = np.array([0.0, 1.0, 2.0])
        xs = m * np.cos(theta - 2.0 * np.pi * k / 3.0)

    roots = np.sort(xs - shift)
    # one guarded Newton step per root tightens the trig branch near
    # degeneracies without changing the well-separated case
    for i, r in enumerate(roots):
        deriv = (3.0 * r + 2.0 * c2) * r + c1
        if abs(deriv) > 1e-30:
            step = coeffs.evaluate(r) / deriv
            if abs(step) < 1e-2 * (1.0 + abs(r)):
                roots[i] = r - step
    roots = np.sort(roots)

    for r in roots:
        if abs(coeffs.evaluate(r)) > tol * (1.0 + abs(r) ** 3):
            raise NonRealRoots(
                f"root residual {coeffs.evaluate(r):.3e} exceeds tolerance at r={r!r}"
            )
    return roots


def ensure_hermitian(m: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Validate Hermiticity of a square matrix within tol (max elementwise)."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    dev = np.abs(m - m.conj().T).max()
    if dev > tol:
        raise ValueError(f"matrix is not Hermitian: max |M - M^H| = {dev:.3e}")
    return m


def hermitian_eigensystem(m: np.ndarray, tol: float = 1e-10):
    """Eigenvalues (ascending) and orthonormal eigenvector columns of a
    Hermitian matrix.

    Backed by LAPACK via numpy.linalg.eigh; the residual and orthonormality
    contracts are verified and ConvergenceFailure raised if unmet, so the
    solver choice stays an implementation detail.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = ensure_hermitian(m)
    w, v = np.linalg.eigh(m)
    scale = max(1.0, np.abs(w).max())
    resid = np.abs(m @ v - v * w[np.newaxis, :]).max()
    gram = np.abs(v.conj().T @ v - np.eye(m.shape[0])).max()
    if resid > tol * scale or gram > tol:
        raise ConvergenceFailure(
            f"eigensystem residual {resid:.3e} / orthonormality {gram:.3e} "
            f"exceed tol {tol:.1e}"
        )
    return w, v
