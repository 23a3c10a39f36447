"""Real-root cubic solver against factorizations and the numeric eigensolver."""
import numpy as np
import pytest

from geomphase import (
    CubicCoefficients,
    FieldVector,
    ModelParams,
    NonRealRoots,
    char_poly,
    hamiltonian,
    hermitian_eigensystem,
    solve_cubic_three_real,
)


def test_zero_field_factorization():
    # (E - 1)^2 (E + 1) = E^3 - E^2 - E + 1
    roots = solve_cubic_three_real(CubicCoefficients(-1.0, -1.0, 1.0))
    assert roots == pytest.approx([-1.0, 1.0, 1.0], abs=1e-12)


def test_longitudinal_field_factorization():
    # diagonal case xi=1, bz=2: eigenvalues (xi - bz, -xi, xi + bz) = (-1, -1, 3)
    roots = solve_cubic_three_real(CubicCoefficients(-1.0, -5.0, -3.0))
    assert roots == pytest.approx([-1.0, -1.0, 3.0], abs=1e-10)


def test_generic_field_matches_eigensolver():
    params = ModelParams(xi=1.0, sweep_rate_A=0.1)
    fld = FieldVector(1.0, 0.0, 1.0)
    coeffs = char_poly(params, fld)
    assert (coeffs.c2, coeffs.c1, coeffs.c0) == pytest.approx((-1.0, -3.0, 1.0))
    roots = solve_cubic_three_real(coeffs)
    w, _ = hermitian_eigensystem(hamiltonian(params, fld))
    assert roots == pytest.approx(w, abs=1e-10)


def test_random_hermitian_charpolys_match_eigensolver():
    rng = np.random.default_rng(7)
    params = ModelParams(xi=1.0, sweep_rate_A=0.1)
    for _ in range(200):
        fld = FieldVector(*rng.normal(scale=2.0, size=3))
        roots = solve_cubic_three_real(char_poly(params, fld))
        w, _ = hermitian_eigensystem(hamiltonian(params, fld))
        scale = 1.0 + np.abs(w).max()
        assert np.abs(roots - w).max() / scale < 1e-10


def test_residual_contract():
    rng = np.random.default_rng(3)
    for _ in range(500):
        c = CubicCoefficients(*rng.normal(scale=3.0, size=3))
        # symmetrize: build from three random real roots so all are real
        r = np.sort(rng.normal(scale=3.0, size=3))
        c = CubicCoefficients(-r.sum(), r[0] * r[1] + r[0] * r[2] + r[1] * r[2], -r.prod())
        roots = solve_cubic_three_real(c)
        assert roots == pytest.approx(r, abs=1e-8 * (1 + np.abs(r).max()))
        for root in roots:
            assert abs(c.evaluate(root)) <= 1e-9 * (1.0 + abs(root) ** 3)


def test_complex_roots_rejected():
    # E^3 + 1 has one real and two complex roots
    with pytest.raises(NonRealRoots):
        solve_cubic_three_real(CubicCoefficients(0.0, 0.0, 1.0))


def test_triple_root():
    # (E - 2)^3
    roots = solve_cubic_three_real(CubicCoefficients(-6.0, 12.0, -8.0))
    assert roots == pytest.approx([2.0, 2.0, 2.0], abs=1e-6)


def test_tol_validation():
    with pytest.raises(ValueError):
        solve_cubic_three_real(CubicCoefficients(-1.0, -1.0, 1.0), tol=0.0)


def test_nonfinite_coefficients_rejected():
    with pytest.raises(ValueError):
        CubicCoefficients(np.nan, 0.0, 0.0)
