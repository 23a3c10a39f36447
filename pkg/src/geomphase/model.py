"""Two exchange-coupled spin-1/2 particles in a driven magnetic field.

The pair Hamiltonian is H(t) = 4*xi*s1z*s2z + beta(t).(s1 + s2) with hbar = 1
and beta = mu*B.  In the triplet basis (|dndn>, |psi+>, |upup>) the matrix is

        [ xi - bz    c*        0   ]
    H = [   c       -xi        c*  ]        c = (bx - i*by)/sqrt(2),
        [   0        c       xi+bz ]

and the singlet |psi-> sits decoupled at energy -xi (4x4 "full" mode).

The drive rotates in the xy plane at frequency omega with a pulse-shaped
envelope and sweeps linearly along z: in the lab frame
beta = (Omega(t) cos wt, Omega(t) sin wt, A*t); in the co-rotating frame the
same physics reads beta = (Omega(t), 0, A*t - omega).  Internal units: xi is
the energy unit and time is measured in 1/xi.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDenominator, ZeroDenominator
from .linalg import CubicCoefficients

SQRT2 = np.sqrt(2.0)

# |xi + bz - E| below this is treated as a singular denominator in the
# closed-form eigenvector expression
_DEGENERACY_FLOOR = 1e-10


class Frame(enum.Enum):
    LAB = "lab"
    ROTATING = "rotating"


# ---------------------------------------------------------------------------
# drive envelopes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroEnvelope:
    """No transverse drive (diabatic limit)."""

    def value(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def derivative(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    @property
    def peak(self):
        return 0.0


@dataclass(frozen=True)
class ConstantEnvelope:
    omega0: float

    def __post_init__(self):
        if self.omega0 < 0:
            raise ValueError("amplitude must be >= 0")

    def value(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.omega0)

    def derivative(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    @property
    def peak(self):
        return self.omega0


@dataclass(frozen=True)
class GaussianPulse:
    """Omega(t) = omega0 * exp(-(t - center)^2 / width^2)."""

    omega0: float
    center: float
    width: float

    def __post_init__(self):
        if self.omega0 < 0:
            raise ValueError("amplitude must be >= 0")
        if self.width <= 0:
            raise ValueError("width must be > 0")

    def value(self, t):
        t = np.asarray(t, dtype=float)
        return self.omega0 * np.exp(-((t - self.center) ** 2) / self.width**2)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        return -2.0 * (t - self.center) / self.width**2 * self.value(t)

    @property
    def peak(self):
        return self.omega0


@dataclass(frozen=True)
class TwinGaussianPulse:
    """Sum of two Gaussian pulses, one per avoided crossing."""

    omega0_a: float
    center_a: float
    width_a: float
    omega0_b: float
    center_b: float
    width_b: float

    def __post_init__(self):
        if self.omega0_a < 0 or self.omega0_b < 0:
            raise ValueError("amplitudes must be >= 0")
        if self.width_a <= 0 or self.width_b <= 0:
            raise ValueError("widths must be > 0")

    def _parts(self, t):
        t = np.asarray(t, dtype=float)
        pa = self.omega0_a * np.exp(-((t - self.center_a) ** 2) / self.width_a**2)
        pb = self.omega0_b * np.exp(-((t - self.center_b) ** 2) / self.width_b**2)
        return pa, pb

    def value(self, t):
        pa, pb = self._parts(t)
        return pa + pb

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        pa, pb = self._parts(t)
        da = -2.0 * (t - self.center_a) / self.width_a**2 * pa
        db = -2.0 * (t - self.center_b) / self.width_b**2 * pb
        return da + db

    @property
    def peak(self):
        return max(self.omega0_a, self.omega0_b)


EnvelopeSpec = ZeroEnvelope | ConstantEnvelope | GaussianPulse | TwinGaussianPulse


def envelope_value(spec: EnvelopeSpec, t):
    """Drive amplitude Omega(t); scalar in, scalar out (arrays broadcast)."""
    out = spec.value(t)
    return float(out) if np.ndim(t) == 0 else out


def envelope_derivative(spec: EnvelopeSpec, t):
    """Exact analytic dOmega/dt."""
    out = spec.derivative(t)
    return float(out) if np.ndim(t) == 0 else out


# ---------------------------------------------------------------------------
# model parameters and fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelParams:
    """Physical constants and drive parameters of one scenario.

    xi > 0 is the exchange constant (the energy unit), omega >= 0 the
    transverse rotation frequency, sweep_rate_A > 0 the longitudinal sweep
    rate.  dim_mode selects the triplet-only (3) or triplet+singlet (4)
    state space.
    """

    xi: float = 1.0
    omega: float = 1.0
    sweep_rate_A: float = 0.16
    envelope: EnvelopeSpec = field(default_factory=ZeroEnvelope)
    dim_mode: int = 3

    def __post_init__(self):
        if self.xi <= 0:
            raise ValueError("xi must be positive")
        if self.sweep_rate_A <= 0:
            raise ValueError("sweep_rate_A must be positive")
        if self.omega < 0:
            raise ValueError("omega must be >= 0")
        if self.dim_mode not in (3, 4):
            raise ValueError("dim_mode must be 3 or 4")
        if self.omega >= 2.0 * self.xi:
            warnings.warn(
                "omega >= 2*xi: the two bare-state crossings are not in the "
                "usual configuration",
                stacklevel=2,
            )


@dataclass(frozen=True)
class FieldVector:
    """Effective magnetic field (energy units) in a given frame."""

    beta_x: float
    beta_y: float
    beta_z: float
    frame: Frame = Frame.ROTATING

    def __post_init__(self):
        if not all(np.isfinite([self.beta_x, self.beta_y, self.beta_z])):
            raise ValueError("field components must be finite")


@dataclass(frozen=True)
class CrossingTimes:
    """Times where bare-state energies cross in the rotating frame.

    t_a: |dndn>/|psi+> crossing at (omega + 2 xi)/A.
    t_b: |dndn>/|upup> crossing at omega/A.
    """

    t_a: float
    t_b: float


def field_at(params: ModelParams, t: float, frame: Frame = Frame.ROTATING) -> FieldVector:
    """Instantaneous drive field at time t in the requested frame."""
    om = envelope_value(params.envelope, t)
    if frame is Frame.LAB:
        wt = params.omega * t
        return FieldVector(om * np.cos(wt), om * np.sin(wt), params.sweep_rate_A * t, frame)
    return FieldVector(om, 0.0, params.sweep_rate_A * t - params.omega, frame)


def hamiltonian(params: ModelParams, fld: FieldVector) -> np.ndarray:
    """Matrix of H for the given field, 3x3 (triplet) or 4x4 (with singlet)."""
    xi = params.xi
    c = (fld.beta_x - 1j * fld.beta_y) / SQRT2
    n = params.dim_mode
    h = np.zeros((n, n), dtype=complex)
    h[0, 0] = xi - fld.beta_z
    h[1, 1] = -xi
    h[2, 2] = xi + fld.beta_z
    h[1, 0] = c
    h[2, 1] = c
    h[0, 1] = np.conj(c)
    h[1, 2] = np.conj(c)
    if n == 4:
        h[3, 3] = -xi
    return h


def char_poly(params: ModelParams, fld: FieldVector) -> CubicCoefficients:
    """Characteristic cubic of the triplet block.

    E^3 - xi E^2 - (b^2 + xi^2) E - (xi (bz^2 - bx^2 - by^2) - xi^3) = 0.
    """
    xi = params.xi
    bperp2 = fld.beta_x**2 + fld.beta_y**2
    b2 = bperp2 + fld.beta_z**2
    return CubicCoefficients(
        c2=-xi,
        c1=-(b2 + xi**2),
        c0=-(xi * (fld.beta_z**2 - bperp2) - xi**3),
    )


def analytic_eigenvector(params: ModelParams, fld: FieldVector, energy: float) -> np.ndarray:
    """Normalized triplet eigenvector for eigenvalue `energy` in closed form.

    Components are proportional to

        ( (bx + i by)/sqrt2,
          E - xi + bz,
          -(bx - i by)(E - xi + bz) / (sqrt2 (xi + bz - E)) ).

    For a purely longitudinal field the expression degenerates and the
    matching basis vector is returned instead (documented fallback).  Raises
    DegenerateDenominator when |xi + bz - E| is below the degeneracy floor;
    the caller should use the numeric eigensolver then.
    """
    xi = params.xi
    bperp = complex(fld.beta_x, fld.beta_y)
    if abs(bperp) < _DEGENERACY_FLOOR:
        # diagonal Hamiltonian: eigenvectors are basis vectors
        diag = np.array([xi - fld.beta_z, -xi, xi + fld.beta_z])
        j = int(np.argmin(np.abs(diag - energy)))
        if abs(diag[j] - energy) > 1e-6 * max(1.0, abs(energy)):
            raise ValueError(f"{energy!r} is not an eigenvalue of the diagonal field case")
        v = np.zeros(3, dtype=complex)
        v[j] = 1.0
        return v
    den = xi + fld.beta_z - energy
    if abs(den) < _DEGENERACY_FLOOR:
        raise DegenerateDenominator(
            f"|xi + bz - E| = {abs(den):.3e} below degeneracy floor; use the "
            "numeric eigensolver"
        )
    mid = energy - xi + fld.beta_z
    v = np.array(
        [
            bperp / SQRT2,
            mid,
            -np.conj(bperp) * mid / (SQRT2 * den),
        ],
        dtype=complex,
    )
    return v / np.linalg.norm(v)


def crossing_times(params: ModelParams) -> CrossingTimes:
    """Bare-state crossing times in the rotating frame."""
    return CrossingTimes(
        t_a=(params.omega + 2.0 * params.xi) / params.sweep_rate_A,
        t_b=params.omega / params.sweep_rate_A,
    )


def detuning(params: ModelParams, t):
    """Detuning Delta(t) = 2 xi + omega - A t of the |dndn>/|psi+> pair."""
    return 2.0 * params.xi + params.omega - params.sweep_rate_A * np.asarray(t, dtype=float)


def adiabaticity_ratio(params: ModelParams, t):
    """Local adiabaticity measure of the driven pair crossing.

    r(t) = |Omega * dDelta/dt - dOmega/dt * Delta| / (sqrt2 (2 Omega^2 + Delta^2)^{3/2})

    with Delta = 2 xi + omega - A t.  Values << 1 mean the evolution follows
    the instantaneous eigenstates.  Raises ZeroDenominator if both Omega and
    Delta vanish (below 1e-14).
    """
    t_arr = np.asarray(t, dtype=float)
    om = np.asarray(envelope_value(params.envelope, t_arr), dtype=float)
    omd = np.asarray(envelope_derivative(params.envelope, t_arr), dtype=float)
    delta = detuning(params, t_arr)
    if np.any((np.abs(om) < 1e-14) & (np.abs(delta) < 1e-14)):
        raise ZeroDenominator("Omega and Delta both vanish; ratio undefined")
    num = np.abs(om * (-params.sweep_rate_A) - omd * delta) / SQRT2
    den = (2.0 * om**2 + delta**2) ** 1.5
    out = num / den
    return float(out) if np.ndim(t) == 0 else out


def max_adiabaticity_ratio(params: ModelParams, t0: float, t1: float, n: int = 20001):
    """Max of the adiabaticity ratio over [t0, t1] by dense sampling.

    Returns (max_ratio, argmax_time).  n controls the sampling grid; the
    default resolves every envelope in this package's scenarios to well
    below 1e-4 in the max.
    """
    ts = np.linspace(t0, t1, n)
    rr = adiabaticity_ratio(params, ts)
    i = int(np.argmax(rr))
    return float(rr[i]), float(ts[i])


def basis_state(dim: int, label: int) -> np.ndarray:
    """Bare basis ket |label> (1-based: 1=|dndn>, 2=|psi+>, 3=|upup>, 4=|psi->)."""
    if not 1 <= label <= dim:
        raise ValueError(f"label {label} outside 1..{dim}")
    v = np.zeros(dim, dtype=complex)
    v[label - 1] = 1.0
    return v
