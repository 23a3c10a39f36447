"""Compiled propagation kernels for the 3x3 triplet block.

The public transport API delegates here when numba is importable and the
scenario fits the kernel (triplet mode, standard envelope family); otherwise
a pure-numpy twin with identical stepping is used.  Tests pin the two paths
against each other.
"""
from __future__ import annotations

import numpy as np

from .model import (
    ConstantEnvelope,
    Frame,
    GaussianPulse,
    ModelParams,
    TwinGaussianPulse,
    ZeroEnvelope,
)

SQRT2 = np.sqrt(2.0)

ENV_ZERO = 0
ENV_CONSTANT = 1
ENV_GAUSSIAN = 2
ENV_TWIN = 3

try:  # pragma: no cover - exercised indirectly
    from numba import njit

    HAVE_NUMBA = True
except Exception:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return deco


def encode_envelope(envelope):
    """(kind, params[6]) encoding for the kernel, or None if unsupported."""
    p = np.zeros(6)
    if isinstance(envelope, ZeroEnvelope):
        return ENV_ZERO, p
    if isinstance(envelope, ConstantEnvelope):
        p[0] = envelope.omega0
        return ENV_CONSTANT, p
    if isinstance(envelope, GaussianPulse):
        p[0], p[1], p[2] = envelope.omega0, envelope.center, envelope.width
        return ENV_GAUSSIAN, p
    if isinstance(envelope, TwinGaussianPulse):
        p[:] = (
            envelope.omega0_a,
            envelope.center_a,
            envelope.width_a,
            envelope.omega0_b,
            envelope.center_b,
            envelope.width_b,
        )
        return ENV_TWIN, p
    return None


def _env_value(kind, p, t):
    if kind == ENV_ZERO:
        return 0.0
    if kind == ENV_CONSTANT:
        return p[0]
    if kind == ENV_GAUSSIAN:
        return p[0] * np.exp(-((t - p[1]) ** 2) / (p[2] * p[2]))
    return p[0] * np.exp(-((t - p[1]) ** 2) / (p[2] * p[2])) + p[3] * np.exp(
        -((t - p[4]) ** 2) / (p[5] * p[5])
    )


def _rhs(t, y, kind, p, xi, omega, A, lab, parallel_transport, energies):
    """dy/dt for columns of y; energies[col] receives <H> when transporting."""
    om = _env_value(kind, p, t)
    if lab:
        bx = om * np.cos(omega * t)
        by = om * np.sin(omega * t)
        bz = A * t
    else:
        bx = om
        by = 0.0
        bz = A * t - omega
    c = (bx - 1j * by) / SQRT2
    h = np.zeros((3, 3), dtype=np.complex128)
    h[0, 0] = xi - bz
    h[0, 1] = np.conj(c)
    h[1, 0] = c
    h[1, 1] = -xi
    h[1, 2] = np.conj(c)
    h[2, 1] = c
    h[2, 2] = xi + bz
    hy = h @ y
    k = np.empty_like(y)
    for col in range(y.shape[1]):
        e = 0.0
        for r in range(3):
            e += (np.conj(y[r, col]) * hy[r, col]).real
        energies[col] = e
        if parallel_transport:
            for r in range(3):
                k[r, col] = -1j * (hy[r, col] - e * y[r, col])
        else:
            for r in range(3):
                k[r, col] = -1j * hy[r, col]
    return k


def _propagate(kind, p, xi, omega, A, lab, parallel_transport, y0, t0, t1, dt, stride):
    """RK4 propagation of state columns; records every `stride` steps.

    Returns (ts, ys, dyn) with ys[i] the 3 x m column stack at ts[i] and
    dyn[i, col] the accumulated integral of <H> along column col (the
    dynamical phase removed by the transport gauge).  Columns are
    renormalized after every step in parallel-transport mode.
    """
    n_steps = int(np.ceil((t1 - t0) / dt - 1e-12))
    m = y0.shape[1]
    n_rec = (n_steps - 1) // stride + 2 if n_steps >= 1 else 1
    ts = np.empty(n_rec)
    ys = np.empty((n_rec, 3, m), dtype=np.complex128)
    dyn = np.empty((n_rec, m))
    y = y0.copy()
    theta = np.zeros(m)
    e1 = np.zeros(m)
    e2 = np.zeros(m)
    e3 = np.zeros(m)
    e4 = np.zeros(m)
    ts[0] = t0
    ys[0] = y
    dyn[0] = theta
    t = t0
    idx = 1
    ok = True
    for i in range(n_steps):
        if i == n_steps - 1:
            t_next = t1
        else:
            t_next = t0 + (i + 1) * dt
        h = t_next - t
        k1 = _rhs(t, y, kind, p, xi, omega, A, lab, parallel_transport, e1)
        k2 = _rhs(t + 0.5 * h, y + (0.5 * h) * k1, kind, p, xi, omega, A, lab, parallel_transport, e2)
        k3 = _rhs(t + 0.5 * h, y + (0.5 * h) * k2, kind, p, xi, omega, A, lab, parallel_transport, e3)
        k4 = _rhs(t_next, y + h * k3, kind, p, xi, omega, A, lab, parallel_transport, e4)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        for col in range(m):
            theta[col] += h / 6.0 * (e1[col] + 2.0 * e2[col] + 2.0 * e3[col] + e4[col])
        if parallel_transport:
            for col in range(m):
                nrm = 0.0
                for r in range(3):
                    nrm += abs(y[r, col]) ** 2
                nrm = np.sqrt(nrm)
                for r in range(3):
                    y[r, col] /= nrm
        t = t_next
        for col in range(m):
            for r in range(3):
                v = y[r, col]
                if not (np.isfinite(v.real) and np.isfinite(v.imag)):
                    ok = False
        if not ok:
            return ts[:idx], ys[:idx], dyn[:idx], False
        if i == n_steps - 1 or (i + 1) % stride == 0:
            ts[idx] = t
            ys[idx] = y
            dyn[idx] = theta
            idx += 1
    return ts[:idx], ys[:idx], dyn[:idx], True


if HAVE_NUMBA:
    _env_value = njit(cache=True)(_env_value)
    _rhs = njit(cache=True)(_rhs)
    propagate_compiled = njit(cache=True)(_propagate)
else:  # pragma: no cover
    propagate_compiled = _propagate


def propagate_columns(
    params: ModelParams,
    y0: np.ndarray,
    t0: float,
    t1: float,
    dt: float,
    frame: Frame,
    parallel_transport: bool,
    record_stride: int = 10,
):
    """Propagate triplet state columns with the compiled kernel.

    Returns (ts, ys, dyn, finite_flag).  Only valid for dim-3 states and
    kernel-encodable envelopes; callers check `kernel_supported` first.
    """
    enc = encode_envelope(params.envelope)
    if enc is None or y0.shape[0] != 3:
        raise ValueError("scenario not supported by the compiled kernel")
    kind, p = enc
    return propagate_compiled(
        kind,
        p,
        params.xi,
        params.omega,
        params.sweep_rate_A,
        frame is Frame.LAB,
        parallel_transport,
        np.ascontiguousarray(y0, dtype=np.complex128),
        float(t0),
        float(t1),
        float(dt),
        int(record_stride),
    )


def kernel_supported(params: ModelParams, dim: int) -> bool:
    return dim == 3 and encode_envelope(params.envelope) is not None
