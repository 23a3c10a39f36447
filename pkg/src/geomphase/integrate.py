"""Fixed-step classic Runge-Kutta integrator for complex first-order ODEs.

Fixed step (no adaptive control) keeps runs bit-reproducible for a given
configuration; dt is always an explicit knob of the caller.
"""
from __future__ import annotations

import numpy as np

from .errors import NonFiniteState


def integrate_ode(rhs, y0, t0: float, t1: float, dt: float, record_stride: int = 1):
    """Integrate dy/dt = rhs(t, y) from t0 to t1 with classic RK4.

    The final step is truncated to land exactly on t1.  Returns
    (ts, ys) where ys[i] is the state at ts[i]; both endpoints are always
    recorded, interior states every `record_stride` steps.

    Raises NonFiniteState as soon as any amplitude is inf/nan.
    """
    if not t1 > t0:
        raise ValueError("t1 must exceed t0")
    if not 0 < dt <= (t1 - t0):
        raise ValueError("dt must satisfy 0 < dt <= t1 - t0")
    if record_stride < 1:
        raise ValueError("record_stride must be >= 1")

    y = np.array(y0, dtype=complex)
    n_steps = int(np.ceil((t1 - t0) / dt - 1e-12))
    ts = [t0]
    ys = [y.copy()]
    t = t0
    # overflow/invalid are handled by the explicit finiteness check below
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n_steps):
            last = i == n_steps - 1
            t_next = t1 if last else t0 + (i + 1) * dt
            h = t_next - t
            k1 = rhs(t, y)
            k2 = rhs(t + 0.5 * h, y + (0.5 * h) * k1)
            k3 = rhs(t + 0.5 * h, y + (0.5 * h) * k2)
            k4 = rhs(t_next, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t = t_next
            if not np.all(np.isfinite(y.view(float))):
                raise NonFiniteState(f"non-finite state at t={t!r}; reduce dt")
            if last or (i + 1) % record_stride == 0:
                ts.append(t)
                ys.append(y.copy())
    return np.array(ts), np.array(ys)
