"""Acceptance suite: one test per release criterion, tolerances pinned.

Run `pytest tests/test_acceptance.py -v` for one pass/fail line per
criterion.  The heavyweight scenario runs are shared through module-scoped
fixtures; every tolerance below is part of the package contract, not a
tuning knob.
"""
import dataclasses
import json
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import spearmanr

from geomphase import (
    DegenerateDenominator,
    Frame,
    ModelParams,
    adiabaticity_ratio,
    analytic_eigenvector,
    basis_state,
    char_poly,
    crossing_times,
    eigenframe_transport,
    hamiltonian,
    hermitian_eigensystem,
    max_adiabaticity_ratio,
    solve_cubic_three_real,
    transport_basis,
)
from geomphase.model import FieldVector, GaussianPulse
from geomphase.phases import build_phase_report, principal_angle
from geomphase.scenarios import (
    load_config,
    run_evolution,
    run_twin_pulse,
    scenario_from_config,
)
from geomphase.sweep import run_sweep, sweep_from_config

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _report(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


# ---------------------------------------------------------------- fixtures


@pytest.fixture(scope="module")
def fig2_summary(tmp_path_factory):
    cfg = scenario_from_config(load_config(CONFIGS / "fig2.cfg"))
    out = tmp_path_factory.mktemp("fig2")
    return run_evolution(cfg, out)


@pytest.fixture(scope="module")
def fig4_summary(tmp_path_factory):
    cfg = scenario_from_config(load_config(CONFIGS / "fig4.cfg"))
    out = tmp_path_factory.mktemp("fig4")
    return run_twin_pulse(cfg, out)


@pytest.fixture(scope="module")
def sweep_outputs(tmp_path_factory):
    cfg = sweep_from_config(load_config(CONFIGS / "fig3.cfg"))
    out1 = tmp_path_factory.mktemp("sweep_w1")
    t0 = time.perf_counter()
    path1 = run_sweep(cfg, out1, workers=1)
    elapsed = time.perf_counter() - t0
    out8 = tmp_path_factory.mktemp("sweep_w8")
    path8 = run_sweep(cfg, out8, workers=8)
    return path1, path8, elapsed


def _final_columns(params, t0, t1, dt, frame):
    _, cols, _ = transport_basis(params, t0, t1, dt, frame, record_stride=10**9)
    return cols[-1]


# ---------------------------------------------------------------- criteria


def test_c1_spectrum_oracle():
    """Cubic roots vs numeric eigensolver on 1000 random draws; singlet line."""
    rng = np.random.default_rng(101)
    t_start = time.perf_counter()
    worst = 0.0
    worst_singlet = 0.0
    for _ in range(1000):
        xi = float(rng.uniform(0.3, 2.5))
        fld = FieldVector(*rng.normal(scale=2.0, size=3))
        p3 = ModelParams(xi=xi, sweep_rate_A=0.1, omega=0.0, dim_mode=3)
        roots = solve_cubic_three_real(char_poly(p3, fld))
        w3, _ = hermitian_eigensystem(hamiltonian(p3, fld))
        scale = 1.0 + np.abs(w3).max()
        worst = max(worst, float(np.abs(roots - w3).max() / scale))
        p4 = dataclasses.replace(p3, dim_mode=4)
        w4, _ = hermitian_eigensystem(hamiltonian(p4, fld))
        worst_singlet = max(worst_singlet, float(np.abs(w4 + xi).min() / xi))
    elapsed = time.perf_counter() - t_start
    ok = worst <= 1e-10 and worst_singlet <= 1e-12 and elapsed < 5.0
    _report(
        "spectrum oracle",
        ok,
        f"max rel dev {worst:.2e}, singlet dev {worst_singlet:.2e}, {elapsed:.2f}s",
    )


def test_c2_eigenvector_formula():
    """Closed-form eigenvectors: residual <= 1e-8, degenerate cases fall back."""
    rng = np.random.default_rng(103)
    t_start = time.perf_counter()
    worst = 0.0
    degenerate = 0
    checked = 0
    draws = [
        (float(rng.uniform(0.3, 2.5)), FieldVector(*rng.normal(scale=2.0, size=3)))
        for _ in range(1000)
    ]
    # the closed form is singular when E = xi + bz; force that route too
    draws.append((1.0, FieldVector(1e-6, 0.0, 0.5)))
    draws.append((1.0, FieldVector(0.0, 0.0, 0.7)))
    for xi, fld in draws:
        params = ModelParams(xi=xi, sweep_rate_A=0.1, omega=0.0)
        h = hamiltonian(params, fld)
        w, vecs = hermitian_eigensystem(h)
        for i, ev in enumerate(w):
            try:
                v = analytic_eigenvector(params, fld, float(ev))
            except DegenerateDenominator:
                degenerate += 1
                v = vecs[:, i]  # documented fallback route
            checked += 1
            worst = max(worst, float(np.linalg.norm(h @ v - ev * v)))
    elapsed = time.perf_counter() - t_start
    ok = worst <= 1e-8 and checked == 3006 and degenerate >= 1 and elapsed < 5.0
    _report(
        "eigenvector formula",
        ok,
        f"max residual {worst:.2e} over {checked} roots "
        f"({degenerate} degenerate fallbacks), {elapsed:.2f}s",
    )


def test_c3_pair_exchange_reproduction(fig2_summary):
    """Shipped pair-exchange scenario: (1 2) swap, product arg, phase window."""
    rep = fig2_summary["report"]
    perm_ok = rep["permutation"] == {"1": 2, "2": 1, "3": 3}
    fid_ok = rep["min_fidelity"] >= 0.99
    product_ok = abs(abs(rep["product_arg"]) - np.pi) <= 0.05
    onset = fig2_summary["onset_time"]
    saturation = fig2_summary["saturation_time"]
    window_ok = (
        onset is not None
        and saturation is not None
        and 5.0 <= onset <= 35.0
        and 5.0 <= saturation <= 35.0
    )
    ok = perm_ok and fid_ok and product_ok and window_ok
    _report(
        "pair-exchange scenario",
        ok,
        f"perm={rep['permutation']} fid={rep['min_fidelity']:.4f} "
        f"|arg(g12*g3)|-pi={abs(rep['product_arg']) - np.pi:+.2e} "
        f"onset={onset} saturation={saturation}",
    )


def test_c4_three_cycle_reproduction(fig4_summary):
    """Shipped twin-pulse scenario: 3-cycle at >= 0.95 fidelity, cycle arg."""
    rep = fig4_summary["report"]
    perm_ok = rep["permutation"] == {"1": 3, "2": 1, "3": 2}
    fids = rep["fidelities"]
    cycle_arg = rep["Gamma321"]
    ok = (
        perm_ok
        and min(fids) >= 0.95
        and cycle_arg is not None
        and abs(cycle_arg) <= 0.1
    )
    _report(
        "three-cycle scenario",
        ok,
        f"perm={rep['permutation']} fids={[round(f, 4) for f in fids]} "
        f"arg(gamma321)={cycle_arg:+.2e}",
    )


def test_c5_sweep_trend_and_determinism(sweep_outputs):
    """Default 40x40 sweep: |Gamma12| decreases along both axes inside the
    adiabatic region (Spearman rho <= -0.8 per grid line); byte-identical
    output for 1 and 8 workers; single-threaded under 10 minutes."""
    path1, path8, elapsed = sweep_outputs
    identical = path1.read_bytes() == path8.read_bytes()

    rows = [line.split(",") for line in path1.read_text().splitlines()[1:]]
    data = np.array([[float(x) for x in r] for r in rows])
    om0 = np.unique(data[:, 0])
    As = np.unique(data[:, 1])
    g = np.abs(data[:, 2]).reshape(len(om0), len(As))
    flag = data[:, 4].reshape(len(om0), len(As)).astype(bool)
    defined = np.isfinite(g)

    rho_rows = []
    for i in range(len(om0)):
        mask = flag[i] & defined[i]
        if mask.sum() >= 8:
            rho_rows.append(spearmanr(As[mask], g[i, mask]).statistic)
    rho_cols = []
    for j in range(len(As)):
        mask = flag[:, j] & defined[:, j]
        if mask.sum() >= 8:
            rho_cols.append(spearmanr(om0[mask], g[mask, j]).statistic)

    trend_ok = (
        len(rho_rows) >= 10
        and len(rho_cols) >= 10
        and max(rho_rows) <= -0.8
        and max(rho_cols) <= -0.8
    )
    ok = identical and trend_ok and elapsed < 600.0
    _report(
        "sweep trend + determinism",
        ok,
        f"worst rho(A)={max(rho_rows):+.3f} over {len(rho_rows)} rows, "
        f"worst rho(Omega0)={max(rho_cols):+.3f} over {len(rho_cols)} cols, "
        f"byte-identical={identical}, single-thread {elapsed:.1f}s",
    )


def _cross_method_case(params, t0, t1, dt):
    ode_cols = _final_columns(params, t0, t1, dt, Frame.ROTATING)
    grid = np.linspace(t0, t1, 1500)
    frames, _ = eigenframe_transport(params, 1, grid, Frame.ROTATING)
    eig_cols = frames[-1].eigenvectors
    fids = [abs(np.vdot(eig_cols[:, k], ode_cols[:, k])) ** 2 for k in range(3)]
    rep_o = build_phase_report(ode_cols)
    rep_e = build_phase_report(eig_cols)
    dg = None
    if rep_o.Gamma12 is not None and rep_e.Gamma12 is not None:
        dg = abs(principal_angle(rep_o.Gamma12 - rep_e.Gamma12))
    return min(fids), dg


def test_c6_cross_method_agreement():
    """ODE vs eigen-frame transport whenever max Eq-ratio <= 0.1."""
    cases = []
    fig2 = scenario_from_config(load_config(CONFIGS / "fig2.cfg"))
    cases.append(("pair-exchange", dataclasses.replace(fig2, frame=Frame.ROTATING)))
    relaxed = ModelParams(
        xi=1.0, omega=1.0, sweep_rate_A=0.08, envelope=GaussianPulse(1.2, 37.5, 13.9)
    )
    cases.append(
        (
            "relaxed",
            scenario_from_config(
                {
                    "sweep_rate_A": "0.08",
                    "envelope.variant": "gaussian",
                    "envelope.omega0": "1.2",
                    "envelope.center": "37.5",
                    "envelope.width": "13.9",
                    "t1": "75.0",
                    "dt": "0.002",
                }
            ),
        )
    )
    fig4 = scenario_from_config(load_config(CONFIGS / "fig4.cfg"))
    cases.append(("three-cycle", fig4))

    details = []
    ok = True
    applied = 0
    for name, cfg in cases:
        max_ratio, _ = max_adiabaticity_ratio(cfg.model, cfg.t0, cfg.t1)
        if max_ratio > 0.1:
            details.append(f"{name}: ratio {max_ratio:.3f} > 0.1, exempt")
            continue
        applied += 1
        fid, dg = _cross_method_case(cfg.model, cfg.t0, cfg.t1, cfg.dt)
        case_ok = fid >= 0.99 and (dg is None or dg <= 1e-2)
        ok = ok and case_ok
        details.append(f"{name}: ratio {max_ratio:.3f}, fid {fid:.4f}, dGamma12 {dg}")
    ok = ok and applied >= 2
    _report("cross-method agreement", ok, "; ".join(details))


def test_c7_adiabaticity_closed_form():
    """Ratio at the crossing equals A / (4 Omega0^2) to 1e-10."""
    worst = 0.0
    for om0, a in ((0.8, 0.16), (0.3, 0.025), (1.6, 0.16), (2.5, 0.075)):
        params = ModelParams(
            xi=1.0, omega=1.0, sweep_rate_A=a,
            envelope=GaussianPulse(om0, (1.0 + 2.0) / a, 7.0),
        )
        t_a = crossing_times(params).t_a
        worst = max(worst, abs(adiabaticity_ratio(params, t_a) - a / (4 * om0**2)))
    _report("closed-form adiabaticity", worst <= 1e-10, f"max dev {worst:.2e}")


def test_c8_gauge_invariance_suite():
    """Per-state rephasing invariance to 1e-12; eigen-frame transport
    invariance under time reparametrization to 1e-10."""
    rng = np.random.default_rng(107)
    alphas = rng.uniform(-np.pi, np.pi, size=3)
    phases = np.exp(1j * alphas)

    def rephased_report(cfg):
        y0 = np.diag(phases).astype(complex)
        _, cols, _ = transport_basis(
            cfg.model, cfg.t0, cfg.t1, cfg.dt, cfg.frame, record_stride=10**9
        )
        _, cols_r, _ = __import__("geomphase").transport.transport_columns(
            cfg.model, y0, cfg.t0, cfg.t1, cfg.dt, cfg.frame, True, 10**9
        )
        base = build_phase_report(cols[-1])
        moved = build_phase_report(cols_r[-1] * phases.conj()[:, np.newaxis])
        return base, moved

    fig2 = scenario_from_config(load_config(CONFIGS / "fig2.cfg"))
    b2, m2 = rephased_report(fig2)
    dev12 = abs(m2.gamma12 - b2.gamma12)
    dev3 = abs(m2.gamma3 - b2.gamma3)

    fig4 = scenario_from_config(load_config(CONFIGS / "fig4.cfg"))
    b4, m4 = rephased_report(fig4)
    dev321 = abs(m4.gamma321 - b4.gamma321)

    # reparametrized eigen-frame run: same field path at half speed
    params = fig2.model
    slow = dataclasses.replace(
        params,
        sweep_rate_A=params.sweep_rate_A / 2.0,
        envelope=GaussianPulse(0.8, 37.5, 14.0),
    )
    grid = np.linspace(0.0, 37.5, 1200)
    _, final_a = eigenframe_transport(dataclasses.replace(params, omega=1.0), 1, grid)
    _, final_b = eigenframe_transport(slow, 1, 2.0 * grid)
    dev_rep = float(np.abs(final_a.amplitudes - final_b.amplitudes).max())

    ok = dev12 <= 1e-12 and dev3 <= 1e-12 and dev321 <= 1e-12 and dev_rep <= 1e-10
    _report(
        "gauge invariance",
        ok,
        f"rephase dev g12={dev12:.2e} g3={dev3:.2e} g321={dev321:.2e}, "
        f"reparametrization dev={dev_rep:.2e}",
    )


def test_c9_step_halving_phase_stability():
    """Halved dt moves every reported phase by <= 1e-4 rad (both scenarios)."""
    devs = {}
    for name in ("fig2", "fig4"):
        cfg = scenario_from_config(load_config(CONFIGS / f"{name}.cfg"))
        cols_full = _final_columns(cfg.model, cfg.t0, cfg.t1, cfg.dt, cfg.frame)
        cols_half = _final_columns(cfg.model, cfg.t0, cfg.t1, cfg.dt / 2.0, cfg.frame)
        rep_f = build_phase_report(cols_full)
        rep_h = build_phase_report(cols_half)
        for attr in ("Gamma12", "Gamma3", "Gamma321"):
            a, b = getattr(rep_f, attr), getattr(rep_h, attr)
            if a is None and b is None:
                continue
            devs[f"{name}.{attr}"] = abs(principal_angle(a - b))
    ok = bool(devs) and max(devs.values()) <= 1e-4
    detail = ", ".join(f"{k}={v:.2e}" for k, v in devs.items())
    _report("dt-halving phase stability", ok, detail)
