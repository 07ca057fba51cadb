"""Acceptance gate: one PASS/FAIL line per criterion, default optimizer settings."""

import subprocess
import sys
from itertools import combinations

import numpy as np
import pytest

from qentangle.bell import mk_values, random_settings
from qentangle.measures import concurrence_pair, global_entanglement, i_concurrence, measure_report, tangle3_oracle, tangle3_residual
from qentangle.models import (
    Model3Params,
    Model4Params,
    closed_form_measures,
    eigensystem3_analytic,
    hamiltonian3,
    phi1,
    phi2,
    psi,
    psi5,
    psi7,
    superposition78,
)
from qentangle.optimize import Mode, OptimizerConfig, TransitionQuery, find_transition, optimize
from qentangle.states import correlation_tensor, generalized_ghz, ghz_state, random_product_state, random_state, w_state
from qentangle.sweep import SweepSpec, fit_scale, run_sweep

CFG = OptimizerConfig()


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {n:2d}] {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return emit


def corr(a, b):
    return float(np.corrcoef(a, b)[0, 1])


def test_c01_reference_optima(report):
    g = optimize(ghz_state(3), CFG)
    w = optimize(w_state(3), CFG)
    ok = (abs(g.value_f - 4.00) <= 0.01 and abs(g.sum_sq - 16.00) <= 0.05
          and abs(w.value_f - 3.05) <= 0.01 and abs(w.sum_sq - 9.305) <= 0.05)
    detail = f"GHZ |F3|={g.value_f:.5f} sum_sq={g.sum_sq:.4f}; W |F3|={w.value_f:.5f} sum_sq={w.sum_sq:.4f}"
    assert report(1, ok, detail)


def test_c02_generalized_ghz(report):
    t = run_sweep(SweepSpec("gen_ghz", "g2", 0.0, 1.0, 101, ("bell_mode_a",), CFG))
    g = t.column("g")
    c0 = fit_scale(g, t.column("max_abs_F3"), "g_sqrt")
    c1 = fit_scale(g, t.column("sum_sq_mode_a"), "g2")
    lo = TransitionQuery(generalized_ghz, "g", (0.1, 0.5), threshold=2.0, quantity="value_f")
    hi = TransitionQuery(generalized_ghz, "g", (0.8, 1.0), threshold=2.0, quantity="value_f")
    g_lo, g_hi = find_transition(lo, CFG), find_transition(hi, CFG)
    ok = 7.9 <= c0.scale <= 8.1 and 63.5 <= c1.scale <= 64.5 and abs(g_lo - 0.26) <= 0.02 and abs(g_hi - 0.97) <= 0.02
    detail = f"c0={c0.scale:.4f} c1={c1.scale:.3f} crossings g={g_lo:.4f}, {g_hi:.4f}"
    assert report(2, ok, detail)


def test_c03_transitions(report):
    cases = [
        ("psi5 delta", lambda d: psi5(Model3Params(1, d)), (0.5, 2.0), 1.03),
        ("psi7 delta", lambda d: psi7(Model3Params(1, d)), (2.0, 4.0), 2.97),
        ("phi1 J (Js=2)", lambda J: phi1(Model4Params(J, 2.0)), (1.0, 3.0), 1.94),
        ("phi1 Js (J=2)", lambda Js: phi1(Model4Params(2.0, Js)), (1.0, 3.0), 2.06),
    ]
    found, ok = [], True
    for name, fn, bracket, want in cases:
        x = find_transition(TransitionQuery(fn, name, bracket, threshold=8.0), CFG)
        found.append(f"{name}={x:.4f}")
        ok &= abs(x - want) <= 0.05
    assert report(3, ok, "; ".join(found))


def test_c04_mode_b_plateau(report):
    vals = [optimize(psi7(Model3Params(1, d)), OptimizerConfig(mode=Mode.MaximizeSumSq)).sum_sq for d in (4, 5, 6)]
    ok = all(abs(v - 8.0) <= 0.02 for v in vals)
    assert report(4, ok, "mode-B sum_sq at delta=4,5,6: " + ", ".join(f"{v:.5f}" for v in vals))


def test_c05_measure_identities(report):
    worst_q, worst_sym, worst_tau, worst_q3 = 0.0, 0.0, 0.0, 0.0
    for n in (2, 3, 4):
        for seed in range(1000):
            rep = measure_report(random_state(n, 50_000 + 1000 * n + seed))
            q = np.mean([v * v for v in rep.i_concurrences.values()])
            worst_q = max(worst_q, abs(q - rep.global_q))
    for seed in range(1000):
        s = random_state(3, 90_000 + seed)
        c = {p: concurrence_pair(s, *p) for p in combinations((1, 2, 3), 2)}
        ic = [i_concurrence(s, k) for k in (1, 2, 3)]
        r = [ic[0] ** 2 - c[1, 2] ** 2 - c[1, 3] ** 2, ic[1] ** 2 - c[1, 2] ** 2 - c[2, 3] ** 2, ic[2] ** 2 - c[1, 3] ** 2 - c[2, 3] ** 2]
        worst_sym = max(worst_sym, max(r) - min(r))
        tau = tangle3_residual(s)
        worst_tau = max(worst_tau, abs(tau - tangle3_oracle(s)))
        worst_q3 = max(worst_q3, abs(global_entanglement(s) - (2 / 3 * sum(v * v for v in c.values()) + tau)))
    ok = worst_q <= 1e-8 and worst_sym <= 1e-7 and worst_tau <= 1e-8 and worst_q3 <= 1e-8
    detail = f"max errors: Q-IC {worst_q:.1e}, residual symmetry {worst_sym:.1e}, tangle oracle {worst_tau:.1e}, Q-tau {worst_q3:.1e}"
    assert report(5, ok, detail)


def q_sup78_reference(delta):
    # target expression for Q of (psi7 + psi8)/sqrt(2)
    eta = Model3Params(1, delta).eta
    return (12 + 5 * eta**2 + (delta - 2) * eta) / (6 * eta**2)


def test_c06_model_cross_checks(report):
    rng = np.random.default_rng(2024)
    res = 0.0
    for _ in range(200):
        p = Model3Params(rng.uniform(0.1, 3), rng.uniform(-2, 8))
        H = hamiltonian3(p).entries
        res = max(res, max(np.linalg.norm(H @ s.amplitudes - E * s.amplitudes) for E, s in eigensystem3_analytic(p)))

    def diff(a, b):
        a, b = a.as_dict(), b.as_dict()
        return max(abs(a[k] - b[k]) for k in b)

    cf = 0.0
    deltas = np.linspace(0, 6, 61)
    for d in deltas:
        p = Model3Params(1, d)
        for which, f in (("psi5", psi5), ("psi7", psi7), ("sup78", superposition78)):
            cf = max(cf, diff(closed_form_measures(which, p), measure_report(f(p))))
    q2 = 0.0
    for x in np.linspace(0.1, 10, 101):
        for p in (Model4Params(x, 2.0), Model4Params(2.0, x)):
            cf = max(cf, diff(closed_form_measures("phi1", p), measure_report(phi1(p))))
            cf = max(cf, diff(closed_form_measures("phi2", p), measure_report(phi2(p))))
            q2 = max(q2, abs(global_entanglement(phi2(p)) - 1))
    q78 = max(abs(global_entanglement(superposition78(Model3Params(1, d))) - q_sup78_reference(d)) for d in deltas)
    tau = max(tangle3_residual(psi(k, Model3Params(1, d))) for d in deltas for k in (5, 6, 7, 8))
    parts = {
        "eigensystem residual": (res, res <= 1e-8),
        "closed vs numeric": (cf, cf <= 1e-7),
        "Q(phi2)-1": (q2, q2 <= 1e-8),
        "Q(sup78) vs reference": (q78, q78 <= 1e-8),
        "tau(psi5..8)": (tau, tau <= 1e-7),
    }
    ok = all(v[1] for v in parts.values())
    detail = "; ".join(f"{k} {v[0]:.1e} {'ok' if v[1] else 'FAIL'}" for k, v in parts.items())
    assert report(6, ok, detail)


def test_c07_bound_suite(report):
    rng = np.random.default_rng(7)
    worst_f, worst_sq, worst_any = 0.0, 0.0, {}
    for n in (3, 4):
        settings = random_settings(n, rng, size=200)
        for seed in range(2000):
            f, fp = mk_values(correlation_tensor(random_product_state(n, 1_000_000 * n + seed)), settings)
            worst_f = max(worst_f, float(np.abs(f).max()))
            worst_sq = max(worst_sq, float((f * f + fp * fp).max()))
        top = 0.0
        for seed in range(2000):
            f, fp = mk_values(random_state(n, 2_000_000 * n + seed), settings)
            top = max(top, float((f * f + fp * fp).max()))
        top = max(top, float(np.max(np.square(mk_values(ghz_state(n), settings)).sum(axis=0))))
        worst_any[n] = top
    ok = worst_f <= 2 + 1e-6 and worst_sq <= 8 + 1e-6 and all(worst_any[n] <= 2 ** (n + 1) + 1e-6 for n in (3, 4))
    detail = f"product max|F|={worst_f:.6f} max sum_sq={worst_sq:.6f}; any-state max sum_sq n=3 {worst_any[3]:.4f}, n=4 {worst_any[4]:.4f}"
    assert report(7, ok, detail)


def test_c08_figure_contracts(report):
    rs = {}
    for target in ("psi5", "psi7"):
        t = run_sweep(SweepSpec(target, "delta", 0.0, 6.0, 101, ("Q", "bell_mode_a"), CFG))
        rs[target] = corr(t.column("Q"), t.column("max_abs_F3"))
    t = run_sweep(SweepSpec("sup78", "delta", 0.0, 6.0, 101, ("tangle", "bell_mode_a"), CFG))
    keep = t.column("delta") >= 3 - 1e-12
    rs["sup78 tau (delta>=3)"] = corr(t.column("max_abs_F3")[keep], t.column("tangle")[keep])
    for axis, fixed in (("J", (("Js", 2.0),)), ("Js", (("J", 2.0),))):
        t = run_sweep(SweepSpec("phi2", axis, 0.1, 10.0, 101, ("sum_sq_C", "bell_mode_a"), CFG, fixed))
        rs[f"phi2 {axis}"] = corr(t.column("sum_sq_mode_a"), 1 - t.column("sum_sq_C"))
    ok = (rs["psi5"] >= 0.995 and rs["psi7"] >= 0.995 and rs["sup78 tau (delta>=3)"] >= 0.99
          and rs["phi2 J"] >= 0.99 and rs["phi2 Js"] >= 0.99)
    assert report(8, ok, "correlations: " + ", ".join(f"{k} {v:.4f}" for k, v in rs.items()))


def test_c09_table3_structure(report):
    out = []
    ok = True
    for J, Js in ((0.01, 2.0), (2.0, 100.0)):
        s = phi2(Model4Params(J, Js))
        free = optimize(s, CFG)
        plane = optimize(s, OptimizerConfig(xy_plane=True))
        gap = abs(free.value_f - plane.value_f)
        ok &= gap <= 1e-4
        out.append(f"(J={J}, Js={Js}) free {free.value_f:.6f} xy {plane.value_f:.6f} gap {gap:.1e}")
    assert report(9, ok, "; ".join(out))


def _cli(*argv):
    r = subprocess.run([sys.executable, "-m", "qentangle.cli", *argv], capture_output=True)
    assert r.returncode == 0, r.stderr
    return r.stdout


def test_c10_determinism(report, tmp_path):
    commands = [
        ("bell-opt", "w3", "--seed", "11"),
        ("bell-opt", "phi2:J=2,Js=1", "--mode", "b", "--format", "json"),
        ("sweep", "--target", "psi7", "--lo", "0", "--hi", "6", "--points", "7", "--quantities", "Q,tangle,bell_mode_a,bell_mode_b"),
        ("figure", "fig5", "--points", "4", "--restarts", "16"),
        ("transition", "--target", "psi5", "--lo", "0.5", "--hi", "2", "--restarts", "16"),
    ]
    same = []
    for k, cmd in enumerate(commands):
        outs = []
        for rep in range(2):
            path = tmp_path / f"c{k}_{rep}.out"
            _cli(*cmd, "--out", str(path))
            outs.append(path.read_bytes())
        same.append(outs[0] == outs[1] and len(outs[0]) > 0)
    assert report(10, all(same), f"{sum(same)}/{len(same)} commands byte-identical across repeated runs")
