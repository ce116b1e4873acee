"""Acceptance criteria 1-12.  Each test prints one PASS/FAIL line, then asserts.

Run with `pytest -s tests/test_acceptance.py` to see the summary lines.
"""
import math
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from metasir import bipolar_model as bip
from metasir import cellular_model as cel
from metasir import gil_pelaez as gp
from metasir.beta_approx import fit, moment_of_fit
from metasir.mc_simulator import SimConfig, empirical_ccdf, empirical_moment, empirical_variance, simulate
from metasir.moment_bounds import MomentSet, bound_set
from metasir.special_functions import binom, d_b, gauss_2f1

FIG2A = bip.BipolarParams(1.0, 0.5, 0.25, 4.0)
FIG2B = bip.BipolarParams(5.0, 0.5, 0.05, 4.0)
FIG4A = bip.BipolarParams(1.0, 0.5, 0.5, 4.0)
FIG4B = bip.BipolarParams(0.2, 0.5, 0.5, 4.0)
CELL = cel.CellularParams(4.0)
XS = np.linspace(0.01, 0.99, 99)


class Check:
    """Collects the failures of one criterion and reports a single line."""

    def __init__(self, number: int, title: str, budget: float | None):
        self.number, self.title, self.budget = number, title, budget
        self.failures: list[str] = []
        self.t0 = time.perf_counter()

    def expect(self, ok: bool, what: str):
        if not ok:
            self.failures.append(what)

    def close(self, extra: str = ""):
        dt = time.perf_counter() - self.t0
        if self.budget is not None and dt > self.budget:
            self.failures.append(f"took {dt:.1f} s > {self.budget:g} s")
        status = "PASS" if not self.failures else "FAIL"
        detail = "; ".join(self.failures) if self.failures else extra
        print(f"\n[{status}] criterion {self.number:2d}: {self.title} ({dt:.2f} s) {detail}")
        assert not self.failures, detail


def test_criterion_01_bipolar_mean():
    c = Check(1, "bipolar mean", 1.0)
    m1 = bip.moment(FIG2A, 1.0, 1.0)
    c.expect(abs(m1 - 0.735) <= 1e-3, f"M1 = {m1:.5f}")
    c.close(f"M1 = {m1:.5f}")


def test_criterion_02_bipolar_variance():
    c = Check(2, "bipolar variance", 1.0)
    va, vb = bip.variance(FIG2A, 1.0), bip.variance(FIG2B, 1.0)
    c.expect(abs(va - 0.0212) <= 5e-4, f"var(2a) = {va:.5f}")
    c.expect(abs(vb - 0.00418) <= 1e-4, f"var(2b) = {vb:.6f}")
    c.close(f"var = {va:.5f}, {vb:.6f}")


def test_criterion_03_density_pair():
    c = Check(3, "mean and variance at two densities", 1.0)
    got = []
    for P, (ps, var) in ((FIG4A, (0.54, 0.049)), (FIG4B, (0.88, 0.024))):
        m1, v = bip.moment(P, 1.0, 1.0), bip.variance(P, 1.0)
        got.append(f"({m1:.4f}, {v:.4f})")
        c.expect(abs(m1 - ps) <= 5e-3 and abs(v - var) <= 5e-3, f"lam={P.lam}: {got[-1]}")
    c.close(" ".join(got))


TABLE1 = {-1: (1.4278, 1.4333), 3: (0.4418, 0.4412), 4: (0.3571, 0.3555), 5: (0.2947, 0.2921),
          6: (0.2476, 0.2440), 7: (0.2110, 0.2066), 8: (0.1820, 0.1770)}


def test_criterion_04_moment_table():
    c = Check(4, "moment table and beta fit", 1.0)
    f = fit(bip.moment(FIG2A, 1.0, 1.0), bip.moment(FIG2A, 1.0, 2.0))
    worst = 0.0
    for k, (mk_ref, ek_ref) in TABLE1.items():
        mk, ek = bip.moment(FIG2A, 1.0, float(k)), moment_of_fit(f, k)
        c.expect(round(mk, 4) == mk_ref, f"M_{k} = {mk:.5f}")
        c.expect(round(ek, 4) == ek_ref, f"E X^{k} = {ek:.5f}")
        worst = max(worst, abs(mk / ek - 1))
    c.expect(worst < 0.03, f"max ratio deviation {worst:.4f}")
    c.close(f"max ratio deviation {worst:.4f}")


def test_criterion_05_cellular_headline():
    c = Check(5, "cellular mean and variance", 1.0)
    m1, v1 = cel.moment(CELL, 1.0, 1.0), cel.variance(CELL, 1.0)
    m2, v2 = cel.moment(CELL, 0.1, 1.0), cel.variance(CELL, 0.1)
    c.expect(abs(m1 - 0.5598) <= 1e-3, f"M1(1) = {m1:.5f}")
    c.expect(abs(v1 - 0.098) <= 2e-3, f"var(1) = {v1:.5f}")
    c.expect(abs(m2 - 0.91) <= 5e-3, f"M1(0.1) = {m2:.5f}")
    c.expect(abs(v2 - 0.0086) <= 5e-4, f"var(0.1) = {v2:.5f}")
    c.close(f"theta=1: ({m1:.4f}, {v1:.4f}); theta=0.1: ({m2:.4f}, {v2:.5f})")


def test_criterion_06_inversion_consistency():
    c = Check(6, "ccdf inversion reproduces moments", 30.0)
    xg, wg = np.polynomial.legendre.leggauss(60)
    xg, wg = (xg + 1) / 2, wg / 2
    worst = 0.0
    for provider, mfn in ((gp.bipolar_provider(FIG2A, 1.0), lambda b: bip.moment(FIG2A, 1.0, b)),
                          (gp.cellular_provider(CELL, 1.0), lambda b: cel.moment(CELL, 1.0, b))):
        F = gp.curve(provider, xg).values
        for b in (1, 2, 3):
            err = abs(float(np.sum(wg * b * xg ** (b - 1) * F)) - mfn(float(b)))
            worst = max(worst, err)
            c.expect(err < 1e-3, f"b={b}: error {err:.2e}")
    c.close(f"max error {worst:.2e}")


HEADLINE = [("bipolar", FIG2A, 1.0), ("bipolar", FIG2B, 1.0), ("cellular", CELL, 1.0), ("cellular", CELL, 0.1)]


def _exact(model, P, theta):
    mod = bip if model == "bipolar" else cel
    prov = gp.bipolar_provider(P, theta) if model == "bipolar" else gp.cellular_provider(P, theta)
    m = {b: mod.moment(P, theta, b) for b in (1.0, 3.0)}
    m[-1.0] = mod.mean_local_delay(P, theta)
    return m, mod.variance(P, theta), gp.curve(prov, XS).values


def test_criterion_07_monte_carlo():
    c = Check(7, "Monte Carlo agrees with analysis", 300.0)
    notes = []
    for seed, (model, P, theta) in enumerate(HEADLINE, start=11):
        tag = f"{model} theta={theta} lam={getattr(P, 'lam', '-')}"
        m = simulate(SimConfig(model, P, theta, 100_000, master_seed=seed))
        exact, var, curve = _exact(model, P, theta)
        for b in (1.0, -1.0, 3.0):
            if math.isinf(exact[b]):
                continue  # the local delay does not exist; nothing to compare
            e, se = empirical_moment(m, b)
            c.expect(abs(e - exact[b]) <= 3 * se, f"{tag} M{b:g}: {e:.5f} vs {exact[b]:.5f} (se {se:.1e})")
        v, sev = empirical_variance(m)
        c.expect(abs(v - var) <= 3 * sev, f"{tag} var: {v:.5f} vs {var:.5f} (se {sev:.1e})")
        sup = float(np.max(np.abs(empirical_ccdf(m, XS).values - curve)))
        c.expect(sup < 0.01, f"{tag} ccdf sup {sup:.4f}")
        notes.append(f"{sup:.4f}")
    c.close("ccdf sup " + ", ".join(notes))


def _moment_set(mod, P, theta):
    return MomentSet.from_function(
        lambda b: mod.mean_local_delay(P, theta) if b == -1 else mod.moment(P, theta, b))


def test_criterion_08_bound_sandwich():
    c = Check(8, "bounds sandwich the exact ccdf", 60.0)
    cases = [(bip, P, 1.0, gp.bipolar_provider(P, 1.0)) for P in (FIG2A, FIG4A, FIG4B)]
    cases += [(cel, CELL, t, gp.cellular_provider(CELL, t)) for t in (1.0, 0.1)]
    for mod, P, theta, prov in cases:
        ms = _moment_set(mod, P, theta)
        exact = gp.curve(prov, XS).values
        for x, F in zip(XS, exact):
            b = bound_set(ms, x)
            c.expect(max(b.lowers()) <= F + 1e-6, f"lower above exact at x={x:.2f}")
            c.expect(F <= min(b.uppers()) + 1e-6, f"upper below exact at x={x:.2f}")
            c.expect(b.best_lower >= max(b.classical_lowers(include_neg1=False)) - 1e-9, f"lower dominance x={x:.2f}")
            c.expect(b.best_upper <= min(b.classical_uppers()) + 1e-9, f"upper dominance x={x:.2f}")
    c.close(f"{len(cases)} parameter sets x {XS.size} points")


def test_criterion_09_phase_transitions():
    c = Check(9, "local delay phase transitions", 5.0)
    near = bip.mean_local_delay(FIG2A.with_p(0.999), 1.0)
    at = bip.mean_local_delay(FIG2A.with_p(1.0), 1.0)
    c.expect(math.isfinite(near), "bipolar p=0.999 not finite")
    c.expect(math.isinf(at), "bipolar p=1 not flagged infinite")
    two = cel.mean_local_delay(CELL, 0.5)
    c.expect(abs(two - 2.0) < 1e-10, f"cellular theta=1/2 gives {two}")
    c.expect(math.isinf(cel.mean_local_delay(CELL, 1.0)), "cellular theta=1 not infinite")
    pc = cel.critical_activity(CELL, 10.0)
    lo, hi = cel.pc_conjectured_bracket(CELL, 10.0)
    c.expect(lo <= pc <= hi, f"p_c = {pc:.4f} outside [{lo:.4f}, {hi:.4f}]")
    c.close(f"p_c(10) = {pc:.4f} in [{lo:.4f}, {hi:.4f}]")


def test_criterion_10_sparse_limit():
    c = Check(10, "small-activity asymptotics", 10.0)
    p = 1e-3
    P = cel.CellularParams(4.0, activity_p=p)
    d = P.delta
    worst = 0.0
    for t in (0.1, 0.5, 2.0):
        theta = (t / p) ** (1 / d)
        exact, approx = cel.success_probability(P, theta), cel.asymptotic_success(d, t)
        rel = abs(approx / exact - 1)
        worst = max(worst, rel)
        c.expect(rel < 0.01, f"t={t}: {approx:.5f} vs {exact:.5f}")
    theta = brentq(lambda th: cel.success_probability(P, th) - 0.9, 1.0, 1e12, xtol=1e-12, rtol=1e-14)
    v, lim = cel.variance(P, theta), cel.asymptotic_variance(0.9)
    c.expect(abs(v / lim - 1) < 0.1, f"variance {v:.6f} vs limit {lim:.6f}")
    c.close(f"success rel error {worst:.1e}; variance {v:.6f} vs {lim:.6f}")


def test_criterion_11_identities():
    c = Check(11, "identity suite", 10.0)
    worst = [0.0, 0.0, 0.0]
    for delta in (0.25, 0.5, 0.75):
        for theta in np.logspace(-2, 2, 41):
            lhs = theta * delta / (1 - delta) * gauss_2f1(1.0, 1 - delta, 2 - delta, -theta) + 1
            rhs = gauss_2f1(1.0, -delta, 1 - delta, -theta)
            worst[0] = max(worst[0], abs(lhs / rhs - 1))
        for n in range(1, 9):
            for p in np.round(np.arange(0.1, 1.01, 0.1), 10):
                poly = sum(binom(n, k) * binom(delta - 1, k - 1) * p ** k for k in range(1, n + 1))
                worst[1] = max(worst[1], abs(d_b(float(n), p, delta) - poly))
        P = cel.CellularParams(2.0 / delta)
        for theta in np.logspace(-2, 2, 13):
            for b in (1.0, 2.0, 3.0, 4.0):
                ref = 1.0 / gauss_2f1(b, -delta, 1.0 - delta, -theta)
                worst[2] = max(worst[2], abs(cel.moment(P, theta, b) / ref - 1))
    c.expect(worst[0] < 1e-10, f"hypergeometric identity {worst[0]:.1e}")
    c.expect(worst[1] < 1e-12, f"diversity polynomial {worst[1]:.1e}")
    c.expect(worst[2] < 1e-10, f"Euler form {worst[2]:.1e}")
    c.close("max errors " + ", ".join(f"{w:.1e}" for w in worst))


def test_criterion_12_determinism(tmp_path):
    c = Check(12, "simulate is deterministic across thread counts", None)
    blobs = []
    for t in (1, 4):
        path = tmp_path / f"samples_{t}.bin"
        r = subprocess.run([sys.executable, "-m", "metasir", "simulate", "--model", "cellular", "--theta", "1",
                            "--n", "50000", "--seed", "2024", "--threads", str(t), "--samples-out", str(path)],
                           capture_output=True, text=True)
        c.expect(r.returncode == 0, f"threads={t} exit {r.returncode}: {r.stderr.strip()}")
        blobs.append(path.read_bytes() if path.exists() else b"")
    c.expect(len(blobs[0]) == 8 * 50000 and blobs[0] == blobs[1], "sample files differ")
    c.close(f"{len(blobs[0])} bytes identical")
