"""Acceptance criteria at their stated tolerances and runtime budgets."""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from elastoscat import cgo, cli, forward, geometry, identity, material, smallness, specfun
from elastoscat.harness import experiments as ex
from elastoscat.harness.config import load_config

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
PARAMS = material.LameParameters(1.0, 1.0)
CTX = material.wavenumbers(PARAMS, 2 * math.pi)


def _square_cone(half: float):
    cone = geometry.Cone2D(np.zeros(2), np.array([math.cos(1.0), math.sin(1.0)]), half)
    p, d0 = geometry.direction_and_delta0(cone)
    return cone, p, d0


def test_criterion_01_zero_contrast(criterion):
    t0 = time.perf_counter()
    P = geometry.square(1.0)
    grid = forward.build_grid(P, 1 / 32)
    sol = forward.solve(forward.MediumScatterer(P, material.unit_density(P)), material.plane_wave(CTX, 1.0, 0.5, 0.3), grid, PARAMS)
    n = forward.far_field_norm(forward.far_field(sol))
    dt = time.perf_counter() - t0
    assert criterion(1, n <= 1e-10 and grid.n_cells == 1024 and dt < 5, f"|U| = {n:.2e}, cells {grid.n_cells}, {dt:.2f} s")


def test_criterion_02_cgo_navier_residual(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = 0.0
    for tau, ks in ((2.0, 1.0), (10.0, 1.0), (50.0, 2.0)):
        params = material.LameParameters(1.0, 1.0 / ks**2)  # omega = 1 gives kappa_s = ks
        ctx = material.wavenumbers(params, 1.0)
        th = rng.uniform(0, 2 * math.pi)
        p = np.array([math.cos(th), math.sin(th)])
        c = cgo.make_cgo(np.zeros(2), p, material.rot90(p), tau, ctx.kappa_s)
        pts = -rng.uniform(0.0, 0.3, size=(20, 1)) * p + rng.uniform(-0.3, 0.3, size=(20, 1)) * material.rot90(p)
        res = material.navier_residual_at(lambda x: cgo.cgo_field(c, x), pts, None, ctx, params, 1e-3 / np.linalg.norm(c.xi))
        worst = max(worst, float(np.max(res)))
    dt = time.perf_counter() - t0
    assert criterion(2, worst <= 1e-5 and dt < 1, f"max relative residual {worst:.2e}, {dt:.2f} s")


def test_criterion_03_cgo_algebra(criterion):
    worst = 0.0
    for tau in np.geomspace(1.5, 500, 10):
        for ks in np.linspace(0.2, 1.4, 10):
            c = cgo.make_cgo(np.zeros(2), [0.6, 0.8], [-0.8, 0.6], float(tau), float(ks))
            eta = math.sqrt(2 + ks**2 / tau**2)
            errs = (
                abs(cgo.cdot(c.xi, c.xi) + ks**2),
                abs(np.linalg.norm(c.xi) - math.sqrt(2 * tau**2 + ks**2)),
                abs(np.linalg.norm(c.eta) - eta),
                abs(cgo.cdot(c.xi, c.eta)),
            )
            worst = max(worst, *errs)
            assert eta <= math.sqrt(3)
    assert criterion(3, worst <= 1e-10, f"max algebra error {worst:.2e} over 100 points")


def test_criterion_04_betti_identity(criterion):
    cfg = load_config(CONFIGS / "betti.toml")
    times = []
    t_prev = time.perf_counter()
    res = {"plane_wave": [], "cgo": []}
    for n in cfg.sweep["levels"]:
        sub = load_config(CONFIGS / "betti.toml")
        sub.sweep["levels"] = [n]
        r = ex.run_betti(sub)
        for k in res:
            res[k].append(r.reports[k][0].rel_residual)
        now = time.perf_counter()
        times.append(now - t_prev)
        t_prev = now
    ok = cfg.sweep["levels"][-1] == 64 and max(times) < 120
    for v in res.values():
        ok &= v[-1] <= 2e-2 and all(b < a for a, b in zip(v, v[1:]))
    detail = ", ".join(f"{k} " + "/".join(f"{x:.1e}" for x in v) for k, v in res.items())
    assert criterion(4, ok, f"{detail}; slowest level {max(times):.1f} s")


def test_criterion_05_sector_integral(criterion):
    t0 = time.perf_counter()
    worst, ratio = 0.0, 0.0
    for half in (math.pi / 6, math.pi / 4, math.pi / 3):
        cone, p, d0 = _square_cone(half)
        vals = []
        for tau in (10, 20, 40, 80, 160):
            c = cgo.make_cgo(np.zeros(2), p, material.rot90(p), float(tau), 1.0)
            a = cgo.sector_integral(cone, c)
            b = cgo.truncated_sector_integral(cone, c, 40 / (d0 * tau))
            worst = max(worst, abs(a - b) / abs(b))
            vals.append(tau**2 * abs(a))
        ratio = max(ratio, max(vals) / min(vals))
    dt = time.perf_counter() - t0
    assert criterion(5, ratio <= 3 and worst <= 1e-6 and dt < 10, f"ratio {ratio:.3f}, oracle error {worst:.1e}, {dt:.2f} s")


def test_criterion_06_p_perp(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    taus = cgo.tau_grid(1.0)
    ok, worst = True, 0.0
    for _ in range(100):
        u = rng.normal(size=2) + 1j * rng.normal(size=2)
        th = rng.uniform(0, 2 * math.pi)
        p = np.array([math.cos(th), math.sin(th)])
        ch = cgo.choose_p_perp(u, p, 1.0)
        brute = max(np.abs(u @ q - 1j * np.sqrt(1 + 1 / taus**2) * (u @ p)).min() for q in (material.rot90(p), -material.rot90(p)))
        err = abs(ch.C0_witness - brute)
        worst = max(worst, err)
        ok &= ch.C0_witness > 0 and err <= 1e-6
    dt = time.perf_counter() - t0
    assert criterion(6, ok and dt < 5, f"max witness error {worst:.1e}, {dt:.2f} s")


def test_criterion_07_corner_exponents(criterion):
    t0 = time.perf_counter()
    P = geometry.square(1.0)
    dens = material.holder_density(P, 0.5, apex=P.vertices[2], coeff=0.3, theta=0.5)
    taus = list(np.geomspace(20, 160, 7))
    cfg = identity.CornerConfig(forward.MediumScatterer(P, dens), material.plane_wave(CTX), PARAMS, 2, 0.25, taus)
    rows = identity.corner_terms(cfg)
    lt = np.log([r.tau for r in rows])
    s2 = np.polyfit(lt, np.log([r.R2 for r in rows]), 1)[0]
    s3 = np.polyfit(lt, np.log([r.R3 for r in rows]), 1)[0]
    dt = time.perf_counter() - t0
    ok = -2.2 <= s2 <= -1.8 and -2.7 <= s3 <= -2.3 and dt < 60
    assert criterion(7, ok, f"slope R2 {s2:.3f}, slope R3 {s3:.3f}, {dt:.1f} s")


def test_criterion_08_incomplete_gamma(criterion):
    t0 = time.perf_counter()
    holds, worst = True, 0.0
    for s in np.arange(0.5, 6.01, 0.5):
        for x in np.arange(0.0, 50.01, 0.5):
            rep = specfun.gamma_bound_check(float(s), float(x))
            holds &= rep.holds_lower and rep.holds_upper
    for n in range(1, 7):
        for x in np.arange(0.0, 50.01, 0.5):
            exact = math.factorial(n - 1) * math.exp(-x) * sum(x**k / math.factorial(k) for k in range(n))
            pair = specfun.incomplete_gamma(n, float(x))
            worst = max(worst, abs(pair.upper - exact) / math.gamma(n), abs(pair.lower - (math.gamma(n) - exact)) / math.gamma(n))
    dt = time.perf_counter() - t0
    assert criterion(8, holds and worst <= 1e-10 and dt < 1, f"bounds hold {holds}, closed-form error {worst:.1e}, {dt:.2f} s")


def test_criterion_09_three_spheres(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    passes = 0
    for _ in range(20):
        f = smallness.random_fourier_bessel(rng, kappa=float(rng.uniform(1, 4)))
        rep = smallness.three_spheres_check(smallness.ThreeSpheresCase(np.zeros(2), 0.5, 1.0, 2.0, math.sqrt(2), f.kappa, f))
        passes += bool(rep.holds and 0 < rep.fitted_beta < 1 and rep.prefactor >= 1)
    dt = time.perf_counter() - t0
    assert criterion(9, passes == 20 and dt < 30, f"{passes}/20 fields, {dt:.1f} s")


def test_criterion_10_special_functions(criterion):
    t0 = time.perf_counter()
    x = np.linspace(0.1, 50.0, 5000)
    w = specfun.bessel("J", 1, x) * specfun.bessel("Y", 0, x) - specfun.bessel("J", 0, x) * specfun.bessel("Y", 1, x)
    werr = float(np.max(np.abs(w * math.pi * x / 2 - 1)))
    h0, h1 = specfun.hankel01(50.0)
    ref = math.sqrt(2 / (math.pi * 50.0))
    herr = max(abs(abs(h0) - ref), abs(abs(h1) - ref)) / ref
    dt = time.perf_counter() - t0
    assert criterion(10, werr <= 1e-8 and herr <= 1e-2 and dt < 1, f"Wronskian {werr:.1e}, Hankel {herr:.1e}, {dt:.2f} s")


def test_criterion_11_far_field_contract(criterion):
    t0 = time.perf_counter()
    P = geometry.square(1.0)
    sol = forward.solve(forward.MediumScatterer(P, material.constant_density(P, 0.5)), material.plane_wave(CTX), forward.build_grid(P, 1 / 20), PARAMS)
    U = forward.far_field(sol, 16)
    scale = max(np.abs(U.U_p).max(), np.abs(U.U_s).max())
    ext = 0.0
    for part, k, lam, Ua in ((0, CTX.kappa_p, CTX.wavelength_p, U.U_p), (1, CTX.kappa_s, CTX.wavelength_s, U.U_s)):
        R = 60 * lam
        u = forward.scattered_near_field_parts(sol, R * U.directions)[part]
        ext = max(ext, float(np.abs(math.sqrt(R) * np.exp(-1j * k * R) * u - Ua).max() / scale))
    V = forward.far_field(sol)
    n = forward.far_field_norm(V)
    xh = V.directions
    radial = np.abs(V.U_p - np.sum(xh * V.U_p, axis=1)[:, None] * xh).max() / n
    tang = np.abs(np.sum(xh * V.U_s, axis=1)).max() / n
    dt = time.perf_counter() - t0
    ok = ext <= 2e-2 and radial <= 1e-6 and tang <= 1e-6 and dt < 60
    assert criterion(11, ok, f"extrapolation {ext:.2e}, structure {max(radial, tang):.1e}, {dt:.1f} s")


@pytest.mark.slow
def test_criterion_12_stability(criterion):
    t0 = time.perf_counter()
    res = ex.run_stability_experiment(load_config(CONFIGS / "stability.toml"))
    good = [r for r in res.records if r.d_H > 0]
    f = res.fit
    dt = time.perf_counter() - t0
    ok = len(good) == 6 and f["rank_correlation"] == 1.0 and f["gamma"] > 0 and f["r2"] >= 0.9 and dt < 600
    assert criterion(12, ok, f"rank {f['rank_correlation']}, gamma {f['gamma']:.3g}, R2 {f['r2']:.3f}, {dt:.1f} s")


@pytest.mark.slow
def test_criterion_13_corner_lower_bound(criterion):
    t0 = time.perf_counter()
    cfg = load_config(CONFIGS / "corner.toml")
    contrasts = [float(c) for c in cfg.sweep["contrasts"]]
    res = ex.run_corner_experiment(cfg, baseline_path=cli.DEFAULT_BASELINE)
    dt = time.perf_counter() - t0
    ok = (
        min(contrasts) >= 0.1
        and max(contrasts) <= 1
        and all(r["flag"] == "" for r in res.rows)
        and res.passed
        and res.floor > 1e3 * res.control_norm
        and res.baseline["matches"]
        and dt < 600
    )
    assert criterion(13, ok, f"floor {res.floor:.4g}, control {res.control_norm:.1e}, baseline matches {res.baseline['matches']}, {dt:.1f} s")


@pytest.mark.slow
def test_criterion_14_determinism(criterion, tmp_path):
    codes, diffs = [], []
    for cmd, kind in (("verify", "verify"), ("stability-exp", "stability"), ("corner-exp", "corner")):
        for run in ("a", "b"):
            codes.append(cli.run([cmd, "--config", str(CONFIGS / f"{kind}.toml"), "--seed", "7", "--out", str(tmp_path / run / kind)]))
        a, b = tmp_path / "a" / kind, tmp_path / "b" / kind
        names = sorted(p.name for p in a.iterdir())
        assert names == sorted(p.name for p in b.iterdir())
        diffs += [f"{kind}/{n}" for n in names if (a / n).read_bytes() != (b / n).read_bytes()]
    ok = not diffs and all(c == 0 for c in codes)
    assert criterion(14, ok, f"exit codes {sorted(set(codes))}, differing files {diffs or 'none'}")
