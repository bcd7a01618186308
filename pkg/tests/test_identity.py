import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from elastoscat import cgo, forward
from elastoscat import identity as idn
from elastoscat import material as m
from elastoscat.forward import FieldDomainError
from elastoscat.geometry import ConvexPolygon, square

PARAMS = m.LameParameters(1.7, 0.8)


def T(field, x, nu):
    return idn.surface_traction(field, np.asarray(x, float), idn.traction_context(PARAMS, nu), step=1e-4)


def test_traction_linear_field():
    got = T(lambda x: np.stack([x[..., 0], -x[..., 1]], -1), [0.3, 0.2], [1.0, 0.0])
    assert np.allclose(got, [2 * PARAMS.mu, 0], atol=1e-9)


def test_traction_shear_field():
    ctx = idn.traction_context(PARAMS, [0.0, 1.0])
    assert np.allclose(ctx.normal_perp, [-1.0, 0.0])
    got = T(lambda x: np.stack([x[..., 1], 0 * x[..., 0]], -1), [0.3, 0.2], [0.0, 1.0])
    assert np.allclose(got, [PARAMS.mu, 0], atol=1e-9)


@given(st.floats(0, 2 * math.pi))
def test_traction_dilation(t):
    nu = np.array([math.cos(t), math.sin(t)])
    got = T(lambda x: x.astype(complex), [0.1, -0.4], nu)
    assert np.allclose(got, 2 * (PARAMS.lam + PARAMS.mu) * nu, atol=1e-9)


@given(st.integers(0, 2**32 - 1))
def test_traction_linearity(seed):
    rng = np.random.default_rng(seed)
    A, B = rng.normal(size=(2, 2, 2)) + 1j * rng.normal(size=(2, 2, 2))
    a, b = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
    u = lambda x: np.sin(x @ A.real) + x @ A  # noqa: E731
    v = lambda x: np.exp(0.3j * x @ B.real) * (x @ B)  # noqa: E731
    nu = rng.normal(size=2)
    x = rng.uniform(-1, 1, 2)
    lhs = T(lambda y: a * u(y) + b * v(y), x, nu)
    rhs = a * T(u, x, nu) + b * T(v, x, nu)
    assert np.abs(lhs - rhs).max() <= 1e-8 * max(1.0, np.abs(lhs).max())


def test_traction_context_validation():
    with pytest.raises(ValueError):
        idn.TractionContext(PARAMS, np.array([1.0, 0.0]), np.array([1.0, 0.0]))


def test_traction_stencil_domain():
    sq = square(1.0)
    with pytest.raises(FieldDomainError):
        idn.surface_traction(lambda x: x, np.array([0.5, 0.0]), idn.traction_context(PARAMS, [1, 0]), step=1e-3, domain=sq)


def test_boundary_rules_integrate_perimeter():
    S = ConvexPolygon([[0, 0], [2, 0], [1.5, 1], [0.2, 1.3]])
    for rule in ("gauss", "trapezoid"):
        x, w, nu = idn.boundary_nodes(S, 64, rule)
        assert w.sum() == pytest.approx(S.edge_lengths().sum(), rel=1e-13)
        # divergence theorem for F(x) = x: int x.nu = 2 |S|
        assert np.sum(w * np.sum(x * nu, axis=1)) == pytest.approx(2 * S.area, rel=1e-12)


# -- Betti identity -------------------------------------------------------------


@pytest.fixture(scope="module")
def setup():
    params = m.LameParameters(1.0, 1.0)
    ctx = m.wavenumbers(params, 2 * math.pi)
    P = square(1.0)
    wave = m.plane_wave(ctx, 1.0, 0.0)
    S = square(1.5)
    return params, ctx, P, wave, S


def _solution(setup, contrast, n):
    params, ctx, P, wave, S = setup
    h = 1.5 / n
    sc = forward.MediumScatterer(P, m.constant_density(P, contrast))
    return forward.solve(sc, wave, forward.build_grid(P, h, bbox=S.bbox()), params)


def test_betti_zero_contrast(setup):
    params, ctx, P, wave, S = setup
    sol = _solution(setup, 0.0, 16)
    rep = idn.betti_identity_check(S, sol, wave, m.plane_wave(ctx, 1.0, 0.0, 0.5))
    assert abs(rep.lhs) <= 1e-10 and abs(rep.rhs) <= 1e-10


def test_betti_region_escape(setup):
    params, ctx, P, wave, S = setup
    sol = _solution(setup, 0.5, 8)
    with pytest.raises(FieldDomainError):
        idn.betti_identity_check(square(2.0), sol, wave, m.plane_wave(ctx))


def test_report_relative_residual():
    r = idn._make_report(1.0 + 1j, 1.0, {})
    assert r.rel_residual == pytest.approx(1 / math.sqrt(2))
    z = idn._make_report(0j, 0j, {})
    assert z.rel_residual == 0.0


def test_betti_plane_and_cgo_refine(setup):
    params, ctx, P, wave, S = setup
    res = {"pw": [], "cgo": []}
    for n in (16, 32):
        sol = _solution(setup, 0.5, n)
        nb = 64 * n // 16
        res["pw"].append(idn.betti_identity_check(S, sol, wave, m.plane_wave(ctx, 1.0, 0.0, 1.1), n_per_edge=nb).rel_residual)
        cone_apex = P.vertices[2]
        p = -np.array([1.0, 1.0]) / math.sqrt(2)
        ux0 = forward.total_field(sol, cone_apex[None])[0]
        ch = cgo.choose_p_perp(ux0, p, ctx.kappa_s)
        cg = cgo.make_cgo(cone_apex, p, ch.p_perp, 2 * ctx.kappa_s, ctx.kappa_s)
        res["cgo"].append(idn.betti_identity_check(S, sol, wave, cg, n_per_edge=nb).rel_residual)
    for v in res.values():
        assert v[1] < v[0] and v[1] <= 2e-2


def test_betti_trapezoid_rule_runs(setup):
    params, ctx, P, wave, S = setup
    sol = _solution(setup, 0.5, 16)
    rep = idn.betti_identity_check(S, sol, wave, m.plane_wave(ctx, 1.0, 0.0, 1.1), n_per_edge=256, rule="trapezoid")
    assert rep.quadrature_meta["rule"] == "trapezoid" and rep.rel_residual < 0.1


# -- corner terms ---------------------------------------------------------------

TAUS = [20.0, 28.0, 40.0, 56.0, 80.0, 113.0, 160.0]


@pytest.fixture(scope="module")
def corner_rows():
    params = m.LameParameters(1.0, 1.0)
    ctx = m.wavenumbers(params, 2 * math.pi)
    P = square(1.0)
    dens = m.holder_density(P, 0.5, apex=P.vertices[2], coeff=0.3, theta=0.5)
    cfg = idn.CornerConfig(forward.MediumScatterer(P, dens), m.plane_wave(ctx), params, 2, 0.25, TAUS)
    return idn.corner_terms(cfg)


def _slope(rows, key):
    t = np.log([r.tau for r in rows])
    return np.polyfit(t, np.log([getattr(r, key) for r in rows]), 1)[0]


def test_corner_slopes(corner_rows):
    assert -2.2 <= _slope(corner_rows, "R2") <= -1.8
    assert -2.7 <= _slope(corner_rows, "R3") <= -2.3


def test_corner_tail_ratio(corner_rows):
    d0 = math.cos(math.pi / 4)
    for r in corner_rows:
        assert r.R1 / r.R2 <= math.exp(-d0 * r.tau * r.h / 2) * 1.5


def test_corner_terms_nonnegative(corner_rows):
    for r in corner_rows:
        assert min(r.R1, r.R2, r.R3, r.R4, r.I1, r.I2) >= 0
        assert set(r.bounds) == {"R1", "R2", "R3", "R4", "I1", "I2"}


def test_corner_csv(corner_rows):
    rows = list(csv.reader(io.StringIO(idn.corner_terms_csv(corner_rows))))
    assert rows[0] == idn.CORNER_COLUMNS
    assert len(rows) == len(TAUS) + 1
    assert float(rows[1][0]) == TAUS[0]


def test_corner_h_guard():
    params = m.LameParameters(1.0, 1.0)
    ctx = m.wavenumbers(params, 2 * math.pi)
    P = square(1.0)
    sc = forward.MediumScatterer(P, m.constant_density(P, 0.5))
    with pytest.raises(ValueError):
        idn.corner_terms(idn.CornerConfig(sc, m.plane_wave(ctx), params, 0, 1.0, [20.0]))
    with pytest.raises(ValueError):
        idn.CornerTermBreakdown(0, 0, 0, 0, 0, 0, 20.0, 1.5, {})


def test_corner_tau_guard_drops_with_warning():
    params = m.LameParameters(1.0, 1.0)
    ctx = m.wavenumbers(params, 2 * math.pi)
    P = square(1.0)
    sc = forward.MediumScatterer(P, m.constant_density(P, 0.5))
    sol = forward.solve(sc, m.plane_wave(ctx), forward.build_grid(P, 0.1), params)
    cfg = idn.CornerConfig(sc, m.plane_wave(ctx), params, 0, 0.25, [3.0, 20.0], solution=sol)
    with pytest.warns(UserWarning):
        rows = idn.corner_terms(cfg)
    assert [r.tau for r in rows] == [20.0]
