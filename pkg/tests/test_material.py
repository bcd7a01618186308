import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from elastoscat import material as m
from elastoscat.geometry import square


@pytest.mark.parametrize(
    "mu,lam,omega,ks,kp",
    [(1, 0, 1, 1, 1 / math.sqrt(2)), (1, 2, 2, 2, 1), (4, -1, 2, 1, 2 / math.sqrt(7))],
)
def test_wavenumber_examples(mu, lam, omega, ks, kp):
    ctx = m.wavenumbers(m.LameParameters(lam, mu), omega)
    assert ctx.kappa_s == pytest.approx(ks, rel=1e-15)
    assert ctx.kappa_p == pytest.approx(kp, rel=1e-15)


@given(st.floats(0.05, 10), st.floats(-0.9, 10), st.floats(0.1, 50))
def test_wavenumber_identities(mu, lam_frac, omega):
    lam = lam_frac * mu
    params = m.LameParameters(lam, mu)
    ctx = m.wavenumbers(params, omega)
    assert ctx.kappa_s * math.sqrt(mu) == pytest.approx(omega, rel=1e-14)
    assert ctx.kappa_p * math.sqrt(lam + 2 * mu) == pytest.approx(omega, rel=1e-14)
    if lam + mu > 0:
        assert ctx.kappa_p < ctx.kappa_s


def test_parameter_errors():
    with pytest.raises(m.ParameterError):
        m.LameParameters(1.0, 0.0)
    with pytest.raises(m.ParameterError):
        m.LameParameters(-1.5, 1.0)
    with pytest.raises(m.ParameterError):
        m.wavenumbers(m.LameParameters(1, 1), 0.0)
    ctx = m.wavenumbers(m.LameParameters(1, 1), 1.0)
    with pytest.raises(m.ParameterError):
        m.plane_wave(ctx, 0.0, 0.0)
    with pytest.raises(m.ParameterError):
        m.IncidentWave(1.0, 0.0, np.array([1.0, 0.0]), np.array([1.0, 0.0]), ctx)


def test_incident_examples():
    ctx = m.wavenumbers(m.LameParameters(0.0, 0.25), 1.0)  # kappa_s = 2
    assert ctx.kappa_s == 2.0
    w = m.plane_wave(ctx, 1.0, 0.0)
    assert np.array_equal(m.incident_field(w, [0.0, 0.0]), [1, 0])
    w = m.plane_wave(ctx, 0.0, 1.0)
    u = m.incident_field(w, [math.pi / 2, 0.0])
    assert abs(u[0]) < 1e-15 and abs(u[1] - (-1)) < 1e-15


def test_zero_field_residual(unit_params, ref_context):
    g = m.sample_grid(lambda x: np.zeros(x.shape, complex), [0, 0], 0.1, 0.01)
    assert m.navier_residual(g, None, ref_context, unit_params) == 0.0


def test_grid_too_small(unit_params, ref_context):
    g = m.GridField(np.zeros(2), 0.1, np.zeros((2, 5, 2), complex))
    with pytest.raises(m.GridDimensionError):
        m.navier_residual(g, None, ref_context, unit_params)


@pytest.mark.parametrize("a1,a2", [(1, 0), (0, 1), (1, 1j)])
def test_plane_wave_residual_small(a1, a2, unit_params, ref_context):
    w = m.plane_wave(ref_context, a1, a2, 0.4)
    g = m.sample_grid(lambda x: m.incident_field(w, x), [0.3, -0.2], 0.004, 1e-3)
    assert m.navier_residual(g, None, ref_context, unit_params, relative=True) < 1e-5


def test_plane_wave_residual_second_order(unit_params, ref_context):
    w = m.plane_wave(ref_context, 1.0, 0.5, 1.1)
    res = []
    for h in (0.02, 0.01, 0.005):
        g = m.sample_grid(lambda x: m.incident_field(w, x), [0.1, 0.2], 4 * h, h)
        res.append(m.navier_residual(g, None, ref_context, unit_params))
    orders = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    assert np.all(orders >= 1.9)


def test_density_residual_uses_rho(unit_params, ref_context):
    # the incident wave solves the rho = 1 equation, not rho = 1.5
    w = m.plane_wave(ref_context, 1.0, 0.0)
    g = m.sample_grid(lambda x: m.incident_field(w, x), [0, 0], 0.004, 1e-3)
    dens = m.constant_density(square(1.0), 0.5)
    assert m.navier_residual(g, dens, ref_context, unit_params, relative=True) > 0.1


def _split(w, ctx, h=1e-3):
    g = m.sample_grid(lambda x: m.incident_field(w, x), [0.2, 0.1], 5 * h, h)
    up, us = m.helmholtz_split(g, ctx)
    return g, up, us


def test_split_pure_waves(ref_context):
    _, up, us = _split(m.plane_wave(ref_context, 1.0, 0.0, 0.3), ref_context)
    assert np.abs(us.values).max() < 1e-4
    _, up, us = _split(m.plane_wave(ref_context, 0.0, 1.0, 0.3), ref_context)
    assert np.abs(up.values).max() < 1e-4


def test_split_mixed_recovers_parts(ref_context):
    w = m.plane_wave(ref_context, 1.0, 1.0, 0.3)
    g, up, us = _split(w, ref_context)
    ap, as_ = m.incident_parts(w, up.points())
    assert np.abs(up.values - ap).max() < 1e-4
    assert np.abs(us.values - as_).max() < 1e-4
    assert np.array_equal(up.values + us.values, g.interior().values)
    assert np.abs(m.fd_curl(up)).max() < 1e-3
    assert np.abs(m.fd_divergence(us)).max() < 1e-3


def test_split_is_projection(ref_context):
    w = m.plane_wave(ref_context, 1.0, 1.0, 0.3)
    g, up, _ = _split(w, ref_context)
    up2, us2 = m.helmholtz_split(up, ref_context)
    assert np.abs(us2.values).max() < 1e-4 * np.abs(up.values).max()


def test_density_outside_support_is_one(rng):
    P = square(1.0)
    dens = m.holder_density(P, 0.4, apex=[0.5, 0.5], coeff=0.3, theta=0.5)
    pts = rng.uniform(-2, 2, (500, 2))
    out = ~P.contains(pts)
    assert np.all(dens(pts[out]) == 1.0)
    assert dens.holder_check(2000, 0) <= 0.3 * (1 + 1e-9)


def test_density_from_spec_roundtrip():
    P = square(1.0)
    d = m.holder_density(P, 0.4, apex=[0.5, 0.5], coeff=0.3, theta=0.5)
    d2 = m.density_from_spec(P, d.spec)
    x = np.array([[0.1, 0.2], [0.45, -0.3]])
    assert np.array_equal(d(x), d2(x))


def test_vertex_field_check():
    vals = np.array([[1e-9, 0], [1, 1j], [0, 0]])
    assert m.vertex_field_check(vals) == [0, 2]
