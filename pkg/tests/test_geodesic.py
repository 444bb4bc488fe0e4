import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from eqgeom import (DomainError, DomainExitError, TangentVector, ValidationError, basis_fields,
                    embed, exp_map, g_speed, integrate_geodesic, log_map, make_economy)
from eqgeom import geodesic
from eqgeom.economy import embed_array

from frozen import GEODESIC_TANH_SIN_END

needs_kernel = pytest.mark.skipif(geodesic._kernels is None, reason="compiled kernel not built")


def _random_vector(model, rng, span=1.5, max_norm=1.0):
    x = embed(model, rng.uniform(-span, span), rng.uniform(-1, 1, model.L - 1))
    c = rng.normal(size=model.L)
    v = TangentVector(x, c)
    return TangentVector(x, c * rng.uniform(0.05, max_norm) / v.norm(model))


@pytest.mark.parametrize("backend", ["python", pytest.param("cython", marks=needs_kernel)])
def test_endpoint_matches_frozen_rk4(backend):
    m = make_economy("tanh-sin", 3)
    path = integrate_geodesic(m, [0.0, 0.0, 0.0], [0.3, 0.1, -0.2], backend=backend)
    np.testing.assert_allclose(path.coords[-1], GEODESIC_TANH_SIN_END, atol=1e-9)
    assert path.s[0] == 0.0 and path.s[-1] == 1.0


@needs_kernel
def test_backends_agree(model, rng):
    for _ in range(5):
        v = _random_vector(model, rng)
        a = integrate_geodesic(model, v.base.coords, v.coeffs, backend="python")
        b = integrate_geodesic(model, v.base.coords, v.coeffs, backend="cython")
        # same algorithm; libm and numpy round differently, so only tolerance-level agreement
        np.testing.assert_allclose(a.coords[-1], b.coords[-1], rtol=0, atol=1e-9)
        np.testing.assert_allclose(a.velocity[-1], b.velocity[-1], rtol=0, atol=1e-9)


@needs_kernel
@pytest.mark.parametrize("t", [-2.7, -0.3, 0.0, 1.1, 2.9])
def test_native_jets_match_model(model, t):
    from eqgeom import _kernels

    jet = model.jet(np.array(t))
    for kern in (_kernels.native_jet(model), _kernels.PyJet(model)):
        p, dp, ddp, dw, ddw = _kernels.jet_values(kern, t)
        np.testing.assert_allclose(p, jet.p, rtol=1e-15, atol=1e-15)
        np.testing.assert_allclose(dp, jet.dp, rtol=1e-14, atol=1e-15)
        np.testing.assert_allclose(ddp, jet.ddp, rtol=1e-14, atol=1e-15)
        assert dw == pytest.approx(float(jet.dw), rel=1e-14, abs=1e-15)
        assert ddw == pytest.approx(float(jet.ddw), rel=1e-14, abs=1e-15)


@needs_kernel
def test_custom_model_uses_python_jet():
    from eqgeom import _kernels
    from eqgeom.economy import EconomyModel

    base = make_economy("fold", 2)
    custom = EconomyModel(2, base.price_fn, base.income_fn, base.d1, base.d2)
    assert isinstance(_kernels.native_jet(custom), _kernels.PyJet)
    a = integrate_geodesic(base, [0.2, 0.1], [0.4, -0.3])
    b = integrate_geodesic(custom, [0.2, 0.1], [0.4, -0.3])
    np.testing.assert_allclose(a.coords[-1], b.coords[-1], rtol=0, atol=1e-9)


def test_unknown_backend():
    with pytest.raises(ValueError):
        integrate_geodesic(make_economy("fold", 2), [0.0, 0.0], [0.1, 0.1], backend="fortran")


def test_zero_velocity_stays_put():
    m = make_economy("tanh-sin", 3)
    x = embed(m, 0.5, [0.1, 0.2])
    y, path = exp_map(m, TangentVector(x, np.zeros(3)))
    np.testing.assert_array_equal(y.coords, x.coords)
    assert path.speed_drift == 0.0


def test_constant_family_geodesics_are_straight_lines(rng):
    m = make_economy("constant", 4)
    for _ in range(10):
        v = _random_vector(m, rng)
        y, path = exp_map(m, v)
        np.testing.assert_allclose(y.coords, v.base.coords + v.coeffs, atol=1e-12)
        line = v.base.coords + path.s[:, None] * v.coeffs
        np.testing.assert_allclose(path.coords, line, atol=1e-12)


def test_speed_is_conserved(model, rng):
    for _ in range(10):
        v = _random_vector(model, rng)
        _, path = exp_map(model, v)
        assert path.speed_drift < 1e-8
        assert path.speed[0] == pytest.approx(v.norm(model), rel=1e-12)


def test_g_speed_matches_metric(model, rng):
    v = _random_vector(model, rng)
    got = g_speed(model, v.base.coords, v.coeffs)[0]
    assert got == pytest.approx(v.norm(model), rel=1e-13)


def test_exp_log_round_trip(model, rng):
    for _ in range(3):
        v = _random_vector(model, rng)
        y, _ = exp_map(model, v)
        w = log_map(model, v.base, y)
        np.testing.assert_allclose(w.coeffs, v.coeffs, atol=1e-7)


def test_dense_output_matches_rescaled_exp(rng):
    # gamma_v(s) = exp(s v)
    m = make_economy("fold", 3)
    for _ in range(5):
        v = _random_vector(m, rng)
        _, path = exp_map(m, v)
        for s in (0.13, 0.5, 0.87):
            y, _ = exp_map(m, TangentVector(v.base, s * v.coeffs))
            xs, vs = path.at(s)
            np.testing.assert_allclose(xs, y.coords, atol=1e-8)
            assert g_speed(m, xs, vs)[0] == pytest.approx(path.speed[0], rel=1e-7)


def test_dense_output_hits_nodes():
    m = make_economy("tanh-sin", 3)
    path = integrate_geodesic(m, [0.0, 0.0, 0.0], [0.3, 0.1, -0.2])
    for i in (0, 3, len(path.s) - 1):
        xs, vs = path.at(path.s[i])
        np.testing.assert_allclose(xs, path.coords[i], atol=1e-15)
        np.testing.assert_allclose(vs, path.velocity[i], atol=1e-13)
    with pytest.raises(ValueError):
        path.at(1.5)


def test_ambient_acceleration_is_normal(rng):
    # a geodesic of an embedded manifold has ambient acceleration normal to it
    m = make_economy("tanh-sin", 3)
    v = _random_vector(m, rng, max_norm=1.0)
    _, path = exp_map(m, v)
    h = 1e-3
    for s in (0.3, 0.6):
        pts = embed_array(m, np.array([path.at(s - h)[0], path.at(s)[0], path.at(s + h)[0]]))
        acc = (pts[0] - 2 * pts[1] + pts[2]) / h**2
        xs = path.at(s)[0]
        frame = basis_fields(m, embed(m, xs[0], xs[1:]))
        frame /= np.linalg.norm(frame, axis=0)
        tangential = frame.T @ acc
        assert np.max(np.abs(tangential)) < 1e-5 * max(1.0, np.linalg.norm(acc))


def test_leaving_domain_raises():
    m = make_economy("fold", 2)
    with pytest.raises(DomainExitError) as err:
        integrate_geodesic(m, [2.5, 0.0], [5.0, 0.0])
    assert 0 < err.value.s < 1
    assert err.value.coords[0] > 3.0


def test_tangent_vector_validation():
    m = make_economy("fold", 3)
    x = embed(m, 0.0, [0.0, 0.0])
    with pytest.raises(ValidationError):
        TangentVector(x, [1.0, 2.0])
    with pytest.raises(ValidationError):
        TangentVector(x, [1.0, np.nan, 0.0])


@settings(max_examples=25, deadline=None)
@given(t=st.floats(-1.5, 1.5), a=st.floats(-1, 1), c=st.lists(st.floats(-1, 1), min_size=2,
                                                                 max_size=2))
def test_geodesic_reversal(t, a, c):
    # running back from the endpoint with the reversed velocity returns to the start
    m = make_economy("fold", 2)
    try:
        path = integrate_geodesic(m, [t, a], c)
    except DomainExitError:
        assume(False)
    back = integrate_geodesic(m, path.coords[-1], -path.velocity[-1])
    np.testing.assert_allclose(back.coords[-1], [t, a], atol=1e-8)


def test_log_of_base_is_zero():
    m = make_economy("tanh-sin", 3)
    x = embed(m, 0.4, [0.2, -0.1])
    np.testing.assert_array_equal(log_map(m, x, x).coeffs, np.zeros(3))


def test_constant_family_log_is_coordinate_difference():
    m = make_economy("constant", 3)
    x, y = embed(m, 0.4, [0.2, -0.1]), embed(m, -0.3, [0.5, 0.6])
    np.testing.assert_allclose(log_map(m, x, y).coeffs, y.coords - x.coords, atol=1e-12)


def test_exp_of_log_returns_target(rng):
    m = make_economy("fold", 3)
    for _ in range(5):
        x = embed(m, rng.uniform(-1.5, 1.5), rng.uniform(-1, 1, 2))
        y = embed(m, x.t + rng.uniform(-0.3, 0.3), x.alpha + rng.uniform(-0.3, 0.3, 2))
        z, _ = exp_map(m, log_map(m, x, y))
        np.testing.assert_allclose(z.coords, y.coords, atol=1e-9)


def test_log_outside_domain_rejected():
    m = make_economy("fold", 2)
    x = embed(m, 0.0, [0.0])
    far = embed(m, 3.0, [0.0])
    far = type(far)(3.5, far.alpha, far.ambient)
    with pytest.raises(DomainError):
        log_map(m, x, far)
