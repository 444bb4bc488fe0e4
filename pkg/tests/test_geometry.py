import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eqgeom import (EconomyModel, SingularMetricError, christoffel_at, curvature_at, embed,
                    make_economy, metric_at, riemann_coefficients_at)
from eqgeom.geometry import (christoffel_batch, contract_inner_R, curvature_batch,
                             inner_R_batch, metric_batch, metric_partials_batch, riemann_batch)
from eqgeom.verification import vanishing_mask

from frozen import CHRISTOFFEL_FOLD, INNER_R_FOLD


def _coords(model, rng, n=64, span=2.8):
    return np.column_stack([rng.uniform(-span, span, n), rng.uniform(-1, 1, (n, model.L - 1))])


def test_fold_christoffel_matches_frozen():
    m = make_economy("fold", 2)
    gam = christoffel_at(m, embed(m, 0.4, [0.3])).gamma
    np.testing.assert_allclose(gam, CHRISTOFFEL_FOLD, rtol=1e-14, atol=1e-15)


def test_fold_inner_R_matches_frozen():
    m = make_economy("fold", 2)
    x = embed(m, 0.4, [0.3])
    assert curvature_at(m, x).inner_R[0] == pytest.approx(INNER_R_FOLD, rel=1e-13)


def test_constant_family_is_flat():
    m = make_economy("constant", 4)
    x = embed(m, 0.3, [0.1, -0.2, 0.5])
    assert np.all(christoffel_at(m, x).gamma == 0)
    assert np.all(riemann_coefficients_at(m, x) == 0)
    rep = curvature_at(m, x)
    assert np.all(rep.inner_R == 0) and np.all(rep.sec_0i == 0) and rep.sec_ij_max_abs == 0


def test_metric_is_symmetric_positive_definite(model, rng):
    g, g_inv, det = metric_batch(model, _coords(model, rng))
    np.testing.assert_array_equal(g, np.swapaxes(g, 1, 2))
    assert np.all(np.linalg.eigvalsh(g) > 0)
    np.testing.assert_allclose(det, np.linalg.det(g), rtol=1e-12)
    np.testing.assert_allclose(g_inv @ g, np.broadcast_to(np.eye(model.L), g.shape), atol=1e-12)


def test_metric_is_pullback_of_ambient_product(model, rng):
    from eqgeom import basis_fields

    X = _coords(model, rng, 8)
    g = metric_batch(model, X)[0]
    for row, gn in zip(X, g):
        J = basis_fields(model, embed(model, row[0], row[1:]))
        np.testing.assert_allclose(J.T @ J, gn, rtol=1e-14, atol=1e-15)


def test_metric_data_scalars():
    m = make_economy("tanh-sin", 3)
    md = metric_at(m, embed(m, -0.8, [0.5, 0.5]))
    sc = md.scalars
    assert md.det_g == pytest.approx(sc.normP2 * sc.B + sc.A**2, rel=1e-14)


def test_metric_partials_match_finite_differences(model, rng):
    X = _coords(model, rng, 16)
    dg = metric_partials_batch(model, X)
    h = 1e-6
    for m in range(model.L):
        e = np.zeros(model.L)
        e[m] = h
        fd = (metric_batch(model, X + e)[0] - metric_batch(model, X - e)[0]) / (2 * h)
        np.testing.assert_allclose(dg[:, m], fd, atol=1e-8)


def test_levi_civita_is_metric_compatible(model, rng):
    X = _coords(model, rng)
    g = metric_batch(model, X)[0]
    gam = christoffel_batch(model, X)
    dg = metric_partials_batch(model, X)
    # d_m g_ij = G^l_mi g_lj + G^l_mj g_il
    rhs = np.einsum("nmil,nlj->nmij", gam, g) + np.einsum("nmjl,nil->nmij", gam, g)
    np.testing.assert_allclose(dg, rhs, atol=1e-12)


def test_christoffel_symmetric_in_lower_indices(model, rng):
    gam = christoffel_batch(model, _coords(model, rng))
    np.testing.assert_array_equal(gam, np.swapaxes(gam, 1, 2))


def test_christoffel_with_both_lower_indices_nonzero_vanish(model, rng):
    gam = christoffel_batch(model, _coords(model, rng))
    assert np.all(gam[:, vanishing_mask(model.L)] == 0.0)


def test_riemann_symmetries(model, rng):
    X = _coords(model, rng, 32)
    R = riemann_batch(model, X)
    g = metric_batch(model, X)[0]
    Rlow = np.einsum("nijkl,nls->nijks", R, g)
    scale = max(1.0, np.max(np.abs(Rlow)))
    np.testing.assert_allclose(R, -np.swapaxes(R, 1, 2), atol=1e-13)
    np.testing.assert_allclose(Rlow, -np.swapaxes(Rlow, 3, 4), atol=1e-12 * scale)
    np.testing.assert_allclose(Rlow, np.transpose(Rlow, (0, 3, 4, 1, 2)), atol=1e-12 * scale)
    bianchi = R + np.transpose(R, (0, 2, 3, 1, 4)) + np.transpose(R, (0, 3, 1, 2, 4))
    np.testing.assert_allclose(bianchi, 0, atol=1e-13)


def test_contracted_riemann_matches_closed_form(model, rng):
    X = _coords(model, rng)
    cb = curvature_batch(model, X)
    ref = inner_R_batch(model, X)
    got = contract_inner_R(cb["riemann"], cb["g"])
    np.testing.assert_allclose(got, ref, rtol=1e-9, atol=1e-14)


@settings(max_examples=80, deadline=None)
@given(t=st.floats(-2.9, 2.9), a=st.lists(st.floats(-1, 1), min_size=4, max_size=4),
       family=st.sampled_from(["constant", "tanh-sin", "fold"]))
def test_sectional_curvature_non_positive(t, a, family):
    m = make_economy(family, 5)
    rep = curvature_at(m, embed(m, t, a))
    assert np.all(rep.sec_0i <= 1e-12)
    assert np.all(rep.inner_R <= 0)
    assert rep.sec_ij_max_abs <= 1e-10


def test_curvature_vanishes_exactly_where_price_is_stationary():
    # p_2' = 0.3 cos t vanishes at t = pi/2; p_1' never does
    m = make_economy("tanh-sin", 3)
    inner = curvature_at(m, embed(m, np.pi / 2, [0.2, 0.2])).inner_R
    assert inner[0] < -1e-6
    assert abs(inner[1]) < 1e-16


def test_singular_metric_is_reported():
    # p constant and w' = 0 at t = 0: the embedding is not an immersion there
    ones = lambda t: np.ones(np.shape(t) + (1,))
    zeros = lambda t: np.zeros(np.shape(t) + (1,))
    m = EconomyModel(2, ones, lambda t: t**3, lambda t: (zeros(t), 3 * t**2),
                     lambda t: (zeros(t), 6 * t))
    x = embed(m, 0.0, [0.0])
    with pytest.raises(SingularMetricError) as err:
        metric_at(m, x)
    assert err.value.t == 0.0
    with pytest.raises(SingularMetricError):
        christoffel_at(m, x)
