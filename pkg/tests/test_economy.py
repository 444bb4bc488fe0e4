import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eqgeom import (DomainError, EconomyModel, ValidationError, basis_fields, constant_economy,
                    economy_from_config, embed, load_economy, make_economy)
from eqgeom.economy import economy_to_config, embed_array, scalars

from frozen import EMBED_TANH_SIN


def test_embed_matches_frozen_reference():
    m = make_economy("tanh-sin", 3)
    x = embed(m, 0.7, [0.2, -0.4])
    np.testing.assert_allclose(x.ambient, EMBED_TANH_SIN, rtol=0, atol=1e-15)


def test_constant_embed_is_affine():
    m = constant_economy(L=3, price=[1.0, 2.0], c=1.5)
    x = embed(m, 0.4, [0.1, 0.3])
    # (p, alpha, w - p.alpha)
    np.testing.assert_allclose(x.ambient, [1.0, 2.0, 0.1, 0.3, 0.6 - 0.1 - 0.6])


def test_point_accessors():
    m = make_economy("fold", 3)
    x = embed(m, -0.5, [0.25, -0.1])
    assert x.L == 3
    np.testing.assert_array_equal(x.coords, [-0.5, 0.25, -0.1])
    np.testing.assert_array_equal(x.price, x.ambient[:2])
    np.testing.assert_array_equal(x.endowment, x.ambient[2:])
    assert x.endowment.size == 3


def test_embed_array_agrees_with_embed(model, rng):
    X = np.column_stack([rng.uniform(-2.5, 2.5, 20), rng.uniform(-1, 1, (20, model.L - 1))])
    Y = embed_array(model, X)
    for row, y in zip(X, Y):
        np.testing.assert_array_equal(embed(model, row[0], row[1:]).ambient, y)


def test_embed_array_keeps_longdouble():
    m = make_economy("tanh-sin", 3)
    X = np.array([[0.1, 0.2, 0.3]], dtype=np.longdouble)
    assert embed_array(m, X).dtype == np.longdouble


@pytest.mark.parametrize("t", [-3.5, 3.0001, np.inf])
def test_embed_outside_domain(t):
    with pytest.raises((DomainError, ValidationError)):
        embed(make_economy("fold", 2), t, [0.0])


def test_embed_rejects_wrong_alpha_length():
    with pytest.raises(ValidationError):
        embed(make_economy("fold", 3), 0.0, [0.0])


def test_unknown_family_lists_valid_names():
    with pytest.raises(ValidationError, match="constant, fold, tanh-sin"):
        make_economy("cubic", 2)


@pytest.mark.parametrize("family,params", [("tanh-sin", {"a": 1.0}), ("tanh-sin", {"b": -1.2}),
                                           ("fold", {"a": 1.5})])
def test_nonpositive_prices_rejected(family, params):
    with pytest.raises(ValidationError):
        make_economy(family, 3, params)


def test_bad_parameter_name_rejected():
    with pytest.raises(ValidationError):
        make_economy("fold", 2, {"q": 1})


def test_validate_detects_non_immersion():
    zero = lambda t: np.zeros(np.shape(t) + (1,))
    flat = EconomyModel(2, lambda t: 1.0 + zero(t), lambda t: 0.0 * t,
                        lambda t: (zero(t), 0.0 * t), lambda t: (zero(t), 0.0 * t))
    with pytest.raises(ValidationError, match="immersion"):
        flat.validate()


def test_validate_detects_self_intersection():
    # a circle traced twice: both ends of the grid land on the same point
    p = lambda t: np.stack([2.0 + np.cos(t)], axis=-1)
    d1 = lambda t: (np.stack([-np.sin(t)], axis=-1), np.cos(t))
    d2 = lambda t: (np.stack([-np.cos(t)], axis=-1), -np.sin(t))
    loop = EconomyModel(2, p, np.sin, d1, d2, domain=(0.0, 4 * np.pi))
    with pytest.raises(ValidationError, match="injective"):
        loop.validate()


def test_config_round_trip(tmp_path):
    cfg = {"family": "tanh-sin", "L": 3, "params": {"a": 0.5, "b": 0.3, "c": 1.0, "d": 0.0},
           "domain": [-3, 3]}
    path = tmp_path / "econ.json"
    path.write_text(json.dumps(cfg))
    m = load_economy(path)
    assert m.family == "tanh-sin" and m.L == 3 and m.domain == (-3.0, 3.0)
    again = economy_from_config(economy_to_config(m))
    np.testing.assert_array_equal(again.price_fn(np.linspace(-1, 1, 5)),
                                  m.price_fn(np.linspace(-1, 1, 5)))


@pytest.mark.parametrize("cfg", [{"L": 2}, {"family": "fold", "extra": 1},
                                 {"family": "fold", "domain": [0]}, []])
def test_config_rejects_malformed(cfg):
    with pytest.raises(ValidationError):
        economy_from_config(cfg)


@settings(max_examples=60, deadline=None)
@given(t=st.floats(-2.9, 2.9), family=st.sampled_from(["tanh-sin", "fold"]),
       L=st.sampled_from([2, 3, 5]))
def test_declared_derivatives_match_finite_differences(t, family, L):
    m = make_economy(family, L)
    h = 1e-5
    tt = np.array([t - h, t + h])
    dp, dw = m.d1(np.array(t))
    np.testing.assert_allclose(dp, (m.price_fn(tt)[1] - m.price_fn(tt)[0]) / (2 * h), atol=1e-9)
    np.testing.assert_allclose(dw, (m.income_fn(tt)[1] - m.income_fn(tt)[0]) / (2 * h), atol=1e-9)
    ddp, ddw = m.d2(np.array(t))
    d1p = m.d1(tt)[0]
    d1w = m.d1(tt)[1]
    np.testing.assert_allclose(ddp, (d1p[1] - d1p[0]) / (2 * h), atol=1e-9)
    np.testing.assert_allclose(ddw, (d1w[1] - d1w[0]) / (2 * h), atol=1e-9)


def test_basis_fields_match_jacobian(model, rng):
    t, alpha = rng.uniform(-2, 2), rng.uniform(-1, 1, model.L - 1)
    x = embed(model, t, alpha)
    J = basis_fields(model, x)
    assert J.shape == (2 * model.L - 1, model.L)
    h = 1e-6
    for m in range(model.L):
        e = np.zeros(model.L)
        e[m] = h
        c = x.coords
        fd = (embed(model, c[0] + e[0], c[1:] + e[1:]).ambient
              - embed(model, c[0] - e[0], c[1:] - e[1:]).ambient) / (2 * h)
        np.testing.assert_allclose(J[:, m], fd, atol=1e-8)


def test_scalars_definitions():
    m = make_economy("tanh-sin", 3)
    x = embed(m, 0.3, [0.4, -0.2])
    sc = scalars(m, x)
    j = m.jet(np.array(0.3))
    alpha = np.array([0.4, -0.2])
    assert sc.A == pytest.approx(j.dw - j.dp @ alpha)
    assert sc.A_prime == pytest.approx(j.ddw - j.ddp @ alpha)
    assert sc.B == pytest.approx(j.dp @ j.dp)
    assert sc.C == pytest.approx(j.dp @ j.ddp)
    assert sc.normP2 == pytest.approx(1 + j.p @ j.p)
