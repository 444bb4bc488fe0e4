"""Closed-form versus finite-difference comparisons over seeded samples.

Shared by the ``verify`` command and the acceptance tests so both report
the same numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import oracle
from .economy import EconomyModel
from .geometry import christoffel_batch, contract_inner_R, curvature_batch, metric_batch

SAMPLE_MARGIN = 0.05

METRIC_TOL = 1e-6
INVERSE_TOL = 1e-10
CHRISTOFFEL_TOL = 1e-6
VANISH_TOL = 1e-12
SELF_REL_TOL = 1e-9
SELF_ABS_FLOOR = 1e-14
ORACLE_REL_TOL = 1e-4
ORACLE_ABS_TOL = 1e-8
SEC_0I_TOL = 1e-12
SEC_IJ_TOL = 1e-10


@dataclass(frozen=True)
class Comparison:
    name: str
    max_error: float
    tolerance: float
    passed: bool
    worst_index: int


def sample_coords(model: EconomyModel, n: int, seed: int, margin: float = SAMPLE_MARGIN) -> np.ndarray:
    """Seeded ``(n, L)`` rows: t uniform on the shrunk domain, alpha uniform in [-1, 1]."""
    if n < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    lo, hi = model.domain
    t = rng.uniform(lo + margin, hi - margin, n)
    alpha = rng.uniform(-1.0, 1.0, (n, model.L - 1))
    return np.column_stack([t, alpha])


def _cmp(name, err, tol):
    err = np.asarray(err, dtype=float).reshape(len(err), -1).max(axis=1)
    worst = int(np.argmax(err))
    return Comparison(name, float(err[worst]), tol, bool(err[worst] < tol), worst)


def _ratio_cmp(name, err, allowed):
    """Pass when ``err <= allowed`` entrywise; reports ``max(err / allowed)`` against 1."""
    ratio = (np.asarray(err) / np.asarray(allowed)).reshape(len(err), -1).max(axis=1)
    worst = int(np.argmax(ratio))
    return Comparison(name, float(ratio[worst]), 1.0, bool(ratio[worst] <= 1.0), worst)


def vanishing_mask(L: int) -> np.ndarray:
    """Christoffel entries whose two lower indices are both nonzero."""
    mask = np.zeros((L, L, L), dtype=bool)
    mask[1:, 1:, :] = True
    return mask


def metric_checks(model: EconomyModel, X: np.ndarray) -> list[Comparison]:
    g, g_inv, _ = metric_batch(model, X)
    g_num = oracle.metric_numeric_batch(model, X)
    return [
        _cmp("metric vs oracle", np.abs(g - g_num), METRIC_TOL),
        _cmp("inverse vs numeric inverse", np.abs(g_inv - np.linalg.inv(g)), INVERSE_TOL),
    ]


def christoffel_checks(model: EconomyModel, X: np.ndarray) -> list[Comparison]:
    gam = christoffel_batch(model, X)
    gam_num = oracle.christoffel_numeric_batch(model, X)
    mask = vanishing_mask(model.L)
    return [
        _cmp("christoffel vs oracle", np.abs(gam - gam_num), CHRISTOFFEL_TOL),
        _cmp("christoffel vanishing entries", np.abs(gam[:, mask]), VANISH_TOL),
    ]


def curvature_checks(model: EconomyModel, X: np.ndarray) -> list[Comparison]:
    cb = curvature_batch(model, X)
    ref = cb["inner_R"]
    self_inner = contract_inner_R(cb["riemann"], cb["g"])
    num_inner = contract_inner_R(oracle.curvature_numeric_batch(model, X),
                                 oracle.metric_numeric_batch(model, X))
    return [
        _ratio_cmp("curvature self-consistency", np.abs(self_inner - ref),
                   np.maximum(SELF_REL_TOL * np.abs(ref), SELF_ABS_FLOOR)),
        _ratio_cmp("curvature vs oracle", np.abs(num_inner - ref),
                   np.maximum(ORACLE_REL_TOL * np.abs(ref), ORACLE_ABS_TOL)),
        _cmp("sectional K(X0,Xi) upper bound", np.maximum(cb["sec_0i"], 0.0), SEC_0I_TOL),
        _cmp("sectional |K(Xi,Xj)|", cb["sec_ij_max_abs"], SEC_IJ_TOL),
    ]


def verify_model(model: EconomyModel, samples: int = 1000, seed: int = 42) -> list[Comparison]:
    X = sample_coords(model, samples, seed)
    return metric_checks(model, X) + christoffel_checks(model, X) + curvature_checks(model, X)
