"""Closed-form induced geometry of the equilibrium manifold (two consumers).

Everything here is built from the scalars

    A  = w' - <p', alpha>        A' = w'' - <p'', alpha>
    B  = |p'|^2                  C  = <p', p''>
    |p|^2 = 1 + sum p_i^2        det g = |p|^2 B + A^2

Index conventions: coordinates are ``x_0 = t`` and ``x_i = alpha_i``.
``gamma[..., i, j, k]`` is the Christoffel symbol with lower indices ``i, j``
and upper index ``k``; ``riemann[..., i, j, k, s]`` is ``R^s_{ijk}`` with
``R(X_i, X_j) X_k = sum_s R^s_{ijk} X_s`` and
``<R(X_i, X_j) X_k, X_s> = sum_l R^l_{ijk} g_{ls}``.

The ``*_batch`` functions take coordinate rows of shape ``(N, L)`` and are
used by sweeps; the ``*_at`` functions wrap them for a single point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .economy import EconomyModel, ManifoldPoint, Scalars
from .errors import DegeneratePlaneError, SingularMetricError

DET_FLOOR = 1e-14


@dataclass(frozen=True)
class MetricData:
    g: np.ndarray
    g_inv: np.ndarray
    det_g: float
    scalars: Scalars


@dataclass(frozen=True)
class ChristoffelField:
    gamma: np.ndarray


@dataclass(frozen=True)
class CurvatureReport:
    sec_0i: np.ndarray
    sec_ij_max_abs: float
    inner_R: np.ndarray


class _Fields:
    """Jet and scalars evaluated on a batch of coordinate rows."""

    def __init__(self, model: EconomyModel, coords):
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        if coords.shape[1] != model.L:
            raise ValueError(f"coordinate rows must have {model.L} entries")
        self.coords = coords
        t, alpha = coords[:, 0], coords[:, 1:]
        jet = model.jet(t)
        self.p, self.dp, self.ddp = jet.p, jet.dp, jet.ddp
        self.A = jet.dw - np.sum(self.dp * alpha, axis=1)
        self.A1 = jet.ddw - np.sum(self.ddp * alpha, axis=1)
        self.B = np.sum(self.dp**2, axis=1)
        self.C = np.sum(self.dp * self.ddp, axis=1)
        self.E = np.sum(self.p * self.dp, axis=1)
        self.n2 = 1.0 + np.sum(self.p**2, axis=1)
        self.det = self.n2 * self.B + self.A**2

    def require_regular(self):
        bad = self.det <= DET_FLOOR
        if np.any(bad):
            row = self.coords[np.argmax(bad)]
            raise SingularMetricError(
                f"det g = {self.det[np.argmax(bad)]:.3e} at t={row[0]:.6g}, alpha={row[1:]}",
                t=float(row[0]), alpha=row[1:].copy())


def _metric(f: _Fields) -> np.ndarray:
    N, n = f.p.shape
    g = np.empty((N, n + 1, n + 1))
    g[:, 0, 0] = f.B + f.A**2
    g[:, 0, 1:] = g[:, 1:, 0] = -f.p * f.A[:, None]
    g[:, 1:, 1:] = f.p[:, :, None] * f.p[:, None, :]
    g[:, 1:, 1:] += np.eye(n)
    return g


def _metric_inverse(f: _Fields) -> np.ndarray:
    N, n = f.p.shape
    h = np.empty((N, n + 1, n + 1))
    h[:, 0, 0] = f.n2
    h[:, 0, 1:] = h[:, 1:, 0] = f.p * f.A[:, None]
    h[:, 1:, 1:] = -f.p[:, :, None] * f.p[:, None, :] * f.B[:, None, None]
    diag = np.arange(1, n + 1)
    h[:, diag, diag] = (f.n2[:, None] - f.p**2) * f.B[:, None] + (f.A**2)[:, None]
    return h / f.det[:, None, None]


def _christoffel(f: _Fields) -> np.ndarray:
    N, n = f.p.shape
    D = f.det
    gam = np.zeros((N, n + 1, n + 1, n + 1))
    gam[:, 0, 0, 0] = (f.n2 * f.C + f.A * f.A1) / D
    gam[:, 0, 0, 1:] = f.p * ((f.A * f.C - f.A1 * f.B) / D)[:, None]
    gam[:, 0, 1:, 0] = gam[:, 1:, 0, 0] = -f.dp * (f.A / D)[:, None]
    mixed = f.dp[:, :, None] * f.p[:, None, :] * (f.B / D)[:, None, None]
    gam[:, 0, 1:, 1:] = gam[:, 1:, 0, 1:] = mixed
    return gam


def _christoffel_partials(f: _Fields) -> np.ndarray:
    """``out[:, m, i, j, k]`` = d/dx_m of the Christoffel symbol (i j ; k).

    The t-derivative of the symbols with both lower indices 0 would need third
    derivatives of the economy; it only enters R^s_{ijk} with i == j, where it
    cancels, so it is left at zero.
    """
    N, n = f.p.shape
    D, D2 = f.det, f.det**2
    p, dp, ddp, A, A1, B, C = f.p, f.dp, f.ddp, f.A, f.A1, f.B, f.C
    out = np.zeros((N, n + 1, n + 1, n + 1, n + 1))

    # derivatives along alpha_m: dA = -p'_m, dA' = -p''_m, d det = -2 p'_m A
    Dm = -2.0 * dp * A[:, None]
    num000 = f.n2 * C + A * A1
    out[:, 1:, 0, 0, 0] = (-dp * A1[:, None] - ddp * A[:, None]) / D[:, None] \
        - num000[:, None] * Dm / D2[:, None]
    num00k = A * C - A1 * B
    d00k = (-dp * C[:, None] + ddp * B[:, None]) / D[:, None] \
        - num00k[:, None] * Dm / D2[:, None]
    out[:, 1:, 0, 0, 1:] = d00k[:, :, None] * p[:, None, :]
    d0j0 = dp[:, None, :] * dp[:, :, None] / D[:, None, None] \
        + (dp * A[:, None])[:, None, :] * Dm[:, :, None] / D2[:, None, None]
    out[:, 1:, 0, 1:, 0] = out[:, 1:, 1:, 0, 0] = d0j0
    d0jk = -(dp[:, None, :, None] * p[:, None, None, :]) * (B[:, None, None, None]
                                                            * Dm[:, :, None, None]) / D2[:, None, None, None]
    out[:, 1:, 0, 1:, 1:] = out[:, 1:, 1:, 0, 1:] = d0jk

    # derivatives along t
    D0 = 2.0 * (f.E * B + f.n2 * C + A * A1)
    t0j0 = (-ddp * A[:, None] - dp * A1[:, None]) / D[:, None] \
        + dp * (A * D0 / D2)[:, None]
    out[:, 0, 0, 1:, 0] = out[:, 0, 1:, 0, 0] = t0j0
    t0jk = ((ddp[:, :, None] * p[:, None, :] + dp[:, :, None] * dp[:, None, :]) * B[:, None, None]
            + 2.0 * dp[:, :, None] * p[:, None, :] * C[:, None, None]) / D[:, None, None] \
        - dp[:, :, None] * p[:, None, :] * (B * D0 / D2)[:, None, None]
    out[:, 0, 0, 1:, 1:] = out[:, 0, 1:, 0, 1:] = t0jk
    return out


def riemann_from_christoffel(gamma: np.ndarray, dgamma: np.ndarray) -> np.ndarray:
    """Coefficients ``R^s_{ijk}`` from symbols and their partials.

    ``gamma[..., i, j, k]`` as above; ``dgamma[..., m, i, j, k]`` = d_m gamma_ij^k.
    """
    quad = np.einsum("...ikl,...jls->...ijks", gamma, gamma)
    quad -= np.einsum("...jkl,...ils->...ijks", gamma, gamma)
    deriv = np.einsum("...jiks->...ijks", dgamma) - dgamma
    return quad + deriv


def _inner_R(f: _Fields) -> np.ndarray:
    return -(f.dp**2) * (f.B / f.det)[:, None]


# --------------------------------------------------------------------------
# batch API


def metric_batch(model: EconomyModel, coords, check: bool = True):
    """Return ``(g, g_inv, det_g)`` for every coordinate row."""
    f = _Fields(model, coords)
    if check:
        f.require_regular()
    return _metric(f), _metric_inverse(f), f.det


def metric_partials_batch(model: EconomyModel, coords) -> np.ndarray:
    """Analytic ``out[:, m, i, j]`` = d g_ij / d x_m."""
    f = _Fields(model, coords)
    N, n = f.p.shape
    out = np.zeros((N, n + 1, n + 1, n + 1))
    out[:, 0, 0, 0] = 2.0 * f.C + 2.0 * f.A * f.A1
    out[:, 0, 0, 1:] = out[:, 0, 1:, 0] = -f.dp * f.A[:, None] - f.p * f.A1[:, None]
    out[:, 0, 1:, 1:] = f.dp[:, :, None] * f.p[:, None, :] + f.p[:, :, None] * f.dp[:, None, :]
    out[:, 1:, 0, 0] = -2.0 * f.A[:, None] * f.dp
    out[:, 1:, 0, 1:] = out[:, 1:, 1:, 0] = f.dp[:, :, None] * f.p[:, None, :]
    return out


def christoffel_batch(model: EconomyModel, coords) -> np.ndarray:
    f = _Fields(model, coords)
    f.require_regular()
    return _christoffel(f)


def riemann_batch(model: EconomyModel, coords) -> np.ndarray:
    f = _Fields(model, coords)
    f.require_regular()
    return riemann_from_christoffel(_christoffel(f), _christoffel_partials(f))


def inner_R_batch(model: EconomyModel, coords) -> np.ndarray:
    """``<R(X_0, X_i) X_0, X_i> = -(p_i')^2 B / det g``, shape ``(N, L-1)``."""
    f = _Fields(model, coords)
    f.require_regular()
    return _inner_R(f)


def contract_inner_R(riemann: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``sum_s R^s_{0i0} g_si`` for i = 1..L-1."""
    L = g.shape[-1]
    return np.stack([np.einsum("ns,ns->n", riemann[:, 0, i, 0, :], g[:, :, i])
                     for i in range(1, L)], axis=-1)


def curvature_batch(model: EconomyModel, coords) -> dict:
    """All curvature quantities for a sweep, keyed by name."""
    f = _Fields(model, coords)
    f.require_regular()
    g = _metric(f)
    inner = _inner_R(f)
    idx = np.arange(1, model.L)
    plane0 = g[:, 0, 0][:, None] * g[:, idx, idx] - g[:, 0, idx] ** 2
    if np.any(plane0 <= DET_FLOOR):
        raise DegeneratePlaneError("degenerate (X_0, X_i) plane in sweep")
    riemann = riemann_from_christoffel(_christoffel(f), _christoffel_partials(f))
    sec_ij = np.zeros(len(f.det))
    for i in range(1, model.L):
        for j in range(i + 1, model.L):
            num = np.einsum("ns,ns->n", riemann[:, i, j, i, :], g[:, :, j])
            den = g[:, i, i] * g[:, j, j] - g[:, i, j] ** 2
            sec_ij = np.maximum(sec_ij, np.abs(num / den))
    return {
        "det_g": f.det, "A": f.A, "B": f.B, "inner_R": inner, "sec_0i": inner / plane0,
        "sec_ij_max_abs": sec_ij, "riemann": riemann, "g": g,
    }


# --------------------------------------------------------------------------
# single-point API


def _fields_at(model: EconomyModel, point: ManifoldPoint) -> _Fields:
    model.check_domain(point.t)
    f = _Fields(model, point.coords[None, :])
    f.require_regular()
    return f


def metric_at(model: EconomyModel, point: ManifoldPoint) -> MetricData:
    f = _fields_at(model, point)
    sc = Scalars(float(f.A[0]), float(f.A1[0]), float(f.B[0]), float(f.C[0]), float(f.n2[0]))
    return MetricData(_metric(f)[0], _metric_inverse(f)[0], float(f.det[0]), sc)


def christoffel_at(model: EconomyModel, point: ManifoldPoint) -> ChristoffelField:
    return ChristoffelField(_christoffel(_fields_at(model, point))[0])


def riemann_coefficients_at(model: EconomyModel, point: ManifoldPoint) -> np.ndarray:
    f = _fields_at(model, point)
    return riemann_from_christoffel(_christoffel(f), _christoffel_partials(f))[0]


def curvature_at(model: EconomyModel, point: ManifoldPoint) -> CurvatureReport:
    model.check_domain(point.t)
    out = curvature_batch(model, point.coords[None, :])
    return CurvatureReport(out["sec_0i"][0], float(out["sec_ij_max_abs"][0]), out["inner_R"][0])
