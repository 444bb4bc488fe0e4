"""Finite-difference geometry pipeline used to check the closed forms.

Nothing here touches the analytic derivatives of the economy. The only input
is the embedding ``(t, alpha) -> R^(2L-1)`` evaluated from ``price_fn`` and
``income_fn``. The chain is

    embedding --central diff--> Jacobian J --> g = J^T J
    g --central diff--> dg --> Christoffel symbols (numeric inverse of g)
    Christoffel --central diff--> curvature coefficients

Each level uses its own step: round-off from an inner level is divided by
the step of every enclosing level, so the steps grow outward. All arithmetic
runs in ``np.longdouble`` by default (80-bit on x86-64) for the same reason.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .economy import EconomyModel, ManifoldPoint, embed_array
from .errors import DomainError, SingularMetricError
from .geometry import ChristoffelField


@dataclass(frozen=True)
class FDConfig:
    """Central-difference steps per nesting level.

    ``step_h`` differentiates the embedding, ``christoffel_step`` the metric
    and ``curvature_step`` the Christoffel symbols. With ``richardson`` each
    derivative combines steps ``h`` and ``h/2`` to cancel the ``h^2`` term.
    """

    step_h: float = 2e-4
    christoffel_step: float = 2e-3
    curvature_step: float = 1e-2
    richardson: bool = True
    dtype: type = np.longdouble

    def __post_init__(self):
        for name in ("step_h", "christoffel_step", "curvature_step"):
            h = getattr(self, name)
            if not 1e-8 <= h <= 1e-2:
                raise ValueError(f"{name}={h} outside [1e-8, 1e-2]")

    def reach(self, depth: int) -> float:
        """Largest t-offset evaluated by a pipeline of the given depth."""
        return sum((self.step_h, self.christoffel_step, self.curvature_step)[:depth])


_ROWS_PER_CHUNK = 200_000


def central_partials(f, X: np.ndarray, h: float, richardson: bool) -> np.ndarray:
    """``out[:, m, ...] = d f / d x_m`` at every row of ``X`` (shape ``(N, L)``).

    ``f`` maps a stacked ``(K, L)`` array to ``(K, ...)``; all shifted points
    go through one call.
    """
    N, L = X.shape
    steps = (h, h / 2) if richardson else (h,)
    eye = np.eye(L, dtype=X.dtype)
    shifted = []
    for hh in steps:
        for m in range(L):
            shifted.append(X + hh * eye[m])
            shifted.append(X - hh * eye[m])
    Y = f(np.concatenate(shifted))
    Y = Y.reshape((len(steps), L, 2, N) + Y.shape[1:])
    D = Y[:, :, 0] - Y[:, :, 1]
    D /= 2 * np.asarray(steps, dtype=X.dtype).reshape((len(steps),) + (1,) * (D.ndim - 1))
    D = (4 * D[1] - D[0]) / 3 if richardson else D[0]
    return np.moveaxis(D, 0, 1)


def invert(G: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched Gauss-Jordan inverse with partial pivoting; returns ``(inv, det)``.

    Works for any float dtype, including ``longdouble`` which LAPACK lacks.
    """
    N, n, _ = G.shape
    M = np.concatenate([G.copy(), np.broadcast_to(np.eye(n, dtype=G.dtype), G.shape)], axis=2)
    det = np.ones(N, dtype=G.dtype)
    rows = np.arange(N)
    for c in range(n):
        piv = c + np.argmax(np.abs(M[:, c:, c]), axis=1)
        swap = piv != c
        if np.any(swap):
            top = M[rows, c].copy()
            M[rows, c] = M[rows, piv]
            M[rows, piv] = top
            det[swap] = -det[swap]
        pivot = M[:, c, c].copy()
        det *= pivot
        safe = np.where(pivot == 0, 1, pivot)
        M[:, c] /= safe[:, None]
        factors = M[:, :, c].copy()
        factors[:, c] = 0
        M -= factors[:, :, None] * M[:, c][:, None, :]
    return M[:, :, n:], det


def _metric(model, X, cfg):
    J = central_partials(lambda Y: embed_array(model, Y), X, cfg.step_h, cfg.richardson)
    return np.einsum("nia,nja->nij", J, J)


def _christoffel(model, X, cfg):
    g = _metric(model, X, cfg)
    g_inv, det = invert(g)
    if np.any(np.abs(det) <= 1e-14):
        raise SingularMetricError("numerically singular metric in finite-difference oracle")
    dg = central_partials(lambda Y: _metric(model, Y, cfg), X, cfg.christoffel_step, cfg.richardson)
    # dg[n, m, i, j] = d_m g_ij
    bracket = dg + np.einsum("njhi->nijh", dg) - np.einsum("nhij->nijh", dg)
    return 0.5 * np.einsum("nhk,nijh->nijk", g_inv, bracket)


def _curvature(model, X, cfg):
    gam = _christoffel(model, X, cfg)
    dgam = central_partials(lambda Y: _christoffel(model, Y, cfg), X,
                            cfg.curvature_step, cfg.richardson)
    # R^s_ijk = G^l_ik G^s_jl - G^l_jk G^s_il + d_j G^s_ik - d_i G^s_jk
    R = np.einsum("nikl,njls->nijks", gam, gam) - np.einsum("njkl,nils->nijks", gam, gam)
    R += np.einsum("njiks->nijks", dgam) - np.einsum("nijks->nijks", dgam)
    return R


def _sweep(kernel, depth, model, coords, cfg):
    cfg = cfg or FDConfig()
    X = np.atleast_2d(np.asarray(coords, dtype=float))
    lo, hi = model.domain
    reach = cfg.reach(depth)
    t = X[:, 0]
    if np.any(t - reach < lo) or np.any(t + reach > hi):
        bad = t[(t - reach < lo) | (t + reach > hi)][0]
        raise DomainError(f"t={bad:.6g} within {reach:g} of the domain boundary {model.domain}")
    fan = (2 * model.L * (2 if cfg.richardson else 1)) ** depth
    chunk = max(1, _ROWS_PER_CHUNK // fan)
    out = [kernel(model, X[i:i + chunk].astype(cfg.dtype), cfg) for i in range(0, len(X), chunk)]
    return np.concatenate(out).astype(float)


def metric_numeric_batch(model: EconomyModel, coords, cfg: FDConfig | None = None) -> np.ndarray:
    return _sweep(_metric, 1, model, coords, cfg)


def christoffel_numeric_batch(model: EconomyModel, coords, cfg: FDConfig | None = None) -> np.ndarray:
    return _sweep(_christoffel, 2, model, coords, cfg)


def curvature_numeric_batch(model: EconomyModel, coords, cfg: FDConfig | None = None) -> np.ndarray:
    return _sweep(_curvature, 3, model, coords, cfg)


def metric_numeric(model: EconomyModel, point: ManifoldPoint, cfg: FDConfig | None = None) -> np.ndarray:
    return metric_numeric_batch(model, point.coords[None, :], cfg)[0]


def christoffel_numeric(model: EconomyModel, point: ManifoldPoint,
                        cfg: FDConfig | None = None) -> ChristoffelField:
    return ChristoffelField(christoffel_numeric_batch(model, point.coords[None, :], cfg)[0])


def curvature_numeric(model: EconomyModel, point: ManifoldPoint, cfg: FDConfig | None = None) -> np.ndarray:
    return curvature_numeric_batch(model, point.coords[None, :], cfg)[0]
