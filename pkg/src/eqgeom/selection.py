"""Geometric equilibrium selection ``f = exp o pi_T`` and equilibrium counting.

Starting from an equilibrium ``x = (p, omega)`` and a new endowment
``omega'``, the off-manifold point ``z = (p, omega')`` is projected onto the
tangent space at ``x`` (orthogonally for the ambient Euclidean product) and
the resulting tangent vector is pushed through the exponential map.

The bare operator does not force the landed point to carry endowment
``omega'``. ``select(..., refine=True)`` repeats the construction from each
landed point until the endowment matches.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .economy import EconomyModel, ManifoldPoint, basis_fields, embed
from .errors import RefinementStallError, ValidationError
from .geodesic import GeodesicPath, TangentVector, exp_map
from .geometry import inner_R_batch, metric_at, metric_batch

ROOT_GRID = 2048
ROOT_XTOL = 1e-12
TANGENCY_TOL = 1e-8
TANGENT_RESIDUAL = 1e-10
TANGENT_MERGE = 1e-8
UNIQUENESS_GRID = 512


@dataclass(frozen=True)
class PerturbedState:
    base: ManifoldPoint
    new_endowment: np.ndarray
    ambient_z: np.ndarray


@dataclass(frozen=True)
class SelectionResult:
    v: TangentVector
    landed: ManifoldPoint
    price_new: np.ndarray
    endowment_residual: float
    iterations: int
    path: GeodesicPath
    refined: bool


@dataclass(frozen=True)
class UniquenessReport:
    unique: bool
    max_abs_p_prime: float
    max_abs_inner_R: float
    curvature_zero: bool


def perturb(model: EconomyModel, base: ManifoldPoint, omega_prime) -> PerturbedState:
    """Pair the equilibrium price at ``base`` with consumer 1's new endowment."""
    omega_prime = np.asarray(omega_prime, dtype=float).reshape(-1)
    if omega_prime.size != model.L:
        raise ValidationError(f"omega' needs {model.L} entries, got {omega_prime.size}")
    if not np.all(np.isfinite(omega_prime)):
        raise ValidationError("omega' must be finite")
    z = np.concatenate([base.price, omega_prime])
    return PerturbedState(base, omega_prime, z)


def project_tangent(model: EconomyModel, state: PerturbedState) -> TangentVector:
    """Coefficients of the orthogonal projection of ``z - Phi(x)`` onto ``T_x``."""
    frame = basis_fields(model, state.base)
    g = metric_at(model, state.base).g
    rhs = frame.T @ (state.ambient_z - state.base.ambient)
    return TangentVector(state.base, np.linalg.solve(g, rhs))


def _residual(point: ManifoldPoint, omega_prime: np.ndarray) -> float:
    return float(np.linalg.norm(point.endowment - omega_prime))


def select(model: EconomyModel, state: PerturbedState, refine: bool = True, *,
           tol: float = 1e-10, max_iter: int = 100, stall_limit: int = 10) -> SelectionResult:
    """Apply ``exp o pi_T`` once, then optionally refine onto the fiber of ``omega'``.

    ``v`` in the result is the first projected vector; ``path`` is the last
    geodesic leg.
    """
    omega_prime = state.new_endowment
    v = project_tangent(model, state)
    landed, path = exp_map(model, v)
    residual = _residual(landed, omega_prime)
    iterations = 1
    if refine:
        best, since_best = residual, 0
        while residual >= tol and iterations < max_iter:
            step = project_tangent(model, perturb(model, landed, omega_prime))
            landed, path = exp_map(model, step)
            residual = _residual(landed, omega_prime)
            iterations += 1
            if residual < best:
                best, since_best = residual, 0
            else:
                since_best += 1
                if since_best >= stall_limit:
                    raise RefinementStallError(
                        f"residual stuck at {residual:.3e} after {iterations} iterations",
                        residual, iterations)
    return SelectionResult(v, landed, landed.price.copy(), residual, iterations, path, refine)


def follow_endowment_path(model: EconomyModel, base: ManifoldPoint, endowments,
                          refine: bool = True, **kw) -> list[SelectionResult]:
    """Compose the selection along a sequence of endowments, each leg starting
    where the previous one landed."""
    results = []
    current = base
    for omega in endowments:
        res = select(model, perturb(model, current, omega), refine, **kw)
        results.append(res)
        current = res.landed
    return results


def _fiber_residual(model, t, alpha_bar, omega_last):
    return model.income_fn(t) - model.price_fn(t) @ alpha_bar - omega_last


def _fiber_slope(model, t, alpha_bar):
    dp, dw = model.d1(t)
    return dw - dp @ alpha_bar


def _bisect(fn, ts, vals, xtol):
    """Refine every sign change of ``vals`` on the grid ``ts`` to width ``xtol``."""
    bracket = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    lo, hi = ts[bracket], ts[bracket + 1]
    f_lo = vals[bracket]
    while lo.size and np.max(hi - lo) > xtol:
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        left = np.sign(f_mid) == np.sign(f_lo)
        lo = np.where(left, mid, lo)
        f_lo = np.where(left, f_mid, f_lo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def find_equilibria(model: EconomyModel, endowment, *, grid: int = ROOT_GRID,
                    xtol: float = ROOT_XTOL) -> list[ManifoldPoint]:
    """All equilibria over ``endowment`` in the certified domain, sorted by t.

    Roots of ``h(t) = w(t) - <p(t), alpha_bar> - omega_L`` are bracketed by
    sign changes on a uniform grid and refined by bisection. Critical points
    of ``h`` are located the same way and kept when ``|h|`` vanishes there,
    so double roots are not lost. Roots where ``h'`` nearly vanishes trigger
    a warning because the economy is (close to) singular there.
    """
    endowment = np.asarray(endowment, dtype=float).reshape(-1)
    if endowment.size != model.L:
        raise ValidationError(f"endowment needs {model.L} entries")
    alpha_bar, omega_last = endowment[:-1], endowment[-1]
    ts = np.linspace(*model.domain, grid)
    hs = _fiber_residual(model, ts, alpha_bar, omega_last)

    exact = ts[hs == 0.0]
    roots = _bisect(lambda t: _fiber_residual(model, t, alpha_bar, omega_last), ts, hs, xtol)

    # double roots give no sign change; look for them at critical points of h
    slopes = _fiber_slope(model, ts, alpha_bar)
    crit = _bisect(lambda t: _fiber_slope(model, t, alpha_bar), ts, slopes, xtol)
    crit = crit[np.abs(_fiber_residual(model, crit, alpha_bar, omega_last)) < TANGENT_RESIDUAL]
    found = np.concatenate([exact, roots])
    crit = np.array([c for c in crit if found.size == 0 or np.min(np.abs(found - c)) > TANGENT_MERGE])
    roots = np.sort(np.concatenate([found, crit]))

    points = []
    for t in roots:
        slope = float(_fiber_slope(model, np.asarray(t), alpha_bar))
        if abs(slope) < TANGENCY_TOL:
            warnings.warn(f"near-tangent equilibrium at t={t:.6g} (h'={slope:.2e}); "
                          "economy is close to singular", RuntimeWarning, stacklevel=2)
        points.append(embed(model, t, alpha_bar))
    return points


def branch_index(model: EconomyModel, point: ManifoldPoint) -> int | None:
    """Position of ``point`` among the equilibria over its own endowment."""
    roots = find_equilibria(model, point.endowment)
    if not roots:
        return None
    return int(np.argmin([abs(r.t - point.t) for r in roots]))


def uniqueness_check(model: EconomyModel, grid: int = UNIQUENESS_GRID) -> UniquenessReport:
    """Sample ``|p'|`` and ``<R(X_0, X_i) X_0, X_i>`` along ``alpha = 0``.

    Zero curvature and constant prices (hence a unique equilibrium for every
    endowment) should coincide.
    """
    ts = np.linspace(*model.domain, grid)
    dp, _ = model.d1(ts)
    coords = np.column_stack([ts, np.zeros((grid, model.L - 1))])
    inner = inner_R_batch(model, coords)
    det = metric_batch(model, coords)[2]
    max_p = float(np.max(np.abs(dp)))
    max_r = float(np.max(np.abs(inner)))
    flat = max_r < 1e-10 * max(1.0, float(np.max(det)))
    return UniquenessReport(max_p < 1e-10, max_p, max_r, flat)
