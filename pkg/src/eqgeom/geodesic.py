"""Exponential and logarithm maps on the equilibrium manifold.

Geodesics solve ``x''^k + Gamma^k_ij x'^i x'^j = 0`` in ``(t, alpha)``
coordinates with the closed-form Christoffel symbols. Integration uses an
adaptive Dormand-Prince 5(4) pair; the compiled kernel is used when it
imports, otherwise the pure-Python twin in ``_dopri``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _dopri
from .economy import EconomyModel, ManifoldPoint, point_from_coords
from .errors import DomainExitError, NonConvergenceError, ValidationError
from .geometry import christoffel_batch, metric_at

try:
    if os.environ.get("EQGEOM_PURE_PYTHON"):
        raise ImportError("pure-Python backend requested")
    from . import _kernels
except ImportError:
    _kernels = None

BACKEND = "python" if _kernels is None else "cython"

RTOL = 1e-10
ATOL = 1e-10


@dataclass(frozen=True)
class TangentVector:
    """Components of a tangent vector in the coordinate basis ``X_0..X_{L-1}``."""

    base: ManifoldPoint
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float).reshape(-1)
        if coeffs.size != self.base.L:
            raise ValidationError(f"tangent vector needs {self.base.L} coefficients")
        if not np.all(np.isfinite(coeffs)):
            raise ValidationError("tangent coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)

    def norm(self, model: EconomyModel) -> float:
        g = metric_at(model, self.base).g
        return float(np.sqrt(self.coeffs @ g @ self.coeffs))


def g_speed(model: EconomyModel, coords: np.ndarray, velocity: np.ndarray) -> np.ndarray:
    """Riemannian speed ``|dPhi(x) v|`` for rows of coordinates and velocities."""
    coords = np.atleast_2d(coords)
    velocity = np.atleast_2d(velocity)
    jet = model.jet(coords[:, 0])
    v0, va = velocity[:, 0], velocity[:, 1:]
    A = jet.dw - np.sum(jet.dp * coords[:, 1:], axis=1)
    last = A * v0 - np.sum(jet.p * va, axis=1)
    sq = np.sum(jet.dp**2, axis=1) * v0**2 + np.sum(va**2, axis=1) + last**2
    return np.sqrt(sq)


@dataclass(frozen=True)
class GeodesicPath:
    """Accepted integrator steps of one geodesic, ``s`` from 0 to 1."""

    s: np.ndarray
    coords: np.ndarray
    velocity: np.ndarray
    accel: np.ndarray
    speed: np.ndarray

    @property
    def energy(self) -> float:
        return float(self.speed[0] ** 2)

    @property
    def speed_drift(self) -> float:
        """Largest relative deviation of the g-speed from its value at s = 0."""
        if self.speed[0] == 0:
            return float(np.max(self.speed))
        return float(np.max(np.abs(self.speed - self.speed[0])) / self.speed[0])

    def at(self, s: float) -> tuple[np.ndarray, np.ndarray]:
        """Coordinates and velocity at ``s`` by quintic Hermite interpolation.

        Uses position, velocity and geodesic acceleration at the two
        bracketing steps.
        """
        if not 0.0 <= s <= 1.0:
            raise ValueError("s must lie in [0, 1]")
        i = int(np.clip(np.searchsorted(self.s, s, side="right") - 1, 0, len(self.s) - 2))
        h = self.s[i + 1] - self.s[i]
        u = (s - self.s[i]) / h
        nodes = np.stack([self.coords[i], self.velocity[i] * h, self.accel[i] * h * h,
                          self.accel[i + 1] * h * h, self.velocity[i + 1] * h, self.coords[i + 1]])
        powers = u ** np.arange(6)
        dpowers = np.arange(6) * np.concatenate([[0.0], powers[:-1]])
        return powers @ _QUINTIC @ nodes, dpowers @ _QUINTIC @ nodes / h


# rows: powers u^0..u^5; columns: p0, m0, a0, a1, m1, p1
_QUINTIC = np.array([
    [1, 0, 0, 0, 0, 0],
    [0, 1, 0, 0, 0, 0],
    [0, 0, 0.5, 0, 0, 0],
    [-10, -6, -1.5, 0.5, -4, 10],
    [15, 8, 1.5, -1, 7, -15],
    [-6, -3, -0.5, 0.5, -3, 6],
])


def _python_jet(model):
    def jet(t):
        j = model.jet(t)
        return j.p.tolist(), j.dp.tolist(), j.ddp.tolist(), float(j.dw), float(j.ddw)
    return jet


def _integrate(model, x0, v0, rtol=RTOL, atol=ATOL, backend=None):
    backend = backend or BACKEND
    lo, hi = model.domain
    if backend == "cython":
        if _kernels is None:
            raise RuntimeError("compiled kernel is not available")
        s, ys = _kernels.integrate(_kernels.native_jet(model), x0, v0, lo, hi, rtol, atol)
    elif backend == "python":
        s, ys = _dopri.integrate(_python_jet(model), model.L - 1, x0, v0, lo, hi, rtol, atol)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return s, np.asarray(ys)


def integrate_geodesic(model: EconomyModel, x0, v0, *, rtol=RTOL, atol=ATOL,
                       backend: str | None = None) -> GeodesicPath:
    """Integrate the geodesic through ``x0`` with initial velocity ``v0``."""
    s, ys = _integrate(model, x0, v0, rtol, atol, backend)
    L = model.L
    coords, velocity = ys[:, :L], ys[:, L:]
    gam = christoffel_batch(model, coords)
    accel = -np.einsum("nijk,ni,nj->nk", gam, velocity, velocity)
    return GeodesicPath(np.asarray(s), coords, velocity, accel, g_speed(model, coords, velocity))


def exp_map(model: EconomyModel, v: TangentVector, **kw) -> tuple[ManifoldPoint, GeodesicPath]:
    """``exp_x(v)``: endpoint at ``s = 1`` of the geodesic with initial velocity ``v``."""
    path = integrate_geodesic(model, v.base.coords, v.coeffs, **kw)
    return point_from_coords(model, path.coords[-1]), path


def log_map(model: EconomyModel, x: ManifoldPoint, y: ManifoldPoint, *, tol: float = 1e-9,
            max_iter: int = 50, fd_step: float = 1e-6, max_halvings: int = 20,
            **kw) -> TangentVector:
    """Initial velocity at ``x`` of the geodesic reaching ``y`` at ``s = 1``.

    Damped Newton shooting on the endpoint map with a forward-difference
    Jacobian, started from the coordinate difference.
    """
    model.check_domain(x.t)
    model.check_domain(y.t)
    target = y.coords
    base = x.coords

    def endpoint(c):
        return _integrate(model, base, c, **kw)[1][-1, :model.L]

    # start from the coordinate difference, shortened until the shot stays in the domain
    c = target - base
    for _ in range(max_halvings + 1):
        try:
            F = endpoint(c) - target
            break
        except DomainExitError:
            c = 0.5 * c
    else:
        raise NonConvergenceError("no initial shot stays inside the domain", float("inf"))
    res = float(np.linalg.norm(F))
    for _ in range(max_iter):
        if res < tol:
            return TangentVector(x, c)
        J = np.empty((model.L, model.L))
        for m in range(model.L):
            cm = c.copy()
            cm[m] += fd_step
            J[:, m] = (endpoint(cm) - target - F) / fd_step
        step = np.linalg.solve(J, -F)
        lam = 1.0
        for _ in range(max_halvings + 1):
            trial = c + lam * step
            try:
                F_trial = endpoint(trial) - target
            except DomainExitError:
                F_trial = None
            if F_trial is not None and np.linalg.norm(F_trial) < res:
                break
            lam *= 0.5
        else:
            raise NonConvergenceError(f"line search failed, residual {res:.3e}", res)
        c, F = trial, F_trial
        res = float(np.linalg.norm(F))
    if res < tol:
        return TangentVector(x, c)
    raise NonConvergenceError(f"no convergence after {max_iter} Newton steps, residual {res:.3e}", res)
