"""Two-consumer exchange economies and the embedding of their equilibrium manifold.

An economy is a smooth curve ``t -> (p(t), w(t))`` of normalized prices
(good ``L`` is the numeraire) and consumer-1 income. Together with the
first ``L - 1`` endowment components ``alpha`` of consumer 1 it parametrizes
the equilibrium manifold as a graph in ``R^(2L-1)``::

    (t, alpha) -> (p(t), alpha, w(t) - <p(t), alpha>)

All model callables are vectorized over ``t`` and keep the input dtype, so
the finite-difference oracle can evaluate them in extended precision.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, ValidationError

DEFAULT_DOMAIN = (-3.0, 3.0)
VALIDATION_GRID = 512


class Jet(NamedTuple):
    """Prices, income and their first two t-derivatives at one or more t."""

    p: np.ndarray
    dp: np.ndarray
    ddp: np.ndarray
    w: np.ndarray
    dw: np.ndarray
    ddw: np.ndarray


@dataclass(frozen=True, eq=False)
class EconomyModel:
    """A smooth parametrization of the price-income equilibria.

    ``price_fn(t)`` returns an array of shape ``t.shape + (L - 1,)``;
    ``income_fn(t)`` has the shape of ``t``. ``d1(t)`` and ``d2(t)`` return
    the pairs ``(p', w')`` and ``(p'', w'')`` in the same layout and must be
    exact (analytic) derivatives.
    """

    L: int
    price_fn: Callable[[np.ndarray], np.ndarray]
    income_fn: Callable[[np.ndarray], np.ndarray]
    d1: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]
    d2: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]
    domain: tuple[float, float] = DEFAULT_DOMAIN
    family: str | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 2:
            raise ValidationError(f"L must be an integer >= 2, got {self.L!r}")
        lo, hi = (float(v) for v in self.domain)
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise ValidationError(f"invalid domain {self.domain!r}")
        object.__setattr__(self, "domain", (lo, hi))

    @property
    def n_prices(self) -> int:
        return self.L - 1

    @property
    def ambient_dim(self) -> int:
        return 2 * self.L - 1

    def in_domain(self, t) -> bool:
        lo, hi = self.domain
        return bool(np.all((np.asarray(t) >= lo) & (np.asarray(t) <= hi)))

    def check_domain(self, t):
        if not self.in_domain(t):
            raise DomainError(f"t={t!r} outside certified domain {self.domain}")

    def jet(self, t) -> Jet:
        t = np.asarray(t)
        dp, dw = self.d1(t)
        ddp, ddw = self.d2(t)
        return Jet(self.price_fn(t), dp, ddp, self.income_fn(t), dw, ddw)

    def validate(self, n: int = VALIDATION_GRID, tol: float = 1e-12) -> None:
        """Check positivity, immersion and grid injectivity on the domain."""
        t = np.linspace(*self.domain, n)
        jet = self.jet(t)
        if jet.p.shape != (n, self.n_prices):
            raise ValidationError(
                f"price_fn returned shape {jet.p.shape}, expected {(n, self.n_prices)}"
            )
        if np.any(jet.p <= 0):
            bad = t[np.any(jet.p <= 0, axis=1)][0]
            raise ValidationError(f"non-positive price at t={bad:.6g}")
        speed = np.sum(jet.dp**2, axis=1) + jet.dw**2
        if np.any(speed <= tol):
            bad = t[speed <= tol][0]
            raise ValidationError(f"(p', w') vanishes at t={bad:.6g}; not an immersion")
        pw = np.column_stack([jet.p, jet.w])
        dist = np.linalg.norm(pw[:, None, :] - pw[None, :, :], axis=-1)
        dist[np.diag_indices(n)] = np.inf
        if np.any(dist <= tol):
            i, j = np.argwhere(dist <= tol)[0]
            raise ValidationError(f"phi not injective: t={t[i]:.6g} and t={t[j]:.6g} coincide")


@dataclass(frozen=True, eq=False)
class ManifoldPoint:
    """Coordinates ``(t, alpha)`` on the equilibrium manifold and their image."""

    t: float
    alpha: np.ndarray
    ambient: np.ndarray

    @property
    def coords(self) -> np.ndarray:
        return np.concatenate([[self.t], self.alpha])

    @property
    def L(self) -> int:
        return self.alpha.size + 1

    @property
    def price(self) -> np.ndarray:
        return self.ambient[: self.L - 1]

    @property
    def endowment(self) -> np.ndarray:
        """Consumer 1's full endowment vector (length ``L``)."""
        return self.ambient[self.L - 1 :]


@dataclass(frozen=True)
class Scalars:
    A: float
    A_prime: float
    B: float
    C: float
    normP2: float


def embed_array(model: EconomyModel, coords: np.ndarray) -> np.ndarray:
    """Vectorized embedding of coordinate rows ``(t, alpha...)``; no checks."""
    coords = np.asarray(coords)
    t = coords[..., 0]
    alpha = coords[..., 1:]
    p = model.price_fn(t)
    last = model.income_fn(t) - np.sum(p * alpha, axis=-1)
    return np.concatenate([p, alpha, last[..., None]], axis=-1)


def _as_alpha(model: EconomyModel, alpha) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float).reshape(-1)
    if alpha.size != model.n_prices:
        raise ValidationError(f"alpha has {alpha.size} entries, expected {model.n_prices}")
    if not np.all(np.isfinite(alpha)):
        raise ValidationError("alpha must be finite")
    return alpha


def embed(model: EconomyModel, t: float, alpha) -> ManifoldPoint:
    t = float(t)
    model.check_domain(t)
    alpha = _as_alpha(model, alpha)
    ambient = embed_array(model, np.concatenate([[t], alpha]))
    if np.any(ambient[: model.n_prices] <= 0):
        raise ValidationError(f"non-positive price at t={t:.6g}")
    return ManifoldPoint(t, alpha, ambient)


def point_from_coords(model: EconomyModel, coords) -> ManifoldPoint:
    coords = np.asarray(coords, dtype=float)
    return embed(model, coords[0], coords[1:])


def basis_fields(model: EconomyModel, point: ManifoldPoint) -> np.ndarray:
    """Coordinate tangent fields as columns of a ``(2L-1, L)`` matrix."""
    model.check_domain(point.t)
    n = model.n_prices
    jet = model.jet(point.t)
    p, dp = jet.p, jet.dp
    frame = np.zeros((2 * n + 1, n + 1))
    frame[:n, 0] = dp
    frame[-1, 0] = jet.dw - dp @ point.alpha
    frame[n : 2 * n, 1:] = np.eye(n)
    frame[-1, 1:] = -p
    return frame


def scalars(model: EconomyModel, point: ManifoldPoint) -> Scalars:
    model.check_domain(point.t)
    s = scalars_array(model, np.asarray(point.t), point.alpha)
    return Scalars(*(float(v) for v in s))


def scalars_array(model: EconomyModel, t, alpha):
    """Return ``(A, A', B, C, |p|^2)`` broadcast over ``t``/``alpha`` rows."""
    jet = model.jet(t)
    A = jet.dw - np.sum(jet.dp * alpha, axis=-1)
    A_prime = jet.ddw - np.sum(jet.ddp * alpha, axis=-1)
    B = np.sum(jet.dp**2, axis=-1)
    C = np.sum(jet.dp * jet.ddp, axis=-1)
    norm_p2 = 1.0 + np.sum(jet.p**2, axis=-1)
    return A, A_prime, B, C, norm_p2


# --------------------------------------------------------------------------
# shipped families


def _stack(cols, t):
    return np.stack([np.broadcast_to(c, np.shape(t)) for c in cols], axis=-1)


def _sech2(x):
    return 1.0 / np.cosh(x) ** 2


def constant_economy(L=2, price=1.0, c=1.0, domain=DEFAULT_DOMAIN) -> EconomyModel:
    """Constant prices and income ``w = c t``: the flat, unique-equilibrium case."""
    prices = np.broadcast_to(np.asarray(price, dtype=float), (L - 1,)).copy()
    c = float(c)

    def price_fn(t):
        return _stack([np.zeros_like(t) + q for q in prices], t)

    def income_fn(t):
        return c * t

    def d1(t):
        return _stack([np.zeros_like(t)] * (L - 1), t), np.zeros_like(t) + c

    def d2(t):
        return _stack([np.zeros_like(t)] * (L - 1), t), np.zeros_like(t)

    return EconomyModel(L, price_fn, income_fn, d1, d2, domain, "constant",
                        {"price": prices.tolist(), "c": c})


def _tanh_sin_component(i, a, b):
    # goods alternate between a tanh and a sin profile; later pairs are stretched
    scale = 1.0 / (i // 2 + 1)
    if i % 2 == 0:
        return (
            lambda t: 1.0 + a * np.tanh(scale * t),
            lambda t: a * scale * _sech2(scale * t),
            lambda t: -2.0 * a * scale**2 * _sech2(scale * t) * np.tanh(scale * t),
        )
    return (
        lambda t: 1.0 + b * np.sin(scale * t),
        lambda t: b * scale * np.cos(scale * t),
        lambda t: -b * scale**2 * np.sin(scale * t),
    )


def tanh_sin_economy(L=3, a=0.5, b=0.3, c=1.0, d=0.0, domain=DEFAULT_DOMAIN) -> EconomyModel:
    """Generic curved family ``p1 = 1 + a tanh t``, ``p2 = 1 + b sin t``, ``w = c t + d sin t``.

    Goods beyond the second repeat the pair with arguments ``t/2``, ``t/3``, ...
    """
    a, b, c, d = (float(v) for v in (a, b, c, d))
    if abs(a) >= 1 or abs(b) >= 1:
        raise ValidationError("tanh-sin needs |a| < 1 and |b| < 1 for positive prices")
    comps = [_tanh_sin_component(i, a, b) for i in range(L - 1)]

    def price_fn(t):
        return _stack([f(t) for f, _, _ in comps], t)

    def income_fn(t):
        return c * t + d * np.sin(t)

    def d1(t):
        return _stack([f(t) for _, f, _ in comps], t), c + d * np.cos(t)

    def d2(t):
        return _stack([f(t) for _, _, f in comps], t), -d * np.sin(t)

    return EconomyModel(L, price_fn, income_fn, d1, d2, domain, "tanh-sin",
                        {"a": a, "b": b, "c": c, "d": d})


def fold_economy(L=2, a=0.5, k=2.0, domain=DEFAULT_DOMAIN) -> EconomyModel:
    """``p1 = 1 + a tanh t``, ``w = t - k tanh t``; other prices fixed at 1.

    For ``k > 1`` the fiber equation has three roots for endowments near zero.
    """
    a, k = float(a), float(k)
    if abs(a) >= 1:
        raise ValidationError("fold needs |a| < 1 for positive prices")
    rest = L - 2

    def price_fn(t):
        return _stack([1.0 + a * np.tanh(t)] + [np.ones_like(t)] * rest, t)

    def income_fn(t):
        return t - k * np.tanh(t)

    def d1(t):
        s = _sech2(t)
        return _stack([a * s] + [np.zeros_like(t)] * rest, t), 1.0 - k * s

    def d2(t):
        s = _sech2(t)
        th = np.tanh(t)
        return _stack([-2.0 * a * s * th] + [np.zeros_like(t)] * rest, t), 2.0 * k * s * th

    return EconomyModel(L, price_fn, income_fn, d1, d2, domain, "fold", {"a": a, "k": k})


FAMILIES = {
    "constant": constant_economy,
    "tanh-sin": tanh_sin_economy,
    "fold": fold_economy,
}


def make_economy(family: str, L: int, params: dict | None = None,
                 domain=DEFAULT_DOMAIN, validate: bool = True) -> EconomyModel:
    try:
        factory = FAMILIES[family]
    except KeyError:
        raise ValidationError(
            f"unknown family {family!r}; valid families: {', '.join(sorted(FAMILIES))}"
        ) from None
    try:
        model = factory(L=int(L), domain=tuple(domain), **(params or {}))
    except TypeError as exc:
        raise ValidationError(f"bad parameters for {family!r}: {exc}") from None
    if validate:
        model.validate()
    return model


def economy_from_config(cfg: dict) -> EconomyModel:
    """Build an economy from ``{"family", "L", "params", "domain"}``."""
    if not isinstance(cfg, dict) or "family" not in cfg:
        raise ValidationError("economy config must be an object with a 'family' key")
    unknown = set(cfg) - {"family", "L", "params", "domain"}
    if unknown:
        raise ValidationError(f"unknown economy config keys: {sorted(unknown)}")
    domain = cfg.get("domain", DEFAULT_DOMAIN)
    if len(domain) != 2:
        raise ValidationError("domain must be [t_min, t_max]")
    return make_economy(cfg["family"], cfg.get("L", 2), cfg.get("params"), domain)


def economy_to_config(model: EconomyModel) -> dict:
    if model.family is None:
        raise ValidationError("custom economies have no config representation")
    return {"family": model.family, "L": model.L, "params": dict(model.params),
            "domain": list(model.domain)}


def load_economy(path) -> EconomyModel:
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read economy config {path}: {exc}") from None
    return economy_from_config(cfg)
