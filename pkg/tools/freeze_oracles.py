"""Regenerate the frozen reference values in ``tests/frozen.py``.

Everything is recomputed from the economy definitions alone at 40 digits
with mpmath (numerical differentiation of the embedding, metric and
Christoffel symbols), and the geodesic endpoint with a fixed-step RK4.
Run from the repository root: ``python3 tools/freeze_oracles.py``.
"""

import mpmath as mp
import numpy as np

mp.mp.dps = 40


def tanh_sin_L3(t):
    return [1 + mp.mpf("0.5") * mp.tanh(t), 1 + mp.mpf("0.3") * mp.sin(t)], t


def fold_L2(t):
    return [1 + mp.mpf("0.5") * mp.tanh(t)], t - 2 * mp.tanh(t)


def embedding(family):
    def phi(x):
        t, alpha = x[0], x[1:]
        p, w = family(t)
        return list(p) + list(alpha) + [w - sum(pi * ai for pi, ai in zip(p, alpha))]
    return phi


def partial(f, x, m):
    def along(h):
        y = list(x)
        y[m] = y[m] + h
        return f(y)
    n = len(f(x)) if isinstance(f(x), list) else None
    if n is None:
        return mp.diff(lambda h: along(h), 0)
    return [mp.diff(lambda h, k=k: along(h)[k], 0) for k in range(n)]


def metric(phi, x):
    L = len(x)
    J = [partial(phi, x, m) for m in range(L)]
    return mp.matrix([[mp.fsum(a * b for a, b in zip(J[i], J[j])) for j in range(L)]
                      for i in range(L)])


def christoffel(phi, x):
    L = len(x)
    g = metric(phi, x)
    gi = g ** -1
    dg = [[[mp.diff(lambda h: metric(phi, [x[k] + (h if k == m else 0) for k in range(L)])[i, j], 0)
            for j in range(L)] for i in range(L)] for m in range(L)]
    gam = [[[mp.fsum(gi[k, h] * (dg[i][j][h] + dg[j][i][h] - dg[h][i][j]) for h in range(L)) / 2
             for k in range(L)] for j in range(L)] for i in range(L)]
    return gam


def fmt(v):
    return mp.nstr(v, 17, min_fixed=-3, max_fixed=3)


def main():
    mp.mp.dps = 40
    x = [mp.mpf("0.7"), mp.mpf("0.2"), mp.mpf("-0.4")]
    phi = embedding(tanh_sin_L3)
    print("EMBED_TANH_SIN =", [fmt(v) for v in phi(x)])

    # orthogonal projection of (p, omega') - Phi(x) onto the tangent space
    J = mp.matrix([partial(phi, x, m) for m in range(3)]).T
    p, _ = tanh_sin_L3(x[0])
    z = list(p) + [mp.mpf("0.25"), mp.mpf("-0.35"), mp.mpf("0.9")]
    d = mp.matrix([zi - yi for zi, yi in zip(z, phi(x))])
    coeffs = mp.lu_solve(J.T * J, J.T * d)
    print("PROJECT_TANH_SIN =", [fmt(v) for v in coeffs])

    # <R(X0, X1) X0, X1> for the fold economy, via nested differentiation
    mp.mp.dps = 30
    y = [mp.mpf("0.4"), mp.mpf("0.3")]
    phif = embedding(fold_L2)
    gam = christoffel(phif, y)
    dgam = [[[[mp.diff(lambda h: christoffel(phif, [y[0] + (h if m == 0 else 0),
                                                    y[1] + (h if m == 1 else 0)])[i][j][k], 0)
               for k in range(2)] for j in range(2)] for i in range(2)] for m in range(2)]
    # R^s_{010} = sum_l G^l_00 G^s_1l - G^l_10 G^s_0l + d_1 G^s_00 - d_0 G^s_10
    R = [mp.fsum(gam[0][0][l] * gam[1][l][s] - gam[1][0][l] * gam[0][l][s] for l in range(2))
         + dgam[1][0][0][s] - dgam[0][1][0][s] for s in range(2)]
    g = metric(phif, y)
    print("INNER_R_FOLD =", fmt(R[0] * g[0, 1] + R[1] * g[1, 1]))
    print("CHRISTOFFEL_FOLD =", [[[fmt(gam[i][j][k]) for k in range(2)] for j in range(2)]
                                 for i in range(2)])

    print("GEODESIC_TANH_SIN_END =", [repr(float(v)) for v in rk4_endpoint()])


def rk4_endpoint(h=1e-5):
    """Fixed-step RK4 from (0, 0, 0) with velocity (0.3, 0.1, -0.2), tanh-sin L=3."""
    from eqgeom.economy import make_economy
    from eqgeom.geometry import christoffel_batch

    model = make_economy("tanh-sin", 3)

    def f(y):
        gam = christoffel_batch(model, y[None, :3])[0]
        v = y[3:]
        return np.concatenate([v, -np.einsum("ijk,i,j->k", gam, v, v)])

    y = np.array([0.0, 0.0, 0.0, 0.3, 0.1, -0.2])
    n = int(round(1 / h))
    for _ in range(n):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y[:3]


if __name__ == "__main__":
    main()
