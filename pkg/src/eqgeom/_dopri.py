"""Pure-Python Dormand-Prince 5(4) integrator for the geodesic equation.

This is the fallback used when the compiled ``_kernels`` module is missing
(or ``EQGEOM_PURE_PYTHON`` is set). ``_kernels.pyx`` implements the same
algorithm step for step; keep the two in sync.
"""

import math

from .errors import DomainExitError, SingularMetricError, StiffnessError

# Dormand-Prince tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                          22 / 525, -1 / 40)

SAFETY, MIN_FACTOR, MAX_FACTOR = 0.9, 0.2, 10.0
DET_FLOOR = 1e-14


def geodesic_rhs(jet, y, n):
    """Right-hand side ``(x', v')`` of the geodesic system at state ``y``.

    ``jet(t)`` returns lists ``(p, dp, ddp, dw, ddw)``; ``n = L - 1``.
    """
    t = y[0]
    p, dp, ddp, dw, ddw = jet(t)
    A, A1, B, C, n2, S = dw, ddw, 0.0, 0.0, 1.0, 0.0
    v0 = y[n + 1]
    for i in range(n):
        a = y[1 + i]
        A -= dp[i] * a
        A1 -= ddp[i] * a
        B += dp[i] * dp[i]
        C += dp[i] * ddp[i]
        n2 += p[i] * p[i]
        S += dp[i] * y[n + 2 + i]
    det = n2 * B + A * A
    if det <= DET_FLOOR:
        raise SingularMetricError(f"det g = {det:.3e} along geodesic at t={t:.6g}",
                                  t=t, alpha=y[1:n + 1])
    out = list(y[n + 1:])
    out.append(-((n2 * C + A * A1) * v0 * v0 - 2.0 * v0 * A * S) / det)
    coef = ((A * C - A1 * B) * v0 * v0 + 2.0 * v0 * B * S) / det
    out.extend(-p[i] * coef for i in range(n))
    return out


def _norm(err, y, ynew, rtol, atol):
    acc = 0.0
    for e, a, b in zip(err, y, ynew):
        sc = atol + rtol * max(abs(a), abs(b))
        acc += (e / sc) ** 2
    return math.sqrt(acc / len(err))


def _axpy(y, h, pairs):
    out = list(y)
    for c, k in pairs:
        hc = h * c
        for i, ki in enumerate(k):
            out[i] += hc * ki
    return out


def _initial_step(f, y0, f0, rtol, atol):
    sc = [atol + rtol * abs(v) for v in y0]
    d0 = math.sqrt(sum((a / s) ** 2 for a, s in zip(y0, sc)) / len(y0))
    d1 = math.sqrt(sum((a / s) ** 2 for a, s in zip(f0, sc)) / len(y0))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = f(_axpy(y0, h0, [(1.0, f0)]))
    d2 = math.sqrt(sum(((a - b) / s) ** 2 for a, b, s in zip(f1, f0, sc)) / len(y0)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1)


def integrate(jet, n, x0, v0, t_lo, t_hi, rtol=1e-10, atol=1e-10, h_min=1e-12,
              max_steps=100_000):
    """Integrate a geodesic over ``s in [0, 1]``.

    Returns lists ``(s, states)`` with one entry for ``s = 0`` and one per
    accepted step; each state is ``[x_0..x_n, v_0..v_n]``.
    """
    y = [float(v) for v in x0] + [float(v) for v in v0]
    s_out, y_out = [0.0], [list(y)]
    if all(v == 0.0 for v in y[n + 1:]):
        s_out.append(1.0)
        y_out.append(list(y))
        return s_out, y_out

    def f(state):
        return geodesic_rhs(jet, state, n)

    k1 = f(y)
    h = min(_initial_step(f, y, k1, rtol, atol), 1.0)
    s = 0.0
    steps = 0
    last_rejected = False
    while s < 1.0:
        if steps >= max_steps:
            raise StiffnessError(f"exceeded {max_steps} steps at s={s:.6g}", s)
        if h < h_min:
            raise StiffnessError(f"step size {h:.3e} below minimum at s={s:.6g}", s)
        final = h >= 1.0 - s
        if final:
            h = 1.0 - s
        k2 = f(_axpy(y, h, [(A21, k1)]))
        k3 = f(_axpy(y, h, [(A31, k1), (A32, k2)]))
        k4 = f(_axpy(y, h, [(A41, k1), (A42, k2), (A43, k3)]))
        k5 = f(_axpy(y, h, [(A51, k1), (A52, k2), (A53, k3), (A54, k4)]))
        k6 = f(_axpy(y, h, [(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]))
        ynew = _axpy(y, h, [(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)])
        k7 = f(ynew)
        err = [h * (E1 * a + E3 * c + E4 * d + E5 * e + E6 * g + E7 * q)
               for a, c, d, e, g, q in zip(k1, k3, k4, k5, k6, k7)]
        en = _norm(err, y, ynew, rtol, atol)
        steps += 1
        if en <= 1.0:
            s = 1.0 if final else s + h
            y, k1 = ynew, k7
            s_out.append(s)
            y_out.append(list(y))
            if not t_lo <= y[0] <= t_hi:
                raise DomainExitError(
                    f"geodesic left domain [{t_lo:g}, {t_hi:g}] at s={s:.6g}, t={y[0]:.6g}",
                    s, y[:n + 1])
            factor = MAX_FACTOR if en == 0.0 else min(MAX_FACTOR, SAFETY * en ** -0.2)
            if last_rejected:
                factor = min(factor, 1.0)
            h *= factor
            last_rejected = False
        else:
            h *= max(MIN_FACTOR, SAFETY * en ** -0.2)
            last_rejected = True
    return s_out, y_out
