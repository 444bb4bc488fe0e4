# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Dormand-Prince 5(4) geodesic integrator.

Mirrors ``_dopri.integrate``. The shipped economy families have native jets
so the inner loop never re-enters Python; other economies go through
``PyJet``, which calls ``model.jet`` once per stage.
"""

from libc.math cimport sqrt, fabs, pow, tanh, cosh, sin, cos
from libc.stdlib cimport malloc, free

from .errors import DomainExitError, SingularMetricError, StiffnessError

cdef double C_A21 = 1.0 / 5
cdef double C_A31 = 3.0 / 40, C_A32 = 9.0 / 40
cdef double C_A41 = 44.0 / 45, C_A42 = -56.0 / 15, C_A43 = 32.0 / 9
cdef double C_A51 = 19372.0 / 6561, C_A52 = -25360.0 / 2187, C_A53 = 64448.0 / 6561, C_A54 = -212.0 / 729
cdef double C_A61 = 9017.0 / 3168, C_A62 = -355.0 / 33, C_A63 = 46732.0 / 5247, C_A64 = 49.0 / 176, C_A65 = -5103.0 / 18656
cdef double C_B1 = 35.0 / 384, C_B3 = 500.0 / 1113, C_B4 = 125.0 / 192, C_B5 = -2187.0 / 6784, C_B6 = 11.0 / 84
cdef double C_E1 = 71.0 / 57600, C_E3 = -71.0 / 16695, C_E4 = 71.0 / 1920, C_E5 = -17253.0 / 339200
cdef double C_E6 = 22.0 / 525, C_E7 = -1.0 / 40
cdef double SAFETY = 0.9, MIN_FACTOR = 0.2, MAX_FACTOR = 10.0
cdef double DET_FLOOR = 1e-14


cdef class Jet:
    """Fills p, p', p'' (length n) and w', w'' at a scalar t."""
    cdef public int n

    cdef int fill(self, double t, double* p, double* dp, double* ddp, double* dw, double* ddw) except -1:
        raise NotImplementedError


cdef class ConstantJet(Jet):
    cdef double c
    cdef list prices

    def __init__(self, int n, prices, double c):
        self.n = n
        self.prices = [float(q) for q in prices]
        self.c = c

    cdef int fill(self, double t, double* p, double* dp, double* ddp, double* dw, double* ddw) except -1:
        cdef int i
        for i in range(self.n):
            p[i] = self.prices[i]
            dp[i] = 0.0
            ddp[i] = 0.0
        dw[0] = self.c
        ddw[0] = 0.0
        return 0


cdef class TanhSinJet(Jet):
    cdef double a, b, c, d

    def __init__(self, int n, double a, double b, double c, double d):
        self.n = n
        self.a, self.b, self.c, self.d = a, b, c, d

    cdef int fill(self, double t, double* p, double* dp, double* ddp, double* dw, double* ddw) except -1:
        cdef int i
        cdef double scale, x, th, s2, ch
        for i in range(self.n):
            scale = 1.0 / (i // 2 + 1)
            x = scale * t
            if i % 2 == 0:
                th = tanh(x)
                ch = cosh(x)
                s2 = 1.0 / (ch * ch)
                p[i] = 1.0 + self.a * th
                dp[i] = self.a * scale * s2
                ddp[i] = -2.0 * self.a * scale * scale * s2 * th
            else:
                p[i] = 1.0 + self.b * sin(x)
                dp[i] = self.b * scale * cos(x)
                ddp[i] = -self.b * scale * scale * sin(x)
        dw[0] = self.c + self.d * cos(t)
        ddw[0] = -self.d * sin(t)
        return 0


cdef class FoldJet(Jet):
    cdef double a, k

    def __init__(self, int n, double a, double k):
        self.n = n
        self.a, self.k = a, k

    cdef int fill(self, double t, double* p, double* dp, double* ddp, double* dw, double* ddw) except -1:
        cdef int i
        cdef double th = tanh(t)
        cdef double ch = cosh(t)
        cdef double s2 = 1.0 / (ch * ch)
        p[0] = 1.0 + self.a * th
        dp[0] = self.a * s2
        ddp[0] = -2.0 * self.a * s2 * th
        for i in range(1, self.n):
            p[i] = 1.0
            dp[i] = 0.0
            ddp[i] = 0.0
        dw[0] = 1.0 - self.k * s2
        ddw[0] = 2.0 * self.k * s2 * th
        return 0


cdef class PyJet(Jet):
    """Adapter for arbitrary Python economies."""
    cdef object model

    def __init__(self, model):
        self.n = model.L - 1
        self.model = model

    cdef int fill(self, double t, double* p, double* dp, double* ddp, double* dw, double* ddw) except -1:
        cdef int i
        jet = self.model.jet(t)
        pl, dpl, ddpl = jet.p.tolist(), jet.dp.tolist(), jet.ddp.tolist()
        for i in range(self.n):
            p[i] = pl[i]
            dp[i] = dpl[i]
            ddp[i] = ddpl[i]
        dw[0] = float(jet.dw)
        ddw[0] = float(jet.ddw)
        return 0


def native_jet(model):
    """Best available compiled jet for ``model``."""
    n = model.L - 1
    prm = model.params
    if model.family == "constant":
        return ConstantJet(n, prm["price"], prm["c"])
    if model.family == "tanh-sin":
        return TanhSinJet(n, prm["a"], prm["b"], prm["c"], prm["d"])
    if model.family == "fold":
        return FoldJet(n, prm["a"], prm["k"])
    return PyJet(model)


def jet_values(Jet jet, double t):
    """Python view of one jet evaluation, for testing."""
    cdef int n = jet.n
    cdef double[::1] buf
    import numpy as np
    arr = np.zeros(3 * n + 2)
    buf = arr
    jet.fill(t, &buf[0], &buf[n], &buf[2 * n], &buf[3 * n], &buf[3 * n + 1])
    return arr[:n], arr[n:2 * n], arr[2 * n:3 * n], arr[3 * n], arr[3 * n + 1]


cdef struct Work:
    double* p
    double* dp
    double* ddp


cdef int rhs(Jet jet, int n, double* y, double* out, Work* w) except -1:
    cdef int i
    cdef double dw, ddw, A, A1, B = 0.0, C = 0.0, n2 = 1.0, S = 0.0, a, det, v0, coef
    jet.fill(y[0], w.p, w.dp, w.ddp, &dw, &ddw)
    A = dw
    A1 = ddw
    v0 = y[n + 1]
    for i in range(n):
        a = y[1 + i]
        A -= w.dp[i] * a
        A1 -= w.ddp[i] * a
        B += w.dp[i] * w.dp[i]
        C += w.dp[i] * w.ddp[i]
        n2 += w.p[i] * w.p[i]
        S += w.dp[i] * y[n + 2 + i]
    det = n2 * B + A * A
    if det <= DET_FLOOR:
        raise SingularMetricError(f"det g = {det:.3e} along geodesic at t={y[0]:.6g}",
                                  t=y[0], alpha=[y[1 + i] for i in range(n)])
    for i in range(n + 1):
        out[i] = y[n + 1 + i]
    out[n + 1] = -((n2 * C + A * A1) * v0 * v0 - 2.0 * v0 * A * S) / det
    coef = ((A * C - A1 * B) * v0 * v0 + 2.0 * v0 * B * S) / det
    for i in range(n):
        out[n + 2 + i] = -w.p[i] * coef
    return 0


def integrate(Jet jet, x0, v0, double t_lo, double t_hi, double rtol=1e-10,
              double atol=1e-10, double h_min=1e-12, long max_steps=100000):
    """Integrate a geodesic over ``s in [0, 1]``; see ``_dopri.integrate``."""
    cdef int n = jet.n
    cdef int m = 2 * (n + 1)
    cdef int i
    cdef double s = 0.0, h, en, sc, factor, d0, d1, d2, h0, h1, e
    cdef long steps = 0
    cdef bint final, last_rejected = False, moving = False
    cdef double* mem = <double*>malloc(sizeof(double) * (11 * m + 3 * n))
    if mem == NULL:
        raise MemoryError()
    cdef double* y = mem
    cdef double* ynew = mem + m
    cdef double* tmp = mem + 2 * m
    cdef double* k1 = mem + 3 * m
    cdef double* k2 = mem + 4 * m
    cdef double* k3 = mem + 5 * m
    cdef double* k4 = mem + 6 * m
    cdef double* k5 = mem + 7 * m
    cdef double* k6 = mem + 8 * m
    cdef double* k7 = mem + 9 * m
    cdef Work w
    w.p = mem + 11 * m
    w.dp = w.p + n
    w.ddp = w.dp + n
    s_out = [0.0]
    y_out = []
    try:
        for i in range(n + 1):
            y[i] = float(x0[i])
            y[n + 1 + i] = float(v0[i])
            if y[n + 1 + i] != 0.0:
                moving = True
        y_out.append([y[i] for i in range(m)])
        if not moving:
            s_out.append(1.0)
            y_out.append([y[i] for i in range(m)])
            return s_out, y_out

        rhs(jet, n, y, k1, &w)
        # Hairer's starting step heuristic
        d0 = 0.0
        d1 = 0.0
        for i in range(m):
            sc = atol + rtol * fabs(y[i])
            d0 += (y[i] / sc) ** 2
            d1 += (k1[i] / sc) ** 2
        d0 = sqrt(d0 / m)
        d1 = sqrt(d1 / m)
        h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
        for i in range(m):
            tmp[i] = y[i] + h0 * k1[i]
        rhs(jet, n, tmp, k2, &w)
        d2 = 0.0
        for i in range(m):
            sc = atol + rtol * fabs(y[i])
            d2 += ((k2[i] - k1[i]) / sc) ** 2
        d2 = sqrt(d2 / m) / h0
        if max(d1, d2) <= 1e-15:
            h1 = max(1e-6, h0 * 1e-3)
        else:
            h1 = pow(0.01 / max(d1, d2), 0.2)
        h = min(100 * h0, h1)
        h = min(h, 1.0)

        while s < 1.0:
            if steps >= max_steps:
                raise StiffnessError(f"exceeded {max_steps} steps at s={s:.6g}", s)
            if h < h_min:
                raise StiffnessError(f"step size {h:.3e} below minimum at s={s:.6g}", s)
            final = h >= 1.0 - s
            if final:
                h = 1.0 - s
            for i in range(m):
                tmp[i] = y[i] + h * C_A21 * k1[i]
            rhs(jet, n, tmp, k2, &w)
            for i in range(m):
                tmp[i] = y[i] + h * C_A31 * k1[i] + h * C_A32 * k2[i]
            rhs(jet, n, tmp, k3, &w)
            for i in range(m):
                tmp[i] = y[i] + h * C_A41 * k1[i] + h * C_A42 * k2[i] + h * C_A43 * k3[i]
            rhs(jet, n, tmp, k4, &w)
            for i in range(m):
                tmp[i] = (y[i] + h * C_A51 * k1[i] + h * C_A52 * k2[i] + h * C_A53 * k3[i]
                          + h * C_A54 * k4[i])
            rhs(jet, n, tmp, k5, &w)
            for i in range(m):
                tmp[i] = (y[i] + h * C_A61 * k1[i] + h * C_A62 * k2[i] + h * C_A63 * k3[i]
                          + h * C_A64 * k4[i] + h * C_A65 * k5[i])
            rhs(jet, n, tmp, k6, &w)
            for i in range(m):
                ynew[i] = (y[i] + h * C_B1 * k1[i] + h * C_B3 * k3[i] + h * C_B4 * k4[i]
                           + h * C_B5 * k5[i] + h * C_B6 * k6[i])
            rhs(jet, n, ynew, k7, &w)
            en = 0.0
            for i in range(m):
                e = h * (C_E1 * k1[i] + C_E3 * k3[i] + C_E4 * k4[i] + C_E5 * k5[i]
                         + C_E6 * k6[i] + C_E7 * k7[i])
                sc = atol + rtol * max(fabs(y[i]), fabs(ynew[i]))
                en += (e / sc) * (e / sc)
            en = sqrt(en / m)
            steps += 1
            if en <= 1.0:
                s = 1.0 if final else s + h
                for i in range(m):
                    y[i] = ynew[i]
                    k1[i] = k7[i]
                s_out.append(s)
                y_out.append([y[i] for i in range(m)])
                if not (t_lo <= y[0] <= t_hi):
                    raise DomainExitError(
                        f"geodesic left domain [{t_lo:g}, {t_hi:g}] at s={s:.6g}, t={y[0]:.6g}",
                        s, [y[i] for i in range(n + 1)])
                if en == 0.0:
                    factor = MAX_FACTOR
                else:
                    factor = min(MAX_FACTOR, SAFETY * pow(en, -0.2))
                if last_rejected:
                    factor = min(factor, 1.0)
                h *= factor
                last_rejected = False
            else:
                h *= max(MIN_FACTOR, SAFETY * pow(en, -0.2))
                last_rejected = True
        return s_out, y_out
    finally:
        free(mem)
