# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled integration kernels; mirrors ``_pykernels`` one to one."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, tanh, exp, atan, sqrt, fabs, pow, M_PI, isnan

cnp.import_array()

cdef enum:
    CONST = 0
    SPHERE_IDENTITY = 1
    SPHERE_LINEAR = 2
    SPHERE_PROFILE = 3
    SU3_IDENTITY = 4
    SU3_PROFILE = 5

cdef enum:
    HARMONIC = 0
    LINEAR = 1
    PRUEFER = 2
    HARMONIC_DEV = 3

cdef enum:
    OK = 0
    DIVERGED = 1
    UNDERFLOW = 2

BACKEND = "cython"

cdef double ATOL_FLOOR = 1e-8

cdef double RSQRT2 = 0.7071067811865476

cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40


cdef struct Model:
    int kind
    int system
    double lam
    double G, m0, m1, target, x0, h, kl, kr
    double bound
    const double* pr
    const double* pdr
    int n


cdef inline double sech(double x) nogil:
    cdef double e = exp(-fabs(x))
    return 2.0 * e / (1.0 + e * e)


cdef inline double one_plus_tanh(double x) nogil:
    if x <= -350:
        return 0.0
    return 2.0 / (1.0 + exp(-2.0 * x))


cdef inline double one_minus_tanh(double x) nogil:
    if x >= 350:
        return 0.0
    return 2.0 / (1.0 + exp(2.0 * x))


cdef inline void profile_eval(const Model* m, double x, double* r, double* dr) nogil:
    cdef double s = (x - m.x0) / m.h
    cdef double e, u, u2, u3, r0, r1, d0, d1
    cdef int i
    if s <= 0.0:
        r[0] = m.pr[0] * exp(m.kl * (x - m.x0))
        dr[0] = m.kl * r[0]
        return
    if s >= m.n - 1:
        e = exp(m.kr * (x - (m.x0 + (m.n - 1) * m.h)))
        r[0] = m.target + (m.pr[m.n - 1] - m.target) * e
        dr[0] = m.kr * (m.pr[m.n - 1] - m.target) * e
        return
    i = <int> s
    if i >= m.n - 1:
        i = m.n - 2
    u = s - i
    r0 = m.pr[i]
    r1 = m.pr[i + 1]
    d0 = m.pdr[i] * m.h
    d1 = m.pdr[i + 1] * m.h
    u2 = u * u
    u3 = u2 * u
    r[0] = (2 * u3 - 3 * u2 + 1) * r0 + (u3 - 2 * u2 + u) * d0 + (-2 * u3 + 3 * u2) * r1 + (u3 - u2) * d1
    dr[0] = ((6 * u2 - 6 * u) * r0 + (3 * u2 - 4 * u + 1) * d0 + (-6 * u2 + 6 * u) * r1 + (3 * u2 - 2 * u) * d1) / m.h


cdef inline void coefficients(const Model* m, double x, double* b, double* c, double* w) nogil:
    cdef double T, S, M, d, r, dr, t, phi, a, om
    if m.kind == CONST:
        b[0] = m.G
        c[0] = m.m0
        w[0] = m.m1
        return
    T = tanh(x)
    S = sech(x)
    if m.kind == SPHERE_IDENTITY or m.kind == SPHERE_LINEAR or m.kind == SPHERE_PROFILE:
        M = m.m0 + m.m1
        d = m.m0 - m.m1
        b[0] = 0.5 * (d + (2.0 - M) * T)
        if m.kind == SPHERE_IDENTITY:
            c[0] = -0.5 * (M - d * T) + (M / m.G) * S * S
        elif m.kind == SPHERE_LINEAR:
            c[0] = -m.m0 * T * T + (m.m0 - 2.0 * m.m0 / m.G) * S * S
        else:
            profile_eval(m, x, &r, &dr)
            if x < 700:
                phi = 2.0 * atan(exp(x))
            else:
                phi = M_PI
            t = phi / m.G
            a = 2.0 * (r - t)
            c[0] = -((m.G - 2.0) * cos(a) * (M - d * T) + 2.0 * cos(a + phi) * (d - M * T)) / (2.0 * m.G)
        w[0] = S * S
        return
    if m.kind == SU3_IDENTITY:
        c[0] = -0.5 - 1.5 * T * T
    else:
        profile_eval(m, x, &r, &dr)
        om = one_minus_tanh(x)
        c[0] = one_plus_tanh(x) * cos(2.0 * r) - RSQRT2 * om * sqrt(om) * cos(r)
    b[0] = -T
    w[0] = 0.25 * S * S


cdef inline double harmonic_accel(const Model* m, double x, double r, double dr) nogil:
    cdef double om, M, d, T, t, phi, b, A, B, P, Q
    if m.kind == SU3_IDENTITY or m.kind == SU3_PROFILE:
        om = one_minus_tanh(x)
        return tanh(x) * dr - 0.5 * one_plus_tanh(x) * sin(2.0 * r) + RSQRT2 * om * sqrt(om) * sin(r)
    M = m.m0 + m.m1
    d = m.m0 - m.m1
    T = tanh(x)
    if x < 700:
        phi = 2.0 * atan(exp(x))
    else:
        phi = M_PI
    t = phi / m.G
    b = 0.5 * (d + (2.0 - M) * T)
    A = (m.G - 2.0) * (M - d * T)
    B = 2.0 * (d - M * T)
    P = A * cos(2.0 * t) + B * cos(phi - 2.0 * t)
    # value at r = 0, exact where it vanishes identically
    if m.G == 2.0:
        Q = 0.0
    elif m.G == 1.0:
        Q = -2.0 * d * sin(phi) ** 3
    else:
        Q = -A * sin(2.0 * t) + B * sin(phi - 2.0 * t)
    return -b * dr + (sin(2.0 * r) * P + cos(2.0 * r) * Q) / (4.0 * m.G)


cdef inline void rhs(const Model* m, double x, const double* y, double* out) nogil:
    cdef double b, c, w, s, co
    if m.system == HARMONIC:
        out[0] = y[1]
        out[1] = harmonic_accel(m, x, y[0], y[1])
    elif m.system == HARMONIC_DEV:
        out[0] = y[1]
        out[1] = harmonic_accel(m, x, y[0] + m.target, y[1])
    elif m.system == LINEAR:
        coefficients(m, x, &b, &c, &w)
        out[0] = y[1]
        out[1] = -b * y[1] - (c + m.lam * w) * y[0]
    else:
        coefficients(m, x, &b, &c, &w)
        s = sin(y[0])
        co = cos(y[0])
        out[0] = co * co + b * s * co + (c + m.lam * w) * s * s


cdef inline bint blown(const Model* m, const double* y) nogil:
    if m.bound <= 0:
        return False
    if m.system == HARMONIC:
        return not (fabs(y[0] - m.target) <= m.bound and fabs(y[1]) <= 1e3 * m.bound)
    if m.system == HARMONIC_DEV:
        return not (fabs(y[0]) <= m.bound and fabs(y[1]) <= 1e3 * m.bound)
    return False


cdef int advance(const Model* m, int n, double* x, double* y, double x1, double* h,
                 double tol, double hmax, long* counter) nogil:
    cdef double k1[2]
    cdef double k2[2]
    cdef double k3[2]
    cdef double k4[2]
    cdef double k5[2]
    cdef double k6[2]
    cdef double k7[2]
    cdef double yt[2]
    cdef double yn[2]
    cdef double direction, hh, err, e, sc, fac, ay, ayn
    cdef int i
    direction = 1.0 if x1 >= x[0] else -1.0
    hh = direction * (fabs(h[0]) if fabs(h[0]) < hmax else hmax)
    rhs(m, x[0], y, k1)
    while direction * (x1 - x[0]) > 0:
        if direction * (x[0] + hh - x1) > 0:
            hh = x1 - x[0]
        if fabs(hh) < 1e-13 * (1.0 + fabs(x[0])):
            h[0] = hh
            return UNDERFLOW
        for i in range(n):
            yt[i] = y[i] + hh * A21 * k1[i]
        rhs(m, x[0] + C2 * hh, yt, k2)
        for i in range(n):
            yt[i] = y[i] + hh * (A31 * k1[i] + A32 * k2[i])
        rhs(m, x[0] + C3 * hh, yt, k3)
        for i in range(n):
            yt[i] = y[i] + hh * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        rhs(m, x[0] + C4 * hh, yt, k4)
        for i in range(n):
            yt[i] = y[i] + hh * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        rhs(m, x[0] + C5 * hh, yt, k5)
        for i in range(n):
            yt[i] = y[i] + hh * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
        rhs(m, x[0] + hh, yt, k6)
        for i in range(n):
            yn[i] = y[i] + hh * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
        rhs(m, x[0] + hh, yn, k7)
        # mixed scale: relative to the state size, floor ATOL_FLOOR
        sc = ATOL_FLOOR
        for i in range(n):
            ay = fabs(y[i])
            ayn = fabs(yn[i])
            if ay > sc:
                sc = ay
            if ayn > sc:
                sc = ayn
        sc = tol * sc
        err = 0.0
        for i in range(n):
            e = hh * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            e = fabs(e) / sc
            if e > err:
                err = e
        if isnan(err):
            err = 1e10
        if err <= 1.0:
            x[0] = x[0] + hh
            for i in range(n):
                y[i] = yn[i]
                k1[i] = k7[i]
            counter[0] += 1
            if blown(m, y):
                h[0] = hh
                return DIVERGED
        if err > 0:
            fac = 0.9 * pow(err, -0.2)
        else:
            fac = 5.0
        if fac > 5.0:
            fac = 5.0
        if fac < 0.2:
            fac = 0.2
        hh = hh * fac
        if fabs(hh) > hmax:
            hh = direction * hmax
    h[0] = hh
    return OK


cdef Model make_model(int kind, double[::1] params, const double[::1] prof_r, const double[::1] prof_dr,
                      int system, double lam, double bound):
    cdef Model m
    m.kind = kind
    m.system = system
    m.lam = lam
    m.G = params[0]
    m.m0 = params[1]
    m.m1 = params[2]
    m.target = params[3]
    m.x0 = params[4]
    m.h = params[5]
    m.kl = params[6]
    m.kr = params[7]
    m.bound = bound
    m.n = prof_r.shape[0]
    if m.n > 0:
        m.pr = &prof_r[0]
        m.pdr = &prof_dr[0]
    else:
        m.pr = NULL
        m.pdr = NULL
    if (kind == SPHERE_PROFILE or kind == SU3_PROFILE) and m.n < 2:
        raise ValueError("profile model needs at least two samples")
    return m


def _as_params(params):
    p = np.zeros(8)
    arr = np.asarray(params, dtype=float)
    p[:len(arr)] = arr
    return p


def _as_arr(a):
    if a is None:
        return np.zeros(0)
    return np.ascontiguousarray(a, dtype=float)


def rk_grid(int kind, params, prof_r, prof_dr, int system, double lam, grid, y0, double tol, double hmax,
            double bound=0.0):
    cdef double[::1] p = _as_params(params)
    cdef const double[::1] pr = _as_arr(prof_r)
    cdef const double[::1] pdr = _as_arr(prof_dr)
    cdef Model m = make_model(kind, p, pr, pdr, system, lam, bound)
    cdef double[::1] g = np.ascontiguousarray(grid, dtype=float)
    cdef int n = len(y0)
    cdef int ng = g.shape[0]
    Y_np = np.full((ng, n), np.nan)
    cdef double[:, ::1] Y = Y_np
    cdef double y[2]
    cdef double x, h
    cdef long counter = 0
    cdef int i, j, status = OK
    for j in range(n):
        y[j] = float(y0[j])
        Y[0, j] = y[j]
    x = g[0]
    h = hmax if hmax < 0.01 else 0.01
    with nogil:
        for i in range(1, ng):
            status = advance(&m, n, &x, y, g[i], &h, tol, hmax, &counter)
            if status != OK:
                break
            for j in range(n):
                Y[i, j] = y[j]
    return Y_np, status, counter


def rk_until(int kind, params, prof_r, prof_dr, int system, double lam, double x0, double x1, y0,
             double tol, double hmax, double bound=0.0):
    cdef double[::1] p = _as_params(params)
    cdef const double[::1] pr = _as_arr(prof_r)
    cdef const double[::1] pdr = _as_arr(prof_dr)
    cdef Model m = make_model(kind, p, pr, pdr, system, lam, bound)
    cdef int n = len(y0)
    cdef double y[2]
    cdef double x = x0
    cdef double h = hmax if hmax < 0.01 else 0.01
    cdef long counter = 0
    cdef int j, status
    for j in range(n):
        y[j] = float(y0[j])
    with nogil:
        status = advance(&m, n, &x, y, x1, &h, tol, hmax, &counter)
    return x, np.array([y[j] for j in range(n)]), status, counter


def pruefer_match(int kind, params, prof_r, prof_dr, double lam, double a, double b, double xm,
                  double alpha, double beta, double tol, double hmax):
    cdef double[::1] p = _as_params(params)
    cdef const double[::1] pr = _as_arr(prof_r)
    cdef const double[::1] pdr = _as_arr(prof_dr)
    cdef Model m = make_model(kind, p, pr, pdr, PRUEFER, lam, 0.0)
    cdef double yl[2]
    cdef double yr[2]
    cdef double xl = a, xr = b, hl = 0.01, hr = 0.01
    cdef long counter = 0
    cdef int sl, sr
    yl[0] = alpha
    yr[0] = beta
    with nogil:
        sl = advance(&m, 1, &xl, yl, xm, &hl, tol, hmax, &counter)
        sr = advance(&m, 1, &xr, yr, xm, &hr, tol, hmax, &counter)
    return yl[0], yr[0], (sl if sl != OK else sr)
