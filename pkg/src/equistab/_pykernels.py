"""Pure-Python integration kernels.

Same entry points and semantics as the compiled ``_kernels`` extension; used
when the extension is not built or ``EQUISTAB_PURE_PYTHON`` is set.

Model kinds (first argument of every entry point)::

    CONST            xi'' + b0 xi' + (c0 + lam w0) xi = 0        params[0:3] = b0, c0, w0
    SPHERE_IDENTITY  isoparametric sphere family at r = t        params[0:3] = G, m0, m1
    SPHERE_LINEAR    same family at r = (1 - G) t, m0 = m1 = m   params[0:3] = G, m, m
    SPHERE_PROFILE   same family at a sampled profile
    SU3_IDENTITY     SU(3) family at r = arctan(e^x)
    SU3_PROFILE      SU(3) family at a sampled profile

``params`` layout: ``[G, m0, m1, target, x0, h, kappa_left, kappa_right]``.
Profiles are sampled on ``x0 + i*h`` (arrays ``prof_r``, ``prof_dr``) and
evaluated by cubic Hermite interpolation; outside the sampled range they are
continued along the endpoint modes (``exp(kappa_left x)`` towards 0 on the
left, ``target + C exp(kappa_right x)`` on the right).

Systems: HARMONIC (y = r, r'), HARMONIC_DEV (y = r - target, r'; error
control relative to the deviation), LINEAR (y = xi, xi'), PRUEFER (y = theta, with
xi = rho sin(theta), xi' = rho cos(theta)).
"""

import math

import numpy as np

CONST = 0
SPHERE_IDENTITY = 1
SPHERE_LINEAR = 2
SPHERE_PROFILE = 3
SU3_IDENTITY = 4
SU3_PROFILE = 5

HARMONIC = 0
LINEAR = 1
PRUEFER = 2
HARMONIC_DEV = 3

OK = 0
DIVERGED = 1
UNDERFLOW = 2

BACKEND = "python"

ATOL_FLOOR = 1e-8

_RSQRT2 = 1.0 / math.sqrt(2.0)

# Dormand-Prince 5(4)
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)


def _sech(x):
    ax = abs(x)
    e = math.exp(-ax)
    return 2.0 * e / (1.0 + e * e)


def _one_plus_tanh(x):
    return 2.0 / (1.0 + math.exp(-2.0 * x)) if x > -350 else 0.0


def _one_minus_tanh(x):
    return 2.0 / (1.0 + math.exp(2.0 * x)) if x < 350 else 0.0


def _profile_eval(x, params, prof_r, prof_dr):
    x0, h = params[4], params[5]
    n = len(prof_r)
    s = (x - x0) / h
    if s <= 0.0:
        kl = params[6]
        r = prof_r[0] * math.exp(kl * (x - x0))
        return r, kl * r
    if s >= n - 1:
        kr = params[7]
        tgt = params[3]
        e = math.exp(kr * (x - (x0 + (n - 1) * h)))
        return tgt + (prof_r[n - 1] - tgt) * e, kr * (prof_r[n - 1] - tgt) * e
    i = int(s)
    if i >= n - 1:
        i = n - 2
    u = s - i
    r0, r1 = prof_r[i], prof_r[i + 1]
    d0, d1 = prof_dr[i] * h, prof_dr[i + 1] * h
    u2 = u * u
    u3 = u2 * u
    r = (2 * u3 - 3 * u2 + 1) * r0 + (u3 - 2 * u2 + u) * d0 + (-2 * u3 + 3 * u2) * r1 + (u3 - u2) * d1
    dr = ((6 * u2 - 6 * u) * r0 + (3 * u2 - 4 * u + 1) * d0 + (-6 * u2 + 6 * u) * r1 + (3 * u2 - 2 * u) * d1) / h
    return r, dr


def sphere_angles(x, G):
    """(t, Gt) for t = (2/G) arctan(e^x)."""
    phi = 2.0 * math.atan(math.exp(x)) if x < 700 else math.pi
    return phi / G, phi


def linear_coefficients(kind, params, prof_r, prof_dr, x):
    """(b, c, w) of xi'' + b xi' + (c + lam w) xi = 0 at ``x``."""
    if kind == CONST:
        return params[0], params[1], params[2]
    T = math.tanh(x)
    S = _sech(x)
    if kind == SPHERE_IDENTITY or kind == SPHERE_LINEAR or kind == SPHERE_PROFILE:
        G, m0, m1 = params[0], params[1], params[2]
        M = m0 + m1
        d = m0 - m1
        b = 0.5 * (d + (2.0 - M) * T)
        if kind == SPHERE_IDENTITY:
            c = -0.5 * (M - d * T) + (M / G) * S * S
        elif kind == SPHERE_LINEAR:
            c = -m0 * T * T + (m0 - 2.0 * m0 / G) * S * S
        else:
            r, _ = _profile_eval(x, params, prof_r, prof_dr)
            t, phi = sphere_angles(x, G)
            a = 2.0 * (r - t)
            c = -((G - 2.0) * math.cos(a) * (M - d * T) + 2.0 * math.cos(a + phi) * (d - M * T)) / (2.0 * G)
        return b, c, S * S
    # SU(3)
    if kind == SU3_IDENTITY:
        c = -0.5 - 1.5 * T * T
    else:
        r, _ = _profile_eval(x, params, prof_r, prof_dr)
        om = _one_minus_tanh(x)
        c = _one_plus_tanh(x) * math.cos(2.0 * r) - _RSQRT2 * om * math.sqrt(om) * math.cos(r)
    return -T, c, 0.25 * S * S


def harmonic_accel(kind, params, x, r, dr):
    """r'' of the x-chart harmonic self-map ODE."""
    if kind == SU3_IDENTITY or kind == SU3_PROFILE:
        om = _one_minus_tanh(x)
        return (math.tanh(x) * dr - 0.5 * _one_plus_tanh(x) * math.sin(2.0 * r)
                + _RSQRT2 * om * math.sqrt(om) * math.sin(r))
    G, m0, m1 = params[0], params[1], params[2]
    M = m0 + m1
    d = m0 - m1
    T = math.tanh(x)
    t, phi = sphere_angles(x, G)
    b = 0.5 * (d + (2.0 - M) * T)
    A = (G - 2.0) * (M - d * T)
    B = 2.0 * (d - M * T)
    P = A * math.cos(2.0 * t) + B * math.cos(phi - 2.0 * t)
    # value at r = 0, exact where it vanishes identically
    if G == 2.0:
        Q = 0.0
    elif G == 1.0:
        Q = -2.0 * d * math.sin(phi) ** 3
    else:
        Q = -A * math.sin(2.0 * t) + B * math.sin(phi - 2.0 * t)
    return -b * dr + (math.sin(2.0 * r) * P + math.cos(2.0 * r) * Q) / (4.0 * G)


def _make_rhs(kind, params, prof_r, prof_dr, system, lam):
    if system == HARMONIC:
        def f(x, y):
            return (y[1], harmonic_accel(kind, params, x, y[0], y[1]))
    elif system == HARMONIC_DEV:
        tgt = params[3]

        def f(x, y):
            return (y[1], harmonic_accel(kind, params, x, y[0] + tgt, y[1]))
    elif system == LINEAR:
        def f(x, y):
            b, c, w = linear_coefficients(kind, params, prof_r, prof_dr, x)
            return (y[1], -b * y[1] - (c + lam * w) * y[0])
    elif system == PRUEFER:
        def f(x, y):
            b, c, w = linear_coefficients(kind, params, prof_r, prof_dr, x)
            s = math.sin(y[0])
            co = math.cos(y[0])
            return (co * co + b * s * co + (c + lam * w) * s * s,)
    else:
        raise ValueError(f"unknown system {system}")
    return f


def _blown(system, y, params, bound):
    if bound <= 0:
        return False
    if system == HARMONIC:
        return not (abs(y[0] - params[3]) <= bound and abs(y[1]) <= 1e3 * bound)
    if system == HARMONIC_DEV:
        return not (abs(y[0]) <= bound and abs(y[1]) <= 1e3 * bound)
    return False


def _advance(f, x, y, x1, h, tol, hmax, system, params, bound, counter):
    """Integrate from x to x1; returns (x, y, h, status)."""
    n = len(y)
    direction = 1.0 if x1 >= x else -1.0
    h = direction * min(abs(h), hmax)
    k1 = f(x, y)
    while direction * (x1 - x) > 0:
        if direction * (x + h - x1) > 0:
            h = x1 - x
        if abs(h) < 1e-13 * (1.0 + abs(x)):
            return x, y, h, UNDERFLOW
        y2 = [y[i] + h * _A21 * k1[i] for i in range(n)]
        k2 = f(x + _C2 * h, y2)
        y3 = [y[i] + h * (_A31 * k1[i] + _A32 * k2[i]) for i in range(n)]
        k3 = f(x + _C3 * h, y3)
        y4 = [y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i]) for i in range(n)]
        k4 = f(x + _C4 * h, y4)
        y5 = [y[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i]) for i in range(n)]
        k5 = f(x + _C5 * h, y5)
        y6 = [y[i] + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i])
              for i in range(n)]
        k6 = f(x + h, y6)
        yn = [y[i] + h * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i])
              for i in range(n)]
        k7 = f(x + h, yn)
        # mixed scale: relative to the state size, floor ATOL_FLOOR
        sc = tol * max(ATOL_FLOOR, max(abs(v) for v in y), max(abs(v) for v in yn))
        err = 0.0
        for i in range(n):
            e = h * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i])
            e = abs(e) / sc
            if e > err:
                err = e
        if err != err:  # NaN
            err = 1e10
        if err <= 1.0:
            x = x + h
            y = yn
            k1 = k7
            counter[0] += 1
            if _blown(system, y, params, bound):
                return x, y, h, DIVERGED
        fac = 0.9 * err ** -0.2 if err > 0 else 5.0
        h = h * min(5.0, max(0.2, fac))
        if abs(h) > hmax:
            h = direction * hmax
    return x, y, h, OK


def _as_params(params):
    p = [float(v) for v in params]
    return p + [0.0] * (8 - len(p))


def rk_grid(kind, params, prof_r, prof_dr, system, lam, grid, y0, tol, hmax, bound=0.0):
    """Solution sampled at every point of the monotone ``grid`` (grid[0] is the start).

    Returns ``(Y, status, nsteps)``; rows after a divergence are NaN.
    """
    params = _as_params(params)
    f = _make_rhs(kind, params, prof_r, prof_dr, system, lam)
    grid = np.asarray(grid, dtype=float)
    Y = np.full((len(grid), len(y0)), np.nan)
    y = [float(v) for v in y0]
    Y[0] = y
    x = float(grid[0])
    h = min(hmax, 0.01)
    counter = [0]
    for i in range(1, len(grid)):
        x, y, h, status = _advance(f, x, y, float(grid[i]), h, tol, hmax, system, params, bound, counter)
        if status != OK:
            return Y, status, counter[0]
        Y[i] = y
    return Y, OK, counter[0]


def rk_until(kind, params, prof_r, prof_dr, system, lam, x0, x1, y0, tol, hmax, bound=0.0):
    """Integrate from x0 to x1, stopping early on divergence.

    Returns ``(x_reached, y, status, nsteps)``.
    """
    params = _as_params(params)
    f = _make_rhs(kind, params, prof_r, prof_dr, system, lam)
    counter = [0]
    x, y, _, status = _advance(f, float(x0), [float(v) for v in y0], float(x1), min(hmax, 0.01),
                               tol, hmax, system, params, bound, counter)
    return x, np.array(y), status, counter[0]


def pruefer_match(kind, params, prof_r, prof_dr, lam, a, b, xm, alpha, beta, tol, hmax):
    """Prüfer angles at ``xm`` from the left ray ``alpha`` at ``a`` and the right ray ``beta`` at ``b``."""
    xl, yl, sl, _ = rk_until(kind, params, prof_r, prof_dr, PRUEFER, lam, a, xm, [alpha], tol, hmax)
    xr, yr, sr, _ = rk_until(kind, params, prof_r, prof_dr, PRUEFER, lam, b, xm, [beta], tol, hmax)
    status = sl if sl != OK else sr
    return float(yl[0]), float(yr[0]), status


def rk_until_callable(f, x0, x1, y0, tol, hmax):
    """Integrate ``y' = f(x, y)`` (``f`` returns a sequence) from x0 to x1.

    Used for coefficient sets given only as Python callables.  Returns
    ``(x_reached, y, status, nsteps)``.
    """
    counter = [0]
    x, y, _, status = _advance(f, float(x0), [float(v) for v in y0], float(x1), min(hmax, 0.01),
                               tol, hmax, PRUEFER, None, 0.0, counter)
    return x, np.array(y), status, counter[0]
