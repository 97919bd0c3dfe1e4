import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from equistab.problems import (
    DomainError,
    Family,
    PreconditionError,
    SingularityError,
    SolutionKind,
    TangentialTensionUnknown,
    admissible,
    chart,
    harmonic_rhs_t,
    harmonic_rhs_x,
    jacobi_coefficients,
    linear_solution,
    make_problem,
    solution_k,
    su3_metric_endomorphism,
)
from equistab.shooting import closed_form_profile

SPHERE_TRIPLES = [(1, 3, 3), (2, 1, 1), (2, 3, 5), (2, 7, 2), (3, 1, 1), (3, 8, 8), (4, 1, 6), (4, 5, 1),
                  (4, 2, 2), (6, 1, 1), (6, 2, 2)]
SU3 = make_problem("su3", k_or_ell=0)


def all_specs():
    out = [make_problem(f, g, a, b, 1) for f in ("sphere", "so") for g, a, b in SPHERE_TRIPLES]
    return out + [SU3]


# ------------------------------------------------------------- make_problem


def test_valid_triple():
    s = make_problem("sphere", 3, 8, 8, 1)
    assert (s.family, s.g, s.m0, s.m1, s.k) == (Family.SPHERE, 3, 8, 8, 1)


@pytest.mark.parametrize("triple", [(4, 6, 9), (4, 9, 6), (4, 2, 3), (4, 2, 7), (4, 4, 5), (4, 4, 7), (4, 4, 11)])
def test_exceptional_triples(triple):
    with pytest.raises(TangentialTensionUnknown) as exc:
        make_problem("sphere", *triple, 1)
    assert exc.value.code == "tangential-part-unknown"


@pytest.mark.parametrize("triple", [(5, 1, 1), (3, 3, 3), (1, 2, 3), (6, 1, 2), (4, 3, 3), (0, 1, 1)])
def test_inadmissible(triple):
    with pytest.raises(DomainError) as exc:
        make_problem("sphere", *triple, 1)
    assert not isinstance(exc.value, TangentialTensionUnknown)
    assert exc.value.code == "domain"


def test_admissible_either_order():
    assert admissible(4, 1, 5) and admissible(4, 5, 1)
    make_problem("so", 4, 5, 1, 1)


def test_non_integer_datum():
    with pytest.raises(DomainError):
        make_problem("sphere", 2, 1, 1, 0.5)


def test_su3_target():
    assert make_problem("su3", k_or_ell=0).target == pytest.approx(math.pi / 2)
    assert make_problem("su3", k_or_ell=1).target == pytest.approx(3 * math.pi / 2)


# ------------------------------------------------------------- harmonic ODE


@pytest.mark.parametrize("m0,m1", [(1, 1), (3, 5), (7, 2)])
def test_identity_is_solution_t(m0, m1):
    s = make_problem("sphere", 2, m0, m1, 1)
    t = np.linspace(0.01, math.pi / 2 - 0.01, 50)
    assert np.max(np.abs(harmonic_rhs_t(s, t, t, np.ones_like(t)))) < 1e-12


def test_linear_one_minus_g_t():
    s = make_problem("sphere", 3, 2, 2, -2)
    assert abs(harmonic_rhs_t(s, 0.4, -0.8, -2.0)) < 1e-12


def test_su3_identity_t():
    # the identity r(t) = t, i.e. r = arctan(e^x) in the x-chart
    assert abs(harmonic_rhs_t(SU3, 1.0, 1.0, 1.0)) < 1e-10


@pytest.mark.parametrize("t", [0.0, -0.1, math.pi / 2, 2.0])
def test_t_endpoint_singular(t):
    s = make_problem("sphere", 2, 1, 1, 1)
    with pytest.raises(SingularityError):
        harmonic_rhs_t(s, t, 0.1, 1.0)


def test_equator_fixed_point_x():
    s = make_problem("sphere", 1, 3, 3, 1)
    for x in (-3.0, 0.0, 2.5):
        assert abs(harmonic_rhs_x(s, x, math.pi / 2, 0.0)) < 1e-15
        assert abs(harmonic_rhs_x(s, x, 0.0, 0.0)) < 1e-15


def test_su3_identity_x():
    x = 0.3
    r, rp = math.atan(math.exp(x)), 0.5 / math.cosh(x)
    assert harmonic_rhs_x(SU3, x, r, rp) == pytest.approx(-math.tanh(x) * rp, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(m=st.integers(1, 8), x=st.floats(-6, 6), r=st.floats(-4, 4), rp=st.floats(-3, 3))
def test_g1_displayed_x_form(m, x, r, rp):
    s = make_problem("sphere", 1, m, m, 1)
    expected = (m - 1) * math.tanh(x) * rp + 0.5 * m * math.sin(2 * r)
    assert harmonic_rhs_x(s, x, r, rp) == pytest.approx(expected, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(x=st.floats(-6, 6), r=st.floats(-4, 4), rp=st.floats(-3, 3))
def test_su3_x_form_is_euler_lagrange(x, r, rp):
    # Euler-Lagrange of int (r'^2 + (1+T) cos^2 r - sqrt2 cos r (1-T)^{3/2}) dx / cosh x
    T = math.tanh(x)
    expected = T * rp - 0.5 * (1 + T) * math.sin(2 * r) + (1 - T) ** 1.5 * math.sin(r) / math.sqrt(2)
    assert harmonic_rhs_x(SU3, x, r, rp) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("spec", all_specs(), ids=lambda s: s.label())
def test_chain_rule_between_charts(spec):
    ch = chart(spec)
    rng = np.random.default_rng(3)
    for _ in range(40):
        x = rng.uniform(-5, 5)
        r = rng.uniform(-3, 3)
        rp = rng.uniform(-2, 2)
        t1 = ch.dt_dx(x)
        t2 = -math.tanh(x) * t1
        rdot = rp / t1
        rdd = harmonic_rhs_t(spec, ch.t_of_x(x), r, rdot)
        assert harmonic_rhs_x(spec, x, r, rp) == pytest.approx(rdd * t1 * t1 + rdot * t2, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("spec", all_specs(), ids=lambda s: s.label())
def test_closed_form_residual(spec):
    kinds = [SolutionKind.IDENTITY]
    if spec.m0 == spec.m1 and spec.family is Family.SPHERE:
        kinds.append(SolutionKind.LINEAR_ONE_MINUS_G)
    if spec.m0 == spec.m1 and spec.family is Family.SO:
        kinds.append(SolutionKind.LINEAR_ONE_MINUS_TWO_G)
    for kind in kinds:
        s = spec.with_k(solution_k(spec, kind))
        sol = linear_solution(s, kind)
        # the t-chart right-hand side divides by sin^2(Gt); check the cleared numerator
        t = np.linspace(0, s.L, 1002)[1:-1]
        res = harmonic_rhs_t(s, t, sol.r_t(t), sol.rdot_t(t))
        assert np.max(np.abs(res * np.sin(s.G * t) ** 2)) < 1e-12
        x = np.linspace(-15, 15, 1000)
        rp = sol.rprime_x(x)
        # r' is proportional to sech, so r'' = -tanh r'
        assert np.max(np.abs(harmonic_rhs_x(s, x, sol.r_x(x), rp) + np.tanh(x) * rp)) < 1e-12


# ------------------------------------------------------------- charts


def test_chart_symmetry_point():
    ch = chart(make_problem("sphere", 2, 1, 1, 1))
    assert ch.t_of_x(0.0) == pytest.approx(math.pi / 4, abs=1e-15)
    assert ch.L == pytest.approx(math.pi / 2)


def test_eigen_scales():
    assert chart(make_problem("sphere", 1, 2, 2, 1)).eigen_scale == 1
    assert chart(make_problem("sphere", 3, 2, 2, 1)).eigen_scale == 9
    assert chart(make_problem("so", 2, 1, 1, 1)).eigen_scale == 16
    assert chart(SU3).eigen_scale == 1


@pytest.mark.parametrize("spec", all_specs(), ids=lambda s: s.label())
def test_eigen_scale_is_weight_over_chart_speed(spec):
    co = jacobi_coefficients(spec.with_k(solution_k(spec, "identity")), "identity")
    ch = co.chart
    for x in (-2.0, 0.0, 1.5):
        assert co.w(x) / ch.dt_dx(x) ** 2 == pytest.approx(ch.eigen_scale, rel=1e-12)


def test_chart_lengths():
    assert chart(make_problem("sphere", 3, 1, 1, 1)).L == pytest.approx(math.pi / 3)
    assert chart(make_problem("so", 3, 1, 1, 1)).L == pytest.approx(math.pi / 6)
    assert chart(SU3).L == pytest.approx(math.pi / 2)


@settings(max_examples=200, deadline=None)
@given(x=st.floats(-20, 12), g=st.sampled_from([1, 2, 3, 4, 6]), fam=st.sampled_from(["sphere", "so"]))
def test_chart_round_trip(x, g, fam):
    ch = chart(make_problem(fam, g, 1, 1, 1))
    t = ch.t_of_x(x)
    assert 0 < t < ch.L
    assert abs(ch.x_of_t(t) - x) < 1e-10


@pytest.mark.xfail(strict=True, reason="t near L carries an absolute rounding error of ulp(L), "
                                       "which x_of_t amplifies by G*cosh(x); about 5e-8 at x = 20")
@pytest.mark.parametrize("x", [15.0, 20.0])
def test_chart_round_trip_far_right(x):
    ch = chart(make_problem("sphere", 1, 1, 1, 1))
    assert abs(ch.x_of_t(ch.t_of_x(x)) - x) < 1e-10


def test_chart_monotone_with_limits():
    ch = chart(make_problem("sphere", 4, 2, 1, 1))
    x = np.linspace(-30, 15, 2001)
    t = ch.t_of_x(x)
    assert np.all(np.diff(t) > 0)
    assert np.all(np.diff(ch.t_of_x(np.linspace(-40, 40, 2001))) >= 0)
    assert ch.t_of_x(-40.0) < 1e-15 and ch.L - ch.t_of_x(40.0) < 1e-15


def test_x_of_t_outside():
    ch = chart(SU3)
    with pytest.raises(SingularityError):
        ch.x_of_t(0.0)


# ------------------------------------------------------------- linear solutions


def test_identity_solution():
    sol = linear_solution(make_problem("sphere", 2, 3, 5, 1), "identity")
    assert sol.slope == 1.0


def test_so_linear_solution():
    sol = linear_solution(make_problem("so", 3, 2, 2, 1 - 6), SolutionKind.LINEAR_ONE_MINUS_TWO_G)
    assert sol.slope == -5.0
    assert sol.r_t(0.1) == pytest.approx(-0.5)


def test_linear_requires_equal_multiplicities():
    with pytest.raises(DomainError):
        linear_solution(make_problem("sphere", 2, 3, 5, -1), SolutionKind.LINEAR_ONE_MINUS_G)


def test_kind_family_mismatch():
    with pytest.raises(DomainError):
        linear_solution(make_problem("sphere", 2, 3, 3, -3), SolutionKind.LINEAR_ONE_MINUS_TWO_G)
    with pytest.raises(DomainError):
        linear_solution(make_problem("sphere", 2, 3, 3, 1), SolutionKind.SU3_IDENTITY)


def test_wrong_k_rejected():
    with pytest.raises(DomainError):
        linear_solution(make_problem("sphere", 2, 3, 3, 1), SolutionKind.LINEAR_ONE_MINUS_G)


# ------------------------------------------------------------- Jacobi coefficients


def test_identity_weight_at_zero():
    co = jacobi_coefficients(make_problem("sphere", 3, 4, 4, 1), "identity")
    assert co.w(0.0) == pytest.approx(1.0)


def test_su3_identity_c_at_zero():
    co = jacobi_coefficients(SU3, "identity")
    assert co.c(0.0) == pytest.approx(-0.5, abs=1e-15)


def _displayed_identity(spec, x):
    """b, c, w of the x-chart identity displays (sphere and SO)."""
    m0, m1, g = spec.m0, spec.m1, spec.g
    T = math.tanh(x)
    shift = (m0 + m1) / g if spec.family is Family.SPHERE else (m0 + m1) / (2 * g)
    b = 0.5 * (m0 - m1 + (2 - (m0 + m1)) * T)
    c = -0.5 * (m0 + m1 - (m0 - m1) * T) + shift / math.cosh(x) ** 2
    return b, c, 1 / math.cosh(x) ** 2


def _displayed_linear(spec, x):
    m, g = spec.m0, spec.g
    T = math.tanh(x)
    shift = m - 2 * m / g if spec.family is Family.SPHERE else m - m / g
    return -(m - 1) * T, -m * T * T + shift / math.cosh(x) ** 2, 1 / math.cosh(x) ** 2


@pytest.mark.parametrize("spec", [s for s in all_specs() if s.family is not Family.SU3], ids=lambda s: s.label())
def test_closed_form_coefficients_match_displays(spec):
    co = jacobi_coefficients(spec.with_k(1), "identity")
    for x in np.linspace(-6, 6, 25):
        b, c, w = _displayed_identity(spec, x)
        assert (co.b(x), co.c(x), co.w(x)) == pytest.approx((b, c, w), abs=1e-13)
    if spec.m0 == spec.m1:
        kind = "linear-1-g" if spec.family is Family.SPHERE else "linear-1-2g"
        s = spec.with_k(solution_k(spec, kind))
        co = jacobi_coefficients(s, kind)
        for x in np.linspace(-6, 6, 25):
            assert (co.b(x), co.c(x), co.w(x)) == pytest.approx(_displayed_linear(s, x), abs=1e-13)


def _t_display_c(spec, x, r_t):
    """Zeroth-order coefficient of the general t-chart sphere Jacobi display, moved to x (times t'^2)."""
    G, m0, m1 = spec.G, spec.m0, spec.m1
    ch = chart(spec)
    t = ch.t_of_x(x)
    a = 2 * (r_t - t)
    gt = G * t
    C = -G / (2 * math.sin(gt) ** 2) * ((G - 2) * math.cos(a) * (m0 + m1 + (m0 - m1) * math.cos(gt))
                                          + 2 * math.cos(a + gt) * (m0 - m1 + (m0 + m1) * math.cos(gt)))
    return C * ch.dt_dx(x) ** 2


def _fake_profile(spec, r_of_x, dr_of_x):
    x = np.linspace(-12, 12, 2401)
    return SimpleNamespace(x=x, r=r_of_x(x), rprime=dr_of_x(x), residual_norm=0.0)


@pytest.mark.parametrize("fam,g,m0,m1", [("sphere", 2, 3, 5), ("sphere", 3, 2, 2), ("so", 2, 1, 4),
                                         ("sphere", 1, 4, 4)])
def test_profile_coefficients_match_general_display(fam, g, m0, m1):
    spec = make_problem(fam, g, m0, m1, 1)
    # any smooth profile with the right limits; the coefficient formula is pointwise in r
    def r(x):
        return spec.target / (1 + np.exp(-1.3 * x)) + 0.2 * np.exp(-x * x)

    def dr(x):
        e = np.exp(-1.3 * x)
        return spec.target * 1.3 * e / (1 + e) ** 2 - 0.4 * x * np.exp(-x * x)

    co = jacobi_coefficients(spec, _fake_profile(spec, r, dr))
    for x in np.linspace(-5, 5, 23):
        assert co.c(x) == pytest.approx(_t_display_c(spec, x, float(r(x))), rel=1e-7, abs=1e-8)


def test_su3_profile_coefficients_match_display():
    def r(x):
        return np.arctan(np.exp(x)) + 0.1 * np.exp(-x * x)

    def dr(x):
        return 0.5 / np.cosh(x) - 0.2 * x * np.exp(-x * x)

    co = jacobi_coefficients(SU3, _fake_profile(SU3, r, dr))
    for x in np.linspace(-5, 5, 23):
        T = math.tanh(x)
        rr = float(r(x))
        expected = (1 + T) * math.cos(2 * rr) - (1 - T) ** 1.5 * math.cos(rr) / math.sqrt(2)
        assert co.c(x) == pytest.approx(expected, rel=1e-7, abs=1e-8)
        assert co.b(x) == pytest.approx(-T)
        assert co.w(x) == pytest.approx(0.25 / math.cosh(x) ** 2)


@pytest.mark.parametrize("fam,kind,g,m", [("sphere", "identity", 2, 3), ("sphere", "linear-1-g", 3, 2),
                                          ("so", "identity", 1, 4), ("so", "linear-1-2g", 2, 2),
                                          ("su3", "identity", 1, 1)])
def test_sampled_closed_form_gives_same_coefficients(fam, kind, g, m):
    spec = make_problem(fam, g, m, m, 1) if fam != "su3" else SU3
    prof = closed_form_profile(spec, kind)
    a = jacobi_coefficients(prof.spec, kind)
    b = jacobi_coefficients(prof.spec, prof)
    xs = prof.x[::7]
    assert np.max(np.abs(a.c(xs) - b.c(xs))) < 1e-8
    assert np.max(np.abs(a.b(xs) - b.b(xs))) < 1e-14


def test_inaccurate_profile_rejected():
    spec = make_problem("sphere", 2, 1, 1, 1)
    p = SimpleNamespace(x=np.linspace(-1, 1, 5), r=np.zeros(5), rprime=np.zeros(5), residual_norm=1e-3)
    with pytest.raises(PreconditionError):
        jacobi_coefficients(spec, p)


def test_nonuniform_profile_rejected():
    spec = make_problem("sphere", 2, 1, 1, 1)
    x = np.array([0.0, 0.1, 0.3, 0.4])
    p = SimpleNamespace(x=x, r=x, rprime=x, residual_norm=0.0)
    with pytest.raises(PreconditionError):
        jacobi_coefficients(spec, p)


# ------------------------------------------------------------- Sturm-Liouville form


@pytest.mark.parametrize("spec", all_specs(), ids=lambda s: s.label())
def test_sl_form(spec):
    co = jacobi_coefficients(spec.with_k(solution_k(spec, "identity")), "identity")
    x = np.linspace(-15, 15, 301)
    p, q, z = co.sl_p(x), co.sl_q(x), co.sl_z(x)
    assert np.all(p > 0) and np.all(z > 0)
    assert np.allclose(q, co.c(x) * p, rtol=1e-13)
    assert np.allclose(z, co.w(x) * p, rtol=1e-13)
    h = 1e-5
    for xx in (-3.0, 0.2, 4.0):
        dlogp = (np.log(co.sl_p(xx + h)) - np.log(co.sl_p(xx - h))) / (2 * h)
        assert dlogp == pytest.approx(co.b(xx), abs=1e-7)
    # the t-chart p vanishes at both ends of the orbit space
    assert co.sl_p_t(-30.0) < 1e-6 * co.sl_p_t(0.0)
    assert co.sl_p_t(30.0) < 1e-6 * co.sl_p_t(0.0)


@settings(max_examples=30, deadline=None)
@given(g=st.sampled_from([1, 2, 3, 6]), m=st.sampled_from([1, 2]), x=st.floats(0.01, 8), lam=st.floats(-20, 50))
def test_equal_multiplicity_symmetry(g, m, x, lam):
    co = jacobi_coefficients(make_problem("sphere", g, m, m, 1), "identity")
    assert co.b(-x) == pytest.approx(-co.b(x), abs=1e-14)
    assert co.c(-x) + lam * co.w(-x) == pytest.approx(co.c(x) + lam * co.w(x), abs=1e-12)


def test_su3_p_matches_metric_determinant():
    co = jacobi_coefficients(SU3, "identity")
    ch = co.chart
    ratios = []
    for x in np.linspace(-4, 4, 17):
        t = ch.t_of_x(x)
        det = np.linalg.det(su3_metric_endomorphism(t))
        ratios.append(co.sl_p_t(x) / math.sqrt(det))
    assert np.ptp(ratios) < 1e-12 * np.mean(ratios)


def test_constant_fixture():
    co = __import__("equistab.problems", fromlist=["LinearOdeCoefficients"]).LinearOdeCoefficients.constant(0, 0, 1)
    assert co.domain == (0.0, math.pi)
    assert co.boundary_rays() == (0.0, math.pi)
