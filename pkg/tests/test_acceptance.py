"""Acceptance gate.

Every reference value below is produced outside the package: exact
rationals, Machin's pi, the ln 2 series, or mpmath at several hundred bits.
A summary line per criterion is printed at the end of the run.
"""

import math
import random
import time
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logtrig.cli import ReportEnvelope, cmd_converge, cmd_verify_identities
from logtrig.errors import NearSingularProductError
from logtrig.identities import (
    Family,
    IdentityCase,
    check_identity,
    cos_sq_product,
    half_sin_sq_product,
    shifted_sin_product,
)
from logtrig.numerics import ExtReal, const_pi, lngamma
from logtrig.oracle import oracle_check, oracle_integrate, shifted_target, shifted_zero
from logtrig.riemann import PRODUCT_TARGETS, TargetId, converge, default_n_list, get_target, log_sin_sum, riemann_sum
from oracles import machin_pi, series_ln2

MP_BITS = 600


def frac(x: ExtReal) -> Fraction:
    return Fraction(*x.value.as_integer_ratio())


def to_mp(x: ExtReal):
    a, b = x.value.as_integer_ratio()
    return mpmath.mpf(int(a)) / int(b)


def mp_of(q: Fraction):
    return mpmath.mpf(q.numerator) / q.denominator


@pytest.fixture(autouse=True)
def mp_precision():
    with mpmath.workprec(MP_BITS):
        yield


def reference_closed_forms():
    """Closed forms from Machin pi, the ln 2 series and mpmath logarithms."""
    pi = mp_of(machin_pi(MP_BITS))
    ln2 = mp_of(series_ln2(MP_BITS))
    return {
        TargetId.LOG_SIN_0_PI: -pi * ln2,
        TargetId.LOG_SIN_0_HALFPI: -pi / 2 * ln2,
        TargetId.LOG_COS_0_HALFPI: -pi / 2 * ln2,
        TargetId.LOG_TAN_0_HALFPI: mpmath.mpf(0),
        TargetId.LOG_GAMMA_0_1: mpmath.log(2 * pi) / 2,
        TargetId.LOG_ABS_SIN_SHIFTED: -ln2,
    }


def reference_residual(tid: TargetId, N: int):
    pi = mp_of(machin_pi(MP_BITS))
    if tid is TargetId.LOG_SIN_0_PI:
        return pi * mpmath.log(N) / (N - 1)
    if tid in (TargetId.LOG_SIN_0_HALFPI, TargetId.LOG_COS_0_HALFPI):
        return pi / 2 * mpmath.log(N) / (N - 1)
    if tid is TargetId.LOG_TAN_0_HALFPI:
        return pi * mpmath.log(N) / (2 * N)
    return -mpmath.log(N) / (2 * (N - 1))


# -- 1 -------------------------------------------------------------------------------


C1 = "exact finite-N log-sine sum at 256 bits, N = 10 .. 10^6"


@pytest.mark.criterion(1, C1)
def test_criterion_1_exact_log_sine_identity():
    p = 256
    ln2 = mp_of(series_ln2(MP_BITS))
    started = time.perf_counter()
    for k in range(1, 7):
        N = 10**k
        got = to_mp(log_sin_sum(N, p))
        exact = mpmath.log(N) - (N - 1) * ln2
        assert abs(got - exact) < mpmath.mpf(2) ** (32 - 256) * N, N
    assert time.perf_counter() - started < 60


# -- 2 -------------------------------------------------------------------------------


C2 = "shortcut limits on the default grids within 1e-9 of the closed forms"


@pytest.mark.criterion(2, C2)
@pytest.mark.parametrize("tid", PRODUCT_TARGETS, ids=lambda t: t.value)
def test_criterion_2_closed_forms_via_shortcut(tid):
    started = time.perf_counter()
    report = converge(get_target(tid, 128), default_n_list(tid))
    want = reference_closed_forms()[tid]
    assert abs(to_mp(report.extrapolated_limit) - want) < 1e-9
    assert time.perf_counter() - started < 30


@pytest.mark.criterion(2, C2)
def test_criterion_2_reference_values():
    ref = reference_closed_forms()
    assert float(ref[TargetId.LOG_SIN_0_PI]) == pytest.approx(-2.177586090, abs=1e-9)
    assert float(ref[TargetId.LOG_SIN_0_HALFPI]) == pytest.approx(-1.088793045, abs=1e-9)
    assert float(ref[TargetId.LOG_GAMMA_0_1]) == pytest.approx(0.918938533, abs=1e-9)


# -- 3 -------------------------------------------------------------------------------


C3 = "observed error equals the predicted residual within 1e-20 at 256 bits"


@pytest.mark.criterion(3, C3)
@pytest.mark.parametrize("tid", PRODUCT_TARGETS, ids=lambda t: t.value)
def test_criterion_3_residual_law(tid):
    p = 256
    target = get_target(tid, p)
    want_limit = reference_closed_forms()[tid]
    for N in default_n_list(tid):
        rec = riemann_sum(target, N, p)
        observed = to_mp(rec.sum_value) - want_limit
        predicted = reference_residual(tid, N)
        assert abs(observed - predicted) < 1e-20, N
        assert abs(to_mp(rec.observed_error) - to_mp(rec.predicted_residual)) < 1e-20, N


# -- 4 -------------------------------------------------------------------------------


C4 = "identity residual contracts at 128 bits over the full N ranges"
P4 = 128


def _isqrt_fraction(M: int, bits: int) -> Fraction:
    return Fraction(math.isqrt(M << (2 * bits)), 1 << bits)


@pytest.mark.criterion(4, C4)
def test_criterion_4_tan_family():
    started = time.perf_counter()
    for N in range(1, 1001):
        r = check_identity(IdentityCase(Family.TAN_PRODUCT, N), P4)
        assert r.ok, N
        root = _isqrt_fraction(2 * N + 1, P4 + 16)
        assert abs(frac(r.computed_product) - root) < root * Fraction(2**20 * N, 2**P4), N
    # five identity tests share the 300 s budget
    assert time.perf_counter() - started < 60


@pytest.mark.criterion(4, C4)
@pytest.mark.parametrize("family", [Family.SIN_PRODUCT, Family.HALF_SIN_SQ_PRODUCT, Family.COS_SQ_PRODUCT])
def test_criterion_4_power_families(family):
    started = time.perf_counter()
    for N in range(2, 10**4 + 1):
        r = check_identity(IdentityCase(family, N), P4)
        assert r.ok, N
        exact = Fraction(N, 2 ** (N - 1))
        assert abs(frac(r.computed_product) - exact) < exact * Fraction(2**20 * N, 2**P4), N
    # five identity tests share the 300 s budget
    assert time.perf_counter() - started < 60


@pytest.mark.criterion(4, C4)
def test_criterion_4_shifted_family():
    rng = random.Random(1804)
    thetas = [ExtReal(rng.uniform(-4.0, 4.0), P4) for _ in range(50)]
    started = time.perf_counter()
    for theta in thetas:
        th = to_mp(theta)
        for N in range(1, 201):
            r = check_identity(IdentityCase(Family.SHIFTED_SIN_PRODUCT, N, theta), P4)
            assert r.ok, (float(theta), N)
            want = mpmath.sin(N * th) / mpmath.mpf(2) ** (N - 1)
            assert abs(to_mp(r.computed_product) - want) < abs(want) * mpmath.mpf(2) ** (20 - P4) * N
    # five identity tests share the 300 s budget
    assert time.perf_counter() - started < 60


# -- 5 -------------------------------------------------------------------------------


C5 = "quadrature oracle within 1e-9 of every closed form; shortcut vs oracle within 1e-8"


@pytest.mark.criterion(5, C5)
@pytest.mark.parametrize("tid", list(TargetId), ids=lambda t: t.value)
def test_criterion_5_oracle_vs_closed_form(tid):
    theta = "1.0" if tid is TargetId.LOG_ABS_SIN_SHIFTED else None
    result, deviation = oracle_check(get_target(tid, 128, theta), ExtReal("1e-10", 128))
    assert abs(to_mp(result.value) - reference_closed_forms()[tid]) < 1e-9
    assert deviation < 1e-9


@pytest.mark.criterion(5, C5)
@pytest.mark.parametrize("tid", PRODUCT_TARGETS, ids=lambda t: t.value)
def test_criterion_5_shortcut_vs_oracle(tid):
    target = get_target(tid, 128)
    oracle_value = oracle_integrate(target, ExtReal("1e-10", 128)).value
    limit = converge(target, default_n_list(tid)).extrapolated_limit
    assert abs(to_mp(oracle_value) - to_mp(limit)) < 1e-8


# -- 6 -------------------------------------------------------------------------------


C6 = "shifted log-sine integral equals -ln 2 within 1e-7 via interior splitting"


@pytest.mark.criterion(6, C6)
@pytest.mark.parametrize("theta", ["0.3", "1.0", "sqrt2-1", "2.5"])
def test_criterion_6_shifted_integral(theta):
    p = 128
    if theta == "sqrt2-1":
        theta_x = ExtReal(mpmath.nstr(mpmath.sqrt(2) - 1, 60), p)
    else:
        theta_x = ExtReal(theta, p)
    x0 = shifted_zero(theta_x, p)
    assert x0 is not None
    # the split point is where pi x + theta crosses pi
    assert abs(to_mp(x0) - (mp_of(machin_pi(MP_BITS)) - to_mp(theta_x)) / mp_of(machin_pi(MP_BITS))) < 1e-30
    result = oracle_integrate(shifted_target(theta_x, p), ExtReal("1e-10", p))
    assert abs(to_mp(result.value) + mp_of(series_ln2(MP_BITS))) < 1e-7


# -- 7 -------------------------------------------------------------------------------


C7 = "property suites with at least 1000 generated cases each"
EXAMPLES = 1000


@pytest.mark.criterion(7, C7)
@given(st.floats(min_value=0.0, max_value=1.0, exclude_min=True, exclude_max=True))
@settings(max_examples=EXAMPLES)
def test_criterion_7_gamma_reflection(x):
    p = 128
    xe = ExtReal(x, p)
    lhs = to_mp(lngamma(xe)) + to_mp(lngamma(1 - xe))
    xm = mpmath.mpf(x)
    pi = mp_of(machin_pi(MP_BITS))
    rhs = mpmath.log(pi) - mpmath.log(mpmath.sin(pi * xm))
    scale = max(mpmath.mpf(1), abs(mpmath.log(xm)), abs(mpmath.log(1 - xm)))
    assert abs(lhs - rhs) < scale * mpmath.mpf(2) ** -112


@pytest.mark.criterion(7, C7)
@given(st.integers(min_value=2, max_value=10**4))
@settings(max_examples=EXAMPLES)
def test_criterion_7_half_sine_equals_cosine(N):
    a = half_sin_sq_product(N, 128)
    b = cos_sq_product(N, 128)
    assert abs(a - b) <= 2 * a.ulp()


@pytest.mark.criterion(7, C7)
@given(
    st.integers(min_value=1, max_value=200),
    st.floats(min_value=-6.0, max_value=6.0, allow_nan=False),
)
@settings(max_examples=EXAMPLES)
def test_criterion_7_theta_periodicity(N, theta):
    p = 128
    th = ExtReal(theta, p)
    th_plus_pi = th.round_to(p + 128) + const_pi(p + 128)
    try:
        a = shifted_sin_product(N, th, p)
    except NearSingularProductError:
        return
    b = shifted_sin_product(N, th_plus_pi, p)
    sign = -1 if N % 2 else 1
    assert abs(b - sign * a) <= 2 * a.ulp()


@pytest.mark.criterion(7, C7)
@given(
    st.sampled_from([f.value for f in Family]),
    st.integers(min_value=2, max_value=12),
    st.sampled_from([53, 64, 128, 200]),
    st.floats(min_value=0.05, max_value=3.0),
)
@settings(max_examples=EXAMPLES)
def test_criterion_7_report_determinism(family, n_max, p, theta):
    a = cmd_verify_identities(family, n_max, p, repr(theta))
    b = cmd_verify_identities(family, n_max, p, repr(theta))
    assert a.to_dict() | {"timing_ms": 0} == b.to_dict() | {"timing_ms": 0}


@pytest.mark.criterion(7, C7)
def test_criterion_7_converge_report_determinism():
    a = cmd_converge("log-gamma-0-1", "100,1000,10000", 192)
    b = cmd_converge("log-gamma-0-1", "100,1000,10000", 192)
    assert a.results == b.results and a.parameters == b.parameters


@st.composite
def ext_reals(draw):
    p = draw(st.integers(min_value=53, max_value=512))
    mantissa = draw(st.integers(min_value=-(2**p) + 1, max_value=2**p - 1))
    exponent = draw(st.integers(min_value=-2000, max_value=2000))
    q = Fraction(mantissa) * Fraction(2) ** exponent
    return ExtReal(q, p), p, q


@pytest.mark.criterion(7, C7)
@given(st.lists(ext_reals(), min_size=1, max_size=6))
@settings(max_examples=EXAMPLES)
def test_criterion_7_json_round_trip(values):
    rows = [{"section": "probe", "n": i, "value": x.to_decimal(), "ok": True} for i, (x, _, _) in enumerate(values)]
    env = ReportEnvelope("probe", {"precision_bits": "var"}, rows)
    back = ReportEnvelope.from_json(env.to_json())
    assert back.to_dict() == env.to_dict()
    for row, (x, p, q) in zip(back.results, values):
        y = ExtReal.from_decimal(row["value"], p)
        assert y == x
        assert frac(y) == q
