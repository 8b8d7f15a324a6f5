"""Log-sums of the trigonometric products arranged as Riemann sums.

Taking logarithms of the product identities turns each one into a finite
sum with an exactly known value.  Written over the grid x_n = n/N with the
spacing dx = 1/(N-1) (tangent family: x_n = n/M, dx = 1/M), these sums are
Riemann sums of the log-trig integrands whose error at finite N is known in
closed form::

    target               sum_value - limit
    LOG_SIN_0_PI         pi     * ln N / (N-1)
    LOG_SIN_0_HALFPI     pi/2   * ln N / (N-1)
    LOG_COS_0_HALFPI     pi/2   * ln N / (N-1)
    LOG_TAN_0_HALFPI     pi     * ln M / (2M)
    LOG_GAMMA_0_1        -1/2   * ln N / (N-1)

Note that x_n = n/N does not sit on the partition implied by dx = 1/(N-1);
the sums are kept in this form because the residual law above is exact for
it.  sum_value is always scaled so that it estimates the integral over the
original variable (theta, or x for the gamma target).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import gmpy2
from gmpy2 import mpfr

from .errors import InvalidParameterError, NonFiniteInputError
from .numerics import (
    DEFAULT_PRECISION,
    ExtReal,
    check_precision,
    context,
    grid_precision,
    lngamma,
    neumaier_sum,
    trig_progression,
)


class TargetId(str, enum.Enum):
    LOG_SIN_0_PI = "log-sin-0-pi"
    LOG_SIN_0_HALFPI = "log-sin-0-halfpi"
    LOG_COS_0_HALFPI = "log-cos-0-halfpi"
    LOG_TAN_0_HALFPI = "log-tan-0-halfpi"
    LOG_GAMMA_0_1 = "log-gamma-0-1"
    LOG_ABS_SIN_SHIFTED = "log-abs-sin-shifted"

    @classmethod
    def parse(cls, name: str) -> TargetId:
        if isinstance(name, cls):
            return name
        for t in cls:
            if name in (t.value, t.name, t.name.lower()):
                return t
        raise InvalidParameterError(f"unknown integral target {name!r}")


PRODUCT_TARGETS = (
    TargetId.LOG_SIN_0_PI,
    TargetId.LOG_SIN_0_HALFPI,
    TargetId.LOG_COS_0_HALFPI,
    TargetId.LOG_TAN_0_HALFPI,
    TargetId.LOG_GAMMA_0_1,
)

DEFAULT_N_LIST = (100, 1000, 10000, 100000)
# the tangent grid needs odd M = 2N+1
DEFAULT_M_LIST = (101, 1001, 10001, 100001)


def default_n_list(target_id: TargetId) -> tuple[int, ...]:
    return DEFAULT_M_LIST if TargetId(target_id) is TargetId.LOG_TAN_0_HALFPI else DEFAULT_N_LIST


@dataclass(frozen=True)
class IntegralTarget:
    id: TargetId
    lower: ExtReal
    upper: ExtReal
    closed_form: ExtReal
    theta: Optional[ExtReal] = None

    @property
    def precision_bits(self) -> int:
        return self.closed_form.precision_bits


def get_target(
    target_id: TargetId | str,
    precision_bits: int = DEFAULT_PRECISION,
    theta: ExtReal | float | str | None = None,
) -> IntegralTarget:
    """Registry lookup: interval and closed-form value of one target."""
    tid = TargetId.parse(target_id)
    check_precision(precision_bits)
    ctx = context(precision_bits)
    pi = ctx.const_pi()
    ln2 = ctx.const_log2()
    half_pi = ctx.div(pi, 2)
    zero = mpfr(0)

    if tid is TargetId.LOG_ABS_SIN_SHIFTED:
        if theta is None:
            raise InvalidParameterError("LOG_ABS_SIN_SHIFTED requires theta")
        if not isinstance(theta, ExtReal):
            theta = ExtReal(theta, precision_bits)
    elif theta is not None:
        raise InvalidParameterError(f"{tid.name} takes no theta")

    if tid is TargetId.LOG_SIN_0_PI:
        lo, hi, value = zero, pi, ctx.minus(ctx.mul(pi, ln2))
    elif tid in (TargetId.LOG_SIN_0_HALFPI, TargetId.LOG_COS_0_HALFPI):
        lo, hi, value = zero, half_pi, ctx.minus(ctx.mul(half_pi, ln2))
    elif tid is TargetId.LOG_TAN_0_HALFPI:
        lo, hi, value = zero, half_pi, zero
    elif tid is TargetId.LOG_GAMMA_0_1:
        lo, hi, value = zero, mpfr(1), ctx.div(ctx.log(ctx.mul(2, pi)), 2)
    else:
        lo, hi, value = zero, mpfr(1), ctx.minus(ln2)
    return IntegralTarget(
        tid,
        ExtReal(lo, precision_bits),
        ExtReal(hi, precision_bits),
        ExtReal(value, precision_bits),
        theta,
    )


@dataclass(frozen=True)
class RiemannRecord:
    n_param: int
    sum_value: ExtReal
    predicted_residual: ExtReal
    observed_error: ExtReal

    @property
    def residual_gap(self) -> ExtReal:
        return self.observed_error - self.predicted_residual


@dataclass(frozen=True)
class ConvergenceReport:
    target: IntegralTarget
    records: tuple[RiemannRecord, ...]
    extrapolated_limit: ExtReal
    extrapolation_error: ExtReal


def _check_int(N, minimum: int, what: str = "N") -> None:
    if isinstance(N, bool) or not isinstance(N, int) or N < minimum:
        raise InvalidParameterError(f"{what} must be an integer >= {minimum}, got {N!r}")


def _finite(value: mpfr, what: str) -> mpfr:
    if not gmpy2.is_finite(value):
        raise NonFiniteInputError(f"{what} produced a non-finite value")
    return value


# -- raw log sums (working precision, unrounded) ---------------------------


def _log_sin_terms(N: int, stop: int, ctx):
    # ln sin(n pi / N) for n = 1 .. stop-1
    step = ctx.div(ctx.const_pi(), N)
    return map(ctx.log, trig_progression("sin", mpfr(0), step, 1, stop, ctx))


def _log_cos_terms(N: int, stop: int, ctx):
    # ln cos(pi/2 - n pi / N) for n = 1 .. stop-1
    pi = ctx.const_pi()
    step = ctx.minus(ctx.div(pi, N))
    return map(ctx.log, trig_progression("cos", ctx.div(pi, 2), step, 1, stop, ctx))


def _log_tan_terms(M: int, ctx):
    # ln tan(n pi / M) for n = 1 .. (M-1)/2
    step = ctx.div(ctx.const_pi(), M)
    return (ctx.log(ctx.tan(ctx.mul(n, step))) for n in range(1, (M - 1) // 2 + 1))


def _log_reflection_terms(N: int, ctx):
    # ln(pi / sin(n pi / N)) for n = 1 .. N-1
    pi = ctx.const_pi()
    step = ctx.div(pi, N)
    return (ctx.log(ctx.div(pi, s)) for s in trig_progression("sin", mpfr(0), step, 1, N, ctx))


def log_sin_sum(N: int, precision_bits: int = DEFAULT_PRECISION) -> ExtReal:
    """sum_{n=1}^{N-1} ln sin(n pi / N), compensated, ascending n.

    Exact value: ln N - (N-1) ln 2.
    """
    _check_int(N, 2)
    check_precision(precision_bits)
    ctx = context(grid_precision(precision_bits, N))
    total = _finite(neumaier_sum(_log_sin_terms(N, N, ctx), ctx), "log_sin_sum")
    return ExtReal(total, precision_bits)


def log_sin_sum_exact(N: int, precision_bits: int = DEFAULT_PRECISION) -> ExtReal:
    """ln N - (N-1) ln 2 from the constants alone."""
    _check_int(N, 2)
    ctx = context(precision_bits + 64)
    value = ctx.sub(ctx.log(N), ctx.mul(N - 1, ctx.const_log2()))
    return ExtReal(value, precision_bits)


def gamma_reflection_sum(N: int, precision_bits: int = DEFAULT_PRECISION) -> ExtReal:
    """sum_{n=1}^{N-1} ln(pi / sin(pi n / N)); exact value (N-1) ln(2 pi) - ln N."""
    _check_int(N, 3)
    check_precision(precision_bits)
    ctx = context(grid_precision(precision_bits, N))
    total = _finite(neumaier_sum(_log_reflection_terms(N, ctx), ctx), "gamma_reflection_sum")
    return ExtReal(total, precision_bits)


def gamma_reflection_terms(N: int, precision_bits: int = DEFAULT_PRECISION) -> list[ExtReal]:
    """Individual terms ln(pi / sin(pi n / N)), n = 1..N-1, each rounded to precision_bits."""
    _check_int(N, 3)
    check_precision(precision_bits)
    ctx = context(grid_precision(precision_bits, N))
    return [ExtReal(t, precision_bits) for t in _log_reflection_terms(N, ctx)]


def gamma_reflection_sum_exact(N: int, precision_bits: int = DEFAULT_PRECISION) -> ExtReal:
    _check_int(N, 3)
    ctx = context(precision_bits + 64)
    value = ctx.sub(ctx.mul(N - 1, ctx.log(ctx.mul(2, ctx.const_pi()))), ctx.log(N))
    return ExtReal(value, precision_bits)


def gamma_reflection_sum_via_lngamma(N: int, precision_bits: int = DEFAULT_PRECISION) -> ExtReal:
    """The same sum written as sum_{n=1}^{N-1} [lngamma(n/N) + lngamma(1 - n/N)]."""
    _check_int(N, 3)
    check_precision(precision_bits)
    wp = grid_precision(precision_bits, N)
    ctx = context(wp)
    terms = []
    for n in range(1, N):
        x = ExtReal(ctx.div(n, N), wp)
        y = ExtReal(ctx.div(N - n, N), wp)
        terms.append(ctx.add(lngamma(x).value, lngamma(y).value))
    return ExtReal(neumaier_sum(terms, ctx), precision_bits)


def lngamma_riemann_sum(N: int, precision_bits: int = DEFAULT_PRECISION) -> ExtReal:
    """sum_{n=1}^{N-1} lngamma(n/N) / (N-1): the direct Riemann sum for the gamma target.

    Kept as a cross-check; by the n -> N-n symmetry it equals the halved
    reflection sum used by riemann_sum().
    """
    _check_int(N, 3)
    check_precision(precision_bits)
    wp = grid_precision(precision_bits, N)
    ctx = context(wp)
    terms = [lngamma(ExtReal(ctx.div(n, N), wp)).value for n in range(1, N)]
    return ExtReal(ctx.div(neumaier_sum(terms, ctx), N - 1), precision_bits)


# -- Riemann records -------------------------------------------------------


def _residual_coefficient(tid: TargetId, ctx) -> mpfr:
    pi = ctx.const_pi()
    if tid in (TargetId.LOG_SIN_0_PI, TargetId.LOG_TAN_0_HALFPI):
        return pi
    if tid in (TargetId.LOG_SIN_0_HALFPI, TargetId.LOG_COS_0_HALFPI):
        return ctx.div(pi, 2)
    return mpfr(-0.5)


def residual_shape(tid: TargetId, N: int, ctx) -> mpfr:
    """ln M / (2M) for the tangent family, ln N / (N-1) otherwise."""
    if tid is TargetId.LOG_TAN_0_HALFPI:
        return ctx.div(ctx.log(N), 2 * N)
    return ctx.div(ctx.log(N), N - 1)


def predicted_residual(target_id: TargetId, N: int, precision_bits: int = DEFAULT_PRECISION) -> ExtReal:
    tid = TargetId(target_id)
    ctx = context(precision_bits + 64)
    return ExtReal(ctx.mul(_residual_coefficient(tid, ctx), residual_shape(tid, N, ctx)), precision_bits)


def _validate_n(tid: TargetId, N) -> None:
    if tid is TargetId.LOG_ABS_SIN_SHIFTED:
        raise InvalidParameterError(
            "LOG_ABS_SIN_SHIFTED has no product-based Riemann sum; use the quadrature oracle"
        )
    _check_int(N, 3, "M" if tid is TargetId.LOG_TAN_0_HALFPI else "N")
    if tid is TargetId.LOG_TAN_0_HALFPI and N % 2 == 0:
        raise InvalidParameterError(f"the tangent grid needs odd M = 2N+1, got {N}")


def _scaled_sum(tid: TargetId, N: int, ctx) -> mpfr:
    pi = ctx.const_pi()
    if tid is TargetId.LOG_SIN_0_PI:
        s = neumaier_sum(_log_sin_terms(N, N, ctx), ctx)
        # pi * sum ln sin(pi x_n) dx
        return ctx.div(ctx.mul(pi, s), N - 1)
    if tid is TargetId.LOG_SIN_0_HALFPI:
        s = neumaier_sum(_log_sin_terms(N, N // 2 + 1, ctx), ctx)
        # (pi/2) * 2 sum_{n<=N/2} ln sin(pi x_n) dx
        return ctx.div(ctx.mul(pi, s), N - 1)
    if tid is TargetId.LOG_COS_0_HALFPI:
        s = neumaier_sum(_log_cos_terms(N, N // 2 + 1, ctx), ctx)
        return ctx.div(ctx.mul(pi, s), N - 1)
    if tid is TargetId.LOG_TAN_0_HALFPI:
        s = neumaier_sum(_log_tan_terms(N, ctx), ctx)
        return ctx.div(ctx.mul(pi, s), N)
    # gamma: half of sum ln Gamma(x_n) + ln Gamma(1-x_n), over N-1
    s = neumaier_sum(_log_reflection_terms(N, ctx), ctx)
    return ctx.div(s, 2 * (N - 1))


def riemann_sum(target: IntegralTarget, N: int, precision_bits: int | None = None) -> RiemannRecord:
    """Evaluate the finite-N sum for ``target`` and compare it with the limit.

    For LOG_TAN_0_HALFPI, ``N`` is the odd grid size M.
    """
    tid = target.id
    _validate_n(tid, N)
    p = target.precision_bits if precision_bits is None else check_precision(precision_bits)
    ctx = context(grid_precision(p, N))
    value = ExtReal(_finite(_scaled_sum(tid, N, ctx), f"riemann_sum({tid.value}, {N})"), p)
    closed = target.closed_form.round_to(p)
    return RiemannRecord(
        n_param=N,
        sum_value=value,
        predicted_residual=predicted_residual(tid, N, p),
        observed_error=value - closed,
    )


def residual_law_tolerance(N: int, precision_bits: int) -> ExtReal:
    """2^(24-p) * N * (ln N + 2); ln N + 2 bounds every log term's magnitude."""
    ctx = context(precision_bits)
    bound = ctx.mul(ctx.mul_2exp(N, 24 - precision_bits), ctx.add(ctx.log(N), 2))
    return ExtReal(bound, precision_bits)


def extrapolate(tid: TargetId, records: Sequence[RiemannRecord], precision_bits: int) -> ExtReal:
    """Limit L from sum_value(N) = L + c * shape(N).

    Two or more records: fit L and c through the two largest N.  A single
    record: use the family's known coefficient c.
    """
    ctx = context(precision_bits + 64)
    if len(records) == 1:
        r = records[0]
        return ExtReal(ctx.sub(r.sum_value.value, r.predicted_residual.value), precision_bits)
    r1, r2 = records[-2], records[-1]
    g1 = residual_shape(tid, r1.n_param, ctx)
    g2 = residual_shape(tid, r2.n_param, ctx)
    num = ctx.sub(ctx.mul(r2.sum_value.value, g1), ctx.mul(r1.sum_value.value, g2))
    return ExtReal(ctx.div(num, ctx.sub(g1, g2)), precision_bits)


def converge(
    target: IntegralTarget, n_list: Sequence[int], precision_bits: int | None = None
) -> ConvergenceReport:
    p = target.precision_bits if precision_bits is None else check_precision(precision_bits)
    n_list = list(n_list)
    if not n_list:
        raise InvalidParameterError("n_list must not be empty")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise InvalidParameterError(f"n_list must be strictly ascending, got {n_list}")
    for N in n_list:
        _validate_n(target.id, N)
    records = tuple(riemann_sum(target, N, p) for N in n_list)
    limit = extrapolate(target.id, records, p)
    return ConvergenceReport(
        target=target,
        records=records,
        extrapolated_limit=limit,
        extrapolation_error=abs(limit - target.closed_form.round_to(p)),
    )

