"""Trigonometric products at rational multiples of pi and their closed forms.

Five families are covered::

    TAN_PRODUCT          prod_{n=1}^{N}       tan(n pi/(2N+1))      = sqrt(2N+1)
    SIN_PRODUCT          prod_{n=1}^{N-1}     sin(n pi/N)           = N / 2^(N-1)
    HALF_SIN_SQ_PRODUCT  prod_{n=1}^{N//2}    sin^2(n pi/N)         = N / 2^(N-1)
    COS_SQ_PRODUCT       prod_{n=1}^{N//2}    cos^2(pi/2 - n pi/N)  = N / 2^(N-1)
    SHIFTED_SIN_PRODUCT  prod_{n=0}^{N-1}     sin(n pi/N + theta)   = sin(N theta) / 2^(N-1)

Products are formed at a working precision with guard bits and rounded to
the requested precision once at the end.  MPFR's exponent range (about
2**30 binary orders) holds N / 2^(N-1) directly, so multiplication is used
up to DIRECT_PRODUCT_LIMIT factors and log-space accumulation beyond it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Optional

import gmpy2
from gmpy2 import mpfr

from .errors import InvalidParameterError, NearSingularProductError
from .numerics import (
    DEFAULT_PRECISION,
    GUARD_BITS,
    ExtReal,
    check_precision,
    context,
    grid_precision,
    neumaier_sum,
    trig_progression,
)

DIRECT_PRODUCT_LIMIT = 1 << 24


class Family(str, enum.Enum):
    TAN_PRODUCT = "tan"
    SIN_PRODUCT = "sin"
    HALF_SIN_SQ_PRODUCT = "half-sin-sq"
    COS_SQ_PRODUCT = "cos-sq"
    SHIFTED_SIN_PRODUCT = "shifted-sin"

    @classmethod
    def parse(cls, name: str) -> Family:
        if isinstance(name, cls):
            return name
        for fam in cls:
            if name in (fam.value, fam.name, fam.name.lower()):
                return fam
        raise InvalidParameterError(f"unknown identity family {name!r}")


MIN_N = {
    Family.TAN_PRODUCT: 1,
    Family.SIN_PRODUCT: 2,
    Family.HALF_SIN_SQ_PRODUCT: 2,
    Family.COS_SQ_PRODUCT: 2,
    Family.SHIFTED_SIN_PRODUCT: 1,
}


@dataclass(frozen=True)
class IdentityCase:
    family: Family
    n_param: int
    theta: Optional[ExtReal] = None

    def __post_init__(self):
        if not isinstance(self.family, Family):
            object.__setattr__(self, "family", Family.parse(self.family))
        _check_n(self.n_param, MIN_N[self.family])
        shifted = self.family is Family.SHIFTED_SIN_PRODUCT
        if shifted and self.theta is None:
            raise InvalidParameterError("SHIFTED_SIN_PRODUCT requires theta")
        if not shifted and self.theta is not None:
            raise InvalidParameterError(f"{self.family.name} takes no theta")


@dataclass(frozen=True)
class IdentityCheckResult:
    case: IdentityCase
    computed_product: ExtReal
    closed_form: ExtReal
    relative_residual: ExtReal

    @property
    def tolerance(self) -> ExtReal:
        return identity_tolerance(self.case, self.computed_product.precision_bits)

    @property
    def ok(self) -> bool:
        return self.relative_residual < self.tolerance


def _check_n(n: int, minimum: int) -> None:
    if isinstance(n, bool) or not isinstance(n, int) or n < minimum:
        raise InvalidParameterError(f"N must be an integer >= {minimum}, got {n!r}")


def _multiply(factors: Iterable[mpfr], count: int, ctx) -> mpfr:
    if count <= DIRECT_PRODUCT_LIMIT:
        mul = ctx.mul
        prod = mpfr(1)
        for f in factors:
            prod = mul(prod, f)
        return prod
    # log-space: sum ln|f| with the sign tracked separately
    negative = 0
    logs = []
    for f in factors:
        if f < 0:
            negative ^= 1
        logs.append(ctx.log(ctx.abs(f)))
    prod = ctx.exp(neumaier_sum(logs, ctx))
    return ctx.minus(prod) if negative else prod


def _closed_power_form(N: int, ctx) -> mpfr:
    # N / 2^(N-1), exact scaling by a power of two
    return ctx.mul_2exp(ctx.plus(N), -(N - 1))


def tan_product(N: int, precision_bits: int = DEFAULT_PRECISION) -> ExtReal:
    """prod_{n=1}^{N} tan(n pi / (2N+1)); equals sqrt(2N+1)."""
    _check_n(N, 1)
    check_precision(precision_bits)
    M = 2 * N + 1
    ctx = context(grid_precision(precision_bits, M))
    step = ctx.div(ctx.const_pi(), M)
    factors = (ctx.tan(ctx.mul(n, step)) for n in range(1, N + 1))
    return ExtReal(_multiply(factors, N, ctx), precision_bits)


def sin_product(N: int, precision_bits: int = DEFAULT_PRECISION) -> ExtReal:
    """prod_{n=1}^{N-1} sin(n pi / N); equals N / 2^(N-1)."""
    _check_n(N, 2)
    check_precision(precision_bits)
    ctx = context(grid_precision(precision_bits, N))
    step = ctx.div(ctx.const_pi(), N)
    factors = trig_progression("sin", mpfr(0), step, 1, N, ctx)
    return ExtReal(_multiply(factors, N - 1, ctx), precision_bits)


def half_sin_sq_product(N: int, precision_bits: int = DEFAULT_PRECISION) -> ExtReal:
    """prod_{n=1}^{floor(N/2)} sin^2(n pi / N); equals N / 2^(N-1)."""
    _check_n(N, 2)
    check_precision(precision_bits)
    ctx = context(grid_precision(precision_bits, N))
    step = ctx.div(ctx.const_pi(), N)
    half = N // 2
    factors = map(ctx.square, trig_progression("sin", mpfr(0), step, 1, half + 1, ctx))
    return ExtReal(_multiply(factors, half, ctx), precision_bits)


def cos_sq_product(N: int, precision_bits: int = DEFAULT_PRECISION) -> ExtReal:
    """prod_{n=1}^{floor(N/2)} cos^2(pi/2 - n pi / N); equals N / 2^(N-1)."""
    _check_n(N, 2)
    check_precision(precision_bits)
    ctx = context(grid_precision(precision_bits, N))
    pi = ctx.const_pi()
    step = ctx.minus(ctx.div(pi, N))
    offset = ctx.div(pi, 2)
    half = N // 2
    factors = map(ctx.square, trig_progression("cos", offset, step, 1, half + 1, ctx))
    return ExtReal(_multiply(factors, half, ctx), precision_bits)


def _shifted_context(N: int, theta: ExtReal, precision_bits: int):
    # p/2 extra bits: factors may be as small as 2^(-p/2)
    base = max(precision_bits, theta.precision_bits)
    return context(grid_precision(base, N) + base // 2)


def shifted_sin_product(N: int, theta: ExtReal, precision_bits: int = DEFAULT_PRECISION) -> ExtReal:
    """prod_{n=0}^{N-1} sin(n pi / N + theta); equals sin(N theta) / 2^(N-1).

    Raises NearSingularProductError naming the first factor whose magnitude
    falls below 2^(-precision_bits/2).
    """
    _check_n(N, 1)
    check_precision(precision_bits)
    if not isinstance(theta, ExtReal):
        theta = ExtReal(theta, precision_bits)
    ctx = _shifted_context(N, theta, precision_bits)
    step = ctx.div(ctx.const_pi(), N)
    threshold = ctx.mul_2exp(1, -(precision_bits // 2))

    def guarded():
        for n, f in enumerate(trig_progression("sin", theta.value, step, 0, N, ctx)):
            if gmpy2.cmp_abs(f, threshold) < 0:
                raise NearSingularProductError(n, f, threshold)
            yield f

    return ExtReal(_multiply(guarded(), N, ctx), precision_bits)


def closed_form(case: IdentityCase, precision_bits: int = DEFAULT_PRECISION) -> ExtReal:
    """Right-hand side of the identity for ``case``, correctly rounded."""
    N = case.n_param
    fam = case.family
    if fam is Family.TAN_PRODUCT:
        return ExtReal(context(precision_bits).sqrt(2 * N + 1), precision_bits)
    if fam is Family.SHIFTED_SIN_PRODUCT:
        ctx = _shifted_context(N, case.theta, precision_bits)
        value = ctx.mul_2exp(ctx.sin(ctx.mul(N, case.theta.value)), -(N - 1))
        return ExtReal(value, precision_bits)
    return ExtReal(_closed_power_form(N, context(precision_bits + GUARD_BITS)), precision_bits)


def evaluate(case: IdentityCase, precision_bits: int = DEFAULT_PRECISION) -> ExtReal:
    fam = case.family
    N = case.n_param
    if fam is Family.TAN_PRODUCT:
        return tan_product(N, precision_bits)
    if fam is Family.SIN_PRODUCT:
        return sin_product(N, precision_bits)
    if fam is Family.HALF_SIN_SQ_PRODUCT:
        return half_sin_sq_product(N, precision_bits)
    if fam is Family.COS_SQ_PRODUCT:
        return cos_sq_product(N, precision_bits)
    return shifted_sin_product(N, case.theta, precision_bits)


def identity_tolerance(case: IdentityCase, precision_bits: int) -> ExtReal:
    """Residual contract 2^(20-p) * N shared by all families."""
    ctx = context(precision_bits)
    return ExtReal(ctx.mul_2exp(case.n_param, 20 - precision_bits), precision_bits)


def check_identity(case: IdentityCase, precision_bits: int = DEFAULT_PRECISION) -> IdentityCheckResult:
    check_precision(precision_bits)
    computed = evaluate(case, precision_bits)
    closed = closed_form(case, precision_bits)
    # both operands are p-bit numbers; the difference is exact at 2p+64 bits
    ctx = context(2 * precision_bits + 64)
    diff = ctx.abs(ctx.sub(computed.value, closed.value))
    if not gmpy2.is_zero(closed.value):
        diff = ctx.div(diff, ctx.abs(closed.value))
    return IdentityCheckResult(case, computed, closed, ExtReal(diff, precision_bits))
