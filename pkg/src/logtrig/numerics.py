"""Extended-precision reals on top of MPFR, plus summation and log-gamma.

Every value carries its own significand width.  Arithmetic between two
:class:`ExtReal` values is performed at the wider of the two precisions and
correctly rounded there (MPFR semantics).  Nothing here touches the global
gmpy2 context: each operation builds or receives an explicit context.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Union

import gmpy2
from gmpy2 import mpfr

from .errors import DomainError, InvalidPrecisionError, NonFiniteInputError

MIN_PRECISION = 53
DEFAULT_PRECISION = 128
GUARD_BITS = 32

# Direct trig evaluations are re-seeded every ANCHOR_INTERVAL grid steps.
ANCHOR_INTERVAL = 64


def check_precision(precision_bits: int) -> int:
    if (
        isinstance(precision_bits, bool)
        or not isinstance(precision_bits, int)
        or precision_bits < MIN_PRECISION
    ):
        raise InvalidPrecisionError(
            f"precision_bits must be an integer >= {MIN_PRECISION}, got {precision_bits!r}"
        )
    return precision_bits


def context(precision_bits: int) -> gmpy2.context:
    """A fresh round-to-nearest MPFR context at the given precision."""
    return gmpy2.context(precision=precision_bits)


def decimal_digits(precision_bits: int) -> int:
    """Significant decimal digits that round-trip a value of this precision."""
    return math.ceil(precision_bits * 0.302) + 1


Number = Union["ExtReal", int, float, Fraction]


class ExtReal:
    """Immutable real number with an explicit precision in bits."""

    __slots__ = ("value", "precision_bits")

    def __init__(self, value: Number | str | mpfr = 0, precision_bits: int = DEFAULT_PRECISION):
        check_precision(precision_bits)
        if isinstance(value, ExtReal):
            value = value.value
        elif isinstance(value, Fraction):
            value = gmpy2.mpq(value.numerator, value.denominator)
        object.__setattr__(self, "value", mpfr(value, precision_bits))
        object.__setattr__(self, "precision_bits", precision_bits)

    @classmethod
    def _wrap(cls, value: mpfr, precision_bits: int) -> ExtReal:
        # value must already be rounded to precision_bits
        obj = object.__new__(cls)
        object.__setattr__(obj, "value", value)
        object.__setattr__(obj, "precision_bits", precision_bits)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("ExtReal is immutable")

    def __reduce__(self):
        return (ExtReal, (self.to_decimal(), self.precision_bits))

    # -- arithmetic -----------------------------------------------------

    def _operand(self, other):
        if isinstance(other, ExtReal):
            return other.value, max(self.precision_bits, other.precision_bits)
        if isinstance(other, (int, float)):
            return other, self.precision_bits
        if isinstance(other, Fraction):
            return gmpy2.mpq(other.numerator, other.denominator), self.precision_bits
        return None, 0

    def _binary(self, other, op: str, reflected: bool = False):
        val, p = self._operand(other)
        if val is None:
            return NotImplemented
        ctx = context(p)
        a, b = (val, self.value) if reflected else (self.value, val)
        return ExtReal._wrap(getattr(ctx, op)(a, b), p)

    def __add__(self, other):
        return self._binary(other, "add")

    def __radd__(self, other):
        return self._binary(other, "add", reflected=True)

    def __sub__(self, other):
        return self._binary(other, "sub")

    def __rsub__(self, other):
        return self._binary(other, "sub", reflected=True)

    def __mul__(self, other):
        return self._binary(other, "mul")

    def __rmul__(self, other):
        return self._binary(other, "mul", reflected=True)

    def __truediv__(self, other):
        return self._binary(other, "div")

    def __rtruediv__(self, other):
        return self._binary(other, "div", reflected=True)

    def __pow__(self, exponent):
        val, p = self._operand(exponent)
        if val is None:
            return NotImplemented
        return ExtReal._wrap(context(p).pow(self.value, val), p)

    def __neg__(self):
        return ExtReal._wrap(context(self.precision_bits).minus(self.value), self.precision_bits)

    def __pos__(self):
        return self

    def __abs__(self):
        return ExtReal._wrap(context(self.precision_bits).abs(self.value), self.precision_bits)

    # -- comparison (exact, precision-independent) ---------------------

    def _cmp_value(self, other):
        if isinstance(other, ExtReal):
            return other.value
        if isinstance(other, (int, float)):
            return other
        if isinstance(other, Fraction):
            return gmpy2.mpq(other.numerator, other.denominator)
        return None

    def __eq__(self, other):
        v = self._cmp_value(other)
        return NotImplemented if v is None else self.value == v

    def __lt__(self, other):
        v = self._cmp_value(other)
        return NotImplemented if v is None else self.value < v

    def __le__(self, other):
        v = self._cmp_value(other)
        return NotImplemented if v is None else self.value <= v

    def __gt__(self, other):
        v = self._cmp_value(other)
        return NotImplemented if v is None else self.value > v

    def __ge__(self, other):
        v = self._cmp_value(other)
        return NotImplemented if v is None else self.value >= v

    def __hash__(self):
        return hash(self.value)

    # -- conversion ------------------------------------------------------

    def __float__(self):
        return float(self.value)

    def __bool__(self):
        return bool(self.value)

    def is_finite(self) -> bool:
        return bool(gmpy2.is_finite(self.value))

    def is_zero(self) -> bool:
        return bool(gmpy2.is_zero(self.value))

    def round_to(self, precision_bits: int) -> ExtReal:
        return ExtReal(self, precision_bits)

    def ulp(self) -> ExtReal:
        """Unit in the last place at this value's precision (ulp(0) = ulp(0.5))."""
        exp = 0 if self.is_zero() or not self.is_finite() else gmpy2.get_exp(self.value)
        p = self.precision_bits
        return ExtReal._wrap(context(p).mul_2exp(1, exp - p), p)

    def to_decimal(self, digits: int | None = None) -> str:
        """Scientific-notation string with ``digits`` significant digits."""
        if digits is None:
            digits = decimal_digits(self.precision_bits)
        v = self.value
        if gmpy2.is_nan(v):
            return "nan"
        if gmpy2.is_infinite(v):
            return "inf" if v > 0 else "-inf"
        mant, exp, _ = gmpy2.digits(v, 10, digits)
        sign = ""
        if mant.startswith("-"):
            sign, mant = "-", mant[1:]
        if gmpy2.is_zero(v):
            mant, exp = "0" * digits, 1
        mant = mant.ljust(digits, "0")
        head, tail = mant[0], mant[1:]
        body = f"{head}.{tail}" if tail else head
        return f"{sign}{body}e{exp - 1:+03d}"

    @classmethod
    def from_decimal(cls, text: str, precision_bits: int = DEFAULT_PRECISION) -> ExtReal:
        return cls(text, precision_bits)

    def __str__(self):
        return self.to_decimal()

    def __repr__(self):
        return f"ExtReal('{self.to_decimal()}', {self.precision_bits})"


def as_ext(x: Number, precision_bits: int = DEFAULT_PRECISION) -> ExtReal:
    """Return ``x`` unchanged if it is already an ExtReal, else convert it."""
    return x if isinstance(x, ExtReal) else ExtReal(x, precision_bits)


# -- constants and elementary functions -----------------------------------


def const_pi(precision_bits: int = DEFAULT_PRECISION) -> ExtReal:
    check_precision(precision_bits)
    return ExtReal._wrap(context(precision_bits).const_pi(), precision_bits)


def const_ln2(precision_bits: int = DEFAULT_PRECISION) -> ExtReal:
    check_precision(precision_bits)
    return ExtReal._wrap(context(precision_bits).const_log2(), precision_bits)


def _unary(name: str, x: ExtReal) -> ExtReal:
    p = x.precision_bits
    return ExtReal._wrap(getattr(context(p), name)(x.value), p)


def sqrt(x: ExtReal) -> ExtReal:
    if x < 0:
        raise DomainError(f"sqrt of negative value {x}")
    return _unary("sqrt", x)


def exp(x: ExtReal) -> ExtReal:
    return _unary("exp", x)


def log(x: ExtReal) -> ExtReal:
    if not x > 0:
        raise DomainError(f"log requires a positive argument, got {x}")
    return _unary("log", x)


def sin(x: ExtReal) -> ExtReal:
    return _unary("sin", x)


def cos(x: ExtReal) -> ExtReal:
    return _unary("cos", x)


def tan(x: ExtReal) -> ExtReal:
    return _unary("tan", x)


# -- compensated summation ------------------------------------------------


def neumaier_sum(values: Iterable[mpfr], ctx: gmpy2.context) -> mpfr:
    """Compensated sum of raw MPFR values, in input order, rounded in ``ctx``.

    Hot-loop form of :class:`SumAccumulator`; the caller checks finiteness
    of the result (any non-finite term propagates to it).
    """
    add, sub, cmp_abs = ctx.add, ctx.sub, gmpy2.cmp_abs
    s = mpfr(0)
    c = mpfr(0)
    for v in values:
        t = add(s, v)
        if cmp_abs(s, v) >= 0:
            c = add(c, add(sub(s, t), v))
        else:
            c = add(c, add(sub(v, t), s))
        s = t
    return add(s, c)


class SumAccumulator:
    """Running Neumaier sum at a fixed precision.

    Incoming terms are rounded to the accumulator precision before being
    added.  After k terms of magnitude at most B the accumulated error stays
    below 2*k*ulp(B).
    """

    def __init__(self, precision_bits: int = DEFAULT_PRECISION):
        self.precision_bits = check_precision(precision_bits)
        self._ctx = context(precision_bits)
        self._s = mpfr(0)
        self._c = mpfr(0)
        self.term_count = 0

    def add(self, term: Number) -> None:
        if isinstance(term, ExtReal):
            v = term.value
        elif isinstance(term, Fraction):
            v = gmpy2.mpq(term.numerator, term.denominator)
        else:
            v = term
        if isinstance(v, (float, type(mpfr(0)))) and not gmpy2.is_finite(v):
            raise NonFiniteInputError(f"term #{self.term_count} is not finite: {term!r}")
        ctx = self._ctx
        v = ctx.plus(v)
        t = ctx.add(self._s, v)
        if gmpy2.cmp_abs(self._s, v) >= 0:
            self._c = ctx.add(self._c, ctx.add(ctx.sub(self._s, t), v))
        else:
            self._c = ctx.add(self._c, ctx.add(ctx.sub(v, t), self._s))
        self._s = t
        self.term_count += 1

    def extend(self, terms: Iterable[Number]) -> None:
        for term in terms:
            self.add(term)

    @property
    def running_total(self) -> ExtReal:
        return ExtReal._wrap(self._s, self.precision_bits)

    @property
    def compensation(self) -> ExtReal:
        return ExtReal._wrap(self._c, self.precision_bits)

    def total(self) -> ExtReal:
        return ExtReal._wrap(self._ctx.add(self._s, self._c), self.precision_bits)


def compensated_sum(terms: Iterable[Number], precision_bits: int | None = None) -> ExtReal:
    """Sum ``terms`` in the given order with Neumaier compensation.

    The result precision is ``precision_bits`` if given, otherwise the widest
    precision among the ExtReal terms (DEFAULT_PRECISION for an empty list
    or plain numbers).
    """
    terms = list(terms)
    if precision_bits is None:
        precs = [t.precision_bits for t in terms if isinstance(t, ExtReal)]
        precision_bits = max(precs, default=DEFAULT_PRECISION)
    acc = SumAccumulator(precision_bits)
    acc.extend(terms)
    return acc.total()


# -- trig grids -----------------------------------------------------------


def grid_precision(precision_bits: int, n: int) -> int:
    """Working precision for evaluating an n-point trig grid to precision_bits.

    Covers the error growth of :func:`trig_progression` between anchors and
    the loss from arguments near multiples of pi.
    """
    return precision_bits + GUARD_BITS + 2 * ANCHOR_INTERVAL.bit_length() + max(n, 1).bit_length()


def trig_progression(
    kind: str, offset: mpfr, step: mpfr, start: int, stop: int, ctx: gmpy2.context
) -> Iterator[mpfr]:
    """Yield f(offset + n*step) for n in range(start, stop), f in {sin, cos}.

    Values come from the three-term recurrence
    f(a + (n+1)h) = 2 cos(h) f(a + nh) - f(a + (n-1)h), re-seeded with two
    direct evaluations every ANCHOR_INTERVAL steps.  Within a block the
    absolute error grows like ANCHOR_INTERVAL**2 ulps; grid_precision()
    budgets for it.  Only ``ctx`` methods are used, so consumers may hold a
    different active context.
    """
    if kind == "sin":
        f = ctx.sin
    elif kind == "cos":
        f = ctx.cos
    else:
        raise ValueError(f"unknown trig kind {kind!r}")
    two_cos = ctx.mul(2, ctx.cos(step))
    fms, add, mul = ctx.fms, ctx.add, ctx.mul
    n = start
    while n < stop:
        prev = f(add(offset, mul(n - 1, step)))
        cur = f(add(offset, mul(n, step)))
        end = min(n + ANCHOR_INTERVAL, stop)
        while True:
            yield cur
            n += 1
            if n >= end:
                break
            prev, cur = cur, fms(two_cos, cur, prev)


# -- log-gamma ------------------------------------------------------------


@lru_cache(maxsize=8)
def _tangent_numbers(count: int) -> tuple[int, ...]:
    # Brent-Harvey in-place recurrence, T_1..T_count
    t = [0] * (count + 1)
    t[1] = 1
    for k in range(2, count + 1):
        t[k] = (k - 1) * t[k - 1]
    for k in range(2, count + 1):
        for j in range(k, count + 1):
            t[j] = (j - k) * t[j - 1] + (j - k + 2) * t[j]
    return tuple(t[1:])


def bernoulli_even(count: int) -> list[Fraction]:
    """Exact B_2, B_4, ..., B_{2*count}."""
    # round the table size up so nearby precisions share one cache entry
    size = max(64, -(-count // 64) * 64)
    tangents = _tangent_numbers(size)
    out = []
    for k in range(1, count + 1):
        four_k = 1 << (2 * k)
        num = 2 * k * tangents[k - 1]
        b = Fraction(num, four_k * (four_k - 1))
        out.append(b if k % 2 == 1 else -b)
    return out


def lngamma(x: ExtReal) -> ExtReal:
    """ln Gamma(x) for real x > 0, relative error below 2**(8 - precision).

    Shifts x upward by the recurrence Gamma(z+1) = z Gamma(z) until the
    Stirling series converges to the working precision, then sums that
    series with exact Bernoulli coefficients.  Extra bits are added near the
    zeros at x = 1 and x = 2 so the result stays relatively accurate there.
    """
    p = x.precision_bits
    v = x.value
    if not gmpy2.is_finite(v) or v <= 0:
        raise DomainError(f"lngamma requires x > 0, got {x}")
    if v == 1 or v == 2:
        return ExtReal(0, p)

    extra = 0
    probe = context(p + 64)
    for root in (1, 2):
        d = probe.sub(v, root)
        if not gmpy2.is_zero(d):
            extra = max(extra, -gmpy2.get_exp(d))
    wp = p + GUARD_BITS + 8 + min(extra, 4 * p)
    ctx = context(wp)

    # smallest z for which the truncated series reaches 2**-wp
    z_min = int(wp * math.log(2) / math.pi) + 2
    shift = max(0, math.ceil(z_min - float(v)))
    prod = mpfr(1)
    for k in range(shift):
        prod = ctx.mul(prod, ctx.add(v, k))
    z = ctx.add(v, shift)

    ln_z = ctx.log(z)
    half_ln_2pi = ctx.div(ctx.log(ctx.mul(2, ctx.const_pi())), 2)
    s = ctx.add(ctx.sub(ctx.mul(ctx.sub(z, 0.5), ln_z), z), half_ln_2pi)

    inv_z2 = ctx.div(1, ctx.square(z))
    zpow = ctx.div(1, z)
    eps = ctx.mul(ctx.mul_2exp(1, -wp - 2), max(ctx.abs(s), 1))
    count = wp // 5 + 16
    converged = False
    for k, b in enumerate(bernoulli_even(count), start=1):
        coef = ctx.div(gmpy2.mpq(b.numerator, b.denominator), 2 * k * (2 * k - 1))
        term = ctx.mul(coef, zpow)
        s = ctx.add(s, term)
        if gmpy2.cmp_abs(term, eps) < 0:
            converged = True
            break
        zpow = ctx.mul(zpow, inv_z2)
    if not converged:
        raise RuntimeError(f"Stirling series did not converge at {wp} bits")

    if shift:
        s = ctx.sub(s, ctx.log(prod))
    return ExtReal(s, p)
