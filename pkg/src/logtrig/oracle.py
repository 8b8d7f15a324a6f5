"""Tanh-sinh quadrature for integrands with logarithmic endpoint singularities.

This is an independent route to the registry integrals: it never touches
the product identities, only pointwise values of the integrands.

With x = c + r*tanh(pi/2 * sinh t), c and r the interval midpoint and
half-width, the integral becomes a doubly-exponentially decaying sum over
t = j*h.  Level k uses h = 2**-k and reuses every node of level k-1.
Nodes are generated in terms of their distance from the nearer endpoint,
at roughly twice the requested precision, so no node lands on an endpoint
even where the weights have fallen to 2**-(p+10).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import gmpy2
from gmpy2 import mpfr

from .errors import BadIntegrandError, InvalidParameterError, InvalidSplitError, NoConvergenceError
from .numerics import DEFAULT_PRECISION, ExtReal, check_precision, context, lngamma
from .riemann import IntegralTarget, TargetId, get_target

LEVEL_CAP = 12
LOWER = "lower"
UPPER = "upper"


@dataclass(frozen=True)
class QuadratureResult:
    value: ExtReal
    error_estimate: ExtReal
    node_count: int
    level: int
    cutoff: int = 0
    # |I_k - I_{k-1}| for k = 1..level
    level_estimates: tuple[float, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class IntegrandSpec:
    """An integrand on [lower, upper], finite at every strict interior point.

    ``evaluation`` maps an interior ExtReal x to an ExtReal value at the
    precision of x.
    """

    target: Optional[str]
    lower: ExtReal
    upper: ExtReal
    evaluation: Callable[[ExtReal], ExtReal]
    singular_endpoints: frozenset = frozenset()


def node_precision(precision_bits: int) -> int:
    return 2 * precision_bits + 64


def _cutoff(precision_bits: int) -> tuple[float, int]:
    """Largest t whose weight is still >= 2^-(p+10), and its ceiling."""
    target = -(precision_bits + 10) * math.log(2)

    def log_weight(t):
        u = math.pi / 2 * math.sinh(t)
        # log((pi/2) cosh t / cosh^2 u), with cosh u ~ e^u / 2
        return math.log(math.pi / 2 * math.cosh(t)) - 2 * (u - math.log(2) + math.log1p(math.exp(-2 * u)))

    lo, hi = 0.0, 1.0
    while log_weight(hi) > target:
        hi *= 2
    for _ in range(60):
        mid = (lo + hi) / 2
        if log_weight(mid) > target:
            lo = mid
        else:
            hi = mid
    return lo, math.ceil(lo)


def _level_nodes(level: int, t_max: float):
    """Abscissa indices j (t = j * 2^-level) new at this level, ascending."""
    scale = 1 << level
    j_max = int(math.floor(t_max * scale))
    if level == 0:
        return range(-j_max, j_max + 1)
    start = -j_max if j_max % 2 else -j_max + 1
    return range(start, j_max + 1, 2)


def _node(j: int, level: int, lo: mpfr, hi: mpfr, half: mpfr, ctx):
    """Node x and weight w (including the half-width) for t = j * 2^-level."""
    if j == 0:
        return ctx.add(lo, half), ctx.mul(half, ctx.div(ctx.const_pi(), 2))
    t = ctx.mul_2exp(abs(j), -level)
    sinh_t, cosh_t = ctx.sinh_cosh(t)
    u = ctx.mul(ctx.div(ctx.const_pi(), 2), sinh_t)
    e = ctx.exp(ctx.minus(ctx.mul(2, u)))  # e^{-2u}
    one_plus = ctx.add(1, e)
    # 1 - tanh u = 2 e^{-2u} / (1 + e^{-2u});  1/cosh^2 u = 4 e^{-2u} / (1 + e^{-2u})^2
    dist = ctx.mul(half, ctx.div(ctx.mul(2, e), one_plus))
    w = ctx.mul(
        ctx.mul(half, ctx.mul(ctx.div(ctx.const_pi(), 2), cosh_t)),
        ctx.div(ctx.mul(4, e), ctx.square(one_plus)),
    )
    x = ctx.sub(hi, dist) if j > 0 else ctx.add(lo, dist)
    return x, w


def tanh_sinh_integrate(
    spec: IntegrandSpec,
    abs_tol: ExtReal | float,
    precision_bits: int = DEFAULT_PRECISION,
) -> QuadratureResult:
    """Integrate ``spec`` over its interval to within ``abs_tol``.

    Levels are refined until two successive estimates agree to abs_tol; the
    reported error estimate is that last difference.  Raises
    NoConvergenceError past LEVEL_CAP and BadIntegrandError on a non-finite
    interior value.
    """
    check_precision(precision_bits)
    tol = abs_tol if isinstance(abs_tol, ExtReal) else ExtReal(abs_tol, precision_bits)
    floor = ExtReal(context(precision_bits).mul_2exp(1, 16 - precision_bits), precision_bits)
    if not tol > floor:
        raise InvalidParameterError(f"abs_tol must exceed 2^(16-p) = {float(floor):.3e}")
    if not (spec.lower.is_finite() and spec.upper.is_finite()) or not spec.lower < spec.upper:
        raise InvalidParameterError("integration interval must be finite with lower < upper")

    wp = node_precision(precision_bits)
    ctx = context(wp)
    lo = ctx.plus(spec.lower.value)
    hi = ctx.plus(spec.upper.value)
    half = ctx.div(ctx.sub(hi, lo), 2)
    t_max, cutoff = _cutoff(precision_bits)

    def f(x):
        try:
            y = spec.evaluation(ExtReal._wrap(x, wp))
        except (ValueError, ArithmeticError) as exc:
            raise BadIntegrandError(x) from exc
        if not y.is_finite():
            raise BadIntegrandError(x, y)
        return y.value

    raw = mpfr(0)  # sum of w*f over every node so far
    nodes = 0
    previous = None
    estimates: list[float] = []
    value = err = None
    for level in range(LEVEL_CAP + 1):
        contributions = []
        for j in _level_nodes(level, t_max):
            x, w = _node(j, level, lo, hi, half, ctx)
            contributions.append(ctx.mul(w, f(x)))
        nodes += len(contributions)
        # fixed node order keeps the result deterministic
        raw = ctx.add(raw, ctx.fsum(contributions))
        value = ctx.mul_2exp(raw, -level)
        if previous is not None:
            err = ctx.abs(ctx.sub(value, previous))
            estimates.append(float(err))
            if err <= tol.value:
                return QuadratureResult(
                    ExtReal(value, precision_bits),
                    ExtReal(err, precision_bits),
                    nodes,
                    level,
                    cutoff,
                    tuple(estimates),
                )
        previous = value
    raise NoConvergenceError(ExtReal(value, precision_bits), ExtReal(err, precision_bits), LEVEL_CAP)


def split_at_interior_singularity(spec: IntegrandSpec, points: Sequence[ExtReal]) -> list[IntegrandSpec]:
    """Cut ``spec`` at sorted interior points; each cut becomes a singular endpoint."""
    points = list(points)
    for a, b in zip(points, points[1:]):
        if not a < b:
            raise InvalidSplitError(f"split points must be strictly increasing: {a} >= {b}")
    for pt in points:
        if not spec.lower < pt < spec.upper:
            raise InvalidSplitError(f"split point {pt} is not strictly inside the interval")
    if not points:
        return [spec]
    edges = [spec.lower, *points, spec.upper]
    pieces = []
    for i, (a, b) in enumerate(zip(edges, edges[1:])):
        sing = set()
        if i > 0 or LOWER in spec.singular_endpoints:
            sing.add(LOWER)
        if i < len(points) or UPPER in spec.singular_endpoints:
            sing.add(UPPER)
        pieces.append(replace(spec, lower=a, upper=b, singular_endpoints=frozenset(sing)))
    return pieces


# -- registry integrands ---------------------------------------------------


def _log_sin(x: ExtReal) -> ExtReal:
    ctx = context(x.precision_bits)
    return ExtReal._wrap(ctx.log(ctx.sin(x.value)), x.precision_bits)


def _log_cos(x: ExtReal) -> ExtReal:
    ctx = context(x.precision_bits)
    return ExtReal._wrap(ctx.log(ctx.cos(x.value)), x.precision_bits)


def _log_tan(x: ExtReal) -> ExtReal:
    ctx = context(x.precision_bits)
    return ExtReal._wrap(ctx.log(ctx.tan(x.value)), x.precision_bits)


def log_abs_sin_shifted(theta: ExtReal) -> Callable[[ExtReal], ExtReal]:
    """x -> ln|sin(pi x + theta)|, evaluated at the precision of x."""

    def evaluate(x: ExtReal) -> ExtReal:
        ctx = context(max(x.precision_bits, theta.precision_bits))
        arg = ctx.add(ctx.mul(ctx.const_pi(), x.value), theta.value)
        return ExtReal._wrap(ctx.log(ctx.abs(ctx.sin(arg))), ctx.precision)

    return evaluate


def integrand_for(target: IntegralTarget) -> IntegrandSpec:
    tid = target.id
    both = frozenset({LOWER, UPPER})
    if tid is TargetId.LOG_SIN_0_PI:
        return IntegrandSpec(tid.value, target.lower, target.upper, _log_sin, both)
    if tid is TargetId.LOG_SIN_0_HALFPI:
        return IntegrandSpec(tid.value, target.lower, target.upper, _log_sin, frozenset({LOWER}))
    if tid is TargetId.LOG_COS_0_HALFPI:
        return IntegrandSpec(tid.value, target.lower, target.upper, _log_cos, frozenset({UPPER}))
    if tid is TargetId.LOG_TAN_0_HALFPI:
        return IntegrandSpec(tid.value, target.lower, target.upper, _log_tan, both)
    if tid is TargetId.LOG_GAMMA_0_1:
        return IntegrandSpec(tid.value, target.lower, target.upper, lngamma, frozenset({LOWER}))
    sing = frozenset()
    theta = target.theta
    ctx = context(theta.precision_bits + 64)
    if gmpy2.is_zero(ctx.sin(theta.value)):
        sing = both
    return IntegrandSpec(tid.value, target.lower, target.upper, log_abs_sin_shifted(theta), sing)


def shifted_zero(theta: ExtReal, precision_bits: int) -> Optional[ExtReal]:
    """The x in (0, 1) where sin(pi x + theta) = 0, located by bisection.

    sin(theta) and sin(pi + theta) = -sin(theta) have opposite signs, so
    exactly one zero lies strictly inside (0, 1) unless theta is a multiple
    of pi, in which case None is returned.
    """
    wp = node_precision(precision_bits)
    ctx = context(wp)
    pi = ctx.const_pi()

    def g(x):
        return ctx.sin(ctx.add(ctx.mul(pi, x), theta.value))

    a, b = mpfr(0), mpfr(1)
    ga = g(a)
    if gmpy2.is_zero(ga) or gmpy2.cmp_abs(ga, ctx.mul_2exp(1, -wp + 8)) < 0:
        return None
    for _ in range(wp + 2):
        mid = ctx.div(ctx.add(a, b), 2)
        if mid == a or mid == b:
            break
        gm = g(mid)
        if gmpy2.is_zero(gm):
            a = b = mid
            break
        if (gm > 0) == (ga > 0):
            a, ga = mid, gm
        else:
            b = mid
    return ExtReal(ctx.div(ctx.add(a, b), 2), wp)


def oracle_integrate(target: IntegralTarget, abs_tol: ExtReal | float, precision_bits: int | None = None) -> QuadratureResult:
    """Quadrature value of a registry target, splitting at interior zeros."""
    p = target.precision_bits if precision_bits is None else check_precision(precision_bits)
    spec = integrand_for(target)
    pieces = [spec]
    if target.id is TargetId.LOG_ABS_SIN_SHIFTED:
        x0 = shifted_zero(target.theta, p)
        if x0 is not None:
            pieces = split_at_interior_singularity(spec, [x0])
    if len(pieces) == 1:
        return tanh_sinh_integrate(pieces[0], abs_tol, p)
    parts = [tanh_sinh_integrate(piece, abs_tol, p) for piece in pieces]
    ctx = context(p)
    return QuadratureResult(
        value=ExtReal(ctx.fsum([r.value.value for r in parts]), p),
        error_estimate=ExtReal(ctx.fsum([r.error_estimate.value for r in parts]), p),
        node_count=sum(r.node_count for r in parts),
        level=max(r.level for r in parts),
        cutoff=parts[0].cutoff,
    )


def oracle_check(
    target: IntegralTarget, abs_tol: ExtReal | float, precision_bits: int | None = None
) -> tuple[QuadratureResult, ExtReal]:
    """Integrate ``target`` and return (result, |value - closed_form|)."""
    result = oracle_integrate(target, abs_tol, precision_bits)
    p = result.value.precision_bits
    return result, abs(result.value - target.closed_form.round_to(p))


def shifted_target(theta: ExtReal | float | str, precision_bits: int = DEFAULT_PRECISION) -> IntegralTarget:
    return get_target(TargetId.LOG_ABS_SIN_SHIFTED, precision_bits, theta)
