"""Radial profiles f(|x|_p) with declared tails and certified ball integrals.

A radial function is determined by its values on the sphere radii p**j.  The
forms below carry enough tail information (a power model toward the origin,
an optional log-power model toward infinity) for every downstream sphere sum
to be truncated with a computed, not estimated, remainder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .core import (
    ZERO,
    DivergentInnerSum,
    MissingTail,
    NumericContext,
    ParamOutOfRange,
    UndefinedAtZero,
    _require_finite,
    general_power,
    sphere_measure,
)

__all__ = [
    "Indicator",
    "InnerModel",
    "LinearCombo",
    "LogPower",
    "Monomial",
    "OuterTail",
    "PowerTail",
    "RadialFunction",
    "Table",
    "ZeroTail",
    "cumulative_ball_integral",
    "eval_sphere",
    "inner_model",
    "origin_expansion",
    "outer_expansion",
]


# ---------------------------------------------------------------------------
# Tail declarations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerTail:
    """Inner tail model f(p**j) = coeff * p**(j*degree) for small radii.

    degree > -1 keeps the inner sphere sum convergent.
    """

    coeff: float = 1.0
    degree: float = 0.0

    def __post_init__(self):
        if float(self.degree) <= -1:
            raise ParamOutOfRange("inner tail degree must exceed -1")


@dataclass(frozen=True)
class ZeroTail:
    """Inner tail model f = 0 for small radii."""


@dataclass(frozen=True)
class OuterTail:
    """Large-radius model f(p**j) ~ p**(-j*beta) * sum_k coeffs[k] * log(p**j)**(gamma-k)."""

    beta: float
    gamma: float
    coeffs: tuple[float, ...]

    def __post_init__(self):
        if not 0 <= float(self.beta) <= 1:
            raise ParamOutOfRange("outer tail beta must lie in [0, 1]")
        if float(self.gamma) < 0:
            raise ParamOutOfRange("outer tail gamma must be nonnegative")
        if len(self.coeffs) == 0:
            raise ParamOutOfRange("outer tail needs at least one coefficient")
        object.__setattr__(self, "coeffs", tuple(self.coeffs))


# ---------------------------------------------------------------------------
# Profile forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Monomial:
    """f(|x|) = |x|**degree; degree > -1 keeps f integrable at the origin."""

    degree: float

    def __post_init__(self):
        if float(self.degree) <= -1:
            raise ParamOutOfRange("monomial degree must exceed -1")


@dataclass(frozen=True)
class LogPower:
    """f(|x|) = |x|**(-beta) * log(|x|)**gamma on |x| > 1.

    On |x| <= 1 the profile takes the capped boundary value: 0 for gamma > 0
    (log 1 = 0) and 1 for gamma = 0 (the pure power frozen at |x| = 1).  Only
    the large-radius behaviour matters downstream; the choice near the origin
    is bounded and explicit.
    """

    beta: float
    gamma: float = 0.0

    def __post_init__(self):
        if float(self.gamma) < 0:
            raise ParamOutOfRange("gamma must be nonnegative")


@dataclass(frozen=True)
class Indicator:
    """f = 1 on the ball |x| <= p**n, else 0."""

    n: int


@dataclass(frozen=True)
class Table:
    """Sphere values on a contiguous exponent range with declared tails.

    ``values[i]`` is f(p**(j_lo + i)).  Evaluation below the range uses the
    inner tail model, above the range the outer tail model; silent
    extrapolation is forbidden.
    """

    j_lo: int
    values: tuple
    inner_tail: Union[PowerTail, ZeroTail, None]
    outer_tail: OuterTail | None = None

    def __post_init__(self):
        if len(self.values) == 0:
            raise ParamOutOfRange("a table needs at least one value")
        object.__setattr__(self, "values", tuple(self.values))

    @property
    def j_hi(self) -> int:
        return self.j_lo + len(self.values) - 1

    @classmethod
    def from_values(cls, values: dict, inner_tail, outer_tail=None) -> "Table":
        """Build from an exponent -> value mapping covering a contiguous range."""
        keys = sorted(values)
        if keys != list(range(keys[0], keys[-1] + 1)):
            raise ParamOutOfRange("table exponents must form a contiguous range")
        return cls(keys[0], tuple(values[k] for k in keys), inner_tail, outer_tail)


@dataclass(frozen=True)
class LinearCombo:
    """Weighted sum of radial profiles."""

    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((c, f) for c, f in self.terms))


RadialFunction = Union[Monomial, LogPower, Indicator, Table, LinearCombo]


# ---------------------------------------------------------------------------
# Point evaluation
# ---------------------------------------------------------------------------

def eval_sphere(f: RadialFunction, j, ctx: NumericContext):
    """Value of the profile on the sphere |x| = p**j (j = ZERO: limit at 0)."""
    with ctx.workprec():
        if j is ZERO:
            return _value_at_origin(f, ctx)
        j = _require_finite(j, "sphere exponent")
        if isinstance(f, Monomial):
            return ctx.p_pow(_mul_exp(f.degree, j))
        if isinstance(f, LogPower):
            if j <= 0:
                return ctx.real(1) if float(f.gamma) == 0 else ctx.real(0)
            return _log_power_value(ctx, j, f.beta, f.gamma)
        if isinstance(f, Indicator):
            return ctx.real(1) if j <= f.n else ctx.real(0)
        if isinstance(f, Table):
            if f.j_lo <= j <= f.j_hi:
                return ctx.real(f.values[j - f.j_lo])
            if j < f.j_lo:
                return _inner_tail_value(f.inner_tail, j, ctx)
            return _outer_tail_value(f.outer_tail, j, ctx)
        if isinstance(f, LinearCombo):
            total = ctx.real(0)
            for c, g in f.terms:
                total += ctx.real(c) * eval_sphere(g, j, ctx)
            return total
    raise TypeError(f"not a radial function: {f!r}")


def _value_at_origin(f: RadialFunction, ctx: NumericContext):
    if isinstance(f, Monomial):
        d = float(f.degree)
        if d > 0:
            return ctx.real(0)
        if d == 0:
            return ctx.real(1)
        raise UndefinedAtZero("negative-degree monomial has no limit at 0")
    if isinstance(f, LogPower):
        return ctx.real(1) if float(f.gamma) == 0 else ctx.real(0)
    if isinstance(f, Indicator):
        return ctx.real(1)
    if isinstance(f, Table):
        tail = f.inner_tail
        if tail is None:
            raise MissingTail("table has no inner tail")
        if isinstance(tail, ZeroTail):
            return ctx.real(0)
        d = float(tail.degree)
        if d > 0:
            return ctx.real(0)
        if d == 0:
            return ctx.real(tail.coeff)
        raise UndefinedAtZero("negative-degree inner tail has no limit at 0")
    if isinstance(f, LinearCombo):
        total = ctx.real(0)
        for c, g in f.terms:
            total += ctx.real(c) * _value_at_origin(g, ctx)
        return total
    raise TypeError(f"not a radial function: {f!r}")


def _log_power_value(ctx: NumericContext, j: int, beta, gamma):
    value = ctx.p_pow(_mul_exp(_neg(beta), j))
    if float(gamma) != 0:
        value = value * general_power(ctx, j * ctx.log_unit(), gamma)
    return value


def _inner_tail_value(tail, j: int, ctx: NumericContext):
    if tail is None:
        raise MissingTail(f"no inner tail declared below the table range (j={j})")
    if isinstance(tail, ZeroTail):
        return ctx.real(0)
    return ctx.real(tail.coeff) * ctx.p_pow(_mul_exp(tail.degree, j))


def _outer_tail_value(tail, j: int, ctx: NumericContext):
    if tail is None:
        raise MissingTail(f"no outer tail declared above the table range (j={j})")
    log_r = j * ctx.log_unit()
    value = ctx.real(0)
    for k, a in enumerate(tail.coeffs):
        value += ctx.real(a) * general_power(ctx, log_r, _diffk(tail.gamma, k))
    return ctx.p_pow(_mul_exp(_neg(tail.beta), j)) * value


def _as_number(x):
    return x if isinstance(x, (int, Fraction)) else float(x)


def _neg(x):
    return -_as_number(x)


def _diffk(gamma, k: int):
    return _as_number(gamma) - k


def _mul_exp(degree, j: int):
    return _as_number(degree) * j


# ---------------------------------------------------------------------------
# Inner models and cumulative integrals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InnerModel:
    """Exact small-radius description: f(p**j) = coeff * p**(j*degree) for j <= valid_upto.

    ``valid_upto=None`` means the model holds at every exponent.  A zero
    model is encoded as coeff = 0.
    """

    coeff: float
    degree: float
    valid_upto: int | None

    @property
    def is_zero(self) -> bool:
        return float(self.coeff) == 0


def inner_model(f: RadialFunction, ctx: NumericContext) -> InnerModel:
    """The exact inner power model of a non-composite profile."""
    if isinstance(f, Monomial):
        return InnerModel(1.0, f.degree, None)
    if isinstance(f, LogPower):
        if float(f.gamma) == 0:
            return InnerModel(1.0, 0.0, 0)
        return InnerModel(0.0, 0.0, 0)
    if isinstance(f, Indicator):
        return InnerModel(1.0, 0.0, f.n)
    if isinstance(f, Table):
        tail = f.inner_tail
        if tail is None:
            raise MissingTail("table has no inner tail")
        if isinstance(tail, ZeroTail):
            return InnerModel(0.0, 0.0, f.j_lo - 1)
        return InnerModel(tail.coeff, tail.degree, f.j_lo - 1)
    raise TypeError(f"no single inner model for {f!r}")


def _explicit_cut(ctx: NumericContext, top: int, model: InnerModel) -> int:
    """Lowest explicitly summed exponent.

    Below the cut the sphere sum continues in closed form from the inner
    model; the cut leaves enough explicit terms that the closed-form tail is
    below rel_tol of any total it can influence, and never rises above the
    exponent where the model becomes exact.
    """
    if model.is_zero:
        ceiling = top + 1 if model.valid_upto is None else model.valid_upto + 1
        return min(ceiling, top + 1)
    decay = float(model.degree) + 1.0
    if decay <= 0:
        raise DivergentInnerSum(
            f"inner degree {model.degree} is not integrable at the origin"
        )
    span = math.ceil(math.log(1.0 / ctx.rel_tol) / (decay * math.log(ctx.prime))) + 4
    cut = top - span + 1
    if model.valid_upto is not None:
        cut = min(cut, model.valid_upto + 1)
    return cut


def _geometric_ball_sum(ctx: NumericContext, top: int, rate):
    """Sum of p**(j*rate) over j <= top (requires rate > 0)."""
    one = ctx.real(1)
    return ctx.p_pow(_mul_exp(rate, top)) / (one - ctx.p_pow(_neg(rate)))


def cumulative_ball_integral(f: RadialFunction, n, ctx: NumericContext):
    """Integral of f over the ball |y| <= p**n via sphere decomposition.

    Spheres above the inner cut are summed explicitly; the remaining tail is
    the closed geometric form of the declared inner model, so the remainder
    is certified rather than estimated.
    """
    if n is ZERO:
        return ctx.real(0)
    n = _require_finite(n)
    with ctx.workprec():
        if isinstance(f, LinearCombo):
            total = ctx.real(0)
            for c, g in f.terms:
                total += ctx.real(c) * cumulative_ball_integral(g, n, ctx)
            return total
        model = inner_model(f, ctx)
        cut = _explicit_cut(ctx, n, model)
        total = ctx.real(0)
        for j in range(cut, n + 1):
            total += eval_sphere(f, j, ctx) * sphere_measure(ctx, j)
        if not model.is_zero:
            unit = ctx.real(1) - ctx.p_pow(-1)
            rate = _as_number(model.degree) + 1
            total += (
                ctx.real(model.coeff) * unit * _geometric_ball_sum(ctx, cut - 1, rate)
            )
        return total


# ---------------------------------------------------------------------------
# Declared expansions (used to match profiles against predictions)
# ---------------------------------------------------------------------------

def origin_expansion(f: RadialFunction):
    """Declared origin-side monomial expansion (coeffs, degrees), or None.

    Only pure monomials and linear combinations of monomials expose one;
    tabulated profiles must be given their expansion explicitly.
    """
    if isinstance(f, Monomial):
        return (1.0,), (f.degree,)
    if isinstance(f, LinearCombo):
        pairs = []
        for c, g in f.terms:
            if not isinstance(g, Monomial):
                return None
            pairs.append((float(g.degree), float(c)))
        pairs.sort()
        degrees = tuple(d for d, _ in pairs)
        if any(x >= y for x, y in zip(degrees, degrees[1:])):
            return None
        return tuple(c for _, c in pairs), degrees
    return None


def outer_expansion(f: RadialFunction):
    """Declared large-radius expansion (beta, gamma, coeffs), or None.

    The coefficient list aligns with log powers gamma, gamma-1, ... as in
    :class:`OuterTail`.
    """
    if isinstance(f, LogPower):
        return f.beta, f.gamma, (1.0,)
    if isinstance(f, Table):
        if f.outer_tail is None:
            return None
        return f.outer_tail.beta, f.outer_tail.gamma, f.outer_tail.coeffs
    if isinstance(f, LinearCombo):
        parts = []
        for c, g in f.terms:
            if not isinstance(g, LogPower):
                return None
            parts.append((float(c), float(g.beta), float(g.gamma)))
        betas = {b for _, b, _ in parts}
        if len(betas) != 1:
            return None
        beta = betas.pop()
        gamma = max(g for _, _, g in parts)
        coeffs: dict[int, float] = {}
        for c, _, g in parts:
            offset = gamma - g
            if abs(offset - round(offset)) > 1e-9:
                return None
            coeffs[round(offset)] = coeffs.get(round(offset), 0.0) + c
        out = [0.0] * (max(coeffs) + 1)
        for k, c in coeffs.items():
            out[k] = c
        return beta, gamma, tuple(out)
    return None
