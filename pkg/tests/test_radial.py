"""Radial profile evaluation and cumulative ball integrals."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp

from padic_ialpha import (
    ZERO,
    Indicator,
    LinearCombo,
    LogPower,
    MissingTail,
    Monomial,
    NumericContext,
    OuterTail,
    ParamOutOfRange,
    PowerTail,
    Table,
    UndefinedAtZero,
    ZeroTail,
    ball_power_integral,
    cumulative_ball_integral,
    eval_sphere,
    origin_expansion,
    outer_expansion,
)


class TestEvalSphere:
    def test_monomial(self, exact2):
        assert eval_sphere(Monomial(2), -3, exact2) == Fraction(1, 64)

    def test_indicator(self, exact2):
        f = Indicator(0)
        assert eval_sphere(f, 1, exact2) == 0
        assert eval_sphere(f, -5, exact2) == 1
        assert eval_sphere(f, 0, exact2) == 1

    def test_log_power_value(self, ctx3):
        # 3**-2 * (4 ln 3)**2, evaluated independently
        f = LogPower(0.5, 2.0)
        with ctx3.workprec():
            oracle = mp.mpf(3) ** -2 * (4 * mp.log(3)) ** 2
        got = eval_sphere(f, 4, ctx3)
        assert abs(float(got - oracle)) < 1e-50
        assert float(got) == pytest.approx(2.14568704144, rel=1e-11)

    def test_log_power_cap_values(self, ctx2):
        assert float(eval_sphere(LogPower(0.5, 2.0), 0, ctx2)) == 0.0
        assert float(eval_sphere(LogPower(0.5, 2.0), -4, ctx2)) == 0.0
        assert float(eval_sphere(LogPower(2.0, 0.0), 0, ctx2)) == 1.0
        assert float(eval_sphere(LogPower(2.0, 0.0), -4, ctx2)) == 1.0
        assert float(eval_sphere(LogPower(2.0, 0.0), 3, ctx2)) == 2.0 ** -6

    def test_limits_at_zero(self, ctx2):
        assert float(eval_sphere(Monomial(2), ZERO, ctx2)) == 0.0
        assert float(eval_sphere(Monomial(0), ZERO, ctx2)) == 1.0
        with pytest.raises(UndefinedAtZero):
            eval_sphere(Monomial(-0.5), ZERO, ctx2)
        assert float(eval_sphere(LogPower(1.0, 1.0), ZERO, ctx2)) == 0.0
        assert float(eval_sphere(Indicator(0), ZERO, ctx2)) == 1.0

    def test_table_lookup_and_tails(self, ctx2):
        tab = Table.from_values(
            {-1: 0.25, 0: 0.5, 1: 0.125},
            PowerTail(1.0, 1.0),
            OuterTail(1.0, 0.0, (1.0,)),
        )
        assert float(eval_sphere(tab, 0, ctx2)) == 0.5
        assert float(eval_sphere(tab, -3, ctx2)) == 0.125  # inner model 2**j
        assert float(eval_sphere(tab, 3, ctx2)) == 0.125  # outer model 2**-j

    def test_table_missing_tails(self, ctx2):
        tab = Table.from_values({0: 1.0}, None)
        with pytest.raises(MissingTail):
            eval_sphere(tab, -1, ctx2)
        tab2 = Table.from_values({0: 1.0}, ZeroTail())
        assert float(eval_sphere(tab2, -1, ctx2)) == 0.0
        with pytest.raises(MissingTail):
            eval_sphere(tab2, 1, ctx2)

    def test_table_contiguity_enforced(self):
        with pytest.raises(ParamOutOfRange):
            Table.from_values({0: 1.0, 2: 1.0}, ZeroTail())

    def test_linear_combo(self, exact2):
        f = LinearCombo(((2, Monomial(1)), (-1, Indicator(0))))
        assert eval_sphere(f, -1, exact2) == Fraction(2, 2) - 1


class TestCumulativeBallIntegral:
    def test_constant_profile_gives_ball_measure(self):
        ctx = NumericContext(3, exact=True)
        assert cumulative_ball_integral(Indicator(10**6), 2, ctx) == 9

    def test_monomial_matches_ball_power_integral(self, ctx2, ctx3):
        for ctx, alpha in [(ctx2, 2.0), (ctx2, 1.5), (ctx3, 3.0)]:
            for n in (-3, 0, 4):
                got = cumulative_ball_integral(Monomial(alpha - 1), n, ctx)
                want = ball_power_integral(ctx, alpha, n)
                assert abs(float(got - want)) <= 1e-40 * abs(float(want))

    def test_geometric_closed_form(self, ctx2):
        # (1 - 1/p) / (1 - p**-(M+1)) * p**(n(M+1)) at M=1, n=0, p=2
        got = cumulative_ball_integral(Monomial(1), 0, ctx2)
        assert float(got) == pytest.approx(2.0 / 3.0, rel=1e-30)

    def test_zero_radius(self, ctx2):
        assert float(cumulative_ball_integral(Monomial(1), ZERO, ctx2)) == 0.0

    def test_divergent_inner_sum_rejected(self, ctx2):
        tab = Table.from_values({0: 1.0}, PowerTail(1.0, -0.9))
        # integrable: fine
        cumulative_ball_integral(tab, 0, ctx2)
        with pytest.raises(ParamOutOfRange):
            PowerTail(1.0, -1.0)

    def test_missing_tail_propagates(self, ctx2):
        tab = Table.from_values({0: 1.0}, None)
        with pytest.raises(MissingTail):
            cumulative_ball_integral(tab, 0, ctx2)

    @given(
        a=st.floats(-4, 4, allow_nan=False).map(lambda c: round(c, 3)),
        b=st.floats(-4, 4, allow_nan=False).map(lambda c: round(c, 3)),
    )
    @settings(max_examples=40, deadline=None)
    def test_linearity(self, a, b):
        ctx = NumericContext(2)
        f, g = Monomial(1.0), Indicator(0)
        combo = LinearCombo(((a, f), (b, g)))
        lhs = cumulative_ball_integral(combo, 3, ctx)
        with ctx.workprec():
            rhs = (
                ctx.real(a) * cumulative_ball_integral(f, 3, ctx)
                + ctx.real(b) * cumulative_ball_integral(g, 3, ctx)
            )
            assert abs(float(lhs - rhs)) <= 1e-40 * (1 + abs(float(rhs)))

    def test_monotone_in_radius_for_nonnegative(self, ctx2):
        f = LogPower(0.7, 0.0)
        values = [float(cumulative_ball_integral(f, n, ctx2)) for n in range(-5, 20)]
        assert all(x <= y for x, y in zip(values, values[1:]))

    def test_power_tail_decay_normalisation(self, ctx2):
        # G(p**m) p**(-m(1-lam)) decreases strictly for a profile decaying
        # faster than |y|**-lam (lam = 0.5 against true decay 0.7)
        f = LogPower(0.7, 0.0)
        rows = []
        for m in range(10, 41):
            g = cumulative_ball_integral(f, m, ctx2)
            rows.append(float(g * ctx2.p_pow(-0.5 * m)))
        assert all(a > b for a, b in zip(rows, rows[1:]))
        assert rows[-1] < rows[0] / 10


class TestDeclaredExpansions:
    def test_origin_expansion_monomial(self):
        assert origin_expansion(Monomial(1.5)) == ((1.0,), (1.5,))

    def test_origin_expansion_combo_sorted(self):
        f = LinearCombo(((2.0, Monomial(2.0)), (1.0, Monomial(1.0))))
        coeffs, degrees = origin_expansion(f)
        assert degrees == (1.0, 2.0)
        assert coeffs == (1.0, 2.0)

    def test_origin_expansion_none_for_table(self):
        assert origin_expansion(Table.from_values({0: 1.0}, ZeroTail())) is None

    def test_outer_expansion_log_power(self):
        assert outer_expansion(LogPower(0.5, 2.0)) == (0.5, 2.0, (1.0,))

    def test_outer_expansion_combo(self):
        f = LinearCombo(
            ((1.0, LogPower(1.0, 2.0)), (-0.5, LogPower(1.0, 1.0)))
        )
        beta, gamma, coeffs = outer_expansion(f)
        assert beta == 1.0 and gamma == 2.0
        assert coeffs == (1.0, -0.5)

    def test_outer_expansion_mixed_betas_rejected(self):
        f = LinearCombo(((1.0, LogPower(1.0, 1.0)), (1.0, LogPower(0.5, 1.0))))
        assert outer_expansion(f) is None
