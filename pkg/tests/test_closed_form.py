import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ccbond import closed_form as cf
from ccbond.errors import NonPositiveXError, RegimeMismatch
from ccbond.model import ModelParams, RegimeTag, char_roots, classify_regime
from ccbond.strategies import StrategyKind

import mp_oracle
from conftest import TOY

# frozen from mp_oracle.py (smooth-fit systems solved at 40 digits)
X_CO = 0.66666666666666667
V_CO = {0.1: 0.50375, 0.3: 0.53375, 0.5: 0.59375, 1.0: 0.85802469135802469, 2.0: 1.5061728395061728}
FIRM = {"A": 0.053333333333333333, "B": -0.02, "C": 0.064737143432622242, "x_ca": 0.52414827884177932}
V_F = {0.1: 0.50363991860306791, 0.3: 0.53275926742761121, 0.55: 0.61012297632875276,
       1.0: 0.85663870496907734, 2.0: 1.505826342908936}
Z = 0.9047545763711193
LOW = {1e-4: 0.43333333333416667, 0.3: 0.45583333333333333, 1.0: 0.84186666666666667}
LOW_AB = 0.053333333333333333


class TestBondholder:
    def test_threshold(self):
        assert cf.threshold_co(TOY) == pytest.approx(X_CO, rel=1e-14)

    @pytest.mark.parametrize("x", sorted(V_CO))
    def test_values(self, x):
        assert cf.value_co(TOY, x) == pytest.approx(V_CO[x], rel=1e-13)

    def test_vectorised_matches_scalar(self):
        xs = np.array(sorted(V_CO))
        assert np.allclose(cf.value_co(TOY, xs), [V_CO[x] for x in xs], rtol=1e-13)

    def test_unconstrained_threshold(self):
        assert cf.threshold_co_unconstrained(TOY) == pytest.approx(1.0, rel=1e-14)

    def test_increasing_convex_single_crossing(self):
        x = np.geomspace(1e-3, 50, 1000)
        v = cf.value_co(TOY, x)
        assert np.all(np.diff(v) > 0)
        slope = np.diff(v) / np.diff(x)
        assert np.all(np.diff(slope) > -1e-12)
        d = v - TOY.gamma * x
        xs = cf.threshold_co(TOY)
        assert np.all(d[x < xs] > 0)
        assert np.all(d[x >= xs] <= 1e-15)

    def test_capped_by_K_when_K_at_least_gamma_x_co(self):
        x = np.geomspace(1e-4, X_CO, 500)
        for K in (X_CO, 0.8, 3.0):
            assert np.all(cf.value_co(TOY.replace(K=K), x) <= K + 1e-15)

    def test_zero_coupon(self):
        p = TOY.replace(c=0.0)
        assert cf.threshold_co(p) == 0.0
        assert cf.value_co(p, 1.0) == pytest.approx(4 / 6)

    @pytest.mark.parametrize("x", [0.0, -1.0, float("nan")])
    def test_non_positive_x(self, x):
        with pytest.raises(NonPositiveXError):
            cf.value_co(TOY, x)


class TestFirm:
    def test_coefficients(self, mid_k):
        sol = cf.firm_coefficients(mid_k)
        assert sol.a_coef == pytest.approx(FIRM["A"], rel=1e-13)
        assert sol.b_coef == pytest.approx(FIRM["B"], rel=1e-13)
        assert sol.c_coef == pytest.approx(FIRM["C"], rel=1e-12)
        assert sol.x_ca == pytest.approx(FIRM["x_ca"], rel=1e-13)
        assert sol.theta ** 3 == pytest.approx(1.5, rel=1e-13)
        assert max(sol.residuals) <= 1e-12

    @pytest.mark.parametrize("x", sorted(V_F))
    def test_values(self, mid_k, x):
        assert cf.value_f(mid_k, x) == pytest.approx(V_F[x], rel=1e-12)

    def test_slope_matching_at_x_ca(self, mid_k):
        # (K - c/r) alpha = A alpha_lam + B beta_lam: first branch uses the lam = 0 root
        sol = cf.firm_coefficients(mid_k)
        a0 = char_roots(mid_k, 0.0).alpha
        rl = char_roots(mid_k, mid_k.lam)
        lhs = (mid_k.K - mid_k.c / mid_k.r) * a0
        assert lhs == pytest.approx(sol.a_coef * rl.alpha + sol.b_coef * rl.beta, rel=1e-13)

    def test_signs(self, mid_k):
        sol = cf.firm_coefficients(mid_k)
        assert sol.a_coef > 0 > sol.b_coef

    def test_above_conversion_line_below_x_ca(self, mid_k):
        sol = cf.firm_coefficients(mid_k)
        x = np.geomspace(1e-4, sol.x_ca, 500)
        assert np.all(cf.value_f(mid_k, x) >= mid_k.gamma * x)

    def test_iff_threshold_ordering(self, mid_k):
        kb = mid_k.K / mid_k.gamma
        assert (cf.threshold_co(mid_k) > kb) == (cf.firm_coefficients(mid_k).x_ca < kb)

    @pytest.mark.parametrize("K", [0.4, 0.8])
    def test_regime_mismatch(self, K):
        with pytest.raises(RegimeMismatch):
            cf.firm_coefficients(TOY.replace(K=K))


class TestGame:
    def test_z(self):
        assert cf.z_level(TOY) == pytest.approx(Z, rel=1e-12)
        assert cf.value_co(TOY, cf.z_level(TOY)) == pytest.approx(0.8, rel=1e-12)

    def test_z_needs_high_k(self, mid_k):
        with pytest.raises(RegimeMismatch):
            cf.z_level(mid_k)

    def test_high_k(self):
        v, (firm, holder) = cf.value_ca(TOY, 0.5)
        assert v == pytest.approx(0.59375, rel=1e-14)
        assert firm.level == pytest.approx(Z) and holder.level == pytest.approx(X_CO)

    def test_mid_k(self, mid_k):
        v, (firm, holder) = cf.value_ca(mid_k, 0.3)
        assert v == pytest.approx(V_F[0.3], rel=1e-12)
        assert firm.level == pytest.approx(FIRM["x_ca"]) and holder.level == pytest.approx(0.6)

    @pytest.mark.parametrize("x", sorted(LOW))
    def test_low_k(self, low_k, x):
        sol = cf.solve_game(low_k)
        assert sol(x) == pytest.approx(LOW[x], rel=1e-13)
        assert sol.coefficients["A"] == pytest.approx(LOW_AB, rel=1e-13)
        assert sol.coefficients["B"] == pytest.approx(LOW_AB, rel=1e-13)
        assert sol.firm_strategy.kind is StrategyKind.ARRIVAL and sol.firm_strategy.k == 1
        assert sol.holder_strategy.level == pytest.approx(0.4)

    def test_low_k_limit_at_zero(self, low_k):
        assert cf.solve_game(low_k)(1e-9) == pytest.approx((1 + 4 * 0.4) / 6, rel=1e-12)

    def test_boundary_routing(self):
        assert cf.solve_game(TOY.replace(K=0.5)).regime.tag is RegimeTag.LowK
        assert cf.solve_game(TOY.replace(K=cf.threshold_co(TOY))).regime.tag is RegimeTag.HighK


class TestUnconstrained:
    def test_low(self, low_k):
        assert cf.value_ca_unconstrained(low_k, 0.3) == 0.4

    def test_middle_case_for_high_constrained_k(self):
        # K = 0.8 < gamma * x_co = 1, so the unconstrained game sits in its middle case
        assert cf.value_ca_unconstrained(TOY, 0.5) == pytest.approx(0.5 + 0.3 * (0.5 / 0.8) ** 2, rel=1e-15)
        assert cf.value_ca_unconstrained(TOY, 0.5) == pytest.approx(0.6171875, rel=1e-15)

    def test_upper_case(self):
        p = TOY.replace(K=1.5)
        assert cf.value_ca_unconstrained(p, 0.5) == pytest.approx(0.625, rel=1e-15)

    def test_at_cut(self, mid_k):
        assert cf.value_ca_unconstrained(mid_k, 0.6) == pytest.approx(0.6)

    def test_high_k_constrained_below_unconstrained(self):
        p = TOY.replace(K=1.5)
        x = np.geomspace(1e-3, 10, 300)
        assert np.all(cf.solve_game(p)(x) <= cf.value_ca_unconstrained(p, x) + 1e-14)

    def test_low_k_constrained_exceeds_unconstrained_near_zero(self, low_k):
        # the firm cannot call immediately, so the holder keeps at least one coupon period
        assert cf.solve_game(low_k)(1e-3) > cf.value_ca_unconstrained(low_k, 1e-3)


class TestForcedConversion:
    def test_toy(self):
        assert cf.forced_conversion_boundary(TOY, 1.0) == pytest.approx(5 / 6)

    def test_large_lambda(self):
        assert cf.forced_conversion_boundary(TOY.replace(lam=1e9), 0.7) == pytest.approx(0.7, rel=1e-8)

    def test_zero_coupon_near_zero(self):
        assert cf.forced_conversion_boundary(TOY.replace(c=0.0), 1e-12) == pytest.approx(0.0, abs=1e-11)


params = st.builds(
    ModelParams,
    r=st.floats(0.01, 0.2), q=st.floats(0.01, 0.2), sigma=st.floats(0.1, 0.8),
    lam=st.floats(0.1, 50.0), c=st.floats(0.1, 5.0), gamma=st.floats(0.1, 5.0), K=st.just(1.0),
)


def _mp(p):
    return tuple(mp.mpf(v) for v in (p.sigma ** 2, p.r, p.q, p.lam, p.c, p.gamma))


@settings(max_examples=40, deadline=None)
@given(params, st.floats(0.05, 0.95))
def test_firm_threshold_matches_smooth_fit_system(p, frac):
    cr = p.c / p.r
    p = p.replace(K=cr + frac * (p.gamma * cf.threshold_co(p) - cr))
    assume(classify_regime(p).tag is RegimeTag.MidK)
    ref = mp_oracle.firm(*_mp(p), mp.mpf(p.K))
    sol = cf.firm_coefficients(p)
    assert sol.x_ca == pytest.approx(float(ref["x_ca"]), rel=1e-9)
    assert sol.a_coef == pytest.approx(float(ref["A"]), rel=1e-8, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(params)
def test_conversion_threshold_matches_smooth_fit_system(p):
    ref = mp_oracle.bondholder(*_mp(p))
    assert cf.threshold_co(p) == pytest.approx(float(ref["x_co"]), rel=1e-10)


@settings(max_examples=200, deadline=None)
@given(params, st.floats(1.01, 10.0))
def test_x_co_increases_with_lambda(p, factor):
    assume(p.lam * factor <= 1e4)
    hi = p.replace(lam=p.lam * factor)
    assert cf.threshold_co(hi) > cf.threshold_co(p)
    assert cf.threshold_co(hi) < cf.threshold_co_unconstrained(p)
