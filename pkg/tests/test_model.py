import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccbond.errors import (
    BoundViolated,
    NegativeCouponError,
    NonFiniteError,
    NonPositiveError,
    ParameterError,
)
from ccbond.model import (
    ModelParams,
    RegimeTag,
    RootPair,
    char_roots,
    check_root_bounds,
    classify_regime,
    q_lambda,
    root_bound_report,
    validate_params,
)

from conftest import TOY


class TestParams:
    def test_toy_is_valid(self):
        assert TOY.perpetuity == 0.5

    @pytest.mark.parametrize("name", ["r", "q", "sigma", "lam", "gamma", "K"])
    def test_non_positive_rejected(self, name):
        with pytest.raises(NonPositiveError) as exc:
            TOY.replace(**{name: 0.0})
        assert exc.value.field == name

    def test_negative_coupon(self):
        with pytest.raises(NegativeCouponError):
            TOY.replace(c=-0.1)

    def test_zero_coupon_allowed(self):
        assert TOY.replace(c=0.0).c == 0.0

    def test_nan_rejected(self):
        with pytest.raises(NonFiniteError):
            TOY.replace(sigma=float("nan"))

    def test_validate_accepts_lambda_alias(self):
        p = validate_params({"r": 2, "q": 2, "sigma": math.sqrt(2), "lambda": 4, "c": 1, "gamma": 1, "K": 0.8})
        assert p == TOY

    def test_validate_missing_key(self):
        with pytest.raises(ParameterError, match="missing"):
            validate_params({"r": 2, "q": 2})

    def test_frozen(self):
        with pytest.raises(Exception):
            TOY.r = 3.0


class TestRoots:
    def test_toy_roots(self):
        # sigma^2 = 2, r = q: Q(z) = z^2 - z - (2 + lam)
        r0 = char_roots(TOY, 0.0)
        assert (r0.alpha, r0.beta) == pytest.approx((2.0, -1.0), abs=1e-15)
        r4 = char_roots(TOY, 4.0)
        assert (r4.alpha, r4.beta) == pytest.approx((3.0, -2.0), abs=1e-15)

    def test_residual_large_lambda(self):
        rp = char_roots(TOY, 1e8)
        for z in (rp.alpha, rp.beta):
            assert abs(q_lambda(TOY, 1e8, z)) <= 1e-6 * (1e8)

    def test_negative_lambda_rejected(self):
        with pytest.raises(ParameterError):
            char_roots(TOY, -1.0)

    def test_bounds_r_equal_q(self):
        rep = check_root_bounds(TOY, 4.0)
        assert "r*alpha_lambda/(lam+r)<alpha" in rep.checks
        assert not any(k.startswith("alpha_lambda_in") for k in rep.checks)

    def test_bounds_q_below_r(self):
        p = TOY.replace(q=1.0)
        rep = check_root_bounds(p, 4.0)
        assert rep.margin("alpha_lambda_in_(1,(lam+r)/(r-q))") > 0
        assert rep.margin("alpha_in_(1,r/(r-q))") > 0

    def test_bounds_q_above_r(self):
        p = TOY.replace(q=3.0)
        rep = check_root_bounds(p, 4.0)
        assert rep.margin("beta_lambda_in_((lam+r)/(r-q),0)") > 0

    def test_injected_root_fails(self):
        p = TOY.replace(q=1.0)
        bad = RootPair(1.0, char_roots(p, 4.0).beta, 4.0)
        rep = root_bound_report(p, 4.0, roots=bad)
        assert "alpha_lambda_in_(1,(lam+r)/(r-q))" in rep.failures()

    def test_check_raises_on_violation(self, monkeypatch):
        import ccbond.model as m

        p = TOY.replace(q=1.0)
        monkeypatch.setattr(m, "char_roots", lambda p, lam: RootPair(1.0, -1.0, lam))
        with pytest.raises(BoundViolated):
            m.check_root_bounds(p, 4.0)


params = st.builds(
    ModelParams,
    r=st.floats(0.01, 0.2), q=st.floats(0.01, 0.2), sigma=st.floats(0.1, 0.8),
    lam=st.floats(0.1, 50.0), c=st.floats(0.1, 5.0), gamma=st.floats(0.1, 5.0), K=st.floats(0.05, 200.0),
)


@settings(max_examples=300, deadline=None)
@given(params)
def test_roots_solve_quadratic_and_straddle_one(p):
    for lam in (0.0, p.lam):
        rp = char_roots(p, lam)
        assert rp.alpha > 1.0 and rp.beta < 0.0
        scale = (p.r + lam) + p.sigma ** 2 * rp.alpha ** 2
        assert abs(q_lambda(p, lam, rp.alpha)) <= 1e-12 * scale
        assert abs(q_lambda(p, lam, rp.beta)) <= 1e-12 * scale
    assert root_bound_report(p, p.lam).ok


@settings(max_examples=300, deadline=None)
@given(params)
def test_regimes_are_exclusive_and_exhaustive(p):
    reg = classify_regime(p)
    lo, hi = reg.boundaries
    assert lo < hi
    flags = [p.K <= lo, lo < p.K < hi, p.K >= hi]
    assert sum(flags) == 1
    assert reg.tag is (RegimeTag.LowK, RegimeTag.MidK, RegimeTag.HighK)[flags.index(True)]


@pytest.mark.parametrize("K, tag", [(0.4, RegimeTag.LowK), (0.5, RegimeTag.LowK), (0.6, RegimeTag.MidK),
                                    (2 / 3, RegimeTag.HighK), (0.8, RegimeTag.HighK)])
def test_toy_regimes(K, tag):
    assert classify_regime(TOY.replace(K=K)).tag is tag
