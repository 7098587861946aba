import math
from datetime import date

import numpy as np
import pytest
from scipy import stats

from csapricer.analysis import (
    SwapPair,
    ols,
    premia,
    premium_spread,
    price_pairs,
    regress_pairs,
    spread_summary,
    synth_market_rates,
    synth_pair_dataset,
)
from csapricer.credit import Counterparty, HazardCurve
from csapricer.curve import ZeroCurve
from csapricer.lattice import LatticeConfig
from csapricer.trades import Trade, TradeKind

ANCHOR = date(2005, 9, 15)
GENERIC_20Y = 0.048771


def quoted_pair(rate_x=0.049042, rate_y=0.049053):
    terms = Trade(TradeKind.RECEIVER_SWAP, 25e6, ANCHOR, date(2025, 9, 15), 0.0)
    x = Counterparty("Company X", 0.4, HazardCurve.flat(ANCHOR, 0.005, 0.4))
    y = Counterparty("Company Y", 0.4, HazardCurve.flat(ANCHOR, 0.008, 0.4))
    return SwapPair(terms, x, y, market_rate_a=rate_x, market_rate_b=rate_y, label="20Y")


class TestPremiumSpread:
    def test_quoted_rates(self):
        pair = quoted_pair()
        pa, pb = premia(pair, GENERIC_20Y)
        assert pa == pytest.approx(2.71, abs=1e-9)
        assert pb == pytest.approx(2.82, abs=1e-9)
        assert premium_spread(pair, GENERIC_20Y) == pytest.approx(0.11, abs=1e-9)

    def test_generic_rate_cancels(self):
        pair = quoted_pair()
        assert premium_spread(pair, 0.0) == pytest.approx(premium_spread(pair, 0.05))

    def test_antisymmetric(self):
        pair = quoted_pair()
        assert premium_spread(pair.swapped(), GENERIC_20Y) == pytest.approx(-premium_spread(pair, GENERIC_20Y))

    def test_missing_rates(self):
        with pytest.raises(ValueError, match="no model rates"):
            premium_spread(quoted_pair(), GENERIC_20Y, source="model")

    def test_bad_source(self):
        with pytest.raises(ValueError, match="rate source"):
            quoted_pair().rates("dealer")


class TestOls:
    def test_exact_line(self):
        x = [0.0, 1.0, 2.0, 3.0]
        res = ols(x, [1.0 + 2.0 * v for v in x])
        assert res.slope == 2.0
        assert res.intercept == 1.0
        assert res.r2 == 1.0
        assert res.t_value == math.inf
        assert res.p_value == 0.0
        assert res.f_significance == 0.0

    def test_constant_response(self):
        res = ols([1.0, 2.0, 3.0, 4.0], [5.0] * 4)
        assert res.slope == 0.0
        assert res.intercept == 5.0
        assert res.r2 == 0.0
        assert res.p_value == 1.0

    def test_matches_scipy(self):
        rng = np.random.default_rng(3)
        x = rng.normal(0.0, 2.0, 10)
        y = 0.7 + 1.3 * x + rng.normal(0.0, 1.0, 10)
        res = ols(x, y)
        ref = stats.linregress(x, y)
        assert res.slope == pytest.approx(ref.slope, rel=1e-10)
        assert res.intercept == pytest.approx(ref.intercept, rel=1e-10)
        assert res.r2 == pytest.approx(ref.rvalue ** 2, rel=1e-10)
        assert res.p_value == pytest.approx(ref.pvalue, rel=1e-8)
        assert res.slope_stderr == pytest.approx(ref.stderr, rel=1e-10)
        # with one regressor F is t squared and both tests agree
        assert res.f_stat == pytest.approx(res.t_value ** 2, rel=1e-10)
        assert res.f_significance == pytest.approx(res.p_value, rel=1e-8)
        assert res.adj_r2 == pytest.approx(1.0 - (1.0 - res.r2) * 9 / 8)

    def test_normal_equations(self):
        rng = np.random.default_rng(11)
        x = rng.uniform(-5.0, 5.0, 10)
        y = rng.normal(0.0, 1.0, 10) - 0.4 * x
        res = ols(x, y)
        X = np.column_stack([np.ones_like(x), x])
        beta = np.linalg.solve(X.T @ X, X.T @ y)
        assert res.intercept == pytest.approx(beta[0], abs=1e-12)
        assert res.slope == pytest.approx(beta[1], abs=1e-12)
        assert float(np.sum(res.residuals)) == pytest.approx(0.0, abs=1e-10)

    def test_affine_response(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=12)
        y = x + rng.normal(size=12)
        base, scaled = ols(x, y), ols(x, 3.0 * y + 2.0)
        assert scaled.slope == pytest.approx(3.0 * base.slope)
        assert scaled.intercept == pytest.approx(3.0 * base.intercept + 2.0)
        assert scaled.r2 == pytest.approx(base.r2)
        assert scaled.t_value == pytest.approx(base.t_value)

    def test_report_keys(self):
        d = ols([1.0, 2.0, 4.0], [2.0, 1.0, 5.0]).to_dict()
        assert d["Observations"] == 3
        assert set(d) >= {"Coefficient", "R Square", "t Stat", "P-value", "Significance F"}

    @pytest.mark.parametrize("x,y,match", [
        ([1.0, 2.0], [1.0, 2.0], "at least 3"),
        ([2.0, 2.0, 2.0], [1.0, 2.0, 3.0], "constant"),
        ([1.0, 2.0, 3.0], [1.0, 2.0], "same length"),
    ])
    def test_errors(self, x, y, match):
        with pytest.raises(ValueError, match=match):
            ols(x, y)


class TestSummary:
    def test_sample_statistics(self):
        s = spread_summary([1.0, 2.0, 3.0, 4.0])
        assert s["mean"] == 2.5
        assert s["median"] == 2.5
        assert s["max"] == 4.0 and s["min"] == 1.0
        assert s["std"] == pytest.approx(math.sqrt(5.0 / 3.0))

    def test_empty(self):
        with pytest.raises(ValueError, match="empty"):
            spread_summary([])


class TestPairStudy:
    @pytest.fixture(scope="class")
    def curve(self):
        return ZeroCurve.flat(ANCHOR, 0.045)

    def test_dataset_is_seeded(self, curve):
        a = synth_pair_dataset(4, curve, seed=3)
        b = synth_pair_dataset(4, curve, seed=3)
        assert [p.party_a.hazard_curve for p in a] == [p.party_a.hazard_curve for p in b]
        assert [p.csa_b for p in a] == [p.csa_b for p in b]

    def test_needs_pairs(self, curve):
        with pytest.raises(ValueError, match="at least one pair"):
            synth_pair_dataset(0, curve)

    def test_bad_cds_range(self, curve):
        with pytest.raises(ValueError, match="CDS range"):
            synth_pair_dataset(2, curve, cds_range_bp=(50.0, 10.0))

    def test_spreads_track_credit(self, curve):
        pairs = synth_pair_dataset(6, curve, seed=7, thresholds=(math.inf,), tenors_years=(2,))
        priced = synth_market_rates(price_pairs(pairs, curve, LatticeConfig()), seed=7, noise_bp=0.01)
        for p in priced:
            assert p.model_rate_a is not None and p.market_rate_b is not None
        study = regress_pairs(priced, curve)
        assert study.market_on_cds.slope > 0.0
        assert study.market_on_model.slope == pytest.approx(1.0, abs=0.1)
        assert study.market_on_model.r2 > 0.9
        assert set(study.summaries()) == {"market_spread", "model_spread", "differential"}

    def test_full_collateral_removes_spread(self, curve):
        pairs = synth_pair_dataset(3, curve, seed=2, thresholds=(0.0,), tenors_years=(2,))
        for p in price_pairs(pairs, curve, LatticeConfig()):
            assert premium_spread(p, 0.0, "model") == pytest.approx(0.0, abs=1e-6)
