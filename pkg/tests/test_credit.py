import math
from datetime import date

import numpy as np
import pytest

from csapricer.credit import (
    CdsQuote,
    Counterparty,
    HazardCurve,
    bootstrap_hazards,
    credit_triangle_hazard,
    default_prob,
    find_counterparty,
    par_cds_spread,
    survival_prob,
)
from csapricer.curve import ZeroCurve
from csapricer.errors import CalibrationError, InputError
from csapricer.readers import COUNTERPARTIES_FILE, bundled, load_counterparties, load_market

ANCHOR = date(2005, 9, 15)


@pytest.fixture(scope="module")
def curve():
    return load_market()[0]


@pytest.fixture(scope="module")
def parties(curve):
    return load_counterparties(bundled(COUNTERPARTIES_FILE), curve)


def flat_quotes(spread, tenors=(1, 2, 3, 5, 7, 10)):
    return [CdsQuote(float(t), spread) for t in tenors]


class TestBootstrap:
    @pytest.mark.parametrize("name", ["Company X", "Company Y", "Bank"])
    def test_reprices_market_quotes(self, parties, curve, name):
        party = find_counterparty(parties, name)
        errors = party.quote_errors(curve)
        assert len(errors) == 11
        for row in errors:
            assert abs(row["error"]) < 1e-8

    def test_riskier_name_survives_less(self, parties):
        x = find_counterparty(parties, "Company X").hazard_curve
        y = find_counterparty(parties, "Company Y").hazard_curve
        t = 10.0
        assert float(y.survival_time(0.0, t)) < float(x.survival_time(0.0, t))

    def test_flat_quotes_match_credit_triangle(self, curve):
        hc = bootstrap_hazards(flat_quotes(0.01), 0.4, curve)
        approx = credit_triangle_hazard(0.01, 0.4)
        for h in hc.hazards:
            assert abs(h - approx) / approx < 0.02

    def test_no_quotes_is_risk_free(self, curve):
        hc = bootstrap_hazards([], 0.4, curve)
        assert hc.is_risk_free
        assert float(hc.survival_time(0.0, 30.0)) == 1.0

    def test_zero_spread_gives_zero_hazard(self, curve):
        hc = bootstrap_hazards(flat_quotes(0.0), 0.4, curve)
        assert all(h == 0.0 for h in hc.hazards)

    def test_inverted_quotes_imply_negative_hazard(self, curve):
        quotes = [CdsQuote(1.0, 0.03), CdsQuote(2.0, 0.001)]
        with pytest.raises(CalibrationError, match="negative hazard"):
            bootstrap_hazards(quotes, 0.4, curve)

    def test_tenors_must_increase(self, curve):
        with pytest.raises(InputError, match="increasing"):
            bootstrap_hazards([CdsQuote(2.0, 0.01), CdsQuote(1.0, 0.01)], 0.4, curve)

    def test_bad_recovery(self, curve):
        with pytest.raises(ValueError, match="recovery"):
            bootstrap_hazards(flat_quotes(0.01), 1.0, curve)

    def test_calibration_error_names_counterparty(self, curve):
        quotes = [CdsQuote(1.0, 0.03), CdsQuote(2.0, 0.001)]
        with pytest.raises(CalibrationError, match="Acme"):
            Counterparty.calibrate("Acme", 0.4, quotes, curve)


class TestHazardCurve:
    def test_piecewise_integral(self):
        hc = HazardCurve(ANCHOR, (1.0, 3.0), (0.01, 0.02), 0.4)
        assert float(hc.cumulative_hazard(2.0)) == pytest.approx(0.01 + 0.02)
        # flat extension beyond the last tenor
        assert float(hc.cumulative_hazard(5.0)) == pytest.approx(0.01 + 0.04 + 0.04)

    def test_survival_probability(self):
        hc = HazardCurve.flat(ANCHOR, 0.02, 0.4)
        p = survival_prob(hc, ANCHOR, date(2010, 9, 15))
        t = hc.time(date(2010, 9, 15))
        assert p == pytest.approx(math.exp(-0.02 * t))
        assert default_prob(hc, ANCHOR, date(2010, 9, 15)) == pytest.approx(1.0 - p)

    def test_same_date_survival_is_one(self):
        hc = HazardCurve.flat(ANCHOR, 0.05, 0.4)
        d = date(2008, 1, 2)
        assert survival_prob(hc, d, d) == 1.0

    def test_reversed_dates(self):
        hc = HazardCurve.flat(ANCHOR, 0.05, 0.4)
        with pytest.raises(ValueError, match="precedes"):
            survival_prob(hc, date(2008, 1, 2), date(2007, 1, 2))

    def test_negative_hazard_rejected(self):
        with pytest.raises(ValueError, match="non-negative"):
            HazardCurve(ANCHOR, (1.0,), (-0.01,), 0.4)

    def test_survival_monotone(self):
        hc = HazardCurve(ANCHOR, (1.0, 3.0, 5.0), (0.01, 0.03, 0.0), 0.4)
        s = hc.survival_time(0.0, np.linspace(0.0, 10.0, 41))
        assert np.all(np.diff(s) <= 0.0)

    def test_par_spread_of_flat_hazard(self):
        curve = ZeroCurve.flat(ANCHOR, 0.04)
        hc = HazardCurve.flat(ANCHOR, 0.02, 0.4)
        assert par_cds_spread(hc, 5.0, curve) == pytest.approx(0.02 * 0.6, rel=0.02)


class TestCounterparty:
    def test_parallel_spread_shift_raises_hazards(self, parties, curve):
        x = find_counterparty(parties, "Company X")
        up = x.shifted(curve, 10.0)
        assert all(b > a for a, b in zip(x.hazard_curve.hazards, up.hazard_curve.hazards))
        for q0, q1 in zip(x.cds_quotes, up.cds_quotes):
            assert q1.spread == pytest.approx(q0.spread + 0.001)

    def test_shift_without_quotes_uses_triangle(self):
        party = Counterparty("Flat", 0.4, HazardCurve.flat(ANCHOR, 0.01, 0.4))
        up = party.shifted(ZeroCurve.flat(ANCHOR, 0.04), 6.0)
        assert up.hazard_curve.hazards[0] == pytest.approx(0.01 + 6e-4 / 0.6)

    def test_shift_clamps_at_zero(self):
        party = Counterparty("Flat", 0.4, HazardCurve.flat(ANCHOR, 0.001, 0.4))
        down = party.shifted(ZeroCurve.flat(ANCHOR, 0.04), -100.0)
        assert down.hazard_curve.hazards[0] == 0.0

    def test_risk_free(self):
        party = Counterparty.risk_free("Gov", ANCHOR)
        assert party.hazard_curve.is_risk_free

    def test_unknown_name(self, parties):
        with pytest.raises(InputError, match="unknown counterparty"):
            find_counterparty(parties, "Nobody")

    def test_negative_spread_quote(self):
        with pytest.raises(InputError, match="non-negative"):
            CdsQuote(1.0, -0.001)
