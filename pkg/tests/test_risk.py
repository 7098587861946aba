import math
from datetime import date

import numpy as np
import pytest

from csapricer.config import THREADS_ENV, thread_limit
from csapricer.credit import Counterparty, HazardCurve
from csapricer.csa import CsaTerms
from csapricer.curve import ZeroCurve
from csapricer.lattice import LatticeConfig
from csapricer.pricing import NettingSet, ValuationMode, build_set_lattice
from csapricer.risk import (
    MarketShift,
    cva,
    historical_var,
    horizon_windows,
    pnl_scenarios,
    synth_history,
    synth_netting_set,
    threshold_sweep,
    var_sweep,
)
from csapricer.trades import Trade, TradeKind

ANCHOR = date(2005, 9, 15)
REPORT_THRESHOLDS = [0.0, 2.1e6, 4.1e6, 6.1e6, 8.1e6, math.inf]


def flat_party(hazard=0.03, recovery=0.4):
    return Counterparty("Toy", recovery, HazardCurve.flat(ANCHOR, hazard, recovery))


def quiet_history(n, curve_bp=0.0, cds_bp=0.0):
    return [MarketShift(date(2005, 1, 3 + i % 25), curve_bp, cds_bp) for i in range(n)]


@pytest.fixture(scope="module")
def curve():
    return ZeroCurve.flat(ANCHOR, 0.045)


@pytest.fixture(scope="module")
def exposure_set(curve):
    return synth_netting_set(curve, flat_party(), n_trades=6, seed=5, notional=25e6)


class TestHistoricalVar:
    def test_order_statistic(self):
        res = historical_var([-5.0, -3.0, -1.0, 2.0, 4.0], 0.80)
        assert res.k == 1
        assert res.var == -5.0
        assert res.magnitude == 5.0

    def test_thousand_scenarios(self):
        pnl = np.arange(1000, dtype=float) - 500.0
        res = historical_var(np.random.default_rng(0).permutation(pnl), 0.99)
        assert res.k == 10
        assert res.var == -491.0

    def test_all_gains(self):
        res = historical_var([1.0, 2.0, 3.0], 0.9)
        assert res.var >= 0.0
        assert res.magnitude == 0.0

    def test_translation_and_scale(self):
        rng = np.random.default_rng(1)
        pnl = rng.normal(0.0, 1.0, 250)
        base = historical_var(pnl, 0.95).var
        assert historical_var(pnl + 7.0, 0.95).var == pytest.approx(base + 7.0)
        assert historical_var(3.0 * pnl, 0.95).var == pytest.approx(3.0 * base)

    def test_empty(self):
        with pytest.raises(ValueError, match="at least one"):
            historical_var([], 0.99)

    @pytest.mark.parametrize("c", [0.5, 1.0, 0.2])
    def test_confidence_range(self, c):
        with pytest.raises(ValueError, match="confidence"):
            historical_var([1.0, 2.0], c)


class TestCva:
    def test_full_collateral_has_no_cva(self, exposure_set, curve):
        nset = exposure_set.with_threshold(0.0)
        lat = build_set_lattice(nset, curve, LatticeConfig())
        rep = cva(nset, lat, curve)
        assert abs(rep.cva_collateralized) < 1e-9 * nset.notional
        assert rep.cva_uncollateralized > 0.0

    def test_no_csa_equals_uncollateralized(self, exposure_set, curve):
        lat = build_set_lattice(exposure_set, curve, LatticeConfig())
        rep = cva(exposure_set, lat, curve)
        assert rep.cva_collateralized == pytest.approx(rep.cva_uncollateralized)

    def test_no_hazard_no_cva(self, curve):
        nset = synth_netting_set(curve, Counterparty.risk_free("Gov", ANCHOR), n_trades=3, seed=2)
        lat = build_set_lattice(nset, curve, LatticeConfig())
        rep = cva(nset, lat, curve)
        assert rep.cva_uncollateralized == pytest.approx(0.0, abs=1e-6)
        assert rep.cva_collateralized == pytest.approx(0.0, abs=1e-6)


class TestThresholdSweep:
    def test_report_thresholds(self, exposure_set, curve):
        lat = build_set_lattice(exposure_set, curve, LatticeConfig())
        rep = threshold_sweep(exposure_set, lat, REPORT_THRESHOLDS, max_workers=2)
        cvas = [p.cva for p in rep.sweep]
        assert len(cvas) == 6
        assert abs(cvas[0]) < 1e-9 * exposure_set.notional
        assert cvas[-1] == pytest.approx(rep.cva_uncollateralized)
        assert all(b >= a - 1e-6 for a, b in zip(cvas, cvas[1:]))
        assert cvas[-1] > cvas[0]

    def test_single_zero_threshold(self, exposure_set, curve):
        lat = build_set_lattice(exposure_set, curve, LatticeConfig())
        rep = threshold_sweep(exposure_set, lat, [0.0], max_workers=1)
        assert [round(p.cva, 6) for p in rep.sweep] == [0.0]

    @pytest.mark.parametrize("seed", range(5))
    def test_random_portfolios_monotone(self, curve, seed):
        rng = np.random.default_rng(seed)
        party = flat_party(float(rng.uniform(0.005, 0.06)), float(rng.uniform(0.2, 0.6)))
        nset = synth_netting_set(curve, party, n_trades=int(rng.integers(1, 5)), seed=seed, max_years=3)
        lat = build_set_lattice(nset, curve, LatticeConfig())
        hs = sorted(float(h) for h in rng.uniform(0.0, 2e6, 5))
        cvas = [p.cva for p in threshold_sweep(nset, lat, hs, max_workers=1).sweep]
        assert all(b >= a - 1e-6 for a, b in zip(cvas, cvas[1:]))

    def test_unsorted(self, exposure_set, curve):
        lat = build_set_lattice(exposure_set, curve, LatticeConfig())
        with pytest.raises(ValueError, match="sorted"):
            threshold_sweep(exposure_set, lat, [1e6, 0.0])

    def test_empty_set(self, curve):
        nset = NettingSet(flat_party(), None, [])
        lat = build_set_lattice(nset, curve, LatticeConfig())
        rep = threshold_sweep(nset, lat, [0.0, math.inf])
        assert [p.cva for p in rep.sweep] == [0.0, 0.0]


class TestScenarios:
    def test_windows_overlap(self):
        hist = quiet_history(12, curve_bp=1.0, cds_bp=0.5)
        windows = horizon_windows(hist, 10)
        assert len(windows) == 3
        assert windows[0][2] == pytest.approx(10.0)
        assert windows[0][3] == pytest.approx(5.0)

    def test_pillar_shifts_are_summed(self):
        hist = [MarketShift(date(2005, 1, 3), (1.0, 2.0)), MarketShift(date(2005, 1, 4), (3.0, 4.0))]
        (_, _, curve_bp, _), = horizon_windows(hist, 2)
        assert curve_bp == (4.0, 6.0)

    def test_insufficient_history(self):
        with pytest.raises(ValueError, match="at least 10 days"):
            horizon_windows(quiet_history(9), 10)

    def test_zero_shifts_give_zero_pnl(self, exposure_set, curve):
        scen = pnl_scenarios(exposure_set, curve, LatticeConfig(), quiet_history(12), horizon=10, max_workers=1)
        assert len(scen) == 3
        assert all(s.pnl == pytest.approx(0.0, abs=1e-6) for s in scen)
        assert historical_var([s.pnl for s in scen], 0.99).magnitude == pytest.approx(0.0, abs=1e-6)

    def test_receiver_swap_gains_when_rates_fall(self, curve):
        swap = Trade(TradeKind.RECEIVER_SWAP, 10e6, ANCHOR, date(2010, 9, 15), 0.045)
        nset = NettingSet(Counterparty.risk_free("Gov", ANCHOR), None, [swap])
        hist = quiet_history(1, curve_bp=-1.0)
        (scen,) = pnl_scenarios(nset, curve, LatticeConfig(), hist, ValuationMode.RISK_FREE, horizon=1)
        # DV01 of a 5y swap is roughly notional * annuity * 1bp
        assert 3_000.0 < scen.pnl < 6_000.0

    def test_synthetic_history_is_seeded(self):
        a = synth_history(30, seed=9, correlation=0.5)
        b = synth_history(30, seed=9, correlation=0.5)
        assert a == b
        assert all(d.date.weekday() < 5 for d in a)
        assert len({d.date for d in a}) == 30

    def test_synthetic_history_per_pillar(self):
        hist = synth_history(5, seed=1, pillars=4)
        assert all(len(s.curve_bp) == 4 for s in hist)


class TestVarSweep:
    SWEEP = [0.0, 1e5, math.inf]

    @pytest.fixture(scope="class")
    def receiver_set(self):
        swap = Trade(TradeKind.RECEIVER_SWAP, 10e6, date(2005, 9, 19), date(2010, 9, 20), 0.055)
        return NettingSet(flat_party(0.05, 0.4), None, [swap])

    @staticmethod
    def history(curve_moves, cds_per_curve_bp):
        return [MarketShift(date(2005, 1, 3 + i), x, cds_per_curve_bp * x) for i, x in enumerate(curve_moves)]

    def sweep(self, nset, curve, hist):
        rows = var_sweep(nset, curve, LatticeConfig(), hist, self.SWEEP, confidence=0.8, horizon=1, max_workers=2)
        assert [r.label for r in rows] == ["risk-free", "risky", "csa", "csa", "csa"]
        assert [r.threshold for r in rows] == [None, None, *self.SWEEP]
        return rows

    def test_wrong_way_rates_and_spreads(self, receiver_set, curve):
        # rates up and spreads out together: the receiver loses on both
        moves = [3.0, -2.0, 4.0, -4.0, 1.0, -1.0, 2.0, -3.0, 5.0, -5.0]
        free, risky, *csa = self.sweep(receiver_set, curve, self.history(moves, 10.0))
        assert free.magnitude > 10_000.0
        assert risky.magnitude > free.magnitude
        assert csa[0].magnitude == pytest.approx(free.magnitude, rel=1e-6)
        assert csa[-1].magnitude == pytest.approx(risky.magnitude, rel=1e-6)
        assert csa[0].magnitude < csa[1].magnitude < csa[2].magnitude

    def test_rate_moves_alone_damp_risky_var(self, receiver_set, curve):
        moves = [3.0, -2.0, 4.0, -4.0, 1.0, -1.0, 2.0, -3.0, 5.0, -5.0]
        free, risky, *csa = self.sweep(receiver_set, curve, self.history(moves, 0.0))
        assert 0.0 < risky.magnitude < free.magnitude
        assert csa[0].magnitude == pytest.approx(free.magnitude, rel=1e-6)
        assert csa[-1].magnitude == pytest.approx(risky.magnitude, rel=1e-6)
        assert risky.magnitude <= csa[1].magnitude <= free.magnitude

    def test_credit_moves_alone_leave_risk_free_flat(self, curve):
        party = flat_party(0.04, 0.4)
        nset = synth_netting_set(curve, party, n_trades=4, seed=3, max_years=3,
                                 csa=CsaTerms(1e6))
        spreads = [3.0, -2.0, 5.0, -4.0, 1.0, -1.0, 2.0, -3.0, 4.0, -5.0]
        hist = [MarketShift(date(2005, 1, 3 + i), 0.0, s) for i, s in enumerate(spreads)]
        rows = var_sweep(nset, curve, LatticeConfig(), hist, [0.0, 1e6, math.inf],
                         confidence=0.8, horizon=1, max_workers=2)
        free, risky, *csa = rows
        assert free.magnitude == pytest.approx(0.0, abs=1e-6)
        assert risky.magnitude > 0.0
        assert csa[0].magnitude == pytest.approx(0.0, abs=1e-6)
        assert csa[-1].magnitude == pytest.approx(risky.magnitude, abs=1e-6)

    def test_unsorted(self, curve):
        nset = synth_netting_set(curve, flat_party(), n_trades=1, seed=1)
        with pytest.raises(ValueError, match="sorted"):
            var_sweep(nset, curve, LatticeConfig(), synth_history(12), [1e6, 0.0], horizon=10)


class TestThreadLimit:
    def test_env_caps_request(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "2")
        assert thread_limit(8) == 2
        assert thread_limit(1) == 1

    def test_default_without_env(self, monkeypatch):
        monkeypatch.delenv(THREADS_ENV, raising=False)
        assert thread_limit(3) == 3
        assert thread_limit() >= 1

    @pytest.mark.parametrize("value", ["0", "many"])
    def test_bad_env(self, monkeypatch, value):
        monkeypatch.setenv(THREADS_ENV, value)
        with pytest.raises(ValueError, match=THREADS_ENV):
            thread_limit(2)


class TestSyntheticSet:
    def test_positive_exposure(self, exposure_set, curve):
        lat = build_set_lattice(exposure_set, curve, LatticeConfig())
        rep = cva(exposure_set, lat, curve)
        assert rep.v_free > 0.0
        assert len(exposure_set.trades) == 6

    def test_seeded(self, curve):
        a = synth_netting_set(curve, flat_party(), n_trades=4, seed=8)
        b = synth_netting_set(curve, flat_party(), n_trades=4, seed=8)
        assert a.trades == b.trades

    def test_needs_trades(self, curve):
        with pytest.raises(ValueError, match="n_trades"):
            synth_netting_set(curve, flat_party(), n_trades=0)
