from datetime import date

import pytest

from csapricer.dates import (
    WEEKENDS,
    Calendar,
    DayCount,
    Frequency,
    Roll,
    add_months,
    generate_schedule,
    year_fraction,
)


class TestYearFraction:
    def test_act_360(self):
        assert year_fraction(date(2005, 9, 15), date(2005, 12, 15), DayCount.ACT_360) == pytest.approx(91 / 360)

    def test_act_365f(self):
        assert year_fraction(date(2005, 9, 15), date(2006, 9, 15)) == pytest.approx(1.0)

    def test_thirty_360_half_year(self):
        assert year_fraction(date(2005, 9, 15), date(2006, 3, 15), DayCount.THIRTY_360) == pytest.approx(0.5)

    def test_thirty_360_month_end(self):
        # 31st on both ends counts as 30
        assert year_fraction(date(2005, 1, 31), date(2005, 3, 31), DayCount.THIRTY_360) == pytest.approx(60 / 360)

    def test_same_day_is_zero(self):
        d = date(2010, 1, 4)
        for dc in DayCount:
            assert year_fraction(d, d, dc) == 0.0

    def test_reversed_raises(self):
        with pytest.raises(ValueError, match="precedes"):
            year_fraction(date(2006, 1, 1), date(2005, 1, 1))


class TestParsing:
    @pytest.mark.parametrize("text,expected", [
        ("30/360", DayCount.THIRTY_360),
        ("act/360", DayCount.ACT_360),
        ("ACT/365", DayCount.ACT_365F),
    ])
    def test_day_count(self, text, expected):
        assert DayCount.parse(text) is expected

    def test_frequency(self):
        assert Frequency.parse("semiannual") is Frequency.SEMIANNUAL
        assert Frequency.parse("3M") is Frequency.QUARTERLY
        assert Frequency.ANNUAL.per_year == 1

    def test_roll_alias(self):
        assert Roll.parse("Modified Following") is Roll.MOD_FOLLOW

    def test_unknown(self):
        with pytest.raises(ValueError, match="Unknown day count"):
            DayCount.parse("ACT/ACT")


class TestCalendar:
    def test_business_day_unchanged(self):
        assert WEEKENDS.adjust(date(2005, 9, 15)) == date(2005, 9, 15)

    def test_following(self):
        # Saturday 2007-09-15 -> Monday
        assert WEEKENDS.adjust(date(2007, 9, 15), Roll.FOLLOWING) == date(2007, 9, 17)

    def test_mod_follow_stays_in_month(self):
        # Saturday 2005-04-30 would roll into May
        assert WEEKENDS.adjust(date(2005, 4, 30), Roll.MOD_FOLLOW) == date(2005, 4, 29)

    def test_preceding(self):
        assert WEEKENDS.adjust(date(2007, 9, 16), Roll.PRECEDING) == date(2007, 9, 14)

    def test_holiday(self):
        cal = Calendar(frozenset({date(2005, 12, 26)}), "TEST")
        assert cal.adjust(date(2005, 12, 24), Roll.FOLLOWING) == date(2005, 12, 27)


class TestSchedule:
    def test_regular_quarterly(self):
        s = generate_schedule(date(2005, 9, 15), date(2007, 9, 15), Frequency.QUARTERLY)
        assert len(s) == 8
        assert s.periods[0].accrual_start == date(2005, 9, 15)
        assert s.pay_dates[-1] == date(2007, 9, 17)
        for a, b in zip(s.periods, s.periods[1:]):
            assert a.accrual_end == b.accrual_start

    def test_front_stub(self):
        s = generate_schedule(date(2005, 11, 1), date(2006, 9, 15), Frequency.SEMIANNUAL)
        assert len(s) == 2
        assert s.periods[0].accrual_start == date(2005, 11, 1)
        assert s.periods[0].accrual_end == date(2006, 3, 15)

    def test_effective_after_maturity(self):
        with pytest.raises(ValueError, match="must precede"):
            generate_schedule(date(2006, 1, 1), date(2005, 1, 1), Frequency.ANNUAL)

    def test_twenty_year_semiannual(self):
        s = generate_schedule(date(2005, 9, 15), date(2025, 9, 15), Frequency.SEMIANNUAL)
        assert len(s) == 40

    def test_add_months_end_of_month(self):
        assert add_months(date(2005, 8, 31), 6) == date(2006, 2, 28)
