import numpy as np
import pytest

import vecmkit as vk
from vecmkit import (
    QuarterIndex,
    Series,
    ShockScenario,
    apply_multiplicative_shock,
    run_three_stage,
)
from vecmkit.errors import (
    DomainError,
    MissingColumnError,
    OutOfRangeError,
    PipelineStageError,
)

from conftest import make_frame, simulate_vecm


def scenario(frame, **overrides):
    base = dict(
        target="exchange_rate",
        factor=1.15,
        start=frame.end.next(),
        horizon=20,
        vecm_lags=2,
        rank=2,
    )
    base.update(overrides)
    return ShockScenario(**base)


class TestApplyShock:
    def test_factor_115_from_second_quarter(self):
        path = Series("x", QuarterIndex(2018, 1), [1.0, 1.0, 1.0])
        out = apply_multiplicative_shock(path, 1.15, QuarterIndex(2018, 2))
        np.testing.assert_allclose(out.values, [1.0, 1.15, 1.15])

    def test_factor_one_is_identity(self):
        path = Series("x", QuarterIndex(2018, 1), [2.0, 3.0, 4.0])
        out = apply_multiplicative_shock(path, 1.0, QuarterIndex(2018, 1))
        np.testing.assert_array_equal(out.values, path.values)

    def test_doubling_from_first_index(self):
        path = Series("x", QuarterIndex(2018, 1), [0.5, 0.5])
        out = apply_multiplicative_shock(path, 2.0, QuarterIndex(2018, 1))
        np.testing.assert_allclose(out.values, [1.0, 1.0])

    def test_start_outside_range(self):
        path = Series("x", QuarterIndex(2018, 1), [1.0, 1.0])
        with pytest.raises(OutOfRangeError):
            apply_multiplicative_shock(path, 1.5, QuarterIndex(2019, 1))
        with pytest.raises(OutOfRangeError):
            apply_multiplicative_shock(path, 1.5, QuarterIndex(2017, 4))

    def test_nonpositive_factor(self):
        path = Series("x", QuarterIndex(2018, 1), [1.0])
        with pytest.raises(DomainError):
            apply_multiplicative_shock(path, 0.0, QuarterIndex(2018, 1))


class TestRunThreeStage:
    def test_forecast_window_matches_reference_span(self, panel69):
        # sample ends 2018Q1, horizon 20 -> 2018Q2..2023Q1
        result = run_three_stage(panel69, scenario(panel69))
        assert str(result.stage1_forecast.start) == "2018Q2"
        assert str(result.stage1_forecast.end) == "2023Q1"
        assert result.audit["stage1"]["forecast_window"] == ["2018Q2", "2023Q1"]

    def test_factor_one_equals_unshocked_pipeline(self, panel69):
        # a late shock start leaves every forecast value untouched, so the
        # two runs must agree bit for bit
        neutral = run_three_stage(panel69, scenario(panel69, factor=1.0))
        late = run_three_stage(
            panel69, scenario(panel69, factor=1.0, start=panel69.end.shift(20))
        )
        for name in panel69.names:
            np.testing.assert_allclose(
                neutral.irfs[name].values, late.irfs[name].values, atol=1e-10
            )
        np.testing.assert_array_equal(
            neutral.stage2_forecast.values, late.stage2_forecast.values
        )

    def test_shock_locality(self, panel69):
        start = panel69.end.shift(5)
        shocked = run_three_stage(panel69, scenario(panel69, start=start))
        baseline = run_three_stage(panel69, scenario(panel69, factor=1.0, start=start))
        cut = panel69.end.next().distance(start)
        np.testing.assert_array_equal(
            shocked.shocked_path.values[:cut], baseline.shocked_path.values[:cut]
        )
        np.testing.assert_allclose(
            shocked.shocked_path.values[cut:],
            1.15 * baseline.shocked_path.values[cut:],
            rtol=1e-12,
        )

    def test_determinism(self, panel69):
        one = run_three_stage(panel69, scenario(panel69))
        two = run_three_stage(panel69, scenario(panel69))
        np.testing.assert_array_equal(
            one.stage2_forecast.values, two.stage2_forecast.values
        )
        for name in panel69.names:
            np.testing.assert_array_equal(one.irfs[name].values, two.irfs[name].values)
        assert one.audit == two.audit

    def test_stage2_sample_accounting(self, panel69):
        result = run_three_stage(panel69, scenario(panel69, stage2_lags=2, stage3_lags=2))
        stage2 = result.audit["stage2"]
        assert stage2["n_rows"] == len(panel69) - 1
        assert stage2["rows_used"] == (len(panel69) - 1) - 2
        assert result.stage2_forecast.names == tuple(
            n for n in panel69.names if n != "exchange_rate"
        )

    def test_stage3_frame_shapes(self, panel69):
        result = run_three_stage(panel69, scenario(panel69, horizon=12))
        stage3 = result.audit["stage3"]
        assert stage3["n_rows"] == (len(panel69) - 1) + 12
        assert set(result.irfs) == set(panel69.names)
        assert result.scale_tags["stage2_forecast"] == "differences"
        assert result.scale_tags["stage3_irf"] == "differences"

    def test_shocked_target_is_exogenous_then_endogenous(self, panel69):
        result = run_three_stage(panel69, scenario(panel69))
        assert result.audit["stage2"]["exogenous"] == ["exchange_rate"]
        assert "exchange_rate" in result.stage3_fit.names

    def test_monotone_response_in_constructed_system(self):
        # b loads positively on the target's differences, so a positive
        # shock must raise its conditional stage-2 forecasts
        rng = np.random.default_rng(99)
        t = 120
        a = np.zeros(t)
        for s in range(1, t):
            a[s] = a[s - 1] + rng.standard_normal() * 0.5
        b = np.zeros(t)
        c = np.zeros(t)
        for s in range(1, t):
            b[s] = (
                b[s - 1]
                - 0.4 * (b[s - 1] - a[s - 1])
                + 0.6 * (a[s] - a[s - 1])
                + 0.05 * rng.standard_normal()
            )
            c[s] = c[s - 1] - 0.3 * (c[s - 1] - a[s - 1]) + 0.1 * rng.standard_normal()
        frame = make_frame(np.column_stack([a, b, c]), names=("a", "b", "c"))
        kwargs = dict(target="a", start=frame.end.next(), horizon=8, vecm_lags=2, rank=1)
        up = run_three_stage(frame, ShockScenario(factor=1.25, **kwargs))
        flat = run_three_stage(frame, ShockScenario(factor=1.0, **kwargs))
        assert up.stage2_forecast.column("b").mean() > flat.stage2_forecast.column("b").mean()

    def test_unknown_target(self, panel69):
        with pytest.raises(MissingColumnError):
            run_three_stage(panel69, scenario(panel69, target="tariff"))

    def test_start_must_be_inside_forecast_window(self, panel69):
        with pytest.raises(OutOfRangeError):
            run_three_stage(panel69, scenario(panel69, start=panel69.end))
        with pytest.raises(OutOfRangeError):
            run_three_stage(panel69, scenario(panel69, start=panel69.end.shift(21)))

    def test_stage_errors_are_labeled(self, panel69):
        short = panel69.head(12)
        with pytest.raises(PipelineStageError) as err:
            run_three_stage(short, scenario(short, vecm_lags=4, horizon=1,
                                            start=short.end.next()))
        assert err.value.stage == 1

    def test_lag_orders_recorded_in_audit(self, panel69):
        picked = run_three_stage(panel69, scenario(panel69))
        assert picked.audit["lag_order_source"].startswith("aic")
        fixed = run_three_stage(panel69, scenario(panel69, stage2_lags=3, stage3_lags=2))
        assert fixed.audit["lag_order_source"] == "scenario"
        assert fixed.audit["stage2"]["lag_order"] == 3
        assert fixed.audit["stage3"]["lag_order"] == 2
