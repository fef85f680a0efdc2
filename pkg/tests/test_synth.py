import numpy as np
import pytest

from survmatch import synth
from survmatch.errors import DataError
from survmatch.estimators import km


def flat_spec(**kw):
    kw.setdefault("family", "exponential")
    kw.setdefault("weights", np.zeros(3))
    return synth.OracleSpec(**kw)


class TestGenerate:
    def test_inverse_cdf_unit_rate(self):
        # rates are 1 when w = 0, so T = -log(U); U = e^-2 gives T = 2
        spec = flat_spec()
        t = synth._event_times(spec, np.ones(1), np.array([np.exp(-2.0)]))
        assert t[0] == pytest.approx(2.0, abs=1e-12)

    def test_weibull_inverse_cdf(self):
        spec = flat_spec(family="weibull", shape=2.0)
        t = synth._event_times(spec, np.ones(1), np.array([np.exp(-4.0)]))
        assert t[0] == pytest.approx(2.0, abs=1e-12)

    def test_unit_rate_sample_mean(self):
        # exponential with rate 1 has mean 1; Monte-Carlo check at n = 1e5
        spec = flat_spec(censoring_fraction=0.3, seed=1)
        rng = np.random.default_rng(1)
        t = synth._event_times(spec, np.ones(100_000), rng.uniform(size=100_000))
        assert 0.98 <= t.mean() <= 1.02

    def test_target_censoring_reached(self):
        ds, resolved = synth.generate(10_000, flat_spec(censoring_fraction=0.3, seed=3))
        censored = 1.0 - ds.y.mean()
        assert 0.25 <= censored <= 0.35
        assert resolved.censoring_scale is not None

    def test_exponential_independent_scheme(self):
        spec = flat_spec(censoring="exponential-independent", censoring_fraction=0.4, seed=5)
        ds, _ = synth.generate(5000, spec)
        assert 0.35 <= 1.0 - ds.y.mean() <= 0.45

    def test_indicator_matches_latent_ordering(self):
        spec = flat_spec(weights=np.array([0.4, -0.2, 0.1]), censoring_fraction=0.3, seed=7)
        rng = np.random.default_rng(7)
        x = rng.standard_normal((2000, 3))
        t_event = synth._event_times(spec, spec.rates(x), rng.uniform(size=2000))
        u_cens = rng.uniform(size=2000)
        ds, resolved = synth.generate(2000, spec)
        c = resolved.censoring_scale * u_cens
        assert np.array_equal(ds.y, (t_event <= c).astype(float))
        assert np.array_equal(ds.t, np.minimum(t_event, c))

    def test_bytes_identical_regeneration(self):
        spec = flat_spec(weights=np.array([0.3, 0.2]), censoring_fraction=0.25, seed=11)
        a, ra = synth.generate(500, spec)
        b, rb = synth.generate(500, spec)
        assert a.X.tobytes() == b.X.tobytes()
        assert a.t.tobytes() == b.t.tobytes()
        assert np.array_equal(a.y, b.y)
        assert ra.censoring_scale == rb.censoring_scale

    def test_km_converges_to_exponential_survival(self):
        # uncensored unit-rate sample: empirical curve near exp(-t)
        spec = flat_spec(seed=13)
        rng = np.random.default_rng(13)
        t = synth._event_times(spec, np.ones(10_000), rng.uniform(size=10_000))
        curve = km(t, np.ones_like(t))
        gap = np.abs(curve.s - np.exp(-curve.grid))
        assert gap.max() < 0.03

    def test_rejects_bad_inputs(self):
        with pytest.raises(DataError):
            synth.generate(0, flat_spec())
        with pytest.raises(DataError):
            flat_spec(censoring_fraction=1.0)
        with pytest.raises(DataError):
            flat_spec(family="gamma")
        with pytest.raises(DataError):
            flat_spec(family="weibull", shape=-1.0)


class TestOracleSurvival:
    def test_starts_at_one(self):
        assert synth.oracle_survival(flat_spec(), np.zeros(3), 0.0) == 1.0

    def test_exponential_halflife(self):
        s = synth.oracle_survival(flat_spec(), np.zeros(3), np.log(2.0))
        assert s == pytest.approx(0.5, abs=1e-12)

    def test_weibull_value(self):
        spec = flat_spec(family="weibull", shape=2.0)
        assert synth.oracle_survival(spec, np.zeros(3), 1.0) == pytest.approx(
            np.exp(-1.0), abs=1e-12
        )

    def test_negative_time_rejected(self):
        with pytest.raises(DataError):
            synth.oracle_survival(flat_spec(), np.zeros(3), -1.0)


class TestOracleCindex:
    def test_no_signal_is_half(self):
        ds, resolved = synth.generate(10_000, flat_spec(censoring_fraction=0.3, seed=17))
        assert abs(synth.oracle_cindex(resolved, ds) - 0.5) <= 0.03

    def test_perfect_ordering_is_one(self):
        # deterministic monotone data: prediction order == time order
        from survmatch.metrics import c_index

        t = np.arange(1.0, 11.0)
        assert c_index(t, t, np.ones(10)) == 1.0

    def test_single_subject_errors(self):
        spec = flat_spec(weights=np.array([0.5]), seed=19)
        ds, resolved = synth.generate(50, spec)
        single = ds.take(np.array([0]))
        with pytest.raises(DataError):
            synth.oracle_cindex(resolved, single)

    def test_unattainable_fraction_reports_achieved(self):
        with pytest.raises(DataError, match="achieved"):
            synth.generate(2, flat_spec(censoring_fraction=0.3, seed=19))

    def test_signal_bearing_spec_beats_half(self):
        spec = flat_spec(weights=np.array([0.6, -0.5, 0.4]), censoring_fraction=0.3, seed=23)
        ds, resolved = synth.generate(4000, spec)
        assert synth.oracle_cindex(resolved, ds) > 0.6
