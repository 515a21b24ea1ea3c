"""Forward-pass, activation, and published-parameter checks."""

import math

import numpy as np
import pytest

import oracle
from gmpe_ann import (MAGNITUDE_RANGE, RJB_RANGE_KM, GroundMotionRecord,
                      InputDomainError, NetworkModel, Normalization, Target,
                      batch_values, forward, log_sigmoid,
                      out_of_domain_reasons, published_model,
                      published_normalization, validate_record)
from helpers import random_model


class TestLogSigmoid:
    def test_zero_maps_to_half(self):
        assert log_sigmoid(0.0) == 0.5

    def test_known_value(self):
        assert log_sigmoid(1.0) == pytest.approx(1.0 / (1.0 + math.exp(-1.0)), rel=1e-15)

    def test_symmetry(self, rng):
        for x in rng.uniform(-30.0, 30.0, 200):
            assert abs(log_sigmoid(x) + log_sigmoid(-x) - 1.0) <= 1e-15

    def test_saturation_without_overflow(self):
        assert 0.0 < log_sigmoid(-50.0) < 1e-20
        assert 1.0 - 1e-15 <= log_sigmoid(50.0) <= 1.0
        # Far outside float exp range in the naive formulation.
        assert log_sigmoid(1000.0) == 1.0
        assert log_sigmoid(-1000.0) == 0.0

    def test_monotonic(self):
        xs = np.linspace(-20, 20, 401)
        ys = log_sigmoid(xs)
        assert np.all(np.diff(ys) > 0)

    def test_array_shape_and_scalar_type(self):
        out = log_sigmoid(np.array([[0.0, 5.0], [-5.0, 1.0]]))
        assert out.shape == (2, 2)
        assert isinstance(log_sigmoid(0.25), float)

    def test_matches_naive_formula_in_safe_range(self, rng):
        for x in rng.uniform(-25.0, 25.0, 200):
            naive = 1.0 / (1.0 + math.exp(-x))
            assert log_sigmoid(x) == pytest.approx(naive, rel=1e-14)


class TestPublishedParameters:
    def test_pga_weight_spot_checks(self):
        m = published_model(Target.PGA)
        assert m.hidden_count == 4
        assert m.input_hidden_weights[0, 0] == -93.7502
        assert m.input_hidden_weights[2, 2] == -43.7438
        assert m.hidden_biases[0] == 68.6111
        assert m.hidden_output_weights[2] == 6.5491
        assert m.output_bias == -0.6149

    def test_pgv_weight_spot_checks(self):
        m = published_model(Target.PGV)
        assert m.input_hidden_weights[0, 2] == 45.7174
        assert m.hidden_output_weights[0] == -15.1236
        assert m.output_bias == 18.0142

    def test_normalization_constants(self):
        for target, log_div in ((Target.PGA, 6.1), (Target.PGV, 2.5)):
            n = published_normalization(target)
            assert (n.mag_div, n.vs30_div, n.rjb_div) == (6.0, 1792.0, 522.0)
            assert n.log_out_div == log_div

    def test_full_tables_match_reference_transcription(self):
        for target, neurons, bias in ((Target.PGA, oracle.PGA_NEURONS, oracle.PGA_OUTPUT_BIAS),
                                      (Target.PGV, oracle.PGV_NEURONS, oracle.PGV_OUTPUT_BIAS)):
            m = published_model(target)
            for i, (w1, w2, w3, b, v) in enumerate(neurons):
                assert tuple(m.input_hidden_weights[i]) == (w1, w2, w3)
                assert m.hidden_biases[i] == b
                assert m.hidden_output_weights[i] == v
            assert m.output_bias == bias

    def test_accepts_string_target(self):
        assert published_model("PGA") == published_model(Target.PGA)


class TestForward:
    @pytest.mark.parametrize("mw,vs30,rjb,expected", oracle.PGA_POINTS)
    def test_pga_frozen_points(self, mw, vs30, rjb, expected):
        pred = forward(published_model(Target.PGA), mw, vs30, rjb)
        assert pred.value == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("mw,vs30,rjb,expected", oracle.PGV_POINTS)
    def test_pgv_frozen_points(self, mw, vs30, rjb, expected):
        pred = forward(published_model(Target.PGV), mw, vs30, rjb)
        assert pred.value == pytest.approx(expected, rel=1e-12)

    def test_live_two_path_against_reference(self, rng):
        pga_model = published_model(Target.PGA)
        pgv_model = published_model(Target.PGV)
        for _ in range(100):
            mw = float(rng.uniform(2.0, 7.0))
            vs30 = float(rng.uniform(100.0, 2000.0))
            rjb = float(rng.uniform(1.0, 600.0))
            assert forward(pga_model, mw, vs30, rjb).value == pytest.approx(
                oracle.pga(mw, vs30, rjb), rel=1e-12)
            assert forward(pgv_model, mw, vs30, rjb).value == pytest.approx(
                oracle.pgv(mw, vs30, rjb), rel=1e-12)

    def test_two_path_on_random_models(self, rng):
        # Manual per-neuron loop, written independently of the vectorized path.
        for _ in range(50):
            m = random_model(rng)
            mw = float(rng.uniform(3.0, 5.8))
            vs30 = float(rng.uniform(150.0, 1500.0))
            rjb = float(rng.uniform(4.0, 500.0))
            total = m.output_bias
            for i in range(m.hidden_count):
                f = (m.input_hidden_weights[i, 0] * (mw / m.normalization.mag_div)
                     + m.input_hidden_weights[i, 1] * (vs30 / m.normalization.vs30_div)
                     + m.input_hidden_weights[i, 2] * (rjb / m.normalization.rjb_div)
                     + m.hidden_biases[i])
                total += m.hidden_output_weights[i] / (1.0 + math.exp(-f))
            assert forward(m, mw, vs30, rjb).normalized_log == pytest.approx(total, rel=1e-12)

    def test_prediction_fields_consistent(self):
        m = published_model(Target.PGA)
        pred = forward(m, 4.5, 600.0, 50.0)
        assert pred.value == math.exp(pred.log_value)
        assert pred.log_value == pytest.approx(pred.normalized_log * 6.1, rel=1e-15)
        assert pred.hidden_activations.shape == (4,)
        assert np.all(pred.hidden_activations > 0) and np.all(pred.hidden_activations < 1)
        assert not pred.hidden_activations.flags.writeable

    def test_zero_output_weights_give_bias(self, rng):
        m = NetworkModel(hidden_count=3,
                         input_hidden_weights=rng.uniform(-2, 2, (3, 3)),
                         hidden_biases=rng.uniform(-2, 2, 3),
                         hidden_output_weights=np.zeros(3),
                         output_bias=0.75,
                         normalization=published_normalization(Target.PGA),
                         target=Target.PGA)
        assert forward(m, 4.0, 760.0, 20.0).normalized_log == 0.75

    def test_deterministic_bit_identical(self):
        m = published_model(Target.PGV)
        a = [forward(m, 4.1, 333.0, 77.0).value for _ in range(5)]
        assert len(set(a)) == 1

    def test_batch_matches_scalar(self, rng):
        m = published_model(Target.PGA)
        mw = rng.uniform(3.0, 5.8, 40)
        vs = rng.uniform(150.0, 1500.0, 40)
        rj = rng.uniform(4.0, 500.0, 40)
        batch = batch_values(m, mw, vs, rj)
        # The two code paths order the dot products differently, so agreement
        # is to rounding, not bitwise.
        for i in range(40):
            scalar = forward(m, float(mw[i]), float(vs[i]), float(rj[i])).value
            assert batch[i] == pytest.approx(scalar, rel=1e-14)

    def test_scaling_consistency(self):
        # Power-of-two divisors and inputs make the normalized ratios exact,
        # so halving both divisors and inputs is bitwise neutral.
        w = np.array([[1.5, -2.0, 0.5], [-1.0, 0.25, 2.0]])
        b = np.array([0.125, -0.5])
        v = np.array([1.0, -2.0])
        kw = dict(hidden_count=2, input_hidden_weights=w, hidden_biases=b,
                  hidden_output_weights=v, output_bias=0.25, target=Target.PGA)
        coarse = NetworkModel(normalization=Normalization(8.0, 1024.0, 512.0, 4.0), **kw)
        fine = NetworkModel(normalization=Normalization(4.0, 512.0, 256.0, 4.0), **kw)
        a = forward(coarse, 4.0, 512.0, 128.0)
        c = forward(fine, 2.0, 256.0, 64.0)
        assert a.normalized_log == c.normalized_log
        assert a.value == c.value

    def test_bounded_output_interval(self, rng):
        # With activations in (0,1) the normalized log lies strictly between
        # bias plus the negative and positive output-weight sums.
        m = published_model(Target.PGA)
        lo = m.output_bias + float(np.minimum(m.hidden_output_weights, 0.0).sum())
        hi = m.output_bias + float(np.maximum(m.hidden_output_weights, 0.0).sum())
        assert lo == pytest.approx(-0.7186, rel=1e-12)
        assert hi == pytest.approx(7.3114, rel=1e-12)
        extremes = [(2.0, 100.0, 1.0), (8.0, 2500.0, 1000.0), (3.0, 2500.0, 1.0)]
        samples = [(float(rng.uniform(2, 8)), float(rng.uniform(100, 2500)),
                    float(rng.uniform(1, 1000))) for _ in range(200)]
        for mw, vs30, rjb in extremes + samples:
            nlog = forward(m, mw, vs30, rjb).normalized_log
            assert lo < nlog < hi


class TestInputValidation:
    def test_non_finite_inputs_rejected(self):
        m = published_model(Target.PGA)
        with pytest.raises(InputDomainError, match="magnitude"):
            forward(m, float("nan"), 760.0, 20.0)
        with pytest.raises(InputDomainError, match="vs30"):
            forward(m, 4.0, float("inf"), 20.0)
        with pytest.raises(InputDomainError, match="rjb"):
            forward(m, 4.0, 760.0, float("nan"))

    def test_non_positive_vs30_and_rjb_rejected(self):
        m = published_model(Target.PGA)
        with pytest.raises(InputDomainError, match="vs30"):
            forward(m, 4.0, 0.0, 20.0)
        with pytest.raises(InputDomainError, match="rjb"):
            forward(m, 4.0, 760.0, -5.0)

    def test_out_of_domain_is_warning_not_error(self):
        assert out_of_domain_reasons(4.0, 100.0) == []
        assert out_of_domain_reasons(*MAGNITUDE_RANGE[:1], RJB_RANGE_KM[0]) == []
        reasons = out_of_domain_reasons(9.0, 100.0)
        assert len(reasons) == 1 and "magnitude" in reasons[0]
        reasons = out_of_domain_reasons(4.0, 1000.0)
        assert len(reasons) == 1 and "rjb" in reasons[0]
        assert len(out_of_domain_reasons(2.0, 1.0)) == 2
        # Extrapolation still evaluates.
        assert forward(published_model(Target.PGA), 9.0, 760.0, 1000.0).value > 0

    def test_validate_record_names_offending_field(self):
        good = GroundMotionRecord("e", "s", 4.0, 760.0, 20.0, 10.0, 1.0)
        validate_record(good)
        for field_name, bad in (("vs30", -1.0), ("rjb", 0.0),
                                ("pga", -3.0), ("pgv", float("nan"))):
            rec = GroundMotionRecord("e", "s", 4.0, 760.0, 20.0, 10.0, 1.0)
            rec = rec.__class__(**{**rec.__dict__, field_name: bad})
            with pytest.raises(InputDomainError, match=field_name):
                validate_record(rec)


class TestModelInvariants:
    def test_shape_mismatch_rejected(self, rng):
        with pytest.raises(ValueError, match="shape"):
            NetworkModel(hidden_count=4,
                         input_hidden_weights=rng.uniform(-1, 1, (3, 3)),
                         hidden_biases=rng.uniform(-1, 1, 4),
                         hidden_output_weights=rng.uniform(-1, 1, 4),
                         output_bias=0.0,
                         normalization=published_normalization(Target.PGA),
                         target=Target.PGA)

    def test_hidden_count_range(self, rng):
        for h in (0, 11):
            with pytest.raises(ValueError, match="hidden_count"):
                NetworkModel(hidden_count=h,
                             input_hidden_weights=rng.uniform(-1, 1, (max(h, 1), 3)),
                             hidden_biases=rng.uniform(-1, 1, max(h, 1)),
                             hidden_output_weights=rng.uniform(-1, 1, max(h, 1)),
                             output_bias=0.0,
                             normalization=published_normalization(Target.PGA),
                             target=Target.PGA)

    def test_non_finite_weights_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            NetworkModel(hidden_count=1,
                         input_hidden_weights=np.array([[1.0, np.nan, 0.0]]),
                         hidden_biases=np.zeros(1),
                         hidden_output_weights=np.ones(1),
                         output_bias=0.0,
                         normalization=published_normalization(Target.PGA),
                         target=Target.PGA)

    def test_weights_frozen_after_construction(self, rng):
        m = random_model(rng)
        with pytest.raises(ValueError):
            m.input_hidden_weights[0, 0] = 99.0

    def test_bad_normalization_rejected(self):
        with pytest.raises(ValueError, match="divisor"):
            Normalization(6.0, -1792.0, 522.0, 6.1)
        with pytest.raises(ValueError, match="divisor"):
            Normalization(6.0, 1792.0, 522.0, 0.0)
