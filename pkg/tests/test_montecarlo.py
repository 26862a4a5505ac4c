import csv
import math

import numpy as np
import pytest

from pufkit.analytics.failure import failure_budget
from pufkit.analytics.montecarlo import (
    CorrelatedFlipInjector,
    DatasetSource,
    FlipInjector,
    SimulatorSource,
    montecarlo_failure,
    write_csv,
)
from pufkit.enrollment import Challenge, EnrollmentRecord, ReferenceResponse
from pufkit.exceptions import ParameterError
from pufkit.puf import Condition

CODE = (63, 16, 11)


@pytest.fixture(scope="module")
def synthetic_record():
    bits = np.random.default_rng(17).integers(0, 2, 504, dtype=np.uint8)
    challenge = Challenge("synthetic", 504, np.arange(504, dtype=np.int64))
    return EnrollmentRecord(challenge, [ReferenceResponse(bits, "25C", "none", 25)])


def _within_sigmas(failures, trials, predicted, sigmas):
    sigma = math.sqrt(predicted * (1 - predicted) / trials)
    return abs(failures / trials - predicted) <= sigmas * sigma


def _predicted(ber):
    return failure_budget([ber], CODE, 8).p_fail


class TestSources:
    def test_flip_injector_rate(self, synthetic_record, rng):
        source = FlipInjector(synthetic_record.references[0].bits, 0.1)
        batch = source.sample_batch(rng, 200)
        assert batch.shape == (200, 504)
        rate = (batch != synthetic_record.references[0].bits[None, :]).mean()
        assert rate == pytest.approx(0.1, abs=0.01)

    def test_flip_injector_rejects_bad_ber(self, synthetic_record):
        with pytest.raises(ParameterError):
            FlipInjector(synthetic_record.references[0].bits, 1.2)

    def test_burst_injector_rate(self, synthetic_record, rng):
        reference = synthetic_record.references[0].bits
        batch = CorrelatedFlipInjector(reference, 0.05, burst_length=4).sample_batch(rng, 1000)
        rate = (batch != reference[None, :]).mean()
        assert 0.044 <= rate <= 0.053
        with pytest.raises(ParameterError):
            CorrelatedFlipInjector(reference, 0.05, burst_length=0)

    def test_simulator_source(self, small_chip, single_record, rng):
        source = SimulatorSource(small_chip, single_record.challenge, Condition(25, "25C"))
        batch = source.sample_batch(rng, 5)
        assert batch.shape == (5, single_record.response_bits)
        assert (batch != single_record.references[0].bits[None, :]).mean() < 0.05
        assert source.label == "25C"

    def test_dataset_source(self, small_dataset, single_record, rng):
        source = DatasetSource(small_dataset, single_record.challenge, "80C", start=10)
        held_out = single_record.extract_response(small_dataset.repeats("80C")[10:])
        batch = source.sample_batch(rng, 30)
        assert all(any(np.array_equal(row, candidate) for candidate in held_out) for row in batch)
        with pytest.raises(ParameterError):
            DatasetSource(small_dataset, single_record.challenge, "80C", start=20)


class TestCampaign:
    def test_protocol_rate_matches_prediction(self, synthetic_record):
        source = FlipInjector(synthetic_record.references[0].bits, 0.10)
        result = montecarlo_failure(synthetic_record, CODE, source, trials=400, seed=1, L=8)
        predicted = _predicted(0.10)
        assert result.L == 8
        assert len(result.rows) == 400
        assert _within_sigmas(result.failures, 400, predicted, 4)

    def test_distance_mode_matches_protocol_trial_by_trial(self, synthetic_record):
        source = FlipInjector(synthetic_record.references[0].bits, 0.09)
        protocol = montecarlo_failure(synthetic_record, CODE, source, trials=150, seed=5, chunk_size=40)
        distance = montecarlo_failure(
            synthetic_record, CODE, source, trials=150, seed=5, chunk_size=40, mode="distance"
        )
        assert [r.success for r in protocol.rows] == [r.success for r in distance.rows]
        assert protocol.failures == distance.failures > 0

    def test_distance_rate_matches_prediction(self, synthetic_record):
        source = FlipInjector(synthetic_record.references[0].bits, 0.08)
        result = montecarlo_failure(
            synthetic_record, CODE, source, trials=20_000, seed=2, mode="distance", keep_rows=False
        )
        assert result.rows == []
        assert _within_sigmas(result.failures, 20_000, _predicted(0.08), 4)

    def test_burst_errors_fail_more_often_than_iid(self, synthetic_record):
        source = CorrelatedFlipInjector(synthetic_record.references[0].bits, 0.05)
        result = montecarlo_failure(synthetic_record, CODE, source, trials=2000, seed=3, mode="distance")
        assert result.empirical_rate > 100 * _predicted(0.05)

    def test_seeded_and_independent_of_workers(self, synthetic_record):
        source = FlipInjector(synthetic_record.references[0].bits, 0.1)
        kwargs = dict(trials=600, seed=11, chunk_size=100, mode="distance")
        serial = montecarlo_failure(synthetic_record, CODE, source, workers=1, **kwargs)
        again = montecarlo_failure(synthetic_record, CODE, source, workers=1, **kwargs)
        parallel = montecarlo_failure(synthetic_record, CODE, source, workers=2, **kwargs)
        assert serial.rows == again.rows == parallel.rows
        assert [row.trial for row in parallel.rows] == list(range(600))
        other = montecarlo_failure(synthetic_record, CODE, source, trials=600, seed=12, mode="distance")
        assert other.rows != serial.rows

    def test_noise_free_source_never_fails(self, synthetic_record):
        source = FlipInjector(synthetic_record.references[0].bits, 0.0)
        for mode in ("protocol", "distance"):
            result = montecarlo_failure(synthetic_record, CODE, source, trials=50, seed=3, mode=mode)
            assert result.failures == 0
            assert result.empirical_rate == 0.0

    def test_invalid_arguments(self, synthetic_record):
        source = FlipInjector(synthetic_record.references[0].bits, 0.1)
        with pytest.raises(ParameterError):
            montecarlo_failure(synthetic_record, CODE, source, trials=0)
        with pytest.raises(ParameterError):
            montecarlo_failure(synthetic_record, CODE, source, trials=10, mode="fast")
        with pytest.raises(ParameterError):
            montecarlo_failure(synthetic_record, CODE, source, trials=10, L=9)

    def test_report_and_csv(self, synthetic_record, tmp_path):
        source = FlipInjector(synthetic_record.references[0].bits, 0.1, label="iid-0.1")
        result = montecarlo_failure(
            synthetic_record, CODE, source, trials=50, seed=4, mode="distance", predicted=0.157
        )
        data = result.to_dict()
        assert data["condition"] == "iid-0.1"
        assert data["predicted"] == 0.157
        assert data["ci_low"] <= data["empirical_rate"] <= data["ci_high"]
        path = write_csv(result.rows, tmp_path / "trials.csv")
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["trial", "condition", "success", "attempts"]
        assert len(rows) == 51
        assert sum(1 for row in rows[1:] if row[2] == "0") == result.failures

    @pytest.mark.slow
    def test_million_trial_campaign_matches_prediction(self, synthetic_record):
        source = FlipInjector(synthetic_record.references[0].bits, 0.05)
        predicted = _predicted(0.05)
        assert predicted >= 1e-4
        result = montecarlo_failure(
            synthetic_record, CODE, source, trials=1_000_000, seed=2024,
            chunk_size=20_000, mode="distance", keep_rows=False,
        )
        assert _within_sigmas(result.failures, 1_000_000, predicted, 3)
