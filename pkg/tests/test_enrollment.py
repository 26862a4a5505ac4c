import json

import numpy as np
import pytest

from pufkit.enrollment import (
    Challenge,
    EnrollmentPlan,
    EnrollmentRecord,
    ReferenceResponse,
    enroll,
    load_challenge,
    load_record,
    majority_vote,
    preselect,
    reference_ber_table,
    save_challenge,
    save_record,
)
from pufkit.exceptions import ConditionLookupError, FormatError, ParameterError
from pufkit.puf import compute_ber


class TestVoting:
    def test_majority_vote(self):
        repeats = np.array([[1, 0, 1, 0], [1, 1, 0, 0], [0, 1, 1, 0]], dtype=np.uint8)
        assert majority_vote(repeats).tolist() == [1, 1, 1, 0]
        assert majority_vote([np.array([1, 0])]).tolist() == [1, 0]

    @pytest.mark.parametrize("q", [0, 2, 4])
    def test_majority_vote_needs_odd_count(self, q):
        with pytest.raises(ParameterError):
            majority_vote(np.zeros((q, 5), dtype=np.uint8))

    def test_ragged_repeats(self):
        with pytest.raises(ParameterError):
            majority_vote([np.zeros(3), np.zeros(4), np.zeros(3)])

    def test_majority_vote_ignores_repeat_order(self, rng):
        repeats = rng.integers(0, 2, (9, 300), dtype=np.uint8)
        shuffled = repeats[rng.permutation(9)]
        assert np.array_equal(majority_vote(repeats), majority_vote(shuffled))

    @pytest.mark.parametrize("label", ["25C", "80C"])
    def test_majority_vote_does_not_add_bit_errors(self, small_dataset, label):
        data = small_dataset.repeats(label)
        held_out = data[10:]
        single_ber = float((held_out != data[0][None, :]).mean())
        voted_ber = float((held_out != majority_vote(data[:9])[None, :]).mean())
        sigma = np.sqrt(single_ber * (1 - single_ber) / held_out.size)
        assert voted_ber <= single_ber + 3 * sigma

    def test_preselect(self):
        repeats = np.array([[1, 0, 1, 0], [1, 1, 1, 0]], dtype=np.uint8)
        mask, bits = preselect(repeats)
        assert mask.tolist() == [0, 2, 3]
        assert bits.tolist() == [1, 1, 0]
        with pytest.raises(ParameterError):
            preselect(repeats[:1])


class TestPlan:
    def test_holdout_start(self):
        assert EnrollmentPlan("25C").holdout_start == 10
        assert EnrollmentPlan("25C", ("80C",)).holdout_start == 10
        assert EnrollmentPlan("25C", strategy="mv").holdout_start == 9
        assert EnrollmentPlan("25C", strategy="none").holdout_start == 1
        assert EnrollmentPlan("25C", ("80C",), strategy="none").holdout_start == 9

    def test_from_config_mrr(self):
        plan = EnrollmentPlan.from_config({
            "strategy": "mrr",
            "reference_condition": "25C",
            "other_conditions": ["-15C", "80C"],
        })
        assert plan.strategy == "presel"
        assert plan.other_conditions == ("-15C", "80C")

    def test_from_config_single(self):
        plan = EnrollmentPlan.from_config({
            "strategy": "mv",
            "reference_condition": "25C",
            "other_conditions": ["80C"],
            "mv_repeats": 5,
        })
        assert plan.other_conditions == ()
        assert plan.mv_repeats == 5

    def test_invalid_plans(self):
        with pytest.raises(ParameterError):
            EnrollmentPlan("25C", strategy="presel+mv")
        with pytest.raises(ParameterError):
            EnrollmentPlan("25C", ("25C",))


class TestEnroll:
    def test_single_preselected_reference(self, small_dataset, single_record):
        mask, bits = preselect(small_dataset.repeats("25C")[:10])
        assert single_record.num_references == 1
        assert np.array_equal(single_record.challenge_mask, mask)
        reference = single_record.references[0]
        assert np.array_equal(reference.bits, bits)
        assert reference.strategy == "presel"
        assert reference.temperature_c == 25

    def test_multiple_references(self, mrr_record):
        assert mrr_record.num_references == 3
        assert [r.condition_label for r in mrr_record.references] == ["25C", "-15C", "80C"]
        assert [r.strategy for r in mrr_record.references] == ["presel", "presel+mv", "presel+mv"]
        assert {r.bits.size for r in mrr_record.references} == {mrr_record.challenge_mask.size}

    def test_other_references_are_masked_majorities(self, small_dataset, mrr_record):
        hot = majority_vote(small_dataset.repeats("80C")[:9])[mrr_record.challenge_mask]
        assert np.array_equal(mrr_record.references[2].bits, hot)

    def test_majority_strategy_keeps_every_cell(self, small_dataset):
        record = enroll(small_dataset, EnrollmentPlan("25C", ("80C",), strategy="mv"))
        assert record.challenge_mask.size == small_dataset.num_cells
        assert [r.strategy for r in record.references] == ["mv", "mv"]

    def test_none_strategy_uses_first_repeat(self, small_dataset):
        record = enroll(small_dataset, EnrollmentPlan("25C", strategy="none"))
        assert np.array_equal(record.references[0].bits, small_dataset.repeats("25C")[0])

    @pytest.mark.parametrize("plan", [
        EnrollmentPlan("25C", ("-15C", "80C")),
        EnrollmentPlan("25C", ("80C",), strategy="mv"),
        EnrollmentPlan("25C", strategy="none", debias="2o-vn"),
    ])
    def test_enrollment_is_deterministic(self, small_dataset, plan):
        assert enroll(small_dataset, plan) == enroll(small_dataset, plan)

    def test_too_few_repeats(self, small_dataset):
        with pytest.raises(ParameterError):
            enroll(small_dataset, EnrollmentPlan("25C", presel_repeats=21))

    def test_unknown_condition(self, small_dataset):
        with pytest.raises(ConditionLookupError):
            enroll(small_dataset, EnrollmentPlan("40C"))

    def test_debiased_enrollment_is_reapplied_on_extraction(self, small_dataset):
        record = enroll(small_dataset, EnrollmentPlan("25C", ("80C",), strategy="none", debias="cvn"))
        assert record.debias_meta is not None
        assert record.response_bits == record.debias_meta.output_bits
        assert record.response_bits < small_dataset.num_cells // 2 + 1
        extracted = record.extract_response(small_dataset.repeats("25C")[0])
        assert np.array_equal(extracted, record.references[0].bits)
        assert record.extract_response(small_dataset.repeats("80C")).shape == (20, record.response_bits)


class TestReferenceBer:
    def test_each_reference_is_best_near_its_own_condition(self, small_dataset, mrr_record):
        table = reference_ber_table(mrr_record, small_dataset, holdout_start=10)
        assert set(table) == {"25C", "-15C", "80C"}
        assert table["80C"]["80C"] < table["25C"]["80C"]
        assert table["25C"]["25C"] < table["25C"]["80C"]
        assert table["-15C"]["-15C"] < table["80C"]["-15C"]

    def test_preselected_cells_are_more_reliable(self, small_dataset, single_record):
        num_cells = small_dataset.num_cells
        mask = single_record.challenge_mask
        assert 0.75 <= mask.size / num_cells <= 0.95
        selected = compute_ber(single_record.references[0].bits, mask, small_dataset, "25C", start=10)
        everything = compute_ber(
            small_dataset.repeats("25C")[0], np.arange(num_cells), small_dataset, "25C", start=10
        )
        assert selected < everything

    def test_falls_back_to_all_repeats(self, small_dataset, single_record):
        table = reference_ber_table(single_record, small_dataset, holdout_start=50, conditions=["25C"])
        assert 0.0 <= table["25C"]["25C"] < 0.05


class TestRecordFiles:
    def test_record_json(self, mrr_record, tmp_path):
        path = save_record(mrr_record, tmp_path / "server" / "chip01.record.json")
        assert load_record(path) == mrr_record

    def test_challenge_carries_no_response_bits(self, mrr_record, tmp_path):
        path = save_challenge(mrr_record.challenge, tmp_path / "chip01.challenge.json")
        data = json.loads(path.read_text(encoding="utf-8"))
        assert "references" not in data
        challenge = load_challenge(path)
        assert np.array_equal(challenge.mask, mrr_record.challenge_mask)
        assert challenge.response_bits == mrr_record.response_bits

    def test_debias_selection_survives_serialization(self, small_dataset):
        record = enroll(small_dataset, EnrollmentPlan("25C", strategy="none", debias="2o-vn"))
        restored = EnrollmentRecord.from_dict(record.to_dict())
        assert restored.debias_meta == record.debias_meta
        assert restored == record

    def test_corrupted_files(self, mrr_record, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("[1, 2", encoding="utf-8")
        with pytest.raises(FormatError):
            load_record(bad)
        data = mrr_record.to_dict()
        data["format_version"] = 9
        with pytest.raises(FormatError):
            EnrollmentRecord.from_dict(data)
        data = mrr_record.to_dict()
        data["challenge_mask"] = "***"
        with pytest.raises(FormatError):
            Challenge.from_dict(data)
        data = mrr_record.to_dict()
        del data["references"]
        with pytest.raises(FormatError):
            EnrollmentRecord.from_dict(data)

    def test_record_validation(self, mrr_record):
        challenge = mrr_record.challenge
        with pytest.raises(ParameterError):
            EnrollmentRecord(challenge, [])
        short = ReferenceResponse(mrr_record.references[0].bits[:-1], "25C", "presel", 25)
        with pytest.raises(ParameterError):
            EnrollmentRecord(challenge, [short])
        twice = [mrr_record.references[0], mrr_record.references[0]]
        with pytest.raises(ParameterError):
            EnrollmentRecord(challenge, twice)
