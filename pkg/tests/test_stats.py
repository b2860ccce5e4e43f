import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genlens.dataset import EditEntry, EditOverlay, align_runs, load_dataset
from genlens.errors import UnknownField
from genlens.scripting import EXAMPLE_PERSISTENCE_SCRIPT, ScriptHost, load_script
from genlens.stats import (
    CORRECT,
    EMPTY,
    INCORRECT,
    NO_ANSWER,
    answer_histogram,
    builtin_stats,
    compute_custom_stat,
    grade,
    majority_answer,
    normalize_answer,
    persistence,
)

from .conftest import make_run_files
from .oracles import mode_oracle, persistence_oracle


def recs(*answers):
    return [{"predicted_answer": a} for a in answers]


class TestNormalize:
    @pytest.mark.parametrize(
        "value,expected",
        [
            (71, "71"),
            ("  $90 ", "90"),
            ("71.0", "71"),
            ("71.5", "71.5"),
            ("$1,234", "1234"),
            ("1,234.50", "1234.5"),
            ("$x + 1$", "x + 1"),
            ("  word  ", "word"),
            (71.0, "71"),
            (0.5, "0.5"),
            (True, "true"),
            ("0071", "71"),
            ("-3", "-3"),
            ("1e3", "1000"),
        ],
    )
    def test_values(self, value, expected):
        assert normalize_answer(value) == expected

    @pytest.mark.parametrize("value", [None, "", "   ", "$", " $ "])
    def test_empty(self, value):
        assert normalize_answer(value) is EMPTY

    def test_case_preserved(self):
        assert normalize_answer(" Yes ") == "Yes"

    def test_idempotent(self):
        for v in ["71", " $90 ", "1,234", "word word", "71.000"]:
            once = normalize_answer(v)
            assert normalize_answer(once) == once

    def test_raw_mode_distinguishes_types_and_whitespace(self):
        assert normalize_answer("71", normalize=False) == '"71"'
        assert normalize_answer(71, normalize=False) == "71"
        assert normalize_answer(" 71", normalize=False) == '" 71"'
        assert normalize_answer(None, normalize=False) is EMPTY


class TestGrade:
    def test_table_values(self):
        assert grade("71", 71) == CORRECT
        assert grade("76", 71) == INCORRECT
        assert grade("", 71) == NO_ANSWER
        assert grade("90", 90) == CORRECT
        assert grade("71.0", 71) == CORRECT

    def test_numeric_format_symmetry(self):
        assert grade("71.0", 71) == CORRECT
        assert grade("71", "71.000") == CORRECT
        assert grade(71, "$71") == CORRECT

    def test_relative_tolerance(self):
        assert grade("0.3333333333333333", 1 / 3) == CORRECT
        assert grade("0.3334", 1 / 3) == INCORRECT

    def test_strings(self):
        assert grade("Paris", "Paris") == CORRECT
        assert grade("Paris", "paris") == INCORRECT
        assert grade("yes", 71) == INCORRECT

    def test_missing_predicted(self):
        assert grade(None, 71) == NO_ANSWER


class TestHistogram:
    def test_counts(self):
        hist = answer_histogram(recs("71", "71", "76"))
        assert hist.counts == {"71": 2, "76": 1}
        assert hist.empty_count == 0
        assert hist.total == 3

    def test_all_empty(self):
        hist = answer_histogram(recs(None, None))
        assert hist.counts == {}
        assert hist.empty_count == 2

    def test_normalization_merges(self):
        hist = answer_histogram(recs("71", "71.0"))
        assert hist.counts == {"71": 2}

    def test_missing_field_counts_empty(self):
        hist = answer_histogram([{"other": 1}, {"predicted_answer": "a"}])
        assert hist.empty_count == 1
        assert hist.counts == {"a": 1}

    def test_conservation(self):
        hist = answer_histogram(recs("a", None, "b", "a", ""))
        assert sum(hist.counts.values()) + hist.empty_count == hist.total

    def test_raw_mode_keeps_formatting_variants_apart(self):
        hist = answer_histogram(recs("71", "71.0", 71), normalize=False)
        assert hist.counts == {'"71"': 1, '"71.0"': 1, "71": 1}


class TestPersistence:
    def test_examples(self):
        assert persistence(recs("71", "71", "76")) == 2
        assert persistence(recs("71")) == 1
        assert persistence(recs(*(["90"] * 50))) == 50
        assert persistence(recs(None, None)) == 0

    def test_oracle_equivalence_randomized(self):
        rng = random.Random(7)
        alphabet = ["71", "76", "90", "13", "8"]
        for _ in range(300):
            n = rng.randint(1, 50)
            answers = [
                rng.choice(alphabet + [None, ""]) for _ in range(n)
            ]
            assert persistence(recs(*answers)) == persistence_oracle(answers)

    def test_bounds(self):
        rng = random.Random(11)
        for _ in range(100):
            n = rng.randint(1, 50)
            answers = [rng.choice(["a", "b", "c"]) for _ in range(n)]
            p = persistence(recs(*answers))
            distinct = len(set(answers))
            assert p <= n
            assert p >= -(-n // distinct)  # ceil division


class TestMajority:
    def test_examples(self):
        assert majority_answer(recs("71", "76", "71")) == ("71", 2)
        assert majority_answer(recs("71", "76")) == ("71", 1)
        maj, count = majority_answer(recs(None))
        assert maj is EMPTY
        assert count == 0

    def test_tie_is_first_occurrence(self):
        assert majority_answer(recs("b", "a", "a", "b")) == ("b", 2)

    def test_oracle(self):
        rng = random.Random(3)
        for _ in range(200):
            answers = [rng.choice(["x", "y", "z", None]) for _ in range(rng.randint(1, 30))]
            got_answer, got_count = majority_answer(recs(*answers))
            want_answer, want_count = mode_oracle(answers)
            if want_answer is None:
                assert got_answer is EMPTY and got_count == 0
            else:
                assert (got_answer, got_count) == (want_answer, want_count)


def group_from_answers(tmp_path, answers_by_run, expected):
    paths = make_run_files(tmp_path, answers_by_run)
    files = [load_dataset(p) for p in paths]
    # expected answers live in the first run's file via overlay-free merge:
    # write them into every record instead for simplicity
    import json

    for p, answers in zip(paths, answers_by_run):
        rows = []
        for q, a in enumerate(answers):
            rows.append(
                {"question": f"question {q}", "expected_answer": expected[q], "predicted_answer": a}
            )
        p.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    return align_runs([load_dataset(p) for p in paths])


class TestBuiltinStats:
    def test_hand_computed(self, tmp_path):
        group = group_from_answers(tmp_path, [["71"], ["71"], ["76"]], expected=[71])
        reports = builtin_stats(group)
        assert reports["correct_ratio"].per_question == [pytest.approx(2 / 3)]
        assert reports["incorrect_ratio"].per_question == [pytest.approx(1 / 3)]
        assert reports["no_answer_ratio"].per_question == [0.0]
        assert reports["persistence"].per_question == [2]
        assert reports["majority_correct"].per_question == [1]

    def test_single_run_all_correct(self, tmp_path):
        group = group_from_answers(tmp_path, [["71", "90"]], expected=[71, 90])
        reports = builtin_stats(group)
        assert reports["correct_ratio"].per_question == [1.0, 1.0]
        assert reports["incorrect_ratio"].per_question == [0.0, 0.0]
        assert reports["no_answer_ratio"].per_question == [0.0, 0.0]
        assert reports["correct_ratio"].aggregate == 1.0

    def test_all_empty_runs(self, tmp_path):
        group = group_from_answers(
            tmp_path, [[None], [None], [None], [None]], expected=[71]
        )
        reports = builtin_stats(group)
        assert reports["no_answer_ratio"].per_question == [1.0]
        assert reports["persistence"].per_question == [0]
        assert reports["majority_correct"].per_question == [0]

    def test_ratio_conservation_integer_counts(self, tmp_path):
        rng = random.Random(13)
        answers_by_run = [
            [rng.choice(["71", "76", None]) for _ in range(5)] for _ in range(3)
        ]
        group = group_from_answers(tmp_path, answers_by_run, expected=[71] * 5)
        reports = builtin_stats(group)
        m = len(group.files)
        for q in range(5):
            total = (
                Fraction(reports["correct_ratio"].per_question[q]).limit_denominator(m)
                + Fraction(reports["incorrect_ratio"].per_question[q]).limit_denominator(m)
                + Fraction(reports["no_answer_ratio"].per_question[q]).limit_denominator(m)
            )
            assert total == 1

    def test_unknown_expected_field(self, tmp_path):
        paths = make_run_files(tmp_path, [["71"]])
        group = align_runs([load_dataset(p) for p in paths])
        with pytest.raises(UnknownField):
            builtin_stats(group, expected_field="expected_answer")

    def test_expected_field_from_overlay(self, tmp_path):
        paths = make_run_files(tmp_path, [["71"]])
        ds = load_dataset(paths[0])
        group = align_runs([ds])
        overlay = EditOverlay()
        overlay.append(EditEntry(ds.id, 0, "expected_answer", "set", 71))
        reports = builtin_stats(group, overlay=overlay)
        assert reports["correct_ratio"].per_question == [1.0]


@pytest.fixture(scope="module")
def host():
    with ScriptHost() as h:
        yield h


class TestCustomStats:
    def test_example_script_matches_builtin(self, tmp_path, host):
        group = group_from_answers(
            tmp_path, [["71", "a"], ["71", "b"], ["76", "a"]], expected=[71, 0]
        )
        script = load_script(EXAMPLE_PERSISTENCE_SCRIPT)
        report = compute_custom_stat(group, host, script, "persistence")
        assert report.per_question == builtin_stats(group)["persistence"].per_question
        assert not report.errors

    def test_constant_script(self, tmp_path, host):
        group = group_from_answers(tmp_path, [["x"], ["y"]], expected=[0])
        script = load_script("def seven(datas):\n    return 7\n{\"seven\": seven}")
        report = compute_custom_stat(group, host, script, "seven")
        assert report.per_question == [7]
        assert report.aggregate == 7

    def test_partial_failure_reports_error_and_continues(self, tmp_path, host):
        group = group_from_answers(
            tmp_path, [["1", "boom", "3"]], expected=[0, 0, 0]
        )
        source = (
            "def pick(datas):\n"
            "    value = datas[0][\"predicted_answer\"]\n"
            "    if value == \"boom\":\n"
            "        raise ValueError(\"bad question\")\n"
            "    return int(value)\n"
            "{\"pick\": pick}"
        )
        script = load_script(source)
        report = compute_custom_stat(group, host, script, "pick")
        assert report.per_question == [1, None, 3]
        assert len(report.errors) == 1
        assert report.errors[0]["question_index"] == 1
        assert "bad question" in report.errors[0]["message"]

    def test_non_numeric_aggregate_is_null(self, tmp_path, host):
        group = group_from_answers(tmp_path, [["x"]], expected=[0])
        script = load_script("def tag(datas):\n    return \"label\"\n{\"tag\": tag}")
        report = compute_custom_stat(group, host, script, "tag")
        assert report.aggregate is None
        assert report.per_question == ["label"]


class TestReportSerialization:
    def test_shape(self, tmp_path):
        group = group_from_answers(tmp_path, [["71"]], expected=[71])
        report = builtin_stats(group)["persistence"]
        data = report.to_json()
        assert data == {"stat": "persistence", "aggregate": 1.0, "per_question": [1]}


@settings(max_examples=200, deadline=None)
@given(
    answers=st.lists(
        st.sampled_from(["71", "76", "90", "13", "8", None, ""]),
        min_size=1,
        max_size=50,
    )
)
def test_property_persistence_matches_oracle(answers):
    assert persistence(recs(*answers)) == persistence_oracle(answers)
