"""Acceptance suite: one test per criterion, each printing PASS on success.

Run with `pytest tests/test_acceptance.py -v` (or `-s` to see the PASS
lines inline). All tolerances are exact unless a wall-clock budget is
stated, in which case the budget is asserted too.
"""

import asyncio
import json
import random
import string
import time
from fractions import Fraction

import pytest

from genlens.compare import ComparisonSet, agreement_flags, diff_texts, reconstruct, run_grades
from genlens.dataset import (
    EditEntry,
    EditOverlay,
    align_runs,
    export_jsonl,
    load_dataset,
    resolve_row,
)
from genlens.errors import (
    ForbiddenCapability,
    MissingPlaceholder,
    SandboxTimeout,
)
from genlens.inference import (
    EndpointConfig,
    InferenceClient,
    PromptTemplate,
    SamplingParams,
    SweepSpec,
    render_template,
    run_sweep,
)
from genlens.query import apply_filter, apply_sort, batch_edit, identity_view
from genlens.scripting import EXAMPLE_PERSISTENCE_SCRIPT, SandboxLimits, ScriptHost, load_script
from genlens.stats import CORRECT, INCORRECT, NO_ANSWER, grade, persistence
from genlens.stats.engine import builtin_stats

from .conftest import ORIGINAL_QUESTION, memory_dataset, write_jsonl
from .mock_openai import MockOpenAI
from .oracles import persistence_oracle


def _report(number: int, label: str) -> None:
    print(f"ACCEPTANCE {number} {label}: PASS", flush=True)


ALPHABET = ["71", "76", "90", "13", "8"]


def test_01_persistence_oracle_equivalence():
    """builtin == brute-force oracle == Listing-style script, 1000 lists."""
    rng = random.Random(20240817)
    script = load_script(EXAMPLE_PERSISTENCE_SCRIPT)
    started = time.monotonic()
    script_checked = 0
    with ScriptHost() as host:
        for _ in range(1000):
            n = rng.randint(1, 50)
            answers = [
                rng.choice(ALPHABET) if rng.random() > 0.15 else rng.choice([None, ""])
                for _ in range(n)
            ]
            records = [{"predicted_answer": a} for a in answers]
            builtin = persistence(records)
            assert builtin == persistence_oracle(answers)
            # the raw Counter script counts null/"" as answer classes of
            # their own; outside that documented divergence the three paths
            # must agree exactly
            empty_class_max = max(answers.count(None), answers.count(""))
            if empty_class_max <= builtin:
                assert host.invoke(script, "persistence", records) == builtin
                script_checked += 1
    elapsed = time.monotonic() - started
    assert elapsed < 10.0, f"took {elapsed:.1f}s, budget 10s"
    assert script_checked > 700  # the script leg must carry real weight
    _report(1, "persistence oracle equivalence")


def test_02_ratio_conservation():
    """500 randomized groups: ratios sum to exactly 1 over integer counts."""
    rng = random.Random(99)
    for _ in range(500):
        runs = rng.randint(1, 8)
        questions = rng.randint(1, 6)
        expected = [rng.choice(ALPHABET) for _ in range(questions)]
        files = []
        for r in range(runs):
            records = []
            for q in range(questions):
                answer = rng.choice(ALPHABET + [None, ""])
                records.append(
                    {"expected_answer": expected[q], "predicted_answer": answer}
                )
            files.append(memory_dataset(records, file_id=f"m{r}"))
        group = align_runs(files)
        reports = builtin_stats(group)
        m = runs
        for q in range(questions):
            grades = [
                grade(f.record(q)["predicted_answer"], expected[q]) for f in files
            ]
            counts = {
                CORRECT: grades.count(CORRECT),
                INCORRECT: grades.count(INCORRECT),
                NO_ANSWER: grades.count(NO_ANSWER),
            }
            assert sum(counts.values()) == m
            assert (
                Fraction(counts[CORRECT], m)
                + Fraction(counts[INCORRECT], m)
                + Fraction(counts[NO_ANSWER], m)
                == 1
            )
            assert reports["correct_ratio"].per_question[q] == counts[CORRECT] / m
            assert reports["incorrect_ratio"].per_question[q] == counts[INCORRECT] / m
            assert reports["no_answer_ratio"].per_question[q] == counts[NO_ANSWER] / m
            assert reports["majority_correct"].per_question[q] in (0, 1)
    _report(2, "ratio conservation")


def test_03_grading_fixture():
    """Original expected 71 and perturbed expected 90, exact grades."""
    assert grade("71", 71) == CORRECT
    assert grade("71.0", 71) == CORRECT
    assert grade("76", 71) == INCORRECT
    assert grade("", 71) == NO_ANSWER
    assert grade("90", 90) == CORRECT
    assert grade("90.0", 90) == CORRECT
    assert grade("71", 90) == INCORRECT
    assert grade("", 90) == NO_ANSWER
    assert grade(None, 90) == NO_ANSWER
    _report(3, "grading fixture")


def _corpus(tmp_path):
    files = []
    files.append(
        write_jsonl(
            tmp_path / "perturbations.jsonl",
            [
                {"question": ORIGINAL_QUESTION, "expected_answer": 71},
                {"question": "Perturbed: numbers swapped", "expected_answer": 90},
                {"question": "Perturbed: operation added", "expected_answer": 76},
            ],
        )
    )
    files.append(
        write_jsonl(
            tmp_path / "unicode.jsonl",
            [
                {"question": "Résumé ünïcode ☃?", "answer": "π"},
                {"nested": {"a": [1, 2, {"b": None}]}, "em": "—"},
            ],
        )
    )
    crlf = tmp_path / "crlf.jsonl"
    crlf.write_bytes(b'{"a": 1}\r\n{"a": 2}\r\n')
    files.append(crlf)
    unterminated = tmp_path / "untermi.jsonl"
    unterminated.write_bytes(b'{"x": "first"}\n{"x": "last"}')
    files.append(unterminated)
    numbers = tmp_path / "numbers.jsonl"
    numbers.write_text('{"v": 1e10, "w": 0.1, "z": -0}\n{"v": 123456789012345678}\n')
    files.append(numbers)
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    files.append(empty)
    return files


def test_04_jsonl_round_trip(tmp_path):
    """Raw export byte-identity and resolved export/resolve_row agreement."""
    for path in _corpus(tmp_path):
        ds = load_dataset(path)
        raw_dest = tmp_path / (path.stem + ".raw.out")
        export_jsonl([(ds, i) for i in range(len(ds))], None, raw_dest, mode="raw")
        assert raw_dest.read_bytes() == path.read_bytes(), path.name

        overlay = EditOverlay()
        if len(ds):
            overlay.append(EditEntry(ds.id, 0, "patched", "set", {"by": "overlay"}))
            overlay.append(
                EditEntry(ds.id, 0, "_labels", "label", {"label": "checked", "mode": "add"})
            )
            overlay.append(EditEntry(ds.id, len(ds) - 1, "_notes", "note", "looked at"))
        resolved_dest = tmp_path / (path.stem + ".resolved.out")
        export_jsonl(
            [(ds, i) for i in range(len(ds))], overlay, resolved_dest, mode="resolved"
        )
        back = load_dataset(resolved_dest)
        for i in range(len(ds)):
            assert back.record(i) == resolve_row(ds, i, overlay), (path.name, i)
    _report(4, "jsonl round trip")


def test_05_query_semantics():
    """Planted filter rows, reference sort, stability on equal keys."""
    rng = random.Random(5)
    planted = {7, 23, 42, 77}
    records = []
    for i in range(100):
        if i in planted:
            question = f"Question {i}? And a second one?"
        else:
            question = f"Question {i}?"
        records.append({"question": question, "expected_answer": str(i % 7)})
    ds = memory_dataset(records, file_id="q100")
    view = apply_filter(ds, 'count(question, "?") >= 2')
    assert view.row_indices == sorted(planted)

    # group stats with deliberate ties for the stability check
    runs = 4
    files = []
    answer_plan = []
    for q in range(100):
        bucket = q % 5
        correct_count = [0, 1, 2, 2, 4][bucket]
        distinct_wrong = [4, 2, 1, 2, 0][bucket]
        answers = [records[q]["expected_answer"]] * correct_count
        wrong_pool = [f"w{j}" for j in range(max(distinct_wrong, 1))]
        while len(answers) < runs:
            answers.append(wrong_pool[len(answers) % len(wrong_pool)])
        rng.shuffle(answers)
        answer_plan.append(answers)
    for r in range(runs):
        files.append(
            memory_dataset(
                [
                    {
                        "question": records[q]["question"],
                        "expected_answer": records[q]["expected_answer"],
                        "predicted_answer": answer_plan[q][r],
                    }
                    for q in range(100)
                ],
                file_id=f"rr{r}",
            )
        )
    group = align_runs(files)
    stats = builtin_stats(group)
    sorted_view = apply_sort(
        identity_view(group), "stat.correct_ratio:asc,stat.persistence:desc", stats
    )
    ratio = stats["correct_ratio"].per_question
    pers = stats["persistence"].per_question
    reference = sorted(range(100), key=lambda q: (ratio[q], -pers[q]))
    assert sorted_view.row_indices == reference

    # equal keys appear in base order
    by_key = {}
    for position, q in enumerate(sorted_view.row_indices):
        by_key.setdefault((ratio[q], pers[q]), []).append(q)
    for rows in by_key.values():
        assert rows == sorted(rows)
    _report(5, "query semantics")


def test_06_batch_edit_idempotence(tmp_path):
    records = [
        {"question": f"Q{i}? Extra{i}?" if i % 3 == 0 else f"Q{i}?", "expected_answer": i}
        for i in range(12)
    ]
    path = write_jsonl(tmp_path / "edit.jsonl", records)
    ds = load_dataset(path)
    overlay = EditOverlay()
    view = identity_view(ds)
    find, replace = r"\?\s*[^?]*\?$", "?"

    first = batch_edit(view, "question", find, replace, overlay)
    matched = {i for i in range(12) if i % 3 == 0}
    assert first.changed == len(matched)
    journal_after_first = len(overlay.entries)
    once = [resolve_row(ds, i, overlay)["question"] for i in range(12)]

    second = batch_edit(view, "question", find, replace, overlay)
    assert second.changed == 0
    assert len(overlay.entries) == journal_after_first
    twice = [resolve_row(ds, i, overlay)["question"] for i in range(12)]
    assert once == twice
    assert all(q.count("?") == 1 for q in twice)
    _report(6, "batch edit idempotence")


def _random_text(rng: random.Random, size: int) -> str:
    pool = (
        list(string.ascii_letters)
        + list(" " * 12)
        + list("\n\t.,?!$0123456789")
        + ["é", "π", "—", "∑"]
    )
    words = []
    length = 0
    while length < size:
        word = "".join(rng.choice(pool) for _ in range(rng.randint(1, 9)))
        words.append(word)
        length += len(word) + 1
    return " ".join(words)[:size]


def test_07_diff_reconstruction():
    rng = random.Random(777)
    started = time.monotonic()
    for i in range(1000):
        size_a = rng.randint(0, 10_000) if i % 10 == 0 else rng.randint(0, 600)
        size_b = rng.randint(0, 10_000) if i % 10 == 0 else rng.randint(0, 600)
        a = _random_text(rng, size_a)
        if rng.random() < 0.4:  # related pair: mutate a
            b = a
            for _ in range(rng.randint(1, 6)):
                if not b:
                    break
                cut = rng.randrange(len(b))
                b = b[:cut] + rng.choice(["", "X", " new ", "42"]) + b[cut + 1 :]
        else:
            b = _random_text(rng, size_b)
        spans = diff_texts(a, b)
        assert reconstruct(spans, "a") == a
        assert reconstruct(spans, "b") == b
        for left, right in zip(spans, spans[1:]):
            assert left.kind != right.kind
    elapsed = time.monotonic() - started
    assert elapsed < 30.0, f"took {elapsed:.1f}s, budget 30s"
    _report(7, "diff reconstruction")


def test_08_template_rendering():
    template = PromptTemplate(
        mode="template_based", text="Problem: {question}; Solution: {solution}"
    )
    record = {"question": ORIGINAL_QUESTION, "solution": 71}
    assert render_template(template, record) == (
        "Problem: Ali had $21. Leila gave him half of her $100. "
        "How much does Ali have now?; Solution: 71"
    )
    escapes = PromptTemplate(mode="template_based", text="{{x}} is {x} {{{x}}}")
    assert render_template(escapes, {"x": 5}) == "{x} is 5 {5}"
    with pytest.raises(MissingPlaceholder) as exc:
        render_template(
            PromptTemplate(mode="template_based", text="{absent}"), {"present": 1}
        )
    assert exc.value.name == "absent"
    _report(8, "template rendering")


def test_09_sweep_integration(tmp_path):
    started = time.monotonic()
    mock = MockOpenAI(latency_s=0.05)
    config = EndpointConfig(
        base_url="http://mock/v1",
        model="sweep-model",
        max_concurrency=2,
        max_retries=1,
        backoff_base_s=0.01,
        timeout_s=10,
    )
    client = InferenceClient(config, transport=mock.transport())
    records = [
        {"question": "q0", "expected_answer": 0},
        {"question": "q1 FAIL_ME", "expected_answer": 1},
        {"question": "q2", "expected_answer": 2},
        {"question": "q3", "expected_answer": 3},
    ]
    spec = SweepSpec(
        template=PromptTemplate(mode="template_based", text="Solve: {question}"),
        params=SamplingParams(),  # temperature 0.7, top_p 0.95
        seeds=[11, 22, 33],
        records=records,
        out_dir=tmp_path / "sweep",
    )

    async def go():
        async with client:
            return await run_sweep(client, spec)

    outputs = asyncio.run(go())
    files = [load_dataset(p) for p in outputs]
    group = align_runs(files, alignment_key="question")
    assert group.question_count == 4

    for body in mock.requests:
        assert body["temperature"] == 0.7
        assert body["top_p"] == 0.95
        assert body["seed"] in (11, 22, 33)
        assert body["model"] == "sweep-model"
    per_seed = {s: 0 for s in (11, 22, 33)}
    for body in mock.requests:
        per_seed[body["seed"]] += 1
    assert all(count >= 4 for count in per_seed.values())  # retries may add more

    assert mock.max_in_flight <= 2
    assert mock.max_in_flight == 2  # latency forces real concurrency

    for f in files:
        failed = f.record(1)
        assert failed["generation"] is None
        assert "error" in failed
        for q in (0, 2, 3):
            assert f.record(q)["generation"] == f"Solve: {records[q]['question']}"
        assert f.record(0)["sampling_params"]["seed"] == f.record(0)["seed"]
    elapsed = time.monotonic() - started
    assert elapsed < 20.0, f"took {elapsed:.1f}s, budget 20s"
    _report(9, "sweep integration")


def test_10_sandbox_safety():
    limits = SandboxLimits(wall_time_ms=400)
    with ScriptHost(limits) as host:
        file_script = load_script(
            "def f(xs):\n    return open(\"/etc/hosts\").read()\n{\"f\": f}"
        )
        with pytest.raises(ForbiddenCapability):
            host.invoke(file_script, "f", [])

        with pytest.raises(ForbiddenCapability):
            load_script("import socket\ndef f(xs):\n    return 1\n{\"f\": f}")
        net_script = load_script(
            "def f(xs):\n    return __import__(\"socket\").gethostname()\n{\"f\": f}"
        )
        with pytest.raises(ForbiddenCapability):
            host.invoke(net_script, "f", [])

        loop_script = load_script("def f(xs):\n    while True:\n        pass\n{\"f\": f}")
        started = time.monotonic()
        with pytest.raises(SandboxTimeout):
            host.invoke(loop_script, "f", [])
        assert time.monotonic() - started < 2 * (limits.wall_time_ms / 1000)

        survivor = load_script("def g(xs):\n    return sum(xs)\n{\"g\": g}")
        assert host.invoke(survivor, "g", [1, 2, 3]) == 6
    _report(10, "sandbox safety")


def test_11_suspect_detection():
    shared_reasoning = (
        "Leila gives 50, so Ali has 21 + 50 = 71.\nThe answer is 71."
    )
    whitespace_variant = (
        "Leila gives 50,  so Ali has 21 + 50 = 71. \nThe answer is 71."
    )
    perturbed = memory_dataset(
        [
            {  # suspect: same solution text, graded incorrect here
                "question": "numerical substitution row",
                "expected_answer": 90,
                "predicted_answer": "71",
                "generation": whitespace_variant,
            },
            {
                "question": "genuinely different row",
                "expected_answer": 5,
                "predicted_answer": "4",
                "generation": "I think it is 4.",
            },
            {
                "question": "agreeing row",
                "expected_answer": 7,
                "predicted_answer": "7",
                "generation": "Seven.",
            },
        ],
        file_id="pert",
    )
    original = memory_dataset(
        [
            {
                "question": "original row",
                "expected_answer": 71,
                "predicted_answer": "71",
                "generation": shared_reasoning,
            },
            {
                "question": "genuinely different row",
                "expected_answer": 5,
                "predicted_answer": "5",
                "generation": "It must be 5.",
            },
            {
                "question": "agreeing row",
                "expected_answer": 7,
                "predicted_answer": "7",
                "generation": "Seven.",
            },
        ],
        file_id="orig",
    )
    cmp = ComparisonSet(runs=[("perturbed", perturbed), ("original", original)])
    flags = agreement_flags(cmp, run_grades(cmp))
    assert [f["suspect"] for f in flags] == [True, False, False]
    assert flags[0]["same_generation"] and flags[0]["disagreeing_correctness"]
    assert flags[1]["disagreeing_correctness"] and not flags[1]["same_generation"]
    assert flags[2]["same_generation"] and not flags[2]["disagreeing_correctness"]
    _report(11, "suspect detection")
