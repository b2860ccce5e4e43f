import json
from pathlib import Path

import pytest

from genlens.dataset.loader import _line_spans
from genlens.dataset.records import DatasetFile

# GSM-style fixture: an original question plus two perturbed variants
# (one adds an operation, one substitutes the numbers).
ORIGINAL_QUESTION = (
    "Ali had $21. Leila gave him half of her $100. How much does Ali have now?"
)
ADDING_OPERATION_QUESTION = (
    "Ali had $21. Leila gave him half of her $100. After that, Ali spent $15 "
    "on a book and then his friend, John, gave him a quarter of his $80. "
    "How much does Ali have now?"
)
NUMERICAL_SUBSTITUTION_QUESTION = (
    "Ali had $30. Leila gave him half of her $120. How much does Ali have now?"
)

PERTURBATION_RECORDS = [
    {"question": ORIGINAL_QUESTION, "expected_answer": 71},
    {"question": ADDING_OPERATION_QUESTION, "expected_answer": 76},
    {"question": NUMERICAL_SUBSTITUTION_QUESTION, "expected_answer": 90},
]


def write_jsonl(path: Path, records: list[dict]) -> Path:
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    return path


def memory_dataset(records: list[dict], file_id: str = "mem") -> DatasetFile:
    """A DatasetFile backed by an in-memory buffer (no tmp files)."""
    data = b"".join(
        json.dumps(r, ensure_ascii=False).encode("utf-8") + b"\n" for r in records
    )
    return DatasetFile(
        id=file_id,
        source_path=Path(f"<memory:{file_id}>"),
        offsets=_line_spans(data),
        data=data,
    )


@pytest.fixture
def perturbation_file(tmp_path):
    return write_jsonl(tmp_path / "perturbations.jsonl", PERTURBATION_RECORDS)


def make_run_files(tmp_path: Path, answers_by_run: list[list], questions=None) -> list[Path]:
    """One file per run; row i of every file is question i.

    answers_by_run[r][q] is run r's predicted answer for question q.
    """
    question_count = len(answers_by_run[0])
    if questions is None:
        questions = [f"question {q}" for q in range(question_count)]
    paths = []
    for r, answers in enumerate(answers_by_run):
        records = []
        for q, answer in enumerate(answers):
            record = {"question": questions[q], "predicted_answer": answer}
            records.append(record)
        paths.append(write_jsonl(tmp_path / f"run_{r}.jsonl", records))
    return paths
