"""Multi-seed generation sweeps producing aligned homogeneous run files.

Rows and seeds fan out under one shared concurrency cap; a failing row
becomes an error record (generation null) and never fails the sweep.
Each seed writes `seed_<s>.jsonl` with rows in source order, so the
output files always align.
"""

from __future__ import annotations

import asyncio
import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from ..dataset.records import Record
from ..errors import JobNotFound, ValidationFailure
from .client import InferenceClient
from .config import SamplingParams
from .templates import PromptTemplate, prompt_for

PENDING = "pending"
RUNNING = "running"
DONE = "done"
FAILED = "failed"


@dataclass
class SweepSpec:
    template: PromptTemplate
    params: SamplingParams
    seeds: list[int]
    records: list[Record]
    out_dir: Path
    field_map: dict[str, str] | None = None

    def __post_init__(self) -> None:
        if len(set(self.seeds)) != len(self.seeds):
            raise ValidationFailure("seeds must be distinct")
        if not self.seeds:
            raise ValidationFailure("at least one seed required")
        self.out_dir = Path(self.out_dir)


@dataclass
class JobState:
    job_id: str
    seeds: list[int]
    question_count: int
    seed_status: dict[int, str]
    outputs: list[str] = field(default_factory=list)
    error: str | None = None
    seed_mode: str = "server"
    created_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat()
    )

    @property
    def status(self) -> str:
        states = set(self.seed_status.values())
        if self.error is not None or FAILED in states:
            return FAILED
        if states == {DONE}:
            return DONE
        if states == {PENDING}:
            return PENDING
        return RUNNING

    def to_json(self) -> dict[str, Any]:
        return {
            "job_id": self.job_id,
            "status": self.status,
            "seeds": self.seeds,
            "question_count": self.question_count,
            "seed_status": {str(s): st for s, st in self.seed_status.items()},
            "outputs": self.outputs,
            "error": self.error,
            "seed_mode": self.seed_mode,
            "created_at": self.created_at,
        }


def _mapped_record(record: Record, field_map: dict[str, str] | None) -> Record:
    if not field_map:
        return record
    mapped = dict(record)
    for placeholder, source in field_map.items():
        if source in record:
            mapped[placeholder] = record[source]
    return mapped


async def run_sweep(
    client: InferenceClient, spec: SweepSpec, job: JobState | None = None
) -> list[Path]:
    """Execute the sweep; returns one output path per seed in seed order."""
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    semaphore = asyncio.Semaphore(client.config.max_concurrency)
    n = len(spec.records)
    rows_by_seed: dict[int, list[dict | None]] = {s: [None] * n for s in spec.seeds}

    async def generate_one(seed: int, index: int, record: Record) -> None:
        params = spec.params.with_seed(seed)
        row: dict[str, Any] = dict(record)
        try:
            prompt = prompt_for(spec.template, _mapped_record(record, spec.field_map))
            async with semaphore:
                completion = await client.complete(prompt=prompt, params=params)
            row["generation"] = completion.text
            if completion.finish_reason is not None:
                row["finish_reason"] = completion.finish_reason
        except Exception as e:  # a bad row must not kill the sweep
            row["generation"] = None
            row["error"] = f"{type(e).__name__}: {e}"
        row["seed"] = seed
        row["sampling_params"] = params.to_json()
        rows_by_seed[seed][index] = row

    if job is not None:
        for s in spec.seeds:
            job.seed_status[s] = RUNNING
    tasks = [
        asyncio.create_task(generate_one(seed, i, record))
        for seed in spec.seeds
        for i, record in enumerate(spec.records)
    ]
    if tasks:
        await asyncio.gather(*tasks)

    outputs = []
    for seed in spec.seeds:
        path = spec.out_dir / f"seed_{seed}.jsonl"
        with path.open("w", encoding="utf-8") as fh:
            for row in rows_by_seed[seed]:
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")
        outputs.append(path)
        if job is not None:
            job.seed_status[seed] = DONE
            job.outputs.append(str(path))
    return outputs


class JobRegistry:
    """In-memory generation job registry, safe for concurrent poll/submit."""

    def __init__(self):
        self._jobs: dict[str, JobState] = {}
        self._lock = threading.Lock()

    def create(self, spec: SweepSpec) -> JobState:
        job = JobState(
            job_id=f"job-{uuid.uuid4().hex[:10]}",
            seeds=list(spec.seeds),
            question_count=len(spec.records),
            seed_status={s: PENDING for s in spec.seeds},
        )
        with self._lock:
            self._jobs[job.job_id] = job
        return job

    def get(self, job_id: str) -> JobState:
        with self._lock:
            job = self._jobs.get(job_id)
        if job is None:
            raise JobNotFound(job_id)
        return job

    async def execute(self, client: InferenceClient, spec: SweepSpec, job: JobState) -> None:
        try:
            await run_sweep(client, spec, job)
        except Exception as e:  # spec violations or I/O failures fail the job
            job.error = f"{type(e).__name__}: {e}"
        finally:
            await client.aclose()
