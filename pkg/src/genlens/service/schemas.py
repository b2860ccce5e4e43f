"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field


class ErrorBody(BaseModel):
    code: str
    message: str
    detail: dict[str, Any] = Field(default_factory=dict)


class RegisterDatasetRequest(BaseModel):
    path: str
    id: Optional[str] = None


class RegisterDatasetResponse(BaseModel):
    id: str
    rows: int
    path: str


class CreateGroupRequest(BaseModel):
    dataset_ids: list[str]
    alignment_key: Optional[str] = None


class CreateGroupResponse(BaseModel):
    id: str
    question_count: int
    dataset_ids: list[str]


class RowOut(BaseModel):
    row_index: int
    record: dict[str, Any]


class RowsResponse(BaseModel):
    total: int
    page: int
    page_size: int
    rows: list[RowOut]


class StatsResponse(BaseModel):
    reports: dict[str, dict[str, Any]]


class ScriptCreateRequest(BaseModel):
    source: str


class ScriptCreateResponse(BaseModel):
    id: str
    exports: list[str]


class CustomStatRequest(BaseModel):
    script_id: str
    export: str
    name: Optional[str] = None
    expected_field: str = "expected_answer"


class BatchEditRequest(BaseModel):
    field: str
    find: str
    replace: str
    filter: Optional[str] = None
    row_indices: Optional[list[int]] = None


class BatchEditResponse(BaseModel):
    changed: int
    warnings: int


class LabelsRequest(BaseModel):
    labels: list[str]
    mode: Literal["add", "remove"] = "add"
    filter: Optional[str] = None
    row_indices: Optional[list[int]] = None


class LabelsResponse(BaseModel):
    count: int


class NoteRequest(BaseModel):
    row_index: int
    note: str


class SetFieldRequest(BaseModel):
    row_index: int
    field: str
    value: Any = None
    delete: bool = False


class EntryResponse(BaseModel):
    entry: dict[str, Any]


class OverlayResponse(BaseModel):
    entries: list[dict[str, Any]]


class RunRef(BaseModel):
    name: str
    dataset_id: str


class ComparisonCreateRequest(BaseModel):
    runs: list[RunRef]
    pairing_key: Optional[str] = None
    expected_field: str = "expected_answer"
    answer_field: str = "predicted_answer"
    generation_field: str = "generation"
    exact_match: bool = False


class ComparisonCreateResponse(BaseModel):
    id: str
    rows: int


class ComparisonRowResponse(BaseModel):
    row: int
    runs: list[dict[str, Any]]
    flags: dict[str, Any]


class FewShotModel(BaseModel):
    example_template: str
    examples: list[dict[str, Any]] = Field(default_factory=list)
    separator: str = "\n\n"


class TemplateModel(BaseModel):
    mode: Literal["prompt_based", "template_based"] = "template_based"
    text: str
    few_shot: Optional[FewShotModel] = None


class ParamsModel(BaseModel):
    temperature: float = 0.7
    top_p: float = 0.95
    seed: Optional[int] = None
    max_tokens: int = 1024
    stop: list[str] = Field(default_factory=list)


class EndpointModel(BaseModel):
    base_url: str
    model: str
    api_key_env: Optional[str] = None
    timeout_s: Optional[float] = None
    max_concurrency: Optional[int] = None
    max_retries: Optional[int] = None
    backoff_base_s: Optional[float] = None


class CompleteRequest(BaseModel):
    prompt: Optional[str] = None
    messages: Optional[list[dict[str, Any]]] = None
    params: ParamsModel = Field(default_factory=ParamsModel)
    endpoint: Optional[EndpointModel] = None
    stream: bool = False


class CompleteResponse(BaseModel):
    text: str
    finish_reason: Optional[str] = None
    usage: Optional[dict[str, Any]] = None
    attempts: int


class RenderRequest(BaseModel):
    template: TemplateModel
    record: dict[str, Any] = Field(default_factory=dict)


class RenderResponse(BaseModel):
    prompt: str


class SweepRequest(BaseModel):
    template: TemplateModel
    params: ParamsModel = Field(default_factory=ParamsModel)
    seeds: list[int]
    dataset_id: Optional[str] = None
    questions: Optional[list[dict[str, Any]]] = None
    out_dir: str
    field_map: Optional[dict[str, str]] = None
    endpoint: Optional[EndpointModel] = None


class ExportRequest(BaseModel):
    dataset_id: str
    dest: str
    mode: Literal["raw", "resolved"] = "raw"
    filter: Optional[str] = None
    sort: Optional[str] = None
    group_id: Optional[str] = None  # stat context for filter/sort expressions


class ExportResponse(BaseModel):
    written: int
    dest: str
