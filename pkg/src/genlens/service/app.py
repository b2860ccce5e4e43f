"""HTTP service exposing datasets, stats, comparisons, scripts, and inference.

Every endpoint is a thin adapter over the core modules; behavior matches
the direct module calls on identical inputs. Binds to loopback by
default and only touches files under the allow-listed data root.
"""

from __future__ import annotations

import asyncio
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Optional

from fastapi import Depends, FastAPI, Query, Request
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from .. import __version__
from ..compare.comparison import agreement_flags, build_comparison, run_grades
from ..dataset.export import export_jsonl
from ..dataset.overlay import resolve_row
from ..errors import (
    AuthError,
    CompletionTimeout,
    EndpointError,
    FilterParseError,
    ForbiddenCapability,
    GenlensError,
    JobNotFound,
    MemoryExceeded,
    NoExports,
    RegexError,
    ReservedKeyCollision,
    SandboxTimeout,
    ScriptError,
    ScriptRuntimeError,
    ScriptSyntaxError,
    TypeMismatch,
    UnknownExport,
    UnknownStat,
    ValidationFailure,
)
from ..inference.config import EndpointConfig, SamplingParams
from ..inference.sweep import SweepSpec
from ..inference.templates import FewShotSpec, PromptTemplate, prompt_for
from ..query.edits import annotate, batch_edit, delete_field, set_field, set_labels
from ..query.views import View, apply_filter, apply_sort, identity_view
from ..scripting.host import SandboxLimits, load_script
from ..stats.engine import compute_custom_stat
from . import schemas as s
from .state import SessionState, UnknownId

_STATUS_422 = (
    FilterParseError,
    RegexError,
    UnknownStat,
    TypeMismatch,
    ScriptError,
    ScriptSyntaxError,
    NoExports,
    UnknownExport,
    ScriptRuntimeError,
    SandboxTimeout,
    MemoryExceeded,
    ForbiddenCapability,
)
_STATUS_502 = (AuthError, EndpointError, CompletionTimeout)


def _status_for(exc: GenlensError) -> int:
    if isinstance(exc, (UnknownId, JobNotFound)):
        return 404
    if isinstance(exc, ReservedKeyCollision):
        return 409
    if isinstance(exc, _STATUS_422):
        return 422
    if isinstance(exc, _STATUS_502):
        return 502
    if isinstance(exc, ValidationFailure):
        return 400
    return 500


def _error_body(exc: GenlensError) -> dict:
    detail = {}
    for key, value in vars(exc).items():
        if isinstance(value, (str, int, float, bool)) or value is None:
            detail[key] = value
    return {"code": type(exc).__name__, "message": str(exc), "detail": detail}


def _session(request: Request) -> SessionState:
    return request.app.state.session


def _template_from(model: s.TemplateModel) -> PromptTemplate:
    few_shot = None
    if model.few_shot is not None:
        few_shot = FewShotSpec(
            example_template=model.few_shot.example_template,
            examples=model.few_shot.examples,
            separator=model.few_shot.separator,
        )
    return PromptTemplate(mode=model.mode, text=model.text, few_shot=few_shot)


def _params_from(model: s.ParamsModel) -> SamplingParams:
    return SamplingParams(
        temperature=model.temperature,
        top_p=model.top_p,
        seed=model.seed,
        max_tokens=model.max_tokens,
        stop=tuple(model.stop),
    )


def create_app(
    data_root: str | Path = ".",
    endpoint: EndpointConfig | None = None,
    limits: SandboxLimits | None = None,
    frontend_dir: str | Path | None = None,
) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        app.state.session.close()

    app = FastAPI(title="genlens", version=__version__, lifespan=lifespan)
    app.state.session = SessionState(data_root=data_root, endpoint=endpoint, limits=limits)

    @app.exception_handler(GenlensError)
    async def genlens_error_handler(request: Request, exc: GenlensError):
        return JSONResponse(_error_body(exc), status_code=_status_for(exc))

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    # --- datasets ------------------------------------------------------

    @app.post("/datasets", response_model=s.RegisterDatasetResponse)
    def register_dataset(body: s.RegisterDatasetRequest, state: SessionState = Depends(_session)):
        entry = state.register_dataset(body.path, body.id)
        return s.RegisterDatasetResponse(
            id=entry.file.id, rows=len(entry.file), path=str(entry.source_path)
        )

    def _view_for(
        state: SessionState,
        base,
        overlay,
        filter_expr: Optional[str],
        sort_spec: Optional[str],
        reports,
    ) -> View:
        view = (
            apply_filter(base, filter_expr, stats=reports, overlay=overlay)
            if filter_expr
            else identity_view(base)
        )
        if sort_spec:
            view = apply_sort(view, sort_spec, stats=reports, overlay=overlay)
        return view

    @app.get("/datasets/{dataset_id}/rows", response_model=s.RowsResponse)
    def dataset_rows(
        dataset_id: str,
        filter: Optional[str] = Query(default=None),
        sort: Optional[str] = Query(default=None),
        page: int = Query(default=1, ge=1),
        page_size: int = Query(default=50, ge=1, le=1000),
        group_id: Optional[str] = Query(default=None),
        state: SessionState = Depends(_session),
    ):
        entry = state.get_dataset(dataset_id)
        reports = state.group_reports(group_id) if group_id else None
        view = _view_for(state, entry.file, entry.overlay, filter, sort, reports)
        start = (page - 1) * page_size
        rows = [
            s.RowOut(row_index=i, record=resolve_row(entry.file, i, entry.overlay))
            for i in view.row_indices[start : start + page_size]
        ]
        return s.RowsResponse(total=len(view), page=page, page_size=page_size, rows=rows)

    # --- groups ----------------------------------------------------------

    @app.post("/groups", response_model=s.CreateGroupResponse)
    def create_group(body: s.CreateGroupRequest, state: SessionState = Depends(_session)):
        group_id = state.create_group(body.dataset_ids, body.alignment_key)
        entry = state.get_group(group_id)
        return s.CreateGroupResponse(
            id=group_id,
            question_count=entry.group.question_count,
            dataset_ids=entry.dataset_ids,
        )

    @app.get("/groups/{group_id}/rows", response_model=s.RowsResponse)
    def group_rows(
        group_id: str,
        filter: Optional[str] = Query(default=None),
        sort: Optional[str] = Query(default=None),
        page: int = Query(default=1, ge=1),
        page_size: int = Query(default=50, ge=1, le=1000),
        expected_field: str = Query(default="expected_answer"),
        state: SessionState = Depends(_session),
    ):
        entry = state.get_group(group_id)
        first_id = entry.dataset_ids[0]
        overlay = state.get_dataset(first_id).overlay
        reports = state.group_reports(group_id, expected_field)
        view = _view_for(state, entry.group, overlay, filter, sort, reports)
        start = (page - 1) * page_size
        first = state.get_dataset(first_id)
        rows = [
            s.RowOut(row_index=i, record=resolve_row(first.file, i, first.overlay))
            for i in view.row_indices[start : start + page_size]
        ]
        return s.RowsResponse(total=len(view), page=page, page_size=page_size, rows=rows)

    @app.get("/groups/{group_id}/stats", response_model=s.StatsResponse)
    def group_stats(
        group_id: str,
        names: Optional[str] = Query(default=None),
        expected_field: str = Query(default="expected_answer"),
        state: SessionState = Depends(_session),
    ):
        reports = state.group_reports(group_id, expected_field)
        if names:
            wanted = [n.strip() for n in names.split(",") if n.strip()]
            for name in wanted:
                if name not in reports:
                    raise UnknownStat(name)
            reports = {name: reports[name] for name in wanted}
        return s.StatsResponse(reports={k: r.to_json() for k, r in reports.items()})

    # --- scripts ---------------------------------------------------------

    @app.post("/scripts", response_model=s.ScriptCreateResponse)
    def create_script(body: s.ScriptCreateRequest, state: SessionState = Depends(_session)):
        script = load_script(body.source)
        state.register_script(script)
        return s.ScriptCreateResponse(id=script.script_id, exports=script.exports)

    @app.post("/groups/{group_id}/custom-stats")
    def group_custom_stat(
        group_id: str, body: s.CustomStatRequest, state: SessionState = Depends(_session)
    ):
        entry = state.get_group(group_id)
        script = state.get_script(body.script_id)
        report = compute_custom_stat(
            entry.group,
            state.host,
            script,
            body.export,
            overlay=state.group_overlay(entry),
            stat_name=body.name or body.export,
        )
        entry.custom_reports[report.stat] = report
        return report.to_json()

    # --- edits / labels / notes ------------------------------------------

    def _dataset_view(state, entry, filter_expr, row_indices, group_id=None) -> View:
        if filter_expr and row_indices:
            raise ValidationFailure("pass either filter or row_indices, not both")
        reports = state.group_reports(group_id) if group_id else None
        if filter_expr:
            return apply_filter(entry.file, filter_expr, stats=reports, overlay=entry.overlay)
        if row_indices is not None:
            return View(base=entry.file, row_indices=list(row_indices))
        return identity_view(entry.file)

    @app.post("/datasets/{dataset_id}/edits", response_model=s.BatchEditResponse)
    def dataset_edits(
        dataset_id: str, body: s.BatchEditRequest, state: SessionState = Depends(_session)
    ):
        entry = state.get_dataset(dataset_id)
        with entry.lock:
            start = len(entry.overlay.entries)
            view = _dataset_view(state, entry, body.filter, body.row_indices)
            result = batch_edit(view, body.field, body.find, body.replace, entry.overlay)
            state.persist_new_entries(entry, start)
        return s.BatchEditResponse(changed=result.changed, warnings=result.warnings)

    @app.post("/datasets/{dataset_id}/fields", response_model=s.EntryResponse)
    def dataset_set_field(
        dataset_id: str, body: s.SetFieldRequest, state: SessionState = Depends(_session)
    ):
        entry = state.get_dataset(dataset_id)
        with entry.lock:
            start = len(entry.overlay.entries)
            if body.delete:
                edit = delete_field(entry.file, body.row_index, body.field, entry.overlay)
            else:
                edit = set_field(
                    entry.file, body.row_index, body.field, body.value, entry.overlay
                )
            state.persist_new_entries(entry, start)
        return s.EntryResponse(entry=edit.to_json())

    @app.post("/datasets/{dataset_id}/labels", response_model=s.LabelsResponse)
    def dataset_labels(
        dataset_id: str, body: s.LabelsRequest, state: SessionState = Depends(_session)
    ):
        entry = state.get_dataset(dataset_id)
        with entry.lock:
            start = len(entry.overlay.entries)
            view = _dataset_view(state, entry, body.filter, body.row_indices)
            count = set_labels(view, body.labels, body.mode, entry.overlay)
            state.persist_new_entries(entry, start)
        return s.LabelsResponse(count=count)

    @app.post("/datasets/{dataset_id}/notes", response_model=s.EntryResponse)
    def dataset_notes(
        dataset_id: str, body: s.NoteRequest, state: SessionState = Depends(_session)
    ):
        entry = state.get_dataset(dataset_id)
        with entry.lock:
            start = len(entry.overlay.entries)
            note_entry = annotate(entry.file, body.row_index, body.note, entry.overlay)
            state.persist_new_entries(entry, start)
        return s.EntryResponse(entry=note_entry.to_json())

    @app.get("/datasets/{dataset_id}/overlay", response_model=s.OverlayResponse)
    def dataset_overlay(dataset_id: str, state: SessionState = Depends(_session)):
        entry = state.get_dataset(dataset_id)
        return s.OverlayResponse(entries=[e.to_json() for e in entry.overlay.entries])

    # --- comparisons ------------------------------------------------------

    @app.post("/comparisons", response_model=s.ComparisonCreateResponse)
    def create_comparison(
        body: s.ComparisonCreateRequest, state: SessionState = Depends(_session)
    ):
        from ..compare.comparison import ComparisonSet
        from .state import ComparisonEntry

        runs = []
        overlays = {}
        for ref in body.runs:
            entry = state.get_dataset(ref.dataset_id)
            runs.append((ref.name, entry.file))
            overlays[ref.name] = entry.overlay
        cmp = ComparisonSet(runs=runs, pairing_key=body.pairing_key, overlays=overlays)
        comparison_id = state.create_comparison(
            ComparisonEntry(
                cmp=cmp,
                expected_field=body.expected_field,
                answer_field=body.answer_field,
                generation_field=body.generation_field,
                exact_match=body.exact_match,
            )
        )
        return s.ComparisonCreateResponse(id=comparison_id, rows=cmp.row_count)

    @app.get("/comparisons/{comparison_id}/rows/{row}", response_model=s.ComparisonRowResponse)
    def comparison_row(
        comparison_id: str, row: int, state: SessionState = Depends(_session)
    ):
        entry = state.get_comparison(comparison_id)
        built = build_comparison(entry.cmp, rows=[row])[0]
        grades = run_grades(entry.cmp, entry.expected_field, entry.answer_field)
        flags = agreement_flags(
            entry.cmp,
            grades,
            generation_field=entry.generation_field,
            exact_match=entry.exact_match,
        )[row]
        runs = []
        for run in built["runs"]:
            runs.append(
                {
                    "run": run["run"],
                    "row_index": run["row_index"],
                    "record": run["record"],
                    "diffs": {
                        field: [span.to_json() for span in spans]
                        for field, spans in run["diffs"].items()
                    },
                }
            )
        return s.ComparisonRowResponse(row=built["row"], runs=runs, flags=flags)

    # --- inference --------------------------------------------------------

    @app.post("/inference/render", response_model=s.RenderResponse)
    def render(body: s.RenderRequest):
        template = _template_from(body.template)
        return s.RenderResponse(prompt=prompt_for(template, body.record))

    @app.post("/inference/complete")
    async def complete(body: s.CompleteRequest, state: SessionState = Depends(_session)):
        override = body.endpoint.model_dump(exclude_none=True) if body.endpoint else None
        client = state.client_for(override)
        params = _params_from(body.params)
        if not body.stream:
            try:
                completion = await client.complete(
                    prompt=body.prompt, messages=body.messages, params=params
                )
            finally:
                await client.aclose()
            return s.CompleteResponse(
                text=completion.text,
                finish_reason=completion.finish_reason,
                usage=completion.usage,
                attempts=completion.attempts,
            )

        async def chunks():
            try:
                async for piece in client.stream(
                    prompt=body.prompt, messages=body.messages, params=params
                ):
                    yield piece
            finally:
                await client.aclose()

        return StreamingResponse(chunks(), media_type="text/plain")

    @app.post("/inference/jobs")
    async def create_job(body: s.SweepRequest, state: SessionState = Depends(_session)):
        if (body.dataset_id is None) == (body.questions is None):
            raise ValidationFailure("provide exactly one of dataset_id or questions")
        if body.questions is not None:
            records = body.questions
        else:
            entry = state.get_dataset(body.dataset_id)
            records = [
                resolve_row(entry.file, i, entry.overlay) for i in range(len(entry.file))
            ]
        out_dir = state.resolve_path(body.out_dir, must_exist=False)
        spec = SweepSpec(
            template=_template_from(body.template),
            params=_params_from(body.params),
            seeds=body.seeds,
            records=records,
            out_dir=out_dir,
            field_map=body.field_map,
        )
        override = body.endpoint.model_dump(exclude_none=True) if body.endpoint else None
        client = state.client_for(override)
        job = state.jobs.create(spec)
        asyncio.create_task(state.jobs.execute(client, spec, job))
        return job.to_json()

    @app.get("/inference/jobs/{job_id}")
    def poll_job(job_id: str, state: SessionState = Depends(_session)):
        return state.jobs.get(job_id).to_json()

    # --- export -----------------------------------------------------------

    @app.post("/export", response_model=s.ExportResponse)
    def export(body: s.ExportRequest, state: SessionState = Depends(_session)):
        entry = state.get_dataset(body.dataset_id)
        reports = state.group_reports(body.group_id) if body.group_id else None
        view = _view_for(state, entry.file, entry.overlay, body.filter, body.sort, reports)
        dest = state.resolve_path(body.dest, must_exist=False)
        dest.parent.mkdir(parents=True, exist_ok=True)
        written = export_jsonl(
            [(entry.file, i) for i in view.row_indices],
            entry.overlay,
            dest,
            mode=body.mode,
        )
        return s.ExportResponse(written=written, dest=str(dest))

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="ui")

    return app
