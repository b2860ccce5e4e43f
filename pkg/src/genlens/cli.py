"""Command-line entry points: stats, filter, edit, label, diff, generate, serve.

Data goes to stdout or --out; diagnostics to stderr. Exit codes: 0 ok,
1 validation error (bad input, expression, template), 2 runtime error
(I/O, endpoint, sandbox). JSON output is byte-stable: sorted keys and
floats at 6 significant digits.
"""

from __future__ import annotations

import asyncio
import json
import sys
from pathlib import Path

import click

from .compare.diff import DELETE, EQUAL, INSERT, diff_texts
from .dataset.export import export_jsonl
from .dataset.loader import load_dataset
from .dataset.overlay import append_to_sidecar, load_overlay
from .dataset.records import align_runs
from .errors import GenlensError, ValidationFailure
from .inference.client import InferenceClient
from .inference.config import EndpointConfig, SamplingParams
from .inference.sweep import SweepSpec, run_sweep
from .inference.templates import PROMPT_BASED, TEMPLATE_BASED, PromptTemplate
from .query.edits import batch_edit, set_labels
from .query.views import apply_filter, apply_sort, identity_view
from .scripting.host import load_script
from .stats.engine import builtin_stats, compute_custom_stat


def _round_floats(value):
    if isinstance(value, float):
        return float(f"{value:.6g}")
    if isinstance(value, list):
        return [_round_floats(v) for v in value]
    if isinstance(value, dict):
        return {k: _round_floats(v) for k, v in value.items()}
    return value


def stable_json(value) -> str:
    """Byte-stable JSON: sorted keys, 6-significant-digit floats."""
    return json.dumps(
        _round_floats(value), sort_keys=True, ensure_ascii=False, separators=(",", ":")
    )


def _parse_seeds(spec: str) -> list[int]:
    """`0..49` (inclusive) or a comma-separated list."""
    spec = spec.strip()
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        try:
            start, end = int(lo), int(hi)
        except ValueError as e:
            raise ValidationFailure(f"bad seed range {spec!r}") from e
        if end < start:
            raise ValidationFailure(f"bad seed range {spec!r}")
        return list(range(start, end + 1))
    try:
        return [int(chunk) for chunk in spec.split(",") if chunk.strip()]
    except ValueError as e:
        raise ValidationFailure(f"bad seed list {spec!r}") from e


def _load_group(paths: list[Path], alignment_key: str | None):
    files = [load_dataset(p) for p in paths]
    return align_runs(files, alignment_key)


def _comma_paths(value: str) -> list[Path]:
    return [Path(p) for p in value.split(",") if p.strip()]


@click.group()
def cli() -> None:
    """Inspect, analyze, clean, and annotate LLM generation datasets."""


@cli.command()
@click.option("--group", "group_spec", required=True, help="comma-separated run files")
@click.option("--expected-field", default="expected_answer", show_default=True)
@click.option("--answer-field", default="predicted_answer", show_default=True)
@click.option("--alignment-key", default=None)
@click.option("--custom-stats", "custom_script", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="json", show_default=True)
@click.option("--normalize/--no-normalize", default=True, show_default=True)
def stats(group_spec, expected_field, answer_field, alignment_key, custom_script, fmt, normalize):
    """Per-question statistics across homogeneous run files."""
    group = _load_group(_comma_paths(group_spec), alignment_key)
    reports = builtin_stats(
        group,
        expected_field=expected_field,
        answer_field=answer_field,
        normalize=normalize,
    )
    if custom_script is not None:
        from .scripting.host import ScriptHost

        script = load_script(custom_script.read_text(encoding="utf-8"))
        with ScriptHost() as host:
            for export in script.exports:
                report = compute_custom_stat(group, host, script, export)
                reports[report.stat] = report
    payload = {
        "question_count": group.question_count,
        "run_count": len(group.files),
        "reports": {name: r.to_json() for name, r in reports.items()},
    }
    if fmt == "json":
        click.echo(stable_json(payload))
        return
    names = list(reports)
    header = ["question"] + names
    widths = [max(8, len(h) + 2) for h in header]
    click.echo("".join(h.ljust(w) for h, w in zip(header, widths)))
    for q in range(group.question_count):
        cells = [str(q)] + [
            _format_cell(reports[name].per_question[q]) for name in names
        ]
        click.echo("".join(c.ljust(w) for c, w in zip(cells, widths)))
    aggregates = ["mean"] + [_format_cell(reports[name].aggregate) for name in names]
    click.echo("".join(c.ljust(w) for c, w in zip(aggregates, widths)))


def _format_cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.4g}"
    return str(value)


@cli.command("filter")
@click.option("--in", "input_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--filter", "filter_expr", default=None, help="filter expression")
@click.option("--sort", "sort_spec", default=None, help="sort spec, e.g. stat.persistence:desc")
@click.option("--out", "output_path", required=True, type=click.Path(path_type=Path))
@click.option("--mode", type=click.Choice(["raw", "resolved"]), default="raw", show_default=True)
@click.option("--runs", "runs_spec", default=None, help="extra aligned run files providing stat columns")
@click.option("--expected-field", default="expected_answer", show_default=True)
def filter_cmd(input_path, filter_expr, sort_spec, output_path, mode, runs_spec, expected_field):
    """Filter/sort a dataset and export the selected rows."""
    dataset = load_dataset(input_path)
    overlay = load_overlay(input_path, dataset.id)
    stats_ctx = None
    base = dataset
    if runs_spec:
        group = align_runs([dataset] + [load_dataset(p) for p in _comma_paths(runs_spec)])
        stats_ctx = builtin_stats(group, expected_field=expected_field, overlay=overlay)
        base = group
    view = (
        apply_filter(base, filter_expr, stats=stats_ctx, overlay=overlay)
        if filter_expr
        else identity_view(base)
    )
    if sort_spec:
        view = apply_sort(view, sort_spec, stats=stats_ctx, overlay=overlay)
    written = export_jsonl(
        [(dataset, i) for i in view.row_indices], overlay, output_path, mode=mode
    )
    click.echo(stable_json({"written": written, "out": str(output_path)}))


@cli.command()
@click.option("--in", "input_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--filter", "filter_expr", default=None)
@click.option("--field", required=True)
@click.option("--find", required=True)
@click.option("--replace", required=True)
def edit(input_path, filter_expr, field, find, replace):
    """Batch regex edit; appends set entries to the overlay sidecar."""
    dataset = load_dataset(input_path)
    overlay = load_overlay(input_path, dataset.id)
    start = len(overlay.entries)
    view = (
        apply_filter(dataset, filter_expr, overlay=overlay)
        if filter_expr
        else identity_view(dataset)
    )
    result = batch_edit(view, field, find, replace, overlay)
    append_to_sidecar(input_path, overlay.entries[start:])
    if result.warnings:
        click.echo(
            f"warning: {result.warnings} edited row(s) carry expected_answer; re-check them",
            err=True,
        )
    click.echo(stable_json({"changed": result.changed, "warnings": result.warnings}))


@cli.command()
@click.option("--in", "input_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--filter", "filter_expr", default=None)
@click.option("--add", "add_labels", multiple=True)
@click.option("--remove", "remove_labels", multiple=True)
def label(input_path, filter_expr, add_labels, remove_labels):
    """Label the selected rows; entries go to the overlay sidecar."""
    if not add_labels and not remove_labels:
        raise ValidationFailure("pass --add and/or --remove")
    dataset = load_dataset(input_path)
    overlay = load_overlay(input_path, dataset.id)
    start = len(overlay.entries)
    view = (
        apply_filter(dataset, filter_expr, overlay=overlay)
        if filter_expr
        else identity_view(dataset)
    )
    count = 0
    if add_labels:
        count += set_labels(view, list(add_labels), "add", overlay)
    if remove_labels:
        count += set_labels(view, list(remove_labels), "remove", overlay)
    append_to_sidecar(input_path, overlay.entries[start:])
    click.echo(stable_json({"count": count}))


@cli.command()
@click.option("--a", "path_a", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--b", "path_b", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--row", required=True, type=int)
@click.option("--field", default="generation", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["ansi", "json"]), default="ansi", show_default=True)
@click.option("--granularity", type=click.Choice(["word", "line"]), default="word", show_default=True)
def diff(path_a, path_b, row, field, fmt, granularity):
    """Word-level diff of one row's field between two files."""
    record_a = load_dataset(path_a).record(row)
    record_b = load_dataset(path_b).record(row)
    value_a, value_b = record_a.get(field), record_b.get(field)
    if not isinstance(value_a, str) or not isinstance(value_b, str):
        raise ValidationFailure(f"field {field!r} is not a string in both files")
    spans = diff_texts(value_a, value_b, granularity=granularity)
    if fmt == "json":
        click.echo(stable_json({"spans": [s.to_json() for s in spans]}))
        return
    colored = []
    for span in spans:
        if span.kind == EQUAL:
            colored.append(span.text)
        elif span.kind == INSERT:
            colored.append(f"\x1b[32m{span.text}\x1b[0m")
        elif span.kind == DELETE:
            colored.append(f"\x1b[31m\x1b[9m{span.text}\x1b[0m")
    click.echo("".join(colored), color=True)


@cli.command()
@click.option("--questions", "questions_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--template", "template_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--seeds", "seeds_spec", required=True, help="range `0..49` or list `0,1,2`")
@click.option("--endpoint", "endpoint_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@click.option("--prompt-mode", type=click.Choice([TEMPLATE_BASED, PROMPT_BASED]), default=TEMPLATE_BASED, show_default=True)
@click.option("--temperature", type=float, default=0.7, show_default=True)
@click.option("--top-p", type=float, default=0.95, show_default=True)
@click.option("--max-tokens", type=int, default=1024, show_default=True)
@click.option("--stop", multiple=True)
def generate(questions_path, template_path, seeds_spec, endpoint_path, out_dir,
             prompt_mode, temperature, top_p, max_tokens, stop):
    """Multi-seed sweep against an OpenAI-compatible endpoint."""
    config = EndpointConfig.from_toml(endpoint_path)
    questions = load_dataset(questions_path)
    spec = SweepSpec(
        template=PromptTemplate(mode=prompt_mode, text=template_path.read_text(encoding="utf-8")),
        params=SamplingParams(
            temperature=temperature, top_p=top_p, max_tokens=max_tokens, stop=tuple(stop)
        ),
        seeds=_parse_seeds(seeds_spec),
        records=list(questions.records()),
        out_dir=out_dir,
    )

    async def go():
        async with InferenceClient(config) as client:
            return await run_sweep(client, spec)

    outputs = asyncio.run(go())
    click.echo(stable_json({"outputs": [str(p) for p in outputs], "seeds": spec.seeds}))


@cli.command()
@click.option("--port", type=int, default=7860, show_default=True)
@click.option("--bind", default="127.0.0.1", show_default=True)
@click.option("--data-root", type=click.Path(exists=True, path_type=Path), default=Path("."), show_default=True)
@click.option("--endpoint", "endpoint_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--frontend", "frontend_dir", type=click.Path(path_type=Path), default=None)
def serve(port, bind, data_root, endpoint_path, frontend_dir):
    """Run the HTTP service (loopback by default)."""
    import uvicorn

    from .service.app import create_app

    endpoint = EndpointConfig.from_toml(endpoint_path) if endpoint_path else None
    if frontend_dir is None:
        bundled = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
        frontend_dir = bundled if bundled.is_dir() else None
    app = create_app(data_root=data_root, endpoint=endpoint, frontend_dir=frontend_dir)
    uvicorn.run(app, host=bind, port=port, log_level="info")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Abort:
        return 1
    except click.UsageError as e:
        click.echo(f"error: {e.format_message()}", err=True)
        return 1
    except ValidationFailure as e:
        click.echo(f"error: {e}", err=True)
        return 1
    except GenlensError as e:
        click.echo(f"error: {e}", err=True)
        return 2
    except OSError as e:
        click.echo(f"error: {e}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
