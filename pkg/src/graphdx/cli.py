"""Command-line entry points.

`validate-graph` checks a graph document and reports per-kind counts and
every violation. `run` executes batch sessions against a profile set.
`gen-dialogues` produces synthetic training dialogues and SFT examples.
`augment` cuts finished dialogues into truncated variants. `evaluate`
aggregates transcript metrics. `serve` starts the HTTP session service.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import fixtures
from .evaluation import evaluate_run, write_report
from .graph import GraphValidationError, load_graph
from .orchestration import (
    RunConfig,
    SchemaMismatchError,
    UnresolvableGoldError,
    generate_synthetic_dialogue,
    read_transcripts,
    run_batch,
    scripted_clinician_for,
    session_seed,
    truncate_variants,
    write_transcripts,
    RulePatient,
)
from .profiles import load_profiles, sample_persona
from .simulator import stable_rng


@click.group()
def main():
    """Knowledge-graph-grounded conversational diagnosis toolkit."""


def _load_profiles_arg(path: str):
    p = Path(path)
    if p.is_dir():
        return load_profiles(p)
    from .profiles import load_profile

    return [load_profile(p)]


@main.command("validate-graph")
@click.argument("path", type=click.Path(exists=True))
def validate_graph_cmd(path):
    """Validate a graph document; exit 0 iff it satisfies the schema."""
    try:
        g = load_graph(Path(path))
    except GraphValidationError as exc:
        click.echo(f"INVALID: {len(exc.violations)} violation(s)")
        for violation in exc.violations:
            click.echo(f"  - {violation}")
        sys.exit(1)
    click.echo("valid graph")
    click.echo("nodes:")
    for kind, count in g.node_counts().items():
        click.echo(f"  {kind:>14}: {count}")
    click.echo("edges:")
    for relation, count in g.edge_counts().items():
        click.echo(f"  {relation:>20}: {count}")


@main.command("run")
@click.option("--graph", "graph_path", type=click.Path(exists=True), default=None,
              help="Graph document (default: the shipped toy fixture).")
@click.option("--profiles", "profiles_path", type=click.Path(exists=True), default=None,
              help="Profile JSON file or directory (default: shipped fixtures).")
@click.option("--scorer", type=click.Choice(["evidence", "retrieval", "external"]),
              default="evidence", show_default=True)
@click.option("--verifier", type=click.Choice(["rule", "external", "cod"]),
              default="rule", show_default=True)
@click.option("--n", default=2, show_default=True, help="Anchor count.")
@click.option("--tau", default=0.005, show_default=True, help="Competing-disease threshold.")
@click.option("--max-turns", default=50, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def run_cmd(graph_path, profiles_path, scorer, verifier, n, tau, max_turns, seed, out_dir):
    """Run one session per profile and write transcripts plus a report."""
    g = load_graph(Path(graph_path)) if graph_path else fixtures.toy_graph()
    profiles = _load_profiles_arg(profiles_path) if profiles_path else fixtures.fixture_profiles()
    config = RunConfig(n=n, tau=tau, max_turns=max_turns, scorer=scorer,
                       verifier=verifier, seed=seed)
    transcripts = run_batch(g, profiles, config)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_transcripts(out / "transcripts.jsonl", transcripts)
    report = evaluate_run(transcripts)
    write_report(report, out / "report.json")
    click.echo(report.table())
    click.echo(f"wrote {len(transcripts)} transcripts to {out / 'transcripts.jsonl'}")


@main.command("gen-dialogues")
@click.option("--graph", "graph_path", type=click.Path(exists=True), default=None)
@click.option("--profiles", "profiles_path", type=click.Path(exists=True), default=None)
@click.option("--clinician", type=click.Choice(["scripted", "external"]),
              default="scripted", show_default=True)
@click.option("--max-turns", default=50, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def gen_dialogues_cmd(graph_path, profiles_path, clinician, max_turns, seed, out_dir):
    """Generate synthetic dialogues and SFT examples from profiles."""
    g = load_graph(Path(graph_path)) if graph_path else fixtures.toy_graph()
    profiles = _load_profiles_arg(profiles_path) if profiles_path else fixtures.fixture_profiles()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    transcripts = []
    examples = []
    skipped = []
    for profile in profiles:
        persona = sample_persona(stable_rng(seed, profile.id, "persona"))
        patient = RulePatient(profile, persona, session_seed(seed, profile.id))
        try:
            if clinician == "scripted":
                clin = scripted_clinician_for(g, profile)
            else:
                from .llm import ChatCompletionClient, EndpointConfig

                client = ChatCompletionClient(EndpointConfig.from_env())

                class _ModelClinician:
                    def respond(self, prompt, history):
                        return client.complete_user(prompt)

                clin = _ModelClinician()
            transcript, profile_examples = generate_synthetic_dialogue(
                profile, g, clin, patient, seed, max_turns=max_turns
            )
        except UnresolvableGoldError as exc:
            skipped.append(str(exc))
            continue
        transcripts.append(transcript)
        examples.extend(profile_examples)
    write_transcripts(out / "dialogues.jsonl", transcripts)
    with open(out / "sft_examples.jsonl", "w", encoding="utf-8") as fh:
        for example in examples:
            fh.write(json.dumps(example.as_dict(), sort_keys=True) + "\n")
    click.echo(f"generated {len(transcripts)} dialogues, {len(examples)} examples")
    for line in skipped:
        click.echo(f"skipped: {line}")


@main.command("augment")
@click.option("--in", "in_path", type=click.Path(exists=True), required=True,
              help="Transcript JSONL file.")
@click.option("--fraction", default=0.2, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def augment_cmd(in_path, fraction, seed, out_path):
    """Emit truncated history prefixes of finished dialogues."""
    transcripts = read_transcripts(in_path)
    count = 0
    with open(out_path, "w", encoding="utf-8") as fh:
        for transcript in transcripts:
            for variant in truncate_variants(transcript, fraction=fraction, seed=seed):
                fh.write(json.dumps(variant.as_dict(), sort_keys=True) + "\n")
                count += 1
    click.echo(f"wrote {count} truncated variants to {out_path}")


@main.command("evaluate")
@click.option("--in", "in_path", type=click.Path(exists=True), required=True,
              help="Transcript JSONL file or directory of them.")
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.option("--slice", "slice_by", type=click.Choice(["persona"]), default=None,
              help="Also print per-persona slice tables.")
@click.option("--exclude-failures-from-turns", is_flag=True, default=False)
def evaluate_cmd(in_path, out_path, slice_by, exclude_failures_from_turns):
    """Aggregate metrics over transcripts; exit nonzero on schema errors."""
    path = Path(in_path)
    files = sorted(path.glob("*.jsonl")) if path.is_dir() else [path]
    transcripts = []
    try:
        for file in files:
            transcripts.extend(read_transcripts(file))
    except SchemaMismatchError as exc:
        click.echo(f"schema error: {exc}", err=True)
        sys.exit(2)
    if not transcripts:
        click.echo("no transcripts found", err=True)
        sys.exit(2)
    report = evaluate_run(
        transcripts, include_failures_in_turns=not exclude_failures_from_turns
    )
    click.echo(report.table())
    if slice_by == "persona":
        for field_name, values in report.persona_slices.items():
            click.echo(f"\nslice by {field_name}:")
            for value, metrics in values.items():
                click.echo(
                    f"  {value:<12} sessions={int(metrics['sessions']):<4} "
                    f"recall@4={metrics['recall@4']:.4f} "
                    f"avg_turns={metrics['avg_turns']:.2f}"
                )
    if out_path:
        write_report(report, out_path)
        click.echo(f"wrote {out_path}")


@main.command("serve")
@click.option("--graph", "graph_path", type=click.Path(exists=True), default=None)
@click.option("--profiles", "profiles_path", type=click.Path(exists=True), default=None)
@click.option("--data-dir", default="./sessions", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8234, show_default=True)
@click.option("--n", default=2, show_default=True)
@click.option("--tau", default=0.005, show_default=True)
@click.option("--max-turns", default=50, show_default=True)
def serve_cmd(graph_path, profiles_path, data_dir, host, port, n, tau, max_turns):
    """Start the HTTP session service."""
    import os

    import uvicorn

    from .service import ENV_API_TOKEN, ENV_CORS_ORIGIN, create_app, manager_from_env

    g = load_graph(Path(graph_path)) if graph_path else fixtures.toy_graph()
    profiles = _load_profiles_arg(profiles_path) if profiles_path else fixtures.fixture_profiles()
    manager = manager_from_env(
        g,
        {p.id: p for p in profiles},
        data_dir,
        defaults=RunConfig(n=n, tau=tau, max_turns=max_turns),
    )
    app = create_app(
        manager,
        api_token=os.environ.get(ENV_API_TOKEN),
        cors_origin=os.environ.get(ENV_CORS_ORIGIN, "*"),
    )
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
