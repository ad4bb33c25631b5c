"""Command-line front end: forge transform|translate|rollout|eval|pipeline|serve."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import compiler
from .envs import builtin_names, builtin_spec
from .formulas import PredicateRef, ltl_to_doc, parse_dnf, parse_ltl, print_ltl
from .metrics import click_agreement, fsq, median_fsq, task_performance
from .pipeline import builtin_config, load_config, run_pipeline, write_outputs
from .policies import named_policy, rollouts
from .predicates import ARITIES, CONDITION_PREDICATES
from .trajectories import read_trajectories, write_trajectories
from .translate import builtin_dictionary, load_dictionary, translate


def _read_source(value: str) -> str:
    """Treat the argument as a file when one exists, else as literal text."""

    path = Path(value)
    if path.exists() and path.is_file():
        return path.read_text(encoding="utf-8").strip()
    return value


def _load_dictionary(value: str):
    path = Path(value)
    if path.exists() and path.is_file():
        return load_dictionary(path)
    return builtin_dictionary(value)


@click.group()
@click.version_option(package_name="strategy-forge")
def main() -> None:
    """Compile strategy descriptions into procedural instructions."""


@main.command()
@click.option("--dnf", "dnf_source", required=True, help="DNF text or a file holding it.")
@click.option("--trajs", "trajs_path", required=True, type=click.Path(exists=True))
@click.option("--allow", "allowed", multiple=True, help="Candidate stop-condition predicate.")
@click.option("--drop", "redundant", multiple=True, help="Predicate to remove before compiling.")
@click.option("--epsilon", default=1e-6, show_default=True, help="Likelihood floor.")
@click.option("--all", "show_all", is_flag=True, help="Print every class formula, not just the best.")
@click.option("--emit", type=click.Choice(["ltl", "json"]), default="ltl", show_default=True)
def transform(dnf_source, trajs_path, allowed, redundant, epsilon, show_all, emit) -> None:
    """Compile a DNF plus demonstrations into a pruned procedural formula."""

    dnf = parse_dnf(_read_source(dnf_source), ARITIES)
    for name in allowed:
        if name not in CONDITION_PREDICATES:
            raise click.ClickException(f"not a condition predicate: {name!r}")
    trajectories = read_trajectories(trajs_path)
    model = compiler.LikelihoodModel(epsilon)
    try:
        disjunction = compiler.transform(
            dnf,
            trajectories,
            [PredicateRef(name) for name in allowed],
            set(redundant),
            model=model,
        )
    except compiler.CompileError as err:
        raise click.ClickException(str(err)) from None
    if show_all:
        for formula in disjunction:
            ll = compiler.loglikelihood(trajectories, formula, model)
            click.echo(f"{print_ltl(formula)}\t{ll:.6f}")
        return
    pruned = compiler.prune(disjunction, trajectories, model)
    if emit == "json":
        click.echo(json.dumps(ltl_to_doc(pruned), indent=2))
    else:
        click.echo(print_ltl(pruned))


@main.command("translate")
@click.option("--formula", "formula_source", required=True, help="Formula text or a file holding it.")
@click.option("--dictionary", "dictionary_ref", required=True, help="Builtin task name or a dictionary file.")
def translate_cmd(formula_source, dictionary_ref) -> None:
    """Render a procedural formula as step-by-step instructions."""

    formula = parse_ltl(_read_source(formula_source), ARITIES)
    dictionary = _load_dictionary(dictionary_ref)
    click.echo(translate(formula, dictionary))


@main.command()
@click.option("--env", "env_name", required=True, type=click.Choice(sorted(builtin_names())))
@click.option("--policy", "policy_name", default="far_sighted", show_default=True)
@click.option("-n", "n", default=10, show_default=True, help="Number of episodes.")
@click.option("--seed", default=0, show_default=True)
@click.option("-o", "out_path", required=True, type=click.Path(), help="Trajectory file to write.")
def rollout(env_name, policy_name, n, seed, out_path) -> None:
    """Run a named policy and record its trajectories."""

    spec = builtin_spec(env_name)
    try:
        policy = named_policy(policy_name)
    except ValueError as err:
        raise click.ClickException(str(err)) from None
    trajectories = rollouts(spec, policy, n, seed)
    write_trajectories(out_path, trajectories)
    click.echo(f"wrote {len(trajectories)} trajectories to {out_path}")


@main.command("eval")
@click.option("--trajs", "trajs_path", required=True, type=click.Path(exists=True))
@click.option("--formula", "formula_source", required=True, help="Formula text or a file holding it.")
@click.option("--sims", default=1000, show_default=True, help="Controller runs per missed-click estimate.")
@click.option("--seed", default=0, show_default=True)
@click.option("--fsq-empty", type=click.Choice(["zero", "exclude"]), default="zero", show_default=True)
@click.option("-o", "out_path", type=click.Path(), default=None, help="TSV file (default: stdout).")
def eval_cmd(trajs_path, formula_source, sims, seed, fsq_empty, out_path) -> None:
    """Score trajectories against a formula: agreement, FSQ, performance."""

    formula = parse_ltl(_read_source(formula_source), ARITIES)
    trajectories = read_trajectories(trajs_path)
    if not trajectories:
        raise click.ClickException("no trajectories found")

    rows = []
    fsq_values: list[float | None] = []
    agreements: list[float] = []
    scores: list[float] = []
    for traj in trajectories:
        report = click_agreement(traj, formula, n_sims=sims, seed=seed)
        quotient = fsq(traj, empty=fsq_empty)
        try:
            score = task_performance(traj)
            score_text = f"{score:g}"
            scores.append(score)
        except ValueError:
            score_text = ""
        agreements.append(report.agreement)
        fsq_values.append(quotient.value)
        rows.append(
            [
                traj.trial_id or "",
                traj.spec.name,
                str(traj.n_clicks),
                str(report.consistent),
                str(report.inconsistent),
                f"{report.missed:g}",
                f"{report.agreement:.4f}",
                str(quotient.k),
                "" if quotient.value is None else f"{quotient.value:.4f}",
                score_text,
            ]
        )

    out = open(out_path, "w", encoding="utf-8") if out_path else sys.stdout
    try:
        header = [
            "trial_id", "env", "clicks", "consistent", "inconsistent",
            "missed", "agreement", "fsq_k", "fsq", "performance",
        ]
        out.write("\t".join(header) + "\n")
        for row in rows:
            out.write("\t".join(row) + "\n")
        med = median_fsq(fsq_values)
        aggregate = [
            "aggregate",
            trajectories[0].spec.name,
            f"{sum(t.n_clicks for t in trajectories) / len(trajectories):.4f}",
            "", "", "",
            f"{sum(agreements) / len(agreements):.4f}",
            "",
            "" if med is None else f"{med:.4f}",
            f"{sum(scores) / len(scores):.4f}" if scores else "",
        ]
        out.write("\t".join(aggregate) + "\n")
    finally:
        if out_path:
            out.close()


@main.command()
@click.option("--config", "config_ref", required=True, help="Config file or builtin name.")
@click.option("-o", "out_dir", type=click.Path(), default=None, help="Write formula/instructions/report here.")
def pipeline(config_ref, out_dir) -> None:
    """Run a full config: demonstrations, compile, prune, translate."""

    path = Path(config_ref)
    config = load_config(path) if path.exists() else builtin_config(config_ref)
    result = run_pipeline(config)
    for warning in result.report["warnings"]:
        click.echo(f"warning: {warning}", err=True)
    click.echo(print_ltl(result.formula))
    click.echo("")
    click.echo(result.text)
    if out_dir is not None:
        paths = write_outputs(result, out_dir)
        click.echo("", err=True)
        for kind, p in paths.items():
            click.echo(f"{kind}: {p}", err=True)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--data-dir", default=None, help="Event-log directory (default: FORGE_DATA_DIR).")
def serve(host, port, data_dir) -> None:
    """Run the session service."""

    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(data_dir), host=host, port=port)


if __name__ == "__main__":
    main()
