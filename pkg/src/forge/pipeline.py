"""End-to-end runs: demonstrations in, formula plus instruction text out.

A pipeline config names a DNF, the allowed/redundant predicate sets, a
demonstration source (a trajectory file or a seeded policy on an
environment), and a task dictionary. Running it compiles, prunes,
translates, and reports per-class likelihoods before and after pruning.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from . import compiler
from .envs import EnvSpec, builtin_names, builtin_spec, load_spec
from .formulas import DnfFormula, PredicateRef, ProceduralFormula, parse_dnf, print_ltl
from .policies import named_policy, rollouts
from .predicates import ARITIES
from .trajectories import Trajectory, read_trajectories
from .translate import Dictionary, builtin_dictionary, load_dictionary, translate

FORMAT_VERSION = 1


class PipelineError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    name: str
    dnf: DnfFormula
    allowed: tuple[PredicateRef, ...]
    redundant: frozenset[str]
    dictionary: Dictionary
    epsilon: float = 1e-6
    trajectory_path: Path | None = None
    policy_name: str | None = None
    env: EnvSpec | None = None
    n_rollouts: int = 0
    seed: int | None = None


@dataclass(frozen=True)
class PipelineResult:
    config: PipelineConfig
    trajectories: list[Trajectory]
    disjunction: tuple[ProceduralFormula, ...]
    formula: ProceduralFormula
    text: str
    report: dict[str, Any]


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return config_from_doc(doc, base_dir=path.parent)


def builtin_config(name: str) -> PipelineConfig:
    ref = resources.files("forge").joinpath(f"data/configs/{name}.json")
    try:
        text = ref.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise PipelineError(f"no builtin pipeline config named {name!r}") from None
    return config_from_doc(json.loads(text), base_dir=Path.cwd())


def config_from_doc(doc: Mapping[str, Any], base_dir: Path) -> PipelineConfig:
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise PipelineError(f"unsupported format_version: {version!r}")

    dnf_field = doc["dnf"]
    if isinstance(dnf_field, Mapping):
        dnf_text = (base_dir / dnf_field["path"]).read_text(encoding="utf-8").strip()
    else:
        dnf_text = str(dnf_field)
    dnf = parse_dnf(dnf_text, ARITIES)

    allowed = tuple(PredicateRef(name) for name in doc.get("allowed", ()))
    redundant = frozenset(doc.get("redundant", ()))

    dict_field = doc["dictionary"]
    if isinstance(dict_field, Mapping):
        dictionary = load_dictionary(base_dir / dict_field["path"])
    else:
        dictionary = builtin_dictionary(str(dict_field))

    demos = doc["demonstrations"]
    trajectory_path = None
    policy_name = None
    env = None
    n_rollouts = 0
    seed = None
    if "path" in demos:
        trajectory_path = base_dir / demos["path"]
    else:
        policy_name = demos["policy"]
        env_field = demos["env"]
        if isinstance(env_field, Mapping):
            env = load_spec(base_dir / env_field["path"])
        elif env_field in builtin_names():
            env = builtin_spec(env_field)
        else:
            env = load_spec(base_dir / env_field)
        n_rollouts = int(demos["n"])
        seed = int(demos["seed"])

    return PipelineConfig(
        name=doc.get("name", "pipeline"),
        dnf=dnf,
        allowed=allowed,
        redundant=redundant,
        dictionary=dictionary,
        epsilon=float(doc.get("epsilon", 1e-6)),
        trajectory_path=trajectory_path,
        policy_name=policy_name,
        env=env,
        n_rollouts=n_rollouts,
        seed=seed,
    )


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    """Compile, prune, translate, and assemble the run report."""

    if config.trajectory_path is not None:
        trajectories = read_trajectories(config.trajectory_path)
    else:
        assert config.policy_name is not None and config.env is not None
        trajectories = rollouts(
            config.env,
            named_policy(config.policy_name),
            config.n_rollouts,
            config.seed or 0,
        )
    if not trajectories:
        raise PipelineError("no demonstrations available")

    model = compiler.LikelihoodModel(config.epsilon)
    disjunction = compiler.transform(
        config.dnf,
        trajectories,
        list(config.allowed),
        set(config.redundant),
        model=model,
    )
    pruned = compiler.prune(disjunction, trajectories, model)
    text = translate(pruned, config.dictionary)

    warnings: list[str] = []
    if not config.allowed:
        warnings.append(
            "allowed predicate set is empty: steps cannot learn stopping"
            " conditions and fall back to HOLD"
        )

    report = {
        "format_version": FORMAT_VERSION,
        "name": config.name,
        "dnf": str(config.dnf),
        "n_trajectories": len(trajectories),
        "classes": [
            {
                "formula": print_ltl(f),
                "loglikelihood": compiler.loglikelihood(trajectories, f, model),
            }
            for f in disjunction
        ],
        "selected": {
            "formula": print_ltl(pruned),
            "loglikelihood": compiler.loglikelihood(trajectories, pruned, model),
        },
        "instructions": text,
        "warnings": warnings,
    }
    return PipelineResult(config, trajectories, disjunction, pruned, text, report)


def write_outputs(result: PipelineResult, out_dir: str | Path) -> dict[str, Path]:
    """Write formula, instruction text, and report files under ``out_dir``."""

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "formula": out / "formula.ltl",
        "instructions": out / "instructions.txt",
        "report": out / "report.json",
    }
    paths["formula"].write_text(print_ltl(result.formula) + "\n", encoding="utf-8")
    paths["instructions"].write_text(result.text + "\n", encoding="utf-8")
    with open(paths["report"], "w", encoding="utf-8") as fh:
        json.dump(result.report, fh, indent=2)
        fh.write("\n")
    return paths
