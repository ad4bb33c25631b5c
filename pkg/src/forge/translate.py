"""Render procedural formulas as natural-language decision aids.

Rendering is dictionary-driven: a task dictionary supplies the action verb,
its past participle, generic object/reward nouns, and per-predicate phrases.
Each step composes, in order: the body sentence, bullets for negated
literals, the UNLESS clause, the UNTIL/HOLD clause, and a GOTO for a
trailing loop. Multi-step formulas are numbered; the text of a single-step
formula stands alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .formulas import (
    Condition,
    Conjunction,
    PredicateRef,
    ProceduralFormula,
    ProceduralStep,
)

FORMAT_VERSION = 1


class TranslationError(ValueError):
    """Raised when a dictionary lacks a phrase the formula needs."""


@dataclass(frozen=True)
class Dictionary:
    task: str
    act: str  # imperative verb phrase, lowercase ("click", "look up")
    act_past: str  # past participle ("clicked", "looked up")
    obj: str  # generic object noun for the random-action template
    rew: str  # reward noun, available to templates as {rew}
    predicate_templates: dict[str, str] = field(default_factory=dict)
    condition_templates: dict[str, str] = field(default_factory=dict)

    def predicate_phrase(self, name: str) -> str:
        try:
            template = self.predicate_templates[name]
        except KeyError:
            raise TranslationError(f"no predicate template for {name!r}") from None
        return template.format(obj=self.obj, rew=self.rew)

    def condition_phrase(self, name: str) -> str:
        try:
            template = self.condition_templates[name]
        except KeyError:
            raise TranslationError(f"no condition template for {name!r}") from None
        return template.format(obj=self.obj, rew=self.rew)


def dictionary_from_doc(doc: Mapping[str, Any]) -> Dictionary:
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise TranslationError(f"unsupported format_version: {version!r}")
    return Dictionary(
        task=doc["task"],
        act=doc["act"],
        act_past=doc["act_past"],
        obj=doc["object"],
        rew=doc["reward"],
        predicate_templates=dict(doc.get("predicate_templates", {})),
        condition_templates=dict(doc.get("condition_templates", {})),
    )


def dictionary_to_doc(d: Dictionary) -> dict[str, Any]:
    return {
        "format_version": FORMAT_VERSION,
        "task": d.task,
        "act": d.act,
        "act_past": d.act_past,
        "object": d.obj,
        "reward": d.rew,
        "predicate_templates": dict(d.predicate_templates),
        "condition_templates": dict(d.condition_templates),
    }


def load_dictionary(path: str | Path) -> Dictionary:
    with open(path, "r", encoding="utf-8") as fh:
        return dictionary_from_doc(json.load(fh))


def builtin_dictionary(task: str) -> Dictionary:
    """Load one of the dictionaries shipped with the package."""

    ref = resources.files("forge").joinpath(f"data/dictionaries/{task}.json")
    try:
        text = ref.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise TranslationError(f"no builtin dictionary for task {task!r}") from None
    return dictionary_from_doc(json.loads(text))


# --- rendering ---------------------------------------------------------------


def _ucfirst(text: str) -> str:
    return text[:1].upper() + text[1:] if text else text


def _condition_clause(cond: Condition, d: Dictionary) -> str:
    return " or ".join(d.condition_phrase(ref.name) for ref in cond.disjuncts)


def _is_unobserved_filter(ref: PredicateRef) -> bool:
    return ref.name == "not" and ref.args[0].name == "is_observed"


def _positive_phrase(ref: PredicateRef, d: Dictionary) -> str:
    if ref.name == "not":
        return f"not {_positive_phrase(ref.args[0], d)}"
    return d.predicate_phrase(ref.name)


def _body_sentence(body: Conjunction, d: Dictionary) -> str:
    if body.is_true:
        return (
            f"Stop planning right away or {d.act} some random {d.obj}"
            " and then stop planning."
        )
    if body.is_false:
        return f"Do not {d.act} anything."
    phrases: list[str] = []
    unobserved = False
    for lit in body.literals:
        if lit.negated:
            continue
        ref = lit.predicate
        if ref.name == "among":
            for arg in ref.args:
                if _is_unobserved_filter(arg):
                    unobserved = True
                else:
                    phrases.append(_positive_phrase(arg, d))
        elif _is_unobserved_filter(ref):
            unobserved = True
        else:
            phrases.append(_positive_phrase(ref, d))
    if phrases:
        sentence = f"{_ucfirst(d.act)} {', '.join(phrases)}"
    else:
        sentence = f"{_ucfirst(d.act)} any {d.obj}"
    if unobserved:
        sentence += f" that you have not {d.act_past} yet"
    return sentence + "."


def _negation_block(body: Conjunction, d: Dictionary) -> str | None:
    negated = [lit for lit in body.literals if lit.negated]
    if not negated:
        return None
    bullets = "\n".join(f"- {_positive_phrase(lit.predicate, d)}" for lit in negated)
    return f"Do not {d.act}:\n{bullets}"


def _step_text(
    step: ProceduralStep,
    d: Dictionary,
    goto: tuple[int, Condition | None] | None,
) -> str:
    parts: list[str] = [_body_sentence(step.body, d)]
    if step.body.is_false:
        return parts[0]  # the no-action strategy needs nothing else
    block = _negation_block(step.body, d)
    if block is not None:
        parts.append(block)
    if step.unless is not None and not step.unless.is_false:
        parts.append(
            f"Unless {_condition_clause(step.unless, d)},"
            " in which case stop at the previous step."
        )
    if step.until is not None:
        parts.append(f"Repeat this step until {_condition_clause(step.until, d)}.")
    else:
        parts.append("Repeat this step as long as possible.")
    if goto is not None:
        target, unless = goto
        if unless is not None and not unless.is_false:
            parts.append(
                f"Unless {_condition_clause(unless, d)},"
                " in which case stop at the previous step."
            )
        parts.append(f"GOTO step {target + 1}.")
    return " ".join(parts)


def split_steps(formula: ProceduralFormula, d: Dictionary) -> list[str]:
    """One rendered text per step; a trailing loop folds into the last step."""

    out: list[str] = []
    for i, step in enumerate(formula.steps):
        goto = None
        if formula.loop is not None and i == len(formula.steps) - 1:
            goto = (formula.loop.target, formula.loop.unless)
        out.append(_step_text(step, d, goto))
    return out


def translate(formula: ProceduralFormula, d: Dictionary) -> str:
    """Render the whole formula; multi-step formulas get numbered lines."""

    steps = split_steps(formula, d)
    if len(steps) == 1:
        return steps[0]
    return "\n".join(f"{i + 1}. {text}" for i, text in enumerate(steps))
