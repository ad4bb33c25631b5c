"""Formula AST, parser, printer, and grammar tests."""

import random
import re

import pytest

from forge.formulas import (
    Condition,
    Conjunction,
    DnfFormula,
    FALSE_CONJUNCTION,
    FormulaSyntaxError,
    Literal,
    LoopBack,
    PredicateRef,
    ProceduralFormula,
    ProceduralStep,
    TRUE_CONJUNCTION,
    dnf_from_doc,
    dnf_to_doc,
    grammar_check,
    ltl_from_doc,
    ltl_to_doc,
    parse_dnf,
    parse_ltl,
    print_dnf,
    print_ltl,
)

NAMES = ["alpha", "beta", "gamma", "delta", "eps", "zeta"]


def ref(name):
    return PredicateRef(name)


# --- construction rules ------------------------------------------------------


def test_conjunction_rejects_duplicates():
    lit = Literal(ref("alpha"))
    with pytest.raises(ValueError):
        Conjunction((lit, lit))


def test_conjunction_rejects_true_literal():
    with pytest.raises(ValueError):
        Conjunction((Literal(PredicateRef("TRUE")),))


def test_false_must_stand_alone():
    with pytest.raises(ValueError):
        Conjunction((Literal(PredicateRef("FALSE")), Literal(ref("alpha"))))
    assert FALSE_CONJUNCTION.is_false


def test_conjunction_equality_ignores_order():
    a = Conjunction((Literal(ref("alpha")), Literal(ref("beta"), negated=True)))
    b = Conjunction((Literal(ref("beta"), negated=True), Literal(ref("alpha"))))
    assert a == b
    assert hash(a) == hash(b)
    assert a != Conjunction((Literal(ref("alpha")),))


def test_condition_sorts_disjuncts():
    c = Condition((ref("zeta"), ref("alpha")))
    assert [d.name for d in c.disjuncts] == ["alpha", "zeta"]
    assert str(c) == "(alpha OR zeta)"


def test_condition_arity_limits():
    with pytest.raises(ValueError):
        Condition(())
    with pytest.raises(ValueError):
        Condition((ref("alpha"), ref("beta"), ref("gamma")))
    with pytest.raises(ValueError):
        Condition((PredicateRef("TRUE"), ref("alpha")))


def test_empty_conjunction_is_true():
    assert TRUE_CONJUNCTION.is_true
    assert str(TRUE_CONJUNCTION) == "TRUE"


# --- parsing -----------------------------------------------------------------


def test_parse_dnf_basic():
    f = parse_dnf("alpha and not(beta) or gamma")
    assert len(f.conjunctions) == 2
    first = f.conjunctions[0]
    assert {str(lit) for lit in first.literals} == {"alpha", "NOT beta"}


def test_parse_dnf_nested_not_stays_in_args():
    f = parse_dnf("among(not(is_observed), has_largest_depth)")
    conj = f.conjunctions[0]
    assert len(conj.literals) == 1
    lit = conj.literals[0]
    assert not lit.negated
    assert str(lit.predicate) == "among(not(is_observed), has_largest_depth)"


def test_parse_dnf_arity_validation():
    arities = {"alpha": 0, "among": 2}
    parse_dnf("alpha", arities)
    with pytest.raises(ValueError, match="2 argument"):
        parse_dnf("among(alpha)", arities)
    with pytest.raises(ValueError, match="unknown predicate"):
        parse_dnf("missing", arities)


def test_parse_ltl_eq3_shape():
    f = parse_ltl(
        "among(not(is_observed), has_largest_depth) UNTIL"
        " (are_leaves_observed OR is_previous_observed_max)"
    )
    assert len(f.steps) == 1
    step = f.steps[0]
    assert not step.is_hold
    assert len(step.until.disjuncts) == 2
    assert step.unless is None
    assert f.loop is None


def test_parse_ltl_loop_resolves_to_latest_matching_body():
    f = parse_ltl("alpha UNTIL beta AND NEXT alpha UNTIL gamma AND NEXT LOOP alpha")
    assert f.loop is not None
    assert f.loop.target == 1


def test_parse_ltl_rejects_hold_unless():
    with pytest.raises(FormulaSyntaxError):
        parse_ltl("HOLD alpha UNLESS beta")


@pytest.mark.parametrize(
    "text,index",
    [
        ("", 1),
        ("HOLD", 2),
        ("alpha UNTIL", 3),
        ("LOOP alpha", 2),
        ("alpha UNTIL beta AND NEXT LOOP gamma", 8),
        ("alpha@beta", 2),
    ],
)
def test_syntax_error_token_positions(text, index):
    with pytest.raises(FormulaSyntaxError) as exc:
        parse_ltl(text)
    assert exc.value.token_index == index


def test_keywords_case_insensitive():
    f = parse_ltl("alpha until beta and next hold gamma")
    assert print_ltl(f) == "alpha UNTIL beta AND NEXT HOLD gamma"


# --- random round trips ------------------------------------------------------


def random_conjunction(rng, exclude=()):
    """Random non-constant conjunction whose literal set is not in exclude."""

    while True:
        k = rng.randint(1, 3)
        picked = rng.sample(NAMES, k)
        literals = tuple(Literal(ref(n), rng.random() < 0.4) for n in picked)
        conj = Conjunction(literals)
        if conj not in exclude:
            return conj


def random_condition(rng):
    k = rng.randint(1, 2)
    return Condition(tuple(ref(n) for n in rng.sample(NAMES, k)))


def random_procedural(rng):
    n_steps = rng.randint(1, 4)
    bodies = []
    steps = []
    for _ in range(n_steps):
        body = random_conjunction(rng, exclude=bodies)
        bodies.append(body)
        if rng.random() < 0.3:
            steps.append(ProceduralStep(body))
        else:
            unless = random_condition(rng) if rng.random() < 0.3 else None
            steps.append(ProceduralStep(body, random_condition(rng), unless))
    loop = None
    if n_steps > 1 and rng.random() < 0.4:
        unless = random_condition(rng) if rng.random() < 0.5 else None
        loop = LoopBack(rng.randrange(n_steps - 1), unless)
    return ProceduralFormula(tuple(steps), loop)


def test_random_ltl_round_trips():
    """print -> parse is the identity on 1000 random grammar-valid formulas.

    Bodies within one formula are kept distinct so the printed LOOP line
    resolves back to its original target.
    """

    rng = random.Random(4207)
    for _ in range(1000):
        f = random_procedural(rng)
        assert grammar_check(f)
        text = print_ltl(f)
        again = parse_ltl(text)
        assert again == f, text
        assert print_ltl(again) == text


def test_random_dnf_round_trips():
    rng = random.Random(915)
    for _ in range(500):
        n = rng.randint(1, 4)
        f = DnfFormula(tuple(random_conjunction(rng) for _ in range(n)))
        text = print_dnf(f)
        assert parse_dnf(text) == f, text


# --- grammar oracle ----------------------------------------------------------

GRAMMAR_RE = re.compile(r"^(h|ux?)(\.(h|ux?))*(\.lx?v)?$")


def encode_shape(formula):
    """Flatten a formula's operator shape into a string the regex can judge."""

    parts = []
    for step in formula.steps:
        if step.until is None:
            parts.append("h" + ("x" if step.unless is not None else ""))
        else:
            parts.append("u" + ("x" if step.unless is not None else ""))
    if formula.loop is not None:
        tag = "l" + ("x" if formula.loop.unless is not None else "")
        tag += "v" if 0 <= formula.loop.target < len(formula.steps) else "i"
        parts.append(tag)
    return ".".join(parts)


def random_shape(rng):
    """Random formula that may or may not satisfy the grammar."""

    n_steps = rng.randint(0, 3)
    steps = []
    for _ in range(n_steps):
        body = random_conjunction(rng)
        until = random_condition(rng) if rng.random() < 0.7 else None
        unless = random_condition(rng) if rng.random() < 0.4 else None
        steps.append(ProceduralStep(body, until, unless))
    loop = None
    if rng.random() < 0.5:
        loop = LoopBack(rng.randint(-1, n_steps + 1))
    return ProceduralFormula(tuple(steps), loop)


def test_grammar_check_matches_regex_oracle():
    rng = random.Random(77)
    seen = {True: 0, False: 0}
    for _ in range(2000):
        f = random_shape(rng)
        expected = bool(GRAMMAR_RE.match(encode_shape(f)))
        assert grammar_check(f) == expected, encode_shape(f)
        seen[expected] += 1
    assert seen[True] > 100 and seen[False] > 100


# --- documents ---------------------------------------------------------------


def test_ltl_doc_round_trip():
    rng = random.Random(52)
    for _ in range(200):
        f = random_procedural(rng)
        assert ltl_from_doc(ltl_to_doc(f)) == f


def test_dnf_doc_round_trip():
    f = parse_dnf("alpha and not(beta) or among(not(is_observed), gamma)")
    assert dnf_from_doc(dnf_to_doc(f)) == f


def test_doc_version_check():
    doc = ltl_to_doc(parse_ltl("HOLD alpha"))
    doc["format_version"] = 99
    with pytest.raises(ValueError):
        ltl_from_doc(doc)
