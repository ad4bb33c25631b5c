"""Formula ASTs, surface syntax, and the procedural-formula grammar.

Two formula families live here:

* ``DnfFormula`` -- a disjunction of conjunctions of predicate literals,
  the input language for strategy descriptions.
* ``ProceduralFormula`` -- a sequence of steps chained by NEXT, where each
  step repeats its body until a stopping condition fires (UNTIL), for as
  long as it stays satisfiable (HOLD), or is abandoned early (UNLESS), with
  an optional trailing LOOP back to an earlier step.

Both have a keyword surface syntax (``parse_dnf``/``parse_ltl`` and the
matching printers) and a nested-document form (``*_to_doc``/``*_from_doc``)
for storage.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Mapping

FORMAT_VERSION = 1

TRUE_NAME = "TRUE"
FALSE_NAME = "FALSE"

_KEYWORDS = {"AND", "OR", "NOT", "UNTIL", "UNLESS", "HOLD", "LOOP", "NEXT", "TRUE", "FALSE"}


class FormulaSyntaxError(ValueError):
    """Raised on malformed formula text; carries the 1-based token index."""

    def __init__(self, message: str, token_index: int, lexeme: str | None = None):
        detail = f"{message} (token {token_index}"
        if lexeme is not None:
            detail += f": {lexeme!r}"
        detail += ")"
        super().__init__(detail)
        self.token_index = token_index
        self.lexeme = lexeme


@dataclass(frozen=True)
class PredicateRef:
    """Reference to a catalog predicate, possibly applied to nested refs."""

    name: str
    args: tuple["PredicateRef", ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.name
        return f"{self.name}({', '.join(str(a) for a in self.args)})"


TRUE = PredicateRef(TRUE_NAME)
FALSE = PredicateRef(FALSE_NAME)


@dataclass(frozen=True)
class Literal:
    predicate: PredicateRef
    negated: bool = False

    def __str__(self) -> str:
        return f"NOT {self.predicate}" if self.negated else str(self.predicate)


@dataclass(frozen=True, eq=False)
class Conjunction:
    """Conjunction of literals. Order is preserved; equality is set-based.

    The empty conjunction is the distinguished TRUE body. FALSE is a
    conjunction holding the single FALSE literal and nothing else.
    """

    literals: tuple[Literal, ...]

    def __post_init__(self) -> None:
        if len(set(self.literals)) != len(self.literals):
            raise ValueError("duplicate literal in conjunction")
        names = [lit.predicate.name for lit in self.literals]
        if TRUE_NAME in names:
            raise ValueError("TRUE may not appear as a literal; use the empty conjunction")
        if FALSE_NAME in names and len(self.literals) > 1:
            raise ValueError("FALSE may only appear on its own")

    @property
    def is_true(self) -> bool:
        return not self.literals

    @property
    def is_false(self) -> bool:
        return len(self.literals) == 1 and self.literals[0].predicate.name == FALSE_NAME

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Conjunction):
            return NotImplemented
        return frozenset(self.literals) == frozenset(other.literals)

    def __hash__(self) -> int:
        return hash(frozenset(self.literals))

    def __str__(self) -> str:
        if self.is_true:
            return TRUE_NAME
        return " AND ".join(str(lit) for lit in self.literals)


TRUE_CONJUNCTION = Conjunction(())
FALSE_CONJUNCTION = Conjunction((Literal(FALSE),))


@dataclass(frozen=True)
class DnfFormula:
    conjunctions: tuple[Conjunction, ...]

    def __post_init__(self) -> None:
        if not self.conjunctions:
            raise ValueError("DNF formula needs at least one conjunction")

    def __str__(self) -> str:
        return print_dnf(self)


@dataclass(frozen=True)
class Condition:
    """Stopping condition: one predicate, a two-way disjunction, or TRUE/FALSE.

    Disjuncts are sorted into a canonical order at construction.
    """

    disjuncts: tuple[PredicateRef, ...]

    def __post_init__(self) -> None:
        if not 1 <= len(self.disjuncts) <= 2:
            raise ValueError("condition needs one or two disjuncts")
        constants = [d for d in self.disjuncts if d.name in (TRUE_NAME, FALSE_NAME)]
        if constants and len(self.disjuncts) > 1:
            raise ValueError("TRUE/FALSE conditions may not be disjoined")
        ordered = tuple(sorted(self.disjuncts, key=str))
        object.__setattr__(self, "disjuncts", ordered)

    @property
    def is_true(self) -> bool:
        return self.disjuncts[0].name == TRUE_NAME

    @property
    def is_false(self) -> bool:
        return self.disjuncts[0].name == FALSE_NAME

    def __str__(self) -> str:
        if len(self.disjuncts) == 1:
            return str(self.disjuncts[0])
        return f"({self.disjuncts[0]} OR {self.disjuncts[1]})"


TRUE_CONDITION = Condition((TRUE,))
FALSE_CONDITION = Condition((FALSE,))


@dataclass(frozen=True)
class ProceduralStep:
    """One step: a body plus its terminator.

    ``until is None`` means HOLD (repeat while the body stays satisfiable).
    ``unless`` is only legal alongside UNTIL; the grammar has no HOLD/UNLESS
    combination.
    """

    body: Conjunction
    until: Condition | None = None
    unless: Condition | None = None

    @property
    def is_hold(self) -> bool:
        return self.until is None

    def __str__(self) -> str:
        if self.is_hold:
            text = f"HOLD {self.body}"
        else:
            text = f"{self.body} UNTIL {self.until}"
        if self.unless is not None:
            text += f" UNLESS {self.unless}"
        return text


@dataclass(frozen=True)
class LoopBack:
    """Trailing jump to an earlier step, optionally guarded by UNLESS."""

    target: int
    unless: Condition | None = None


@dataclass(frozen=True)
class ProceduralFormula:
    steps: tuple[ProceduralStep, ...]
    loop: LoopBack | None = None

    def __str__(self) -> str:
        return print_ltl(self)


def grammar_check(formula: ProceduralFormula) -> bool:
    """True iff the formula fits the procedural grammar.

    Total over well-typed inputs: steps chained by NEXT, each HOLD or
    body-UNTIL-condition, UNLESS only on UNTIL steps or the trailing LOOP,
    and the LOOP target naming an existing step.
    """

    if not formula.steps:
        return False
    for step in formula.steps:
        if step.until is None and step.unless is not None:
            return False
    if formula.loop is not None:
        if not 0 <= formula.loop.target < len(formula.steps):
            return False
    return True


# --- printing ---------------------------------------------------------------


def print_dnf(formula: DnfFormula) -> str:
    parts = []
    for conj in formula.conjunctions:
        text = str(conj)
        if len(conj.literals) > 1 and len(formula.conjunctions) > 1:
            text = f"({text})"
        parts.append(text)
    return " OR ".join(parts)


def print_ltl(formula: ProceduralFormula) -> str:
    parts = [str(step) for step in formula.steps]
    if formula.loop is not None:
        text = f"LOOP {formula.steps[formula.loop.target].body}"
        if formula.loop.unless is not None:
            text += f" UNLESS {formula.loop.unless}"
        parts.append(text)
    return " AND NEXT ".join(parts)


# --- tokenizing -------------------------------------------------------------


@dataclass(frozen=True)
class _Token:
    kind: str  # "ident", "keyword", "(", ")", ","
    text: str
    index: int  # 1-based position in the token stream


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    index = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        index += 1
        if ch in "(),":
            tokens.append(_Token(ch if ch != "," else ",", ch, index))
            i += 1
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            upper = word.upper()
            if upper in _KEYWORDS:
                tokens.append(_Token("keyword", upper, index))
            else:
                tokens.append(_Token("ident", word, index))
            i = j
            continue
        raise FormulaSyntaxError("unexpected character", index, ch)
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> _Token | None:
        at = self.pos + ahead
        return self.tokens[at] if at < len(self.tokens) else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            raise FormulaSyntaxError("unexpected end of input", len(self.tokens) + 1)
        self.pos += 1
        return tok

    def fail(self, message: str) -> FormulaSyntaxError:
        tok = self.peek()
        if tok is None:
            return FormulaSyntaxError(message, len(self.tokens) + 1)
        return FormulaSyntaxError(message, tok.index, tok.text)

    def accept_keyword(self, word: str) -> bool:
        tok = self.peek()
        if tok is not None and tok.kind == "keyword" and tok.text == word:
            self.pos += 1
            return True
        return False

    def expect_keyword(self, word: str) -> None:
        if not self.accept_keyword(word):
            raise self.fail(f"expected {word}")

    def expect_kind(self, kind: str) -> _Token:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            raise self.fail(f"expected {kind!r}")
        self.pos += 1
        return tok

    def done(self) -> bool:
        return self.pos >= len(self.tokens)

    # predicate expressions ---------------------------------------------

    def predicate_ref(self) -> PredicateRef:
        tok = self.peek()
        if tok is None:
            raise self.fail("expected predicate")
        if tok.kind == "keyword" and tok.text in (TRUE_NAME, FALSE_NAME):
            self.pos += 1
            return PredicateRef(tok.text)
        if tok.kind == "keyword" and tok.text == "NOT":
            # nested negation inside an argument list, e.g. not(is_observed)
            self.pos += 1
            self.expect_kind("(")
            inner = self.predicate_ref()
            self.expect_kind(")")
            return PredicateRef("not", (inner,))
        if tok.kind != "ident":
            raise self.fail("expected predicate name")
        self.pos += 1
        args: tuple[PredicateRef, ...] = ()
        nxt = self.peek()
        if nxt is not None and nxt.kind == "(":
            self.pos += 1
            collected = [self.predicate_ref()]
            while self.peek() is not None and self.peek().kind == ",":
                self.pos += 1
                collected.append(self.predicate_ref())
            self.expect_kind(")")
            args = tuple(collected)
        return PredicateRef(tok.text, args)

    def literal(self) -> Literal:
        if self.accept_keyword("NOT"):
            # NOT at literal position folds into the literal sign, whether
            # written "NOT p" or "not(p)".
            tok = self.peek()
            if tok is not None and tok.kind == "(":
                self.pos += 1
                ref = self.predicate_ref()
                self.expect_kind(")")
            else:
                ref = self.predicate_ref()
            return Literal(ref, negated=True)
        return Literal(self.predicate_ref())

    def body(self) -> Conjunction:
        if self.accept_keyword("TRUE"):
            return TRUE_CONJUNCTION
        if self.accept_keyword("FALSE"):
            return FALSE_CONJUNCTION
        literals = [self.literal()]
        while True:
            tok = self.peek()
            if tok is None or tok.kind != "keyword" or tok.text != "AND":
                break
            after = self.peek(1)
            if after is not None and after.kind == "keyword" and after.text == "NEXT":
                break  # step separator, not part of the body
            self.pos += 1
            literals.append(self.literal())
        return Conjunction(tuple(literals))

    def condition(self) -> Condition:
        if self.accept_keyword("TRUE"):
            return TRUE_CONDITION
        if self.accept_keyword("FALSE"):
            return FALSE_CONDITION
        tok = self.peek()
        if tok is not None and tok.kind == "(":
            # parenthesized disjunction needs a matching OR inside
            save = self.pos
            self.pos += 1
            first = self.predicate_ref()
            if self.accept_keyword("OR"):
                second = self.predicate_ref()
                self.expect_kind(")")
                return Condition((first, second))
            self.pos = save
        first = self.predicate_ref()
        if self.accept_keyword("OR"):
            second = self.predicate_ref()
            return Condition((first, second))
        return Condition((first,))


# --- parsing entry points ---------------------------------------------------


def _validate_refs(refs: Iterable[PredicateRef], arities: Mapping[str, int]) -> None:
    for ref in refs:
        if ref.name not in arities:
            raise ValueError(f"unknown predicate name: {ref.name!r}")
        if len(ref.args) != arities[ref.name]:
            raise ValueError(
                f"predicate {ref.name!r} takes {arities[ref.name]} argument(s), got {len(ref.args)}"
            )
        _validate_refs(ref.args, arities)


def dnf_predicates(formula: DnfFormula) -> Iterator[PredicateRef]:
    for conj in formula.conjunctions:
        for lit in conj.literals:
            yield lit.predicate


def parse_dnf(text: str, arities: Mapping[str, int] | None = None) -> DnfFormula:
    """Parse a DNF strategy description.

    With ``arities`` given, every predicate reference (nested ones included)
    is checked against it; unknown names or wrong argument counts raise
    ``ValueError``.
    """

    parser = _Parser(_tokenize(text))
    conjunctions = [_parse_disjunct(parser)]
    while parser.accept_keyword("OR"):
        conjunctions.append(_parse_disjunct(parser))
    if not parser.done():
        raise parser.fail("unexpected trailing input")
    formula = DnfFormula(tuple(conjunctions))
    if arities is not None:
        extended = dict(arities) | {TRUE_NAME: 0, FALSE_NAME: 0, "not": 1}
        _validate_refs(dnf_predicates(formula), extended)
    return formula


def _parse_disjunct(parser: _Parser) -> Conjunction:
    tok = parser.peek()
    if tok is not None and tok.kind == "(":
        parser.pos += 1
        conj = parser.body()
        parser.expect_kind(")")
        return conj
    return parser.body()


def parse_ltl(text: str, arities: Mapping[str, int] | None = None) -> ProceduralFormula:
    """Parse a procedural formula from its keyword syntax.

    LOOP is written with the body of its target step and resolves to the
    latest earlier step whose body matches.
    """

    parser = _Parser(_tokenize(text))
    steps: list[ProceduralStep] = []
    loop: LoopBack | None = None
    while True:
        if parser.accept_keyword("LOOP"):
            if not steps:
                raise parser.fail("LOOP before any step")
            body = parser.body()
            unless = parser.condition() if parser.accept_keyword("UNLESS") else None
            target = None
            for idx in range(len(steps) - 1, -1, -1):
                if steps[idx].body == body:
                    target = idx
                    break
            if target is None:
                raise parser.fail("LOOP body does not match any earlier step")
            loop = LoopBack(target, unless)
            break
        steps.append(_parse_step(parser))
        if parser.done():
            break
        parser.expect_keyword("AND")
        parser.expect_keyword("NEXT")
    if not parser.done():
        raise parser.fail("unexpected trailing input")
    formula = ProceduralFormula(tuple(steps), loop)
    if arities is not None:
        refs = [lit.predicate for step in formula.steps for lit in step.body.literals]
        for step in formula.steps:
            for cond in (step.until, step.unless):
                if cond is not None:
                    refs.extend(cond.disjuncts)
        if formula.loop is not None and formula.loop.unless is not None:
            refs.extend(formula.loop.unless.disjuncts)
        _validate_refs(refs, dict(arities) | {TRUE_NAME: 0, FALSE_NAME: 0, "not": 1})
    if not grammar_check(formula):
        raise parser.fail("formula violates the procedural grammar")
    return formula


def _parse_step(parser: _Parser) -> ProceduralStep:
    if parser.accept_keyword("HOLD"):
        return ProceduralStep(parser.body())
    body = parser.body()
    parser.expect_keyword("UNTIL")
    until = parser.condition()
    unless = parser.condition() if parser.accept_keyword("UNLESS") else None
    return ProceduralStep(body, until, unless)


# --- document form ----------------------------------------------------------


def _ref_to_doc(ref: PredicateRef) -> dict[str, Any]:
    doc: dict[str, Any] = {"name": ref.name}
    if ref.args:
        doc["args"] = [_ref_to_doc(a) for a in ref.args]
    return doc


def _ref_from_doc(doc: Mapping[str, Any]) -> PredicateRef:
    args = tuple(_ref_from_doc(a) for a in doc.get("args", ()))
    return PredicateRef(doc["name"], args)


def _literal_to_doc(lit: Literal) -> dict[str, Any]:
    return {"predicate": _ref_to_doc(lit.predicate), "negated": lit.negated}


def _literal_from_doc(doc: Mapping[str, Any]) -> Literal:
    return Literal(_ref_from_doc(doc["predicate"]), bool(doc.get("negated", False)))


def _condition_to_doc(cond: Condition | None) -> list[dict[str, Any]] | None:
    if cond is None:
        return None
    return [_ref_to_doc(d) for d in cond.disjuncts]


def _condition_from_doc(doc: Any) -> Condition | None:
    if doc is None:
        return None
    return Condition(tuple(_ref_from_doc(d) for d in doc))


def dnf_to_doc(formula: DnfFormula) -> dict[str, Any]:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "dnf",
        "conjunctions": [[_literal_to_doc(l) for l in c.literals] for c in formula.conjunctions],
    }


def dnf_from_doc(doc: Mapping[str, Any]) -> DnfFormula:
    _check_doc(doc, "dnf")
    conjunctions = tuple(
        Conjunction(tuple(_literal_from_doc(l) for l in lits)) for lits in doc["conjunctions"]
    )
    return DnfFormula(conjunctions)


def ltl_to_doc(formula: ProceduralFormula) -> dict[str, Any]:
    steps = [
        {
            "body": [_literal_to_doc(l) for l in step.body.literals],
            "until": _condition_to_doc(step.until),
            "unless": _condition_to_doc(step.unless),
        }
        for step in formula.steps
    ]
    loop = None
    if formula.loop is not None:
        loop = {"target": formula.loop.target, "unless": _condition_to_doc(formula.loop.unless)}
    return {"format_version": FORMAT_VERSION, "kind": "procedural", "steps": steps, "loop": loop}


def ltl_from_doc(doc: Mapping[str, Any]) -> ProceduralFormula:
    _check_doc(doc, "procedural")
    steps = tuple(
        ProceduralStep(
            Conjunction(tuple(_literal_from_doc(l) for l in s["body"])),
            _condition_from_doc(s.get("until")),
            _condition_from_doc(s.get("unless")),
        )
        for s in doc["steps"]
    )
    loop = None
    if doc.get("loop") is not None:
        loop = LoopBack(doc["loop"]["target"], _condition_from_doc(doc["loop"].get("unless")))
    return ProceduralFormula(steps, loop)


def _check_doc(doc: Mapping[str, Any], kind: str) -> None:
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported format_version: {version!r}")
    if doc.get("kind") != kind:
        raise ValueError(f"expected a {kind} document, got {doc.get('kind')!r}")
