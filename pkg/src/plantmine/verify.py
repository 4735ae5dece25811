"""Built-in explicit-state closed-loop verification.

The plant function block and a deterministic controller are composed into a
finite Kripke structure under pending-event semantics: at most one event is
in flight, the plant moves spontaneously only while no event is pending, and
a pending event is consumed by its addressee before anything else happens.
CTL properties are then checked by standard fixpoint labeling, with
breadth-first counterexample paths for failing AG properties.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from typing import Mapping, NamedTuple

from .errors import (AlphabetMismatch, NondeterministicController, ParseError,
                     UndeclaredEvent, UnknownAtom)
from .transform import FunctionBlock

STUTTER = "stutter"


# ---------------------------------------------------------------------------
# Controller model

@dataclass(frozen=True)
class ControllerFSM:
    """Deterministic Mealy-style controller: on one input event, optionally emit one output."""

    states: tuple[str, ...]
    initial: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    transitions: tuple[tuple[str, str, str | None, str], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "inputs", tuple(sorted(set(self.inputs))))
        object.__setattr__(self, "outputs", tuple(sorted(set(self.outputs))))
        object.__setattr__(self, "transitions",
                           tuple(sorted(set(tuple(t) for t in self.transitions),
                                        key=lambda t: (t[0], t[1]))))
        state_set = set(self.states)
        if len(state_set) != len(self.states):
            raise ValueError("duplicate controller states")
        if self.initial not in state_set:
            raise ValueError(f"initial state {self.initial!r} not declared")
        if set(self.inputs) & set(self.outputs):
            raise ValueError("controller inputs and outputs overlap")
        seen = set()
        for state, event, output, target in self.transitions:
            if state not in state_set or target not in state_set:
                raise ValueError(f"transition references unknown state: {state}->{target}")
            if event not in self.inputs:
                raise UndeclaredEvent(event)
            if output is not None and output not in self.outputs:
                raise UndeclaredEvent(output)
            if (state, event) in seen:
                raise NondeterministicController(state, event)
            seen.add((state, event))

    def step(self, state: str, event: str) -> tuple[str | None, str] | None:
        """Output event (or None) and target state, or None when the event is ignored."""
        for src, trigger, output, target in self.transitions:
            if src == state and trigger == event:
                return output, target
        return None


_TRANSITION_RE = re.compile(
    r"([A-Za-z0-9_]+)\s+--([A-Za-z0-9_]+)/([A-Za-z0-9_]*)-->\s+([A-Za-z0-9_]+)\Z")


def parse_controller(text: str) -> ControllerFSM:
    """Parse the controller text format.

    Declarations first (``states:``, ``initial:``, ``inputs:``, ``outputs:``),
    then one transition per line, ``C0 --HOME_ON/EXT--> C1`` with the output
    event optional (``C1 --HOME_OFF/--> C2``).
    """
    decls: dict[str, list[str]] = {}
    transitions: list[tuple[str, str, str | None, str]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, sep, rest = line.partition(":")
        if sep and head in ("states", "initial", "inputs", "outputs"):
            names = rest.split()
            for name in names:
                if not re.fullmatch(r"[A-Za-z0-9_]+", name):
                    raise ParseError(line_no, f"invalid name {name!r}")
            decls[head] = names
            continue
        m = _TRANSITION_RE.match(line)
        if not m:
            raise ParseError(line_no, f"unrecognized line {line!r}")
        src, event, output, target = m.groups()
        transitions.append((src, event, output or None, target))

    for key in ("states", "initial", "inputs", "outputs"):
        if key not in decls:
            raise ParseError(0, f"missing declaration {key!r}")
    if len(decls["initial"]) != 1:
        raise ParseError(0, "exactly one initial state expected")
    states = set(decls["states"])
    for src, event, output, target in transitions:
        if src not in states or target not in states:
            raise ParseError(0, f"transition uses undeclared state {src!r} or {target!r}")
    try:
        return ControllerFSM(states=tuple(decls["states"]),
                             initial=decls["initial"][0],
                             inputs=tuple(decls["inputs"]),
                             outputs=tuple(decls["outputs"]),
                             transitions=tuple(transitions))
    except ValueError as exc:
        raise ParseError(0, str(exc)) from None


# ---------------------------------------------------------------------------
# Closed-loop composition

class CompositeState(NamedTuple):
    plant: str
    ctl: str
    pending: str | None

    def __str__(self) -> str:
        return f"plant={self.plant} ctl={self.ctl} pending={self.pending or '-'}"


class Diagnostic(NamedTuple):
    kind: str  # "ignored_event" | "dropped_command"
    state: CompositeState
    event: str


def _check_wiring(plant: FunctionBlock, ctl: ControllerFSM) -> None:
    same_direction_out = set(ctl.outputs) & set(plant.event_outputs)
    same_direction_in = set(ctl.inputs) & set(plant.event_inputs)
    if same_direction_out or same_direction_in:
        raise AlphabetMismatch(
            f"events claimed in the same direction by both sides: "
            f"outputs {sorted(same_direction_out)}, inputs {sorted(same_direction_in)}")


@dataclass(frozen=True)
class KripkeStructure:
    """Total transition system with propositional labels.

    ``successors`` maps each state to its outgoing (edge label, target)
    pairs in a fixed order; every state has at least one successor.
    """

    states: tuple
    initial: object
    successors: Mapping
    labels: Mapping
    atoms: frozenset[str]
    diagnostics: tuple[Diagnostic, ...] = ()

    def __post_init__(self) -> None:
        state_set = set(self.states)
        if self.initial not in state_set:
            raise ValueError("initial state missing from state set")
        for state in self.states:
            succs = self.successors.get(state, ())
            if not succs:
                raise ValueError(f"state {state!r} has no successor")
            for _, target in succs:
                if target not in state_set:
                    raise ValueError(f"successor of {state!r} outside the state set")
            if not self.labels.get(state, frozenset()) <= self.atoms:
                raise ValueError(f"labels of {state!r} not declared as atoms")


def compose(plant: FunctionBlock, ctl: ControllerFSM) -> KripkeStructure:
    """Build the pending-event product of a plant block and a controller.

    From (p, c, none) the plant may stutter or take any spontaneous
    transition, making its target's announcement pending.  A pending sensor
    event is offered to the controller: consumed it yields the controller's
    output as the new pending event, unconsumed it is dropped with an
    ``ignored_event`` diagnostic.  A pending control event is executed by the
    plant when some input-guarded transition matches, otherwise dropped with
    a ``dropped_command`` diagnostic.  The structure is total by
    construction.

    The wiring is crossed: controller inputs listen to plant outputs and
    controller outputs drive plant inputs.  A controller event the plant does
    not implement is tolerated (it never fires, or surfaces as a diagnostic);
    an event claimed in the same direction by both sides is a real wiring
    error and raises :class:`AlphabetMismatch`.
    """
    _check_wiring(plant, ctl)

    atoms = set(plant.sensor_vars)
    atoms.update(f"plant_state={s.name}" for s in plant.states)
    atoms.update(f"ctl_state={c}" for c in ctl.states)

    def labels_of(state: CompositeState) -> frozenset[str]:
        valuation = plant.valuation(state.plant)
        props = {var for var, value in valuation.items() if value}
        props.add(f"plant_state={state.plant}")
        props.add(f"ctl_state={state.ctl}")
        return frozenset(props)

    def successors_of(state: CompositeState) -> tuple[tuple[str, CompositeState], ...]:
        p, c, pending = state
        moves: list[tuple[str, CompositeState]] = []
        if pending is None:
            for target in plant.ndt_edges(p):
                emitted = plant.emission(target)
                label = f"ndt/{emitted}" if emitted else "ndt/-"
                moves.append((label, CompositeState(target, c, emitted)))
            moves.append((STUTTER, state))
        elif pending in plant.event_outputs:
            step = ctl.step(c, pending)
            if step is None:
                diagnostics.add(Diagnostic("ignored_event", state, pending))
                moves.append((f"ignored {pending}", CompositeState(p, c, None)))
            else:
                output, target = step
                moves.append((f"{pending}/{output or '-'}",
                              CompositeState(p, target, output)))
        else:  # pending control command
            targets = plant.control_edges(p, pending)
            if not targets:
                diagnostics.add(Diagnostic("dropped_command", state, pending))
                moves.append((f"dropped {pending}", CompositeState(p, c, None)))
            else:
                for target in targets:
                    moves.append((f"exec {pending}",
                                  CompositeState(target, c, plant.emission(target))))
        return tuple(moves)

    diagnostics: set[Diagnostic] = set()
    initial = CompositeState(plant.initial_state, ctl.initial,
                             plant.emission(plant.initial_state))
    states: list[CompositeState] = [initial]
    seen = {initial}
    successors: dict[CompositeState, tuple] = {}
    labels: dict[CompositeState, frozenset[str]] = {}
    queue: deque[CompositeState] = deque([initial])
    while queue:
        state = queue.popleft()
        labels[state] = labels_of(state)
        succs = successors_of(state)
        successors[state] = succs
        for _, target in succs:
            if target not in seen:
                seen.add(target)
                states.append(target)
                queue.append(target)
    ordered_diags = tuple(sorted(diagnostics, key=lambda d: (d.kind, str(d.state), d.event)))
    return KripkeStructure(states=tuple(states), initial=initial,
                           successors=successors, labels=labels,
                           atoms=frozenset(atoms), diagnostics=ordered_diags)


# ---------------------------------------------------------------------------
# CTL formulas

class Formula:
    """Base class for CTL abstract syntax nodes."""


@dataclass(frozen=True)
class Const(Formula):
    value: bool


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class EX(Formula):
    operand: Formula


@dataclass(frozen=True)
class EF(Formula):
    operand: Formula


@dataclass(frozen=True)
class EG(Formula):
    operand: Formula


@dataclass(frozen=True)
class EU(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class AX(Formula):
    operand: Formula


@dataclass(frozen=True)
class AF(Formula):
    operand: Formula


@dataclass(frozen=True)
class AG(Formula):
    operand: Formula


@dataclass(frozen=True)
class AU(Formula):
    left: Formula
    right: Formula


_UNARY_TEMPORAL = {"EX": EX, "EF": EF, "EG": EG, "AX": AX, "AF": AF, "AG": AG,
                   "G": AG}  # "G" is accepted as a spelling of AG

_TOKEN_RE = re.compile(r"\s*(->|[!&|()\[\]=]|[A-Za-z0-9_]+)")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ParseError(pos, f"unexpected character {text[pos]!r}")
            break
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    return tokens


class _CtlParser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = _tokenize(text)
        self.index = 0

    def peek(self) -> str | None:
        return self.tokens[self.index][0] if self.index < len(self.tokens) else None

    def pos(self) -> int:
        return self.tokens[self.index][1] if self.index < len(self.tokens) else len(self.text)

    def take(self) -> str:
        token = self.peek()
        if token is None:
            raise ParseError(len(self.text), "unexpected end of formula")
        self.index += 1
        return token

    def expect(self, token: str) -> None:
        if self.peek() != token:
            raise ParseError(self.pos(), f"expected {token!r}")
        self.index += 1

    def parse(self) -> Formula:
        formula = self.implication()
        if self.peek() is not None:
            raise ParseError(self.pos(), f"trailing input {self.peek()!r}")
        return formula

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.peek() == "|":
            self.take()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.peek() == "&":
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        token = self.peek()
        if token is None:
            raise ParseError(self.pos(), "unexpected end of formula")
        if token == "!":
            self.take()
            return Not(self.unary())
        if token in _UNARY_TEMPORAL:
            self.take()
            return _UNARY_TEMPORAL[token](self.unary())
        if token in ("A", "E"):
            self.take()
            self.expect("[")
            left = self.implication()
            self.expect("U")
            right = self.implication()
            self.expect("]")
            return AU(left, right) if token == "A" else EU(left, right)
        if token == "(":
            self.take()
            inner = self.implication()
            self.expect(")")
            return inner
        if token == "TRUE":
            self.take()
            return Const(True)
        if token == "FALSE":
            self.take()
            return Const(False)
        if re.fullmatch(r"[A-Za-z0-9_]+", token):
            return self.atom()
        raise ParseError(self.pos(), f"unexpected token {token!r}")

    def atom(self) -> Formula:
        name = self.take()
        if self.peek() == "=":
            self.take()
            value = self.take()
            if value == "TRUE":
                return Atom(name)
            if value == "FALSE":
                return Not(Atom(name))
            if re.fullmatch(r"[A-Za-z0-9_]+", value):
                return Atom(f"{name}={value}")
            raise ParseError(self.pos(), f"bad comparison value {value!r}")
        return Atom(name)


def parse_ctl(text: str) -> Formula:
    """Parse a CTL formula.

    ``G`` is accepted as a spelling of ``AG``; ``X = TRUE`` comparisons
    normalize to the bare proposition, ``X = FALSE`` to its negation, and
    ``X = Y`` to the compound proposition ``X=Y``.
    """
    return _CtlParser(text).parse()


def render_ctl(formula: Formula) -> str:
    """Canonical text rendering, parseable back by :func:`parse_ctl`."""
    def needs_parens(f: Formula) -> bool:
        return isinstance(f, (And, Or, Implies, EU, AU))

    def unary_operand(f: Formula) -> str:
        text = render_ctl(f)
        return f"({text})" if needs_parens(f) else text

    match formula:
        case Const(value):
            return "TRUE" if value else "FALSE"
        case Atom(name):
            return name
        case Not(operand):
            return "!" + unary_operand(operand)
        case And(left, right):
            return f"{_bin_side(left, And, False)} & {_bin_side(right, And, True)}"
        case Or(left, right):
            return f"{_bin_side(left, Or, False)} | {_bin_side(right, Or, True)}"
        case Implies(left, right):
            return f"{_bin_side(left, Implies, False)} -> {render_ctl(right)}"
        case EX(operand):
            return "EX " + unary_operand(operand)
        case EF(operand):
            return "EF " + unary_operand(operand)
        case EG(operand):
            return "EG " + unary_operand(operand)
        case AX(operand):
            return "AX " + unary_operand(operand)
        case AF(operand):
            return "AF " + unary_operand(operand)
        case AG(operand):
            return "AG " + unary_operand(operand)
        case EU(left, right):
            return f"E[{render_ctl(left)} U {render_ctl(right)}]"
        case AU(left, right):
            return f"A[{render_ctl(left)} U {render_ctl(right)}]"
    raise TypeError(f"not a formula: {formula!r}")


_PRECEDENCE = {Implies: 1, Or: 2, And: 3}


def _bin_side(f: Formula, parent: type, right_side: bool) -> str:
    # & and | parse left-associative, -> right-associative; parenthesize the
    # sides that would re-associate differently so render/parse round-trips.
    text = render_ctl(f)
    if type(f) in _PRECEDENCE and _PRECEDENCE[type(f)] < _PRECEDENCE[parent]:
        return f"({text})"
    if type(f) is parent and parent in (And, Or) and right_side:
        return f"({text})"
    if parent is Implies and isinstance(f, Implies):
        return f"({text})"
    return text


# ---------------------------------------------------------------------------
# CTL model checking

class PathStep(NamedTuple):
    event: str | None  # edge label taken to reach the state; None on the first step
    state: object


@dataclass(frozen=True)
class Verdict:
    holds: bool
    counterexample: tuple[PathStep, ...] | None = None


def satisfying_states(k: KripkeStructure, formula: Formula,
                      stats: dict | None = None) -> frozenset:
    """The set of states satisfying ``formula``.

    Checking uses the adequate set {EX, EU, EG}; the remaining operators are
    rewritten by duality.  When ``stats`` is given, the number of productive
    fixpoint rounds of every EU/EG evaluation is appended to
    ``stats['rounds']``.
    """
    all_states = frozenset(k.states)

    def pre(target: frozenset) -> frozenset:
        return frozenset(s for s in k.states
                         if any(t in target for _, t in k.successors[s]))

    def note_rounds(rounds: int) -> None:
        if stats is not None:
            stats.setdefault("rounds", []).append(rounds)

    def sat_eu(hold: frozenset, goal: frozenset) -> frozenset:
        current = goal
        rounds = 0
        while True:
            grown = current | (hold & pre(current))
            if grown == current:
                break
            current = grown
            rounds += 1
        note_rounds(rounds)
        return current

    def sat_eg(hold: frozenset) -> frozenset:
        current = hold
        rounds = 0
        while True:
            shrunk = current & pre(current)
            if shrunk == current:
                break
            current = shrunk
            rounds += 1
        note_rounds(rounds)
        return current

    def sat(f: Formula) -> frozenset:
        match f:
            case Const(value):
                return all_states if value else frozenset()
            case Atom(name):
                if name not in k.atoms:
                    raise UnknownAtom(name)
                return frozenset(s for s in k.states if name in k.labels[s])
            case Not(operand):
                return all_states - sat(operand)
            case And(left, right):
                return sat(left) & sat(right)
            case Or(left, right):
                return sat(left) | sat(right)
            case Implies(left, right):
                return (all_states - sat(left)) | sat(right)
            case EX(operand):
                return pre(sat(operand))
            case EU(left, right):
                return sat_eu(sat(left), sat(right))
            case EG(operand):
                return sat_eg(sat(operand))
            case EF(operand):
                return sat_eu(all_states, sat(operand))
            case AX(operand):
                return all_states - pre(all_states - sat(operand))
            case AF(operand):
                return all_states - sat_eg(all_states - sat(operand))
            case AG(operand):
                return all_states - sat_eu(all_states, all_states - sat(operand))
            case AU(left, right):
                not_right = all_states - sat(right)
                not_left = all_states - sat(left)
                bad = sat_eu(not_right, not_left & not_right) | sat_eg(not_right)
                return all_states - bad
        raise TypeError(f"not a formula: {f!r}")

    return sat(formula)


def _shortest_violation(k: KripkeStructure, good: frozenset) -> tuple[PathStep, ...]:
    """Breadth-first path from the initial state to the nearest state outside ``good``."""
    parents: dict = {k.initial: None}
    queue: deque = deque([k.initial])
    found = None
    if k.initial not in good:
        found = k.initial
    while queue and found is None:
        state = queue.popleft()
        for label, target in k.successors[state]:
            if target in parents:
                continue
            parents[target] = (state, label)
            if target not in good:
                found = target
                break
            queue.append(target)
    assert found is not None, "no violating state reachable"
    steps: list[PathStep] = []
    cursor = found
    while cursor is not None:
        parent = parents[cursor]
        steps.append(PathStep(None if parent is None else parent[1], cursor))
        cursor = None if parent is None else parent[0]
    return tuple(reversed(steps))


def check_ctl(k: KripkeStructure, formula: Formula,
              stats: dict | None = None) -> Verdict:
    """Check a CTL formula on a Kripke structure.

    The verdict holds iff the initial state satisfies the formula.  For a
    failing top-level AG, a shortest path from the initial state to a
    violating state is returned as the counterexample; other failing shapes
    report no witness.
    """
    holds = k.initial in satisfying_states(k, formula, stats)
    if holds or not isinstance(formula, AG):
        return Verdict(holds)
    good = satisfying_states(k, formula.operand)
    return Verdict(False, _shortest_violation(k, good))
