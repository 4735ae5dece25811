"""Plant function-block construction from a reachability-graph FSM.

Every sensor-labeled FSM edge becomes a spontaneous (non-deterministic)
transition, and the sensor event is announced by the state the transition
enters.  Control-labeled edges stay guarded by their input event.  Each state
additionally carries a boolean latch valuation per sensor variable, derived
by propagating the sensor events' effects from the initial state; that
labeling is what the closed-loop safety property is checked against.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

from .errors import InconsistentLabeling, ParseError, UnmappedAction
from .petri import ReachabilityGraph

NAME_RE = re.compile(r"[A-Za-z0-9_]+\Z")

# Guard marker for spontaneous transitions in the FB text format.
NDT_GUARD = "NDT"


class ActionKind(Enum):
    CONTROL = "control"
    SENSOR = "sensor"


@dataclass(frozen=True)
class ActionMap:
    """Classification of actions into control commands and sensor events.

    Sensor actions carry an effect, the (variable, value) latch assignment
    they perform; control actions carry none.
    """

    entries: tuple[tuple[str, ActionKind, tuple[str, bool] | None], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries",
                           tuple(sorted(self.entries,
                                        key=lambda e: (e[0], e[1].value, str(e[2])))))
        seen = set()
        for action, kind, effect in self.entries:
            if not NAME_RE.match(action) or action == NDT_GUARD:
                raise ValueError(f"invalid action name {action!r}")
            if action in seen:
                raise ValueError(f"action {action!r} classified twice")
            seen.add(action)
            if kind is ActionKind.SENSOR:
                if effect is None or not NAME_RE.match(effect[0]):
                    raise ValueError(f"sensor action {action!r} needs a variable effect")
            elif effect is not None:
                raise ValueError(f"control action {action!r} cannot carry an effect")

    @classmethod
    def of(cls, control: tuple[str, ...] = (),
           sensors: Mapping[str, tuple[str, bool]] | None = None) -> "ActionMap":
        entries = [(a, ActionKind.CONTROL, None) for a in control]
        entries += [(a, ActionKind.SENSOR, (var, bool(val)))
                    for a, (var, val) in (sensors or {}).items()]
        return cls(tuple(entries))

    def kind(self, action: str) -> ActionKind:
        for name, kind, _ in self.entries:
            if name == action:
                return kind
        raise UnmappedAction(action)

    def effect(self, action: str) -> tuple[str, bool]:
        for name, kind, effect in self.entries:
            if name == action:
                if kind is not ActionKind.SENSOR:
                    raise ValueError(f"{action!r} is not a sensor action")
                assert effect is not None
                return effect
        raise UnmappedAction(action)

    @property
    def actions(self) -> tuple[str, ...]:
        return tuple(name for name, _, _ in self.entries)

    @property
    def sensor_vars(self) -> tuple[str, ...]:
        return tuple(sorted({effect[0] for _, kind, effect in self.entries
                             if kind is ActionKind.SENSOR and effect}))


def parse_action_map(text: str) -> ActionMap:
    """Parse the action-map file format.

    One entry per line: ``EXT: control`` or ``HOME_ON: sensor HOME=true``.
    Blank lines and ``#`` comments are skipped.
    """
    entries: list[tuple[str, ActionKind, tuple[str, bool] | None]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise ParseError(line_no, "expected 'ACTION: control|sensor VAR=true|false'")
        action, _, rest = line.partition(":")
        action, rest = action.strip(), rest.strip()
        if rest == "control":
            entries.append((action, ActionKind.CONTROL, None))
            continue
        m = re.fullmatch(r"sensor\s+([A-Za-z0-9_]+)\s*=\s*(true|false)", rest)
        if not m:
            raise ParseError(line_no, f"bad classification {rest!r}")
        entries.append((action, ActionKind.SENSOR, (m.group(1), m.group(2) == "true")))
    try:
        return ActionMap(tuple(entries))
    except ValueError as exc:
        raise ParseError(0, str(exc)) from None


def export_action_map(amap: ActionMap) -> str:
    lines = []
    for action, kind, effect in amap.entries:
        if kind is ActionKind.CONTROL:
            lines.append(f"{action}: control")
        else:
            assert effect is not None
            lines.append(f"{action}: sensor {effect[0]}={'true' if effect[1] else 'false'}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class FSM:
    """A possibly non-deterministic labeled transition system."""

    states: tuple[str, ...]
    initial: str
    edges: tuple[tuple[str, str, str], ...]

    def __post_init__(self) -> None:
        # Edge sets may be given in any order; first occurrence wins on duplicates.
        deduped: dict[tuple[str, str, str], None] = {}
        for edge in self.edges:
            deduped.setdefault(tuple(edge), None)
        object.__setattr__(self, "edges", tuple(deduped))
        state_set = set(self.states)
        if len(state_set) != len(self.states):
            raise ValueError("duplicate state names")
        if self.initial not in state_set:
            raise ValueError(f"initial state {self.initial!r} not in states")
        for src, label, dst in self.edges:
            if src not in state_set or dst not in state_set:
                raise ValueError(f"edge ({src}, {label}, {dst}) has unknown endpoint")

    @property
    def alphabet(self) -> tuple[str, ...]:
        return tuple(sorted({label for _, label, _ in self.edges}))


def fsm_from_graph(graph: ReachabilityGraph) -> FSM:
    """Rename reachability-graph markings to Q0..Qn in discovery order."""
    names = {marking: f"Q{i}" for i, marking in enumerate(graph.nodes)}
    return FSM(states=tuple(names[m] for m in graph.nodes),
               initial=names[graph.initial],
               edges=tuple((names[s], label, names[d]) for s, label, d in graph.edges))


def classify_alphabet(fsm: FSM, amap: ActionMap) -> tuple[frozenset[str], frozenset[str]]:
    """Split the FSM alphabet into (control actions, sensor actions)."""
    control, sensor = set(), set()
    for action in fsm.alphabet:
        if amap.kind(action) is ActionKind.CONTROL:
            control.add(action)
        else:
            sensor.add(action)
    return frozenset(control), frozenset(sensor)


@dataclass(frozen=True)
class EccState:
    """One execution-control state: optional output-event emission plus latch values."""

    name: str
    emission: str | None
    valuation: tuple[tuple[str, bool], ...]

    def valuation_dict(self) -> dict[str, bool]:
        return dict(self.valuation)


@dataclass(frozen=True)
class FunctionBlock:
    """Plant-model basic function block: event interface plus execution control chart.

    Transitions are (source, guard, target) with guard ``None`` for
    spontaneous (non-deterministic) transitions.  All collections are kept
    canonically sorted so equal blocks compare equal and serialize to
    identical bytes.
    """

    name: str
    event_inputs: tuple[str, ...]
    event_outputs: tuple[str, ...]
    states: tuple[EccState, ...]
    initial_state: str
    transitions: tuple[tuple[str, str | None, str], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "event_inputs", tuple(sorted(set(self.event_inputs))))
        object.__setattr__(self, "event_outputs", tuple(sorted(set(self.event_outputs))))
        object.__setattr__(self, "states", tuple(sorted(set(self.states),
                                                        key=lambda s: s.name)))
        transitions = tuple(sorted(set(tuple(t) for t in self.transitions),
                                   key=lambda t: (t[0], t[1] or "", t[2])))
        object.__setattr__(self, "transitions", transitions)

        if not NAME_RE.match(self.name):
            raise ValueError(f"invalid block name {self.name!r}")
        if set(self.event_inputs) & set(self.event_outputs):
            raise ValueError("event inputs and outputs overlap")
        names = [s.name for s in self.states]
        if len(set(names)) != len(names):
            raise ValueError("duplicate EC state names")
        state_set = set(names)
        if self.initial_state not in state_set:
            raise ValueError(f"initial state {self.initial_state!r} missing")
        for state in self.states:
            if not NAME_RE.match(state.name):
                raise ValueError(f"invalid state name {state.name!r}")
            if state.emission is not None and state.emission not in self.event_outputs:
                raise ValueError(f"state {state.name!r} emits unknown event")
        for src, guard, dst in transitions:
            if src not in state_set or dst not in state_set:
                raise ValueError(f"transition ({src}, {guard}, {dst}) has unknown endpoint")
            if guard is not None:
                if guard not in self.event_inputs:
                    raise ValueError(f"guard {guard!r} is not an event input")
                if self.state(dst).emission is not None:
                    raise ValueError(f"input-guarded transition targets emitting state {dst!r}")

    def state(self, name: str) -> EccState:
        for state in self.states:
            if state.name == name:
                return state
        raise KeyError(name)

    def emission(self, name: str) -> str | None:
        return self.state(name).emission

    def valuation(self, name: str) -> dict[str, bool]:
        return self.state(name).valuation_dict()

    @property
    def sensor_vars(self) -> tuple[str, ...]:
        return tuple(sorted({var for s in self.states for var, _ in s.valuation}))

    def ndt_edges(self, source: str) -> tuple[str, ...]:
        return tuple(dst for src, guard, dst in self.transitions
                     if src == source and guard is None)

    def control_edges(self, source: str, guard: str) -> tuple[str, ...]:
        return tuple(dst for src, g, dst in self.transitions
                     if src == source and g == guard)


def _canon_valuation(valuation: Mapping[str, bool]) -> tuple[tuple[str, bool], ...]:
    return tuple(sorted((var, bool(val)) for var, val in valuation.items()))


def build_plant_fb(fsm: FSM, amap: ActionMap,
                   initial_valuation: Mapping[str, bool],
                   name: str = "PLANT") -> FunctionBlock:
    """Apply the plant-model transformation to an FSM.

    Interface: control actions become event inputs, sensor actions event
    outputs.  Each sensor edge (q, s, q') turns into a spontaneous transition
    whose target announces s.  The target can host the announcement only when
    every sensor edge entering it carries the same event and no input-guarded
    edge enters it; otherwise the edge routes through a fresh intermediate
    announcing state whose single outgoing spontaneous transition reaches the
    (then silent) q'.  Entering a state announces its event, so hosting under
    a conflict would re-announce the wrong event on the completion step.

    Latch valuations propagate from the initial state: entering an announcing
    state applies that sensor's effect, every other entry leaves the latches
    unchanged.  The initial state's valuation is fixed by
    ``initial_valuation`` (the plant's rest position) and is not re-derived
    on re-entry; any other state reached with two different valuations raises
    :class:`InconsistentLabeling`.
    """
    control, sensor = classify_alphabet(fsm, amap)
    variables = sorted(initial_valuation)
    for action in sorted(sensor):
        var = amap.effect(action)[0]
        if var not in initial_valuation:
            raise ValueError(f"initial valuation missing sensor variable {var!r}")

    control_targets = {dst for _, label, dst in fsm.edges if label in control}
    incoming_sensor_labels: dict[str, set[str]] = {}
    for _, label, dst in fsm.edges:
        if label in sensor:
            incoming_sensor_labels.setdefault(dst, set()).add(label)
    hostable = {dst for dst, labels in incoming_sensor_labels.items()
                if len(labels) == 1 and dst not in control_targets}

    emission: dict[str, str] = {}
    taken = set(fsm.states)
    transitions: list[tuple[str, str | None, str]] = []
    extra_states: list[str] = []

    for src, label, dst in fsm.edges:
        if label in control:
            transitions.append((src, label, dst))
            continue
        if dst in hostable:
            emission[dst] = label
            transitions.append((src, None, dst))
        else:
            mid = f"{src}__{label}__{dst}"
            while mid in taken:
                mid += "_i"
            taken.add(mid)
            extra_states.append(mid)
            emission[mid] = label
            transitions.append((src, None, mid))
            transitions.append((mid, None, dst))

    all_states = list(fsm.states) + extra_states
    outgoing: dict[str, list[tuple[str | None, str]]] = {s: [] for s in all_states}
    for src, guard, dst in transitions:
        outgoing[src].append((guard, dst))

    valuations: dict[str, tuple[tuple[str, bool], ...]] = {
        fsm.initial: _canon_valuation(initial_valuation)}
    queue = [fsm.initial]
    while queue:
        current = queue.pop(0)
        base = dict(valuations[current])
        for _, dst in outgoing[current]:
            derived = dict(base)
            if dst in emission:
                var, value = amap.effect(emission[dst])
                derived[var] = value
            canon = _canon_valuation(derived)
            if dst == fsm.initial:
                continue
            if dst not in valuations:
                valuations[dst] = canon
                queue.append(dst)
            elif valuations[dst] != canon:
                raise InconsistentLabeling(dst)

    rest = _canon_valuation(initial_valuation)
    states = tuple(EccState(s, emission.get(s), valuations.get(s, rest))
                   for s in all_states)
    return FunctionBlock(name=name,
                         event_inputs=tuple(sorted(control)),
                         event_outputs=tuple(sorted(sensor)),
                         states=states,
                         initial_state=fsm.initial,
                         transitions=tuple(transitions))


def export_fb(fb: FunctionBlock) -> str:
    """Serialize a function block as the versioned ``plantfb v1`` text format."""
    lines = ["plantfb v1",
             f"name {fb.name}",
             "inputs" + "".join(f" {e}" for e in fb.event_inputs),
             "outputs" + "".join(f" {e}" for e in fb.event_outputs),
             "sensors" + "".join(f" {v}" for v in fb.sensor_vars),
             f"initial {fb.initial_state}"]
    for state in fb.states:
        parts = [f"state {state.name}", f"emit={state.emission or '-'}"]
        parts += [f"{var}={'true' if val else 'false'}" for var, val in state.valuation]
        lines.append(" ".join(parts))
    for src, guard, dst in fb.transitions:
        lines.append(f"trans {src} {guard or NDT_GUARD} {dst}")
    return "\n".join(lines) + "\n"


def parse_fb(text: str) -> FunctionBlock:
    """Parse the ``plantfb v1`` format back into a function block."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != "plantfb v1":
        raise ParseError(1, "expected header 'plantfb v1'")
    name = None
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    initial = None
    states: list[EccState] = []
    transitions: list[tuple[str, str | None, str]] = []
    for line_no, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        key = fields[0]
        if key == "name" and len(fields) == 2:
            name = fields[1]
        elif key == "inputs":
            inputs = tuple(fields[1:])
        elif key == "outputs":
            outputs = tuple(fields[1:])
        elif key == "sensors":
            pass  # derivable from the state lines
        elif key == "initial" and len(fields) == 2:
            initial = fields[1]
        elif key == "state" and len(fields) >= 3:
            state_name = fields[1]
            if not fields[2].startswith("emit="):
                raise ParseError(line_no, "state line missing emit=")
            emit = fields[2][len("emit="):]
            valuation = []
            for item in fields[3:]:
                var, _, value = item.partition("=")
                if value not in ("true", "false"):
                    raise ParseError(line_no, f"bad latch value {item!r}")
                valuation.append((var, value == "true"))
            states.append(EccState(state_name, None if emit == "-" else emit,
                                   tuple(sorted(valuation))))
        elif key == "trans" and len(fields) == 4:
            guard = None if fields[2] == NDT_GUARD else fields[2]
            transitions.append((fields[1], guard, fields[3]))
        else:
            raise ParseError(line_no, f"unrecognized line {line!r}")
    if name is None or initial is None:
        raise ParseError(0, "missing name or initial declaration")
    try:
        return FunctionBlock(name=name, event_inputs=inputs, event_outputs=outputs,
                             states=tuple(states), initial_state=initial,
                             transitions=tuple(transitions))
    except ValueError as exc:
        raise ParseError(0, str(exc)) from None


def export_fb_dot(fb: FunctionBlock) -> str:
    """DOT rendering of the ECC; spontaneous transitions are dashed."""
    def quote(s: str) -> str:
        return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'

    lines = ["digraph ecc {", "  rankdir=LR;"]
    for state in fb.states:
        label = state.name if state.emission is None else f"{state.name} / {state.emission}"
        shape = ' peripheries=2' if state.name == fb.initial_state else ""
        lines.append(f"  {quote(state.name)} [label={quote(label)}{shape}];")
    for src, guard, dst in fb.transitions:
        style = f"label={quote(guard)}" if guard else 'label="NDT" style=dashed'
        lines.append(f"  {quote(src)} -> {quote(dst)} [{style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
