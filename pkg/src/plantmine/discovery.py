"""Alpha-algorithm process discovery and token-replay conformance.

The miner derives the classic ordering relations from direct successions in
the log, enumerates maximal causal set pairs, and assembles a workflow net
with one synthetic source and sink place.  Token replay then validates that
the mined net can actually reproduce the log it came from.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import EmptyLog, EmptyTrace, NoBoundary, UnknownAction
from .eventlog import Trace, TraceSet, collapse_duplicate_traces
from .petri import Marking, PetriNet, _io_maps

SOURCE_PLACE = "source"
SINK_PLACE = "sink"

# Exhaustive subset enumeration over the alphabet; fine for the plant logs
# this tool targets, unreasonable beyond this size.
MAX_ALPHABET = 16


class Relation(Enum):
    CAUSALITY = "->"
    REVERSE = "<-"
    PARALLEL = "||"
    UNRELATED = "#"


@dataclass(frozen=True)
class FootprintMatrix:
    """Ordering relations between actions, derived from direct successions.

    ``a -> b`` iff a is directly followed by b somewhere but never the other
    way around; both directions make the pair parallel; neither makes it
    unrelated.
    """

    alphabet: tuple[str, ...]
    direct_succession: frozenset[tuple[str, str]]

    def relation(self, a: str, b: str) -> Relation:
        ab = (a, b) in self.direct_succession
        ba = (b, a) in self.direct_succession
        if ab and ba:
            return Relation.PARALLEL
        if ab:
            return Relation.CAUSALITY
        if ba:
            return Relation.REVERSE
        return Relation.UNRELATED

    @property
    def relations(self) -> dict[tuple[str, str], Relation]:
        return {(a, b): self.relation(a, b)
                for a in self.alphabet for b in self.alphabet}


def footprint(traces: TraceSet) -> FootprintMatrix:
    """Compute the footprint matrix of a trace set."""
    if not traces.traces:
        raise EmptyLog()
    succession = set()
    for trace in traces.traces:
        for a, b in zip(trace.actions, trace.actions[1:]):
            succession.add((a, b))
    return FootprintMatrix(tuple(sorted(traces.alphabet)), frozenset(succession))


def _unrelated_cliques(fp: FootprintMatrix) -> list[frozenset[str]]:
    """Non-empty action sets whose members are pairwise unrelated.

    Membership includes each action with itself, which is what rules
    self-looping actions out of causal sets (the known length-one-loop
    limitation of plain alpha).
    """
    items = fp.alphabet
    cliques = []
    for mask in range(1, 1 << len(items)):
        subset = [items[i] for i in range(len(items)) if mask >> i & 1]
        if all(fp.relation(a, b) is Relation.UNRELATED for a in subset for b in subset):
            cliques.append(frozenset(subset))
    return cliques


def causal_pairs(fp: FootprintMatrix) -> set[tuple[frozenset[str], frozenset[str]]]:
    """All pairs (A, B) with A, B pairwise-unrelated and every a in A causing every b in B."""
    cliques = _unrelated_cliques(fp)
    pairs = set()
    for a_set in cliques:
        for b_set in cliques:
            if all(fp.relation(a, b) is Relation.CAUSALITY for a in a_set for b in b_set):
                pairs.add((a_set, b_set))
    return pairs


def maximal_pairs(fp: FootprintMatrix) -> set[tuple[frozenset[str], frozenset[str]]]:
    """The componentwise-maximal causal pairs; each one becomes a place."""
    pairs = causal_pairs(fp)
    return {(a, b) for a, b in pairs
            if not any((a, b) != (a2, b2) and a <= a2 and b <= b2
                       for a2, b2 in pairs)}


def place_id(a_set: frozenset[str], b_set: frozenset[str]) -> str:
    """Deterministic place id for a causal pair.

    Action names never contain dots, so joining the two sorted sides with
    ``..`` is unambiguous.
    """
    return "p." + ".".join(sorted(a_set)) + ".." + ".".join(sorted(b_set))


def alpha_discover(traces: TraceSet) -> PetriNet:
    """Mine a workflow net from a trace set with the alpha algorithm.

    Duplicate traces are collapsed first; the relations are set-level, so the
    mined net is independent of trace order and multiplicity.  The net gets a
    designated ``source`` place feeding every trace-initial action and a
    ``sink`` place fed by every trace-final action.
    """
    if not traces.traces:
        raise EmptyLog()
    for trace in traces.traces:
        if not trace.actions:
            raise EmptyTrace(trace.process_id)
    if len(traces.alphabet) > MAX_ALPHABET:
        raise ValueError(f"alphabet larger than {MAX_ALPHABET} actions")
    if {SOURCE_PLACE, SINK_PLACE} & traces.alphabet:
        raise ValueError("actions named 'source'/'sink' clash with boundary places")

    distinct = collapse_duplicate_traces(traces)
    fp = footprint(traces)
    first = {actions[0] for actions in distinct}
    last = {actions[-1] for actions in distinct}
    pairs = maximal_pairs(fp)

    places = [SOURCE_PLACE, SINK_PLACE]
    arcs: set[tuple[str, str]] = set()
    arcs.update((SOURCE_PLACE, t) for t in first)
    arcs.update((t, SINK_PLACE) for t in last)
    for a_set, b_set in pairs:
        pid = place_id(a_set, b_set)
        places.append(pid)
        arcs.update((a, pid) for a in a_set)
        arcs.update((pid, b) for b in b_set)
    return PetriNet(places=tuple(places),
                    transitions=tuple(sorted(traces.alphabet)),
                    arcs=tuple(arcs),
                    source=SOURCE_PLACE, sink=SINK_PLACE)


@dataclass(frozen=True)
class ReplayResult:
    """Outcome of replaying one trace on a workflow net."""

    fits: bool
    missing_tokens: int
    remaining_tokens: int
    final_marking: Marking


def replay_trace(net: PetriNet, trace: Trace) -> ReplayResult:
    """Token replay of a trace from {source: 1}.

    Disabled transitions are force-fired: every unsatisfied input place is
    topped up and counted as a missing token.  The trace fits when nothing
    was missing and the final marking is exactly one token on the sink.

    Note that a net whose boundary sits inside a loop (the miner produces one
    from logs that repeat a cycle per scenario) cannot fit multi-cycle
    traces: every repetition needs a fresh source token and strands one more
    token on the sink.  That is a property of plain alpha nets, not of the
    replay.
    """
    if net.source is None or net.sink is None:
        raise NoBoundary()
    transitions = set(net.transitions)
    for action in trace.actions:
        if action not in transitions:
            raise UnknownAction(action)

    inputs, outputs = _io_maps(net)
    counts: dict[str, int] = {net.source: 1}
    missing = 0
    for action in trace.actions:
        for p in inputs[action]:
            if counts.get(p, 0) < 1:
                missing += 1
                counts[p] = counts.get(p, 0) + 1
        for p in inputs[action]:
            counts[p] -= 1
        for p in outputs[action]:
            counts[p] = counts.get(p, 0) + 1
    final = Marking.of(counts)
    remaining = sum(c for p, c in final.tokens if p != net.sink)
    fits = missing == 0 and final.as_dict() == {net.sink: 1}
    return ReplayResult(fits, missing, remaining, final)


def fitness(net: PetriNet, traces: TraceSet) -> float:
    """Fraction of traces that replay without missing tokens and end cleanly."""
    if not traces.traces:
        raise EmptyLog()
    fitting = sum(1 for t in traces.traces if replay_trace(net, t).fits)
    return fitting / len(traces.traces)
