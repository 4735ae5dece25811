"""Petri net core: markings, the token game, boundary stripping, reachability.

Nets here are plain place/transition nets with unit arc weights, which is all
the alpha miner ever produces.  Transition ids double as their action labels.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping
from xml.sax.saxutils import quoteattr

from .errors import BoundExceeded, MarkingRequired, NoBoundary, NotEnabled

DEFAULT_BOUND = 10_000


@dataclass(frozen=True)
class Marking:
    """Token counts per place, canonicalized as sorted (place, count) pairs.

    Zero counts are omitted, so equal markings compare and hash equal no
    matter how they were built.
    """

    tokens: tuple[tuple[str, int], ...] = ()

    @classmethod
    def of(cls, counts: Mapping[str, int]) -> "Marking":
        for place, count in counts.items():
            if count < 0:
                raise ValueError(f"negative token count for place {place!r}")
        return cls(tuple(sorted((p, c) for p, c in counts.items() if c)))

    def count(self, place: str) -> int:
        for p, c in self.tokens:
            if p == place:
                return c
        return 0

    def as_dict(self) -> dict[str, int]:
        return dict(self.tokens)

    def total(self) -> int:
        return sum(c for _, c in self.tokens)

    def __str__(self) -> str:
        return "{" + " ".join(f"{p}={c}" for p, c in self.tokens) + "}"


@dataclass(frozen=True)
class PetriNet:
    """A place/transition net with optional source/sink place designations."""

    places: tuple[str, ...] = ()
    transitions: tuple[str, ...] = ()
    arcs: tuple[tuple[str, str], ...] = ()
    source: str | None = None
    sink: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "places", tuple(sorted(set(self.places))))
        object.__setattr__(self, "transitions", tuple(sorted(set(self.transitions))))
        arcs = tuple(sorted(set(tuple(a) for a in self.arcs)))
        object.__setattr__(self, "arcs", arcs)
        place_set, transition_set = set(self.places), set(self.transitions)
        if place_set & transition_set:
            raise ValueError(f"place/transition id clash: {place_set & transition_set}")
        for src, dst in arcs:
            ok = (src in place_set and dst in transition_set) or \
                 (src in transition_set and dst in place_set)
            if not ok:
                raise ValueError(f"arc ({src!r}, {dst!r}) does not join a place and a transition")
        for designated in (self.source, self.sink):
            if designated is not None and designated not in place_set:
                raise ValueError(f"designated place {designated!r} is not in the net")

    def preset(self, node: str) -> tuple[str, ...]:
        return tuple(src for src, dst in self.arcs if dst == node)

    def postset(self, node: str) -> tuple[str, ...]:
        return tuple(dst for src, dst in self.arcs if src == node)


def _io_maps(net: PetriNet) -> tuple[dict[str, list[str]], dict[str, list[str]]]:
    """Input and output places per transition (arcs are kept sorted, so these are too)."""
    inputs: dict[str, list[str]] = {t: [] for t in net.transitions}
    outputs: dict[str, list[str]] = {t: [] for t in net.transitions}
    for src, dst in net.arcs:
        if dst in inputs:
            inputs[dst].append(src)
        else:
            outputs[src].append(dst)
    return inputs, outputs


def enabled_transitions(net: PetriNet, marking: Marking) -> tuple[str, ...]:
    """Transitions whose every input place holds at least one token, sorted by id."""
    inputs, _ = _io_maps(net)
    counts = marking.as_dict()
    return tuple(t for t in net.transitions
                 if all(counts.get(p, 0) >= 1 for p in inputs[t]))


def fire(net: PetriNet, marking: Marking, transition: str) -> Marking:
    """Fire one enabled transition: consume a token per input place, produce one per output."""
    inputs, outputs = _io_maps(net)
    if transition not in inputs:
        raise NotEnabled(transition)
    counts = marking.as_dict()
    if any(counts.get(p, 0) < 1 for p in inputs[transition]):
        raise NotEnabled(transition)
    for p in inputs[transition]:
        counts[p] -= 1
    for p in outputs[transition]:
        counts[p] = counts.get(p, 0) + 1
    return Marking.of(counts)


def strip_boundary(net: PetriNet) -> PetriNet:
    """Remove the designated source and sink places with their incident arcs.

    The miner's synthetic boundary places would otherwise dominate the
    reachability analysis; everything else is preserved verbatim.
    """
    if net.source is None or net.sink is None:
        raise NoBoundary()
    boundary = {net.source, net.sink}
    return PetriNet(
        places=tuple(p for p in net.places if p not in boundary),
        transitions=net.transitions,
        arcs=tuple((s, d) for s, d in net.arcs if s not in boundary and d not in boundary),
    )


def default_initial_marking(net: PetriNet) -> Marking:
    """One token in every place with an empty preset.

    Cyclic nets have no such place; they need an explicit marking choice, so
    this raises :class:`MarkingRequired` rather than guessing one.
    """
    fed: set[str] = set()
    for src, dst in net.arcs:
        if dst in set(net.places):
            fed.add(dst)
    sourceless = [p for p in net.places if p not in fed]
    if not sourceless:
        raise MarkingRequired()
    return Marking.of({p: 1 for p in sourceless})


@dataclass(frozen=True)
class ReachabilityGraph:
    """Explicit state space of a marked net.

    ``nodes`` lists markings in breadth-first discovery order and ``edges``
    in exploration order, which makes downstream state naming deterministic.
    """

    nodes: tuple[Marking, ...]
    initial: Marking
    edges: tuple[tuple[Marking, str, Marking], ...]


def reachability_graph(net: PetriNet, initial: Marking,
                       bound: int = DEFAULT_BOUND) -> ReachabilityGraph:
    """Breadth-first reachability exploration from ``initial``.

    Raises :class:`BoundExceeded` as soon as more than ``bound`` distinct
    markings would be recorded; stripped nets with token-generating
    transitions are unbounded, and this is the safety valve for them.
    """
    if bound < 1:
        raise ValueError("bound must be positive")
    inputs, outputs = _io_maps(net)

    nodes: list[Marking] = [initial]
    seen: set[Marking] = {initial}
    edges: list[tuple[Marking, str, Marking]] = []
    queue: deque[Marking] = deque([initial])
    while queue:
        marking = queue.popleft()
        counts = marking.as_dict()
        for t in net.transitions:
            if not all(counts.get(p, 0) >= 1 for p in inputs[t]):
                continue
            after = dict(counts)
            for p in inputs[t]:
                after[p] -= 1
            for p in outputs[t]:
                after[p] = after.get(p, 0) + 1
            succ = Marking.of(after)
            if succ not in seen:
                if len(nodes) >= bound:
                    raise BoundExceeded(bound)
                seen.add(succ)
                nodes.append(succ)
                queue.append(succ)
            edges.append((marking, t, succ))
    return ReachabilityGraph(tuple(nodes), initial, tuple(edges))


def export_pnml(net: PetriNet) -> str:
    """Serialize the net as a PNML place/transition document.

    Element order is sorted by id, so identical nets serialize to identical
    bytes.  The designated source place, when present, carries initial
    marking 1.
    """
    lines = ['<?xml version="1.0" encoding="UTF-8"?>',
             '<pnml xmlns="http://www.pnml.org/version-2009/grammar/pnml">',
             '  <net id="net0" type="http://www.pnml.org/version-2009/grammar/ptnet">',
             '    <page id="page0">']
    for place in net.places:
        lines.append(f"      <place id={quoteattr(place)}>")
        lines.append(f"        <name><text>{place}</text></name>")
        if place == net.source:
            lines.append("        <initialMarking><text>1</text></initialMarking>")
        lines.append("      </place>")
    for transition in net.transitions:
        lines.append(f"      <transition id={quoteattr(transition)}>")
        lines.append(f"        <name><text>{transition}</text></name>")
        lines.append("      </transition>")
    for index, (src, dst) in enumerate(net.arcs):
        lines.append(f'      <arc id="a{index}" source={quoteattr(src)} '
                     f"target={quoteattr(dst)}/>")
    lines.extend(["    </page>", "  </net>", "</pnml>"])
    return "\n".join(lines) + "\n"


def _dot_quote(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot_net(net: PetriNet) -> str:
    """DOT rendering of the net: places as circles, transitions as boxes."""
    lines = ["digraph petrinet {", "  rankdir=LR;"]
    for place in net.places:
        lines.append(f"  {_dot_quote(place)} [shape=circle];")
    for transition in net.transitions:
        lines.append(f"  {_dot_quote(transition)} [shape=box];")
    for src, dst in net.arcs:
        lines.append(f"  {_dot_quote(src)} -> {_dot_quote(dst)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot_graph(graph: ReachabilityGraph) -> str:
    """DOT rendering of a reachability graph, nodes named in discovery order."""
    names = {marking: f"M{i}" for i, marking in enumerate(graph.nodes)}
    lines = ["digraph reachability {", "  rankdir=LR;"]
    for marking in graph.nodes:
        label = f"{names[marking]} {marking}"
        lines.append(f"  {_dot_quote(names[marking])} [label={_dot_quote(label)}];")
    for src, transition, dst in graph.edges:
        lines.append(f"  {_dot_quote(names[src])} -> {_dot_quote(names[dst])} "
                     f"[label={_dot_quote(transition)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
