"""Independent oracles and random-model generators shared by the test suite.

The oracles deliberately avoid the library's own algorithms: relations come
from a plain adjacency scan, causal pairs from exhaustive subset enumeration,
reachable markings from a depth-first walk, and CTL values from bounded path
unrolling (exact at |states| steps by the pigeonhole argument).
"""

from __future__ import annotations

import random
from itertools import combinations

from plantmine.eventlog import Trace, TraceSet
from plantmine.petri import Marking, PetriNet
from plantmine.transform import FSM, ActionMap, FunctionBlock
from plantmine.verify import (AF, AG, AU, EF, EG, EU, EX, AX, And, Atom, Const,
                              ControllerFSM, Formula, Implies, KripkeStructure,
                              Not, Or)


def traceset(*action_rows: tuple[str, ...]) -> TraceSet:
    return TraceSet(tuple(Trace(str(i + 1), tuple(row))
                          for i, row in enumerate(action_rows)))


# ---------------------------------------------------------------------------
# Footprint and alpha oracles

def footprint_oracle(traces: TraceSet):
    """Plain adjacency scan; returns (succession set, relation dict)."""
    succession = set()
    for trace in traces.traces:
        for i in range(len(trace.actions) - 1):
            succession.add((trace.actions[i], trace.actions[i + 1]))
    alphabet = sorted({a for t in traces.traces for a in t.actions})
    relations = {}
    for a in alphabet:
        for b in alphabet:
            ab, ba = (a, b) in succession, (b, a) in succession
            if ab and ba:
                relations[(a, b)] = "||"
            elif ab:
                relations[(a, b)] = "->"
            elif ba:
                relations[(a, b)] = "<-"
            else:
                relations[(a, b)] = "#"
    return succession, relations


def maximal_pairs_oracle(traces: TraceSet) -> set[tuple[frozenset, frozenset]]:
    """Exhaustive enumeration of all subset pairs, then a maximality scan."""
    _, relations = footprint_oracle(traces)
    alphabet = sorted({a for t in traces.traces for a in t.actions})

    def unrelated(group) -> bool:
        return all(relations[(x, y)] == "#" for x in group for y in group)

    subsets = [frozenset(c) for size in range(1, len(alphabet) + 1)
               for c in combinations(alphabet, size)]
    candidates = [(a, b) for a in subsets if unrelated(a)
                  for b in subsets if unrelated(b)
                  and all(relations[(x, y)] == "->" for x in a for y in b)]
    return {(a, b) for a, b in candidates
            if not any((a, b) != (a2, b2) and a <= a2 and b <= b2
                       for a2, b2 in candidates)}


# ---------------------------------------------------------------------------
# Series-parallel log generator (single entry and exit action)

def _sp_tree(rng: random.Random, leaves: list[str]):
    if len(leaves) == 1:
        return ("leaf", leaves[0])
    cut = rng.randint(1, len(leaves) - 1)
    op = rng.choice(("seq", "and"))
    return (op, [_sp_tree(rng, leaves[:cut]), _sp_tree(rng, leaves[cut:])])


def _interleavings(x: tuple, y: tuple) -> set[tuple]:
    if not x:
        return {y}
    if not y:
        return {x}
    return ({(x[0],) + rest for rest in _interleavings(x[1:], y)}
            | {(y[0],) + rest for rest in _interleavings(x, y[1:])})


def sp_language(tree) -> set[tuple]:
    kind = tree[0]
    if kind == "leaf":
        return {(tree[1],)}
    left, right = (sp_language(child) for child in tree[1])
    if kind == "seq":
        return {x + y for x in left for y in right}
    return {w for x in left for y in right for w in _interleavings(x, y)}


def random_sp_traceset(rng: random.Random, max_actions: int = 6,
                       max_traces: int = 20) -> TraceSet:
    """A complete log of a random series-parallel structure.

    The first and last actions are sequential, so the structure has a single
    entry and a single exit; the log enumerates the structure's full language
    (capped, resampling oversized draws).
    """
    while True:
        n = rng.randint(3, max_actions)
        actions = [chr(ord("a") + i) for i in range(n)]
        tree = ("seq", [("leaf", actions[0]),
                        ("seq", [_sp_tree(rng, actions[1:-1]),
                                 ("leaf", actions[-1])])])
        words = sorted(sp_language(tree))
        if len(words) <= max_traces:
            return traceset(*words)


# ---------------------------------------------------------------------------
# Reachability oracle

def reachable_markings_oracle(net: PetriNet, initial: Marking,
                              max_depth: int = 200):
    """Depth-first enumeration of reachable markings.

    Returns (set of Marking, saturated); ``saturated`` is False when the
    depth cap cut any branch, in which case the set may be incomplete.
    """
    inputs = {t: [] for t in net.transitions}
    outputs = {t: [] for t in net.transitions}
    for src, dst in net.arcs:
        if dst in inputs:
            inputs[dst].append(src)
        else:
            outputs[src].append(dst)

    best_depth: dict[Marking, int] = {}
    saturated = True
    stack = [(initial, 0)]
    while stack:
        marking, depth = stack.pop()
        if marking in best_depth and best_depth[marking] <= depth:
            continue
        best_depth[marking] = depth
        if depth >= max_depth:
            saturated = False
            continue
        counts = marking.as_dict()
        for t in net.transitions:
            if all(counts.get(p, 0) >= 1 for p in inputs[t]):
                after = dict(counts)
                for p in inputs[t]:
                    after[p] -= 1
                for p in outputs[t]:
                    after[p] = after.get(p, 0) + 1
                stack.append((Marking.of(after), depth + 1))
    return set(best_depth), saturated


def random_conservative_net(rng: random.Random):
    """A small net whose transitions never create tokens, hence bounded."""
    n_places = rng.randint(2, 5)
    n_transitions = rng.randint(1, 5)
    places = [f"pl{i}" for i in range(n_places)]
    transitions = [f"t{i}" for i in range(n_transitions)]
    arcs = set()
    for t in transitions:
        ins = rng.sample(places, rng.randint(1, min(2, n_places)))
        outs = rng.sample(places, rng.randint(0, len(ins)))
        arcs.update((p, t) for p in ins)
        arcs.update((t, p) for p in outs)
    net = PetriNet(places=tuple(places), transitions=tuple(transitions),
                   arcs=tuple(arcs))
    marked = rng.sample(places, rng.randint(1, 2))
    return net, Marking.of({p: 1 for p in marked})


# ---------------------------------------------------------------------------
# CTL oracle: bounded path unrolling, exact at |states| steps

def ctl_oracle(k: KripkeStructure, formula: Formula) -> set:
    states = list(k.states)
    horizon = len(states)
    succs = {s: [t for _, t in k.successors[s]] for s in states}

    def holds(name: str, s) -> bool:
        return name in k.labels[s]

    def sat(f: Formula) -> set:
        match f:
            case Const(value):
                return set(states) if value else set()
            case Atom(name):
                return {s for s in states if holds(name, s)}
            case Not(g):
                return set(states) - sat(g)
            case And(l, r):
                return sat(l) & sat(r)
            case Or(l, r):
                return sat(l) | sat(r)
            case Implies(l, r):
                return (set(states) - sat(l)) | sat(r)
            case EX(g):
                good = sat(g)
                return {s for s in states if any(t in good for t in succs[s])}
            case AX(g):
                good = sat(g)
                return {s for s in states if all(t in good for t in succs[s])}
            case EU(l, r):
                return _exists_until(sat(l), sat(r))
            case EF(g):
                return _exists_until(set(states), sat(g))
            case EG(g):
                return _exists_globally(sat(g))
            case AU(l, r):
                return _all_until(sat(l), sat(r))
            case AF(g):
                return _all_until(set(states), sat(g))
            case AG(g):
                return _all_globally(sat(g))
        raise TypeError(f"not a formula: {f!r}")

    def _exists_until(hold: set, goal: set) -> set:
        layer = set(goal)
        for _ in range(horizon):
            layer = goal | {s for s in hold if any(t in layer for t in succs[s])}
        return layer

    def _exists_globally(hold: set) -> set:
        # exists a path of |states| steps staying in hold -> pigeonhole lasso
        layer = set(hold)
        for _ in range(horizon):
            layer = {s for s in hold if any(t in layer for t in succs[s])}
        return layer

    def _all_until(hold: set, goal: set) -> set:
        layer = set(goal)
        for _ in range(horizon):
            layer = goal | {s for s in hold if all(t in layer for t in succs[s])}
        return layer

    def _all_globally(hold: set) -> set:
        layer = set(hold)
        for _ in range(horizon):
            layer = {s for s in hold if all(t in layer for t in succs[s])}
        return layer

    return sat(formula)


def random_kripke(rng: random.Random, max_states: int = 8,
                  atom_pool: tuple[str, ...] = ("p", "q", "r")) -> KripkeStructure:
    n = rng.randint(2, max_states)
    states = tuple(f"s{i}" for i in range(n))
    successors = {}
    for s in states:
        targets = rng.sample(states, rng.randint(1, min(3, n)))
        successors[s] = tuple((f"e{i}", t) for i, t in enumerate(targets))
    labels = {s: frozenset(a for a in atom_pool if rng.random() < 0.5)
              for s in states}
    return KripkeStructure(states=states, initial=states[0],
                           successors=successors, labels=labels,
                           atoms=frozenset(atom_pool))


def random_formula(rng: random.Random, atoms: tuple[str, ...],
                   depth: int = 3) -> Formula:
    if depth == 0 or rng.random() < 0.2:
        return Atom(rng.choice(atoms))
    shape = rng.choice(("not", "and", "or", "implies",
                        "ex", "ef", "eg", "ax", "af", "ag", "eu", "au"))
    sub = lambda: random_formula(rng, atoms, depth - 1)
    if shape == "not":
        return Not(sub())
    if shape == "and":
        return And(sub(), sub())
    if shape == "or":
        return Or(sub(), sub())
    if shape == "implies":
        return Implies(sub(), sub())
    if shape == "ex":
        return EX(sub())
    if shape == "ef":
        return EF(sub())
    if shape == "eg":
        return EG(sub())
    if shape == "ax":
        return AX(sub())
    if shape == "af":
        return AF(sub())
    if shape == "ag":
        return AG(sub())
    if shape == "eu":
        return EU(sub(), sub())
    return AU(sub(), sub())


# ---------------------------------------------------------------------------
# Random plant FSMs with consistent latch valuations

PLANT_VARIABLES = ("V0", "V1")
PLANT_CONTROLS = ("CMD0", "CMD1")


def plant_action_map() -> ActionMap:
    sensors = {}
    for var in PLANT_VARIABLES:
        sensors[f"{var}_ON"] = (var, True)
        sensors[f"{var}_OFF"] = (var, False)
    return ActionMap.of(control=PLANT_CONTROLS, sensors=sensors)


def random_plant_fsm(rng: random.Random, max_states: int = 10):
    """Random FSM whose sensor edges flip exactly one latch.

    Assigning a fixed valuation per state first and labeling edges from the
    valuation difference guarantees the transformation's propagation is
    conflict-free; it also rules out spontaneous self-loops (a sensor edge
    always changes the valuation).
    """
    n = rng.randint(2, max_states)
    states = [f"Q{i}" for i in range(n)]
    valuations = {s: {v: rng.random() < 0.5 for v in PLANT_VARIABLES}
                  for s in states}

    def hamming(a: str, b: str) -> int:
        return sum(valuations[a][v] != valuations[b][v] for v in PLANT_VARIABLES)

    edges = []
    for s in states:
        candidates = [t for t in states if hamming(s, t) <= 1]
        for _ in range(rng.randint(0, 2)):
            t = rng.choice(candidates)
            changed = [v for v in PLANT_VARIABLES
                       if valuations[s][v] != valuations[t][v]]
            if changed:
                label = f"{changed[0]}_{'ON' if valuations[t][changed[0]] else 'OFF'}"
            else:
                label = rng.choice(PLANT_CONTROLS)
            edges.append((s, label, t))
    fsm = FSM(states=tuple(states), initial=states[0], edges=tuple(edges))
    return fsm, plant_action_map(), dict(valuations[states[0]])


def random_controller(rng: random.Random, fb: FunctionBlock) -> ControllerFSM:
    """Random deterministic controller over the block's crossed interface."""
    n = rng.randint(1, 4)
    states = tuple(f"C{i}" for i in range(n))
    transitions = []
    for s in states:
        for event in fb.event_outputs:
            if rng.random() < 0.7:
                output = rng.choice((None,) + tuple(fb.event_inputs)) \
                    if fb.event_inputs else None
                transitions.append((s, event, output, rng.choice(states)))
    return ControllerFSM(states=states, initial=states[0],
                         inputs=tuple(fb.event_outputs),
                         outputs=tuple(fb.event_inputs),
                         transitions=tuple(transitions))


# ---------------------------------------------------------------------------
# Bounded trace languages

def fsm_words(fsm: FSM, depth: int) -> set[tuple]:
    outgoing: dict[str, list[tuple[str, str]]] = {}
    for src, label, dst in fsm.edges:
        outgoing.setdefault(src, []).append((label, dst))
    words = set()
    seen = set()
    stack = [(fsm.initial, ())]
    while stack:
        state, word = stack.pop()
        if (state, word) in seen:
            continue
        seen.add((state, word))
        words.add(word)
        if len(word) < depth:
            for label, target in outgoing.get(state, []):
                stack.append((target, word + (label,)))
    return words


def ecc_words(fb: FunctionBlock, depth: int) -> set[tuple]:
    """Words over consumed inputs plus announced outputs, mapped to actions.

    Announcements are the sensor action names themselves; transitions into a
    silent state contribute nothing.
    """
    outgoing: dict[str, list[tuple[str | None, str]]] = {}
    for src, guard, dst in fb.transitions:
        outgoing.setdefault(src, []).append((guard, dst))
    emission = {s.name: s.emission for s in fb.states}
    words = set()
    seen = set()
    stack = [(fb.initial_state, ())]
    while stack:
        state, word = stack.pop()
        if (state, word) in seen:
            continue
        seen.add((state, word))
        words.add(word)
        for guard, target in outgoing.get(state, []):
            symbol = guard if guard is not None else emission[target]
            new_word = word + (symbol,) if symbol is not None else word
            if len(new_word) <= depth:
                stack.append((target, new_word))
    return words
