import random

import pytest

from plantmine.errors import (AlphabetMismatch, NondeterministicController,
                              ParseError, UndeclaredEvent, UnknownAtom)
from plantmine.fixture import (FIXTURE_CONTROLLER_TEXT, INITIAL_VALUATION,
                               fixture_action_map, fixture_controller)
from plantmine.transform import FSM, build_plant_fb
from plantmine.verify import (AG, AU, EF, EU, And, Atom, CompositeState,
                              Implies, KripkeStructure, Not, Or, check_ctl,
                              compose, parse_controller, parse_ctl, render_ctl,
                              satisfying_states)

from helpers import (ctl_oracle, random_controller, random_formula,
                     random_kripke, random_plant_fsm)


class TestParseController:
    def test_fixture_text(self):
        ctl = parse_controller(FIXTURE_CONTROLLER_TEXT)
        assert ctl == fixture_controller()
        assert len(ctl.states) == 4
        assert len(ctl.transitions) == 4
        assert ctl.initial == "C0"

    def test_optional_output(self):
        ctl = parse_controller(FIXTURE_CONTROLLER_TEXT)
        assert ctl.step("C1", "HOME_OFF") == (None, "C2")
        assert ctl.step("C0", "HOME_ON") == ("EXT", "C1")
        assert ctl.step("C0", "END_ON") is None

    def test_undeclared_event(self):
        text = FIXTURE_CONTROLLER_TEXT + "C0 --FOO/--> C1\n"
        with pytest.raises(UndeclaredEvent):
            parse_controller(text)

    def test_nondeterministic_rejected(self):
        text = FIXTURE_CONTROLLER_TEXT + "C0 --HOME_ON/--> C2\n"
        with pytest.raises(NondeterministicController):
            parse_controller(text)

    def test_missing_declaration(self):
        with pytest.raises(ParseError):
            parse_controller("states: C0\ninitial: C0\ninputs: X\n")

    def test_garbage_line_reports_number(self):
        with pytest.raises(ParseError) as exc:
            parse_controller("states: C0\n???\n")
        assert exc.value.position == 2

    def test_undeclared_state_in_transition(self):
        text = ("states: C0\ninitial: C0\ninputs: S\noutputs: G\n"
                "C0 --S/G--> C9\n")
        with pytest.raises(ParseError):
            parse_controller(text)


class TestCompose:
    def test_fixture_loop_is_clean(self, fixture_kripke):
        assert fixture_kripke.diagnostics == ()
        for state in fixture_kripke.states:
            assert len(fixture_kripke.successors[state]) >= 1
        assert fixture_kripke.initial == CompositeState("Q0", "C0", "HOME_ON")

    def test_fixture_labels(self, fixture_kripke):
        labels = fixture_kripke.labels[fixture_kripke.initial]
        assert "HOME" in labels and "END" not in labels
        assert "plant_state=Q0" in labels and "ctl_state=C0" in labels

    def test_ignored_event_diagnostic(self, fixture_fb):
        # a controller that never listens for HOME_OFF
        text = ("states: C0 C1\ninitial: C0\n"
                "inputs: HOME_ON END_ON END_OFF HOME_OFF\noutputs: EXT RET\n"
                "C0 --HOME_ON/EXT--> C1\n")
        deaf = parse_controller(text)
        k = compose(fixture_fb, deaf)
        kinds = {d.kind for d in k.diagnostics}
        assert "ignored_event" in kinds
        for state in k.states:
            assert len(k.successors[state]) >= 1

    def test_dropped_command_diagnostic(self, fixture_fb):
        # RET is issued immediately at the rest position, where it cannot fire
        text = ("states: C0\ninitial: C0\n"
                "inputs: HOME_ON HOME_OFF END_ON END_OFF\noutputs: EXT RET\n"
                "C0 --HOME_ON/RET--> C0\n")
        eager = parse_controller(text)
        k = compose(fixture_fb, eager)
        assert any(d.kind == "dropped_command" for d in k.diagnostics)

    def test_same_direction_claim_rejected(self, fixture_fb):
        from plantmine.verify import ControllerFSM
        bad = ControllerFSM(states=("C0",), initial="C0",
                            inputs=("HOME_ON",), outputs=("END_ON",),
                            transitions=())
        with pytest.raises(AlphabetMismatch):
            compose(fixture_fb, bad)

    def test_narrower_plant_tolerated(self):
        # plant without falling sensor edges composes with the full controller
        fsm = FSM(states=("Q0", "Q1", "Q2", "Q3"), initial="Q0",
                  edges=(("Q0", "EXT", "Q1"), ("Q1", "END_ON", "Q2"),
                         ("Q2", "RET", "Q3"), ("Q3", "HOME_ON", "Q0")))
        fb = build_plant_fb(fsm, fixture_action_map(), INITIAL_VALUATION)
        k = compose(fb, fixture_controller())
        assert len(k.states) >= 4


class TestParseCtl:
    def test_sensor_exclusion_property(self):
        formula = parse_ctl("AG !(HOME & END)")
        assert formula == AG(Not(And(Atom("HOME"), Atom("END"))))

    def test_g_spelling(self):
        assert parse_ctl("G !(HOME & END)") == parse_ctl("AG !(HOME & END)")

    def test_true_comparison_normalizes(self):
        assert parse_ctl("HOME = TRUE") == Atom("HOME")
        assert parse_ctl("HOME = FALSE") == Not(Atom("HOME"))
        assert parse_ctl("plant_state = Q0") == Atom("plant_state=Q0")

    def test_simple_ef(self):
        assert parse_ctl("EF p") == EF(Atom("p"))

    def test_until_forms(self):
        assert parse_ctl("E[p U q]") == EU(Atom("p"), Atom("q"))
        assert parse_ctl("A[p U q]") == AU(Atom("p"), Atom("q"))

    def test_precedence(self):
        assert parse_ctl("p & q | r") == Or(And(Atom("p"), Atom("q")), Atom("r"))
        assert parse_ctl("p -> q -> r") == Implies(Atom("p"),
                                                   Implies(Atom("q"), Atom("r")))

    def test_unbalanced_raises(self):
        with pytest.raises(ParseError):
            parse_ctl("AG !(p")
        with pytest.raises(ParseError):
            parse_ctl("")
        with pytest.raises(ParseError):
            parse_ctl("p q")

    def test_render_round_trip_random(self):
        rng = random.Random(13)
        for _ in range(200):
            formula = random_formula(rng, ("p", "q", "r"), depth=3)
            assert parse_ctl(render_ctl(formula)) == formula

    def test_sensor_exclusion_renders_exactly(self):
        assert render_ctl(parse_ctl("AG !(HOME & END)")) == "AG !(HOME & END)"


def single_state_structure():
    return KripkeStructure(states=("s0",), initial="s0",
                           successors={"s0": (("loop", "s0"),)},
                           labels={"s0": frozenset({"p"})},
                           atoms=frozenset({"p", "q"}))


class TestCheckCtl:
    def test_fixture_sensor_exclusion_holds(self, fixture_kripke):
        verdict = check_ctl(fixture_kripke, parse_ctl("AG !(HOME & END)"))
        assert verdict.holds
        assert verdict.counterexample is None

    def test_one_state_ef(self):
        verdict = check_ctl(single_state_structure(), parse_ctl("EF p"))
        assert verdict.holds

    def test_unknown_atom(self):
        with pytest.raises(UnknownAtom):
            check_ctl(single_state_structure(), parse_ctl("EF zz"))

    def test_mutated_fixture_fails_with_counterexample(self):
        # drop the falling sensor edges: END stays latched inside the loop
        fsm = FSM(states=("Q0", "Q1", "Q2", "Q3"), initial="Q0",
                  edges=(("Q0", "EXT", "Q1"), ("Q1", "END_ON", "Q2"),
                         ("Q2", "RET", "Q3"), ("Q3", "HOME_ON", "Q0")))
        fb = build_plant_fb(fsm, fixture_action_map(), INITIAL_VALUATION)
        k = compose(fb, fixture_controller())
        verdict = check_ctl(k, parse_ctl("AG !(HOME & END)"))
        assert not verdict.holds
        path = verdict.counterexample
        assert path is not None and len(path) <= 20
        assert path[0].state == k.initial
        for before, after in zip(path, path[1:]):
            assert (after.event, after.state) in [
                (label, target) for label, target in k.successors[before.state]]
        last = path[-1].state
        assert {"HOME", "END"} <= k.labels[last]

    def test_counterexample_only_for_ag(self):
        k = single_state_structure()
        verdict = check_ctl(k, parse_ctl("EX q"))
        assert not verdict.holds
        assert verdict.counterexample is None

    def test_initial_violation_gives_single_state_path(self):
        k = single_state_structure()
        verdict = check_ctl(k, parse_ctl("AG q"))
        assert not verdict.holds
        assert len(verdict.counterexample) == 1
        assert verdict.counterexample[0].state == "s0"

    def test_fixpoint_rounds_bounded(self):
        rng = random.Random(29)
        for _ in range(50):
            k = random_kripke(rng)
            stats = {}
            satisfying_states(k, random_formula(rng, ("p", "q", "r")), stats)
            for rounds in stats.get("rounds", []):
                assert rounds <= len(k.states)


class TestOracleAgreement:
    def test_random_structures_and_formulas(self):
        rng = random.Random(101)
        for _ in range(150):
            k = random_kripke(rng)
            formula = random_formula(rng, ("p", "q", "r"), depth=3)
            assert satisfying_states(k, formula) == frozenset(ctl_oracle(k, formula))

    def test_dualities_as_set_equalities(self):
        rng = random.Random(59)
        p = Atom("p")
        for _ in range(100):
            k = random_kripke(rng)
            assert satisfying_states(k, AG(p)) == \
                satisfying_states(k, Not(EF(Not(p))))
            assert satisfying_states(k, parse_ctl("AF p")) == \
                satisfying_states(k, parse_ctl("!EG !p"))
            assert satisfying_states(k, parse_ctl("AX p")) == \
                satisfying_states(k, parse_ctl("!EX !p"))


class TestClosedLoopWithRandomPlants:
    def test_composition_is_total_and_checkable(self):
        rng = random.Random(71)
        for _ in range(25):
            fsm, amap, initial = random_plant_fsm(rng, max_states=6)
            fb = build_plant_fb(fsm, amap, initial)
            ctl = random_controller(rng, fb)
            k = compose(fb, ctl)
            for state in k.states:
                assert len(k.successors[state]) >= 1
            formula = parse_ctl("AG !(V0 & V1)")
            assert check_ctl(k, formula).holds in (True, False)
