"""Symbolic program analysis: chains, conflicts, livelocks, dangling refs."""

from workcell.lint import lint_program
from workcell.program import (GridPlacement, InsidePlacement, MiddlePlacement,
                              ManualTrigger, MoveAction, Program, Rule,
                              has_state, is_in, is_not_in, load_program)
from workcell.scenario import (ObjectPlacement, Scenario, load_scenario,
                               resolve_fixture)
from workcell.world import CategorySpec, CombinationRule, Rect


def make_scenario():
    return Scenario(
        id="mini", name="Mini", tables={"table": Rect(0.0, 0.0, 2.0, 1.0)},
        home=(1.0, 0.9),
        categories=[
            CategorySpec("bolt", color="silver"),
            CategorySpec("holder", color="blue", is_container=True,
                         states=("empty", "full", "assembled")),
            CategorySpec("top", color="red"),
        ],
        objects=[ObjectPlacement("bolt", (0.1, 0.2))],
        combinations=[
            CombinationRule("top", "holder", "empty", "full", "attached"),
            CombinationRule("bolt", "holder", "full", "assembled",
                            "absorbed"),
        ])


def base_program(scenario):
    program = Program()
    for zone_id, x in (("green", 0.0), ("yellow", 0.5), ("blue", 1.0),
                       ("red", 1.5)):
        program.add_zone(Rect(x, 0.1, 0.4, 0.3), zone_id, zone_id)
    return program


def test_assembly_fixture_reports_delivery_chain_and_no_conflicts():
    scenario = load_scenario(resolve_fixture("scenarios", "assembly"))
    program = load_program(resolve_fixture("programs", "assembly"), scenario)
    report = lint_program(program, scenario)
    pairs = {(edge.source, edge.target) for edge in report.chains}
    assert ("stack-and-deliver", "palletize") in pairs
    # the cycle back is real too: palletizing frees the yellow zone
    assert ("palletize", "stack-and-deliver") in pairs
    assert report.conflicts == ()
    assert report.self_retriggers == ()
    assert report.dangling == ()


def test_conflict_fixture_reports_the_conflicting_pair():
    scenario = load_scenario(resolve_fixture("scenarios", "conflict"))
    program = load_program(resolve_fixture("programs", "conflict"), scenario)
    report = lint_program(program, scenario)
    assert ("to-yellow", "to-blue") in report.conflicts
    assert report.self_retriggers == ()


def test_green_to_green_middle_rule_is_a_self_retrigger():
    scenario = make_scenario()
    program = base_program(scenario)
    program.add_rule(
        Rule("loop", (is_in("bolt", "green"),),
             (MoveAction("bolt", "green", "green", MiddlePlacement()),)),
        scenario)
    report = lint_program(program, scenario)
    assert [rule_id for rule_id, _ in report.self_retriggers] == ["loop"]
    # and the chain report shows the rule feeding itself
    assert ("loop", "loop") in {(e.source, e.target) for e in report.chains}


def test_absorbing_placement_cancels_the_self_retrigger():
    scenario = make_scenario()
    program = base_program(scenario)
    program.add_rule(
        Rule("consume", (is_in("bolt", "green"),),
             (MoveAction("bolt", "green", "green",
                         InsidePlacement("holder")),)),
        scenario)
    report = lint_program(program, scenario)
    assert report.self_retriggers == ()


def test_contradictory_zone_conditions_are_not_a_potential_conflict():
    scenario = make_scenario()
    program = base_program(scenario)
    program.add_rule(
        Rule("inside", (is_in("bolt", "green"),),
             (MoveAction("bolt", "green", "yellow", MiddlePlacement()),)),
        scenario)
    program.add_rule(
        Rule("outside", (is_not_in("bolt", "green"),
                         is_in("bolt", "blue")),
             (MoveAction("bolt", "blue", "yellow", MiddlePlacement()),)),
        scenario)
    report = lint_program(program, scenario)
    assert report.conflicts == ()


def test_disjoint_conditions_conflict_even_with_one_instance():
    # symbolic analysis ignores object counts on purpose
    scenario = make_scenario()  # only one bolt exists
    program = base_program(scenario)
    program.add_rule(
        Rule("a", (is_in("bolt", "green"),),
             (MoveAction("bolt", "green", "yellow", MiddlePlacement()),)),
        scenario)
    program.add_rule(
        Rule("b", (is_in("bolt", "blue"),),
             (MoveAction("bolt", "blue", "yellow", MiddlePlacement()),)),
        scenario)
    report = lint_program(program, scenario)
    assert ("a", "b") in report.conflicts


def test_state_gain_chains_into_has_state_condition():
    scenario = make_scenario()
    program = base_program(scenario)
    program.add_rule(
        Rule("stack", (is_in("top", "red"),),
             (MoveAction("top", "red", "green", InsidePlacement("holder")),)),
        scenario)
    program.add_rule(
        Rule("watch", (has_state("holder", "full"),),
             (MoveAction("holder", "green", "blue", GridPlacement(1, 3)),)),
        scenario)
    report = lint_program(program, scenario)
    edges = {(e.source, e.target): e for e in report.chains}
    assert ("stack", "watch") in edges
    assert "becomes full" in edges[("stack", "watch")].effect


def test_button_actions_join_the_chain_analysis():
    scenario = make_scenario()
    program = base_program(scenario)
    program.add_button(
        ManualTrigger("feed", "feed", (
            MoveAction("bolt", "yellow", "green", MiddlePlacement()),)),
        scenario)
    program.add_rule(
        Rule("drain", (is_in("bolt", "green"),),
             (MoveAction("bolt", "green", "yellow", MiddlePlacement()),)),
        scenario)
    report = lint_program(program, scenario)
    pairs = {(e.source, e.target) for e in report.chains}
    assert ("feed", "drain") in pairs
    assert ("drain", "feed") not in pairs  # buttons have no conditions
    # buttons do not take part in the rule-pair conflict report
    assert report.conflicts == ()


def test_dangling_zone_after_deletion_is_reported():
    scenario = make_scenario()
    program = base_program(scenario)
    program.add_rule(
        Rule("mover", (is_in("bolt", "red"),),
             (MoveAction("bolt", "red", "yellow", MiddlePlacement()),)),
        scenario)
    program.delete_zone("red")
    report = lint_program(program, scenario)
    assert any("mover (disabled)" == source and "red" in problem
               for source, problem in report.dangling)


def test_render_lists_sections_or_reports_clean():
    scenario = make_scenario()
    program = base_program(scenario)
    report = lint_program(program, scenario)
    assert report.clean
    assert report.render() == "no findings"
    program.add_rule(
        Rule("loop", (is_in("bolt", "green"),),
             (MoveAction("bolt", "green", "green", MiddlePlacement()),)),
        scenario)
    report = lint_program(program, scenario)
    text = report.render()
    assert "self-retrigger" in text and "loop" in text
    payload = report.to_payload()
    assert payload["self_retriggers"][0]["rule_id"] == "loop"
