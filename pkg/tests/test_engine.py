"""Trigger evaluation and binding, checked against a brute-force oracle.

The oracle below was written before the engine and shares no code with it:
rectangle tests, condition truth, and candidate filtering are re-derived
from scratch by enumerating every object against every predicate.  The
randomized equivalence run compares the two over at least a thousand
worlds.
"""

import random

from hypothesis import given, strategies as st

from workcell.engine import (Disposition, bind_all, candidate_set,
                             detect_conflict, evaluate_condition,
                             flag_executable)
from workcell.program import (Condition, GridPlacement, InsidePlacement,
                              ManualTrigger, MiddlePlacement, MoveAction,
                              Program, Rule, has_state, is_in, is_not_in)
from workcell.world import PerceivedObject, PerceivedState, Rect, Zone

SEED = 20260823


# ---------------------------------------------------------------------------
# the independent oracle: dict-based worlds, no engine imports


def _oracle_inside(zone, pos):
    x, y = pos
    zx, zy, zw, zh = zone
    return zx <= x <= zx + zw and zy <= y <= zy + zh


def _oracle_condition_true(cond, objects, zones):
    kind, category, zone_id, state = cond
    if kind == "has_state":
        return any(o["category"] == category and o["state"] == state
                   for o in objects)
    if zone_id not in zones:
        return False
    present = any(o["category"] == category and not o["held"]
                  and _oracle_inside(zones[zone_id], o["position"])
                  for o in objects)
    return present if kind == "is_in" else not present


def _oracle_candidates(conditions, action, objects, zones):
    category, from_zone, to_zone, placement = action
    found = []
    for obj in sorted(objects, key=lambda o: o["id"]):
        if obj["category"] != category or obj["held"]:
            continue
        if from_zone not in zones:
            continue
        if not _oracle_inside(zones[from_zone], obj["position"]):
            continue
        keep = True
        for cond in conditions:
            kind, ccat, czone, cstate = cond
            if ccat != category or kind == "is_not_in":
                continue
            if kind == "is_in":
                keep = keep and czone in zones and _oracle_inside(
                    zones[czone], obj["position"])
            else:
                keep = keep and obj["state"] == cstate
        if keep:
            found.append(obj["id"])
    return found


def _oracle_placement_feasible(action, objects, zones):
    category, from_zone, to_zone, placement = action
    if to_zone not in zones:
        return False
    if placement[0] == "middle":
        return True
    # inside: some unheld container instance sits in the destination zone
    container = placement[1]
    return any(o["category"] == container and not o["held"]
               and _oracle_inside(zones[to_zone], o["position"])
               for o in objects)


def _oracle_flags(rules, objects, zones, idle, paused):
    if not idle or paused:
        return []
    flagged = []
    for rule_id, conditions, actions in rules:
        if not all(_oracle_condition_true(c, objects, zones)
                   for c in conditions):
            continue
        if all(_oracle_candidates(conditions, a, objects, zones)
               and _oracle_placement_feasible(a, objects, zones)
               for a in actions):
            flagged.append(rule_id)
    return flagged


# ---------------------------------------------------------------------------
# random case generation (plain tuples/dicts so the oracle stays independent)

CATEGORY_STATES = {"alpha": (), "beta": ("raw", "done"),
                   "gamma": ("open", "shut"), "crate": ()}


def _random_case(rng):
    zones = {}
    for i in range(rng.randint(1, 4)):
        zones[f"z{i}"] = (round(rng.uniform(0, 0.8), 2),
                          round(rng.uniform(0, 0.8), 2),
                          round(rng.uniform(0.1, 0.5), 2),
                          round(rng.uniform(0.1, 0.5), 2))
    objects = []
    for i in range(rng.randint(0, 6)):
        category = rng.choice(list(CATEGORY_STATES))
        states = CATEGORY_STATES[category]
        if rng.random() < 0.7:
            # drop most objects inside some zone so flagging actually happens
            zx, zy, zw, zh = rng.choice(list(zones.values()))
            position = (round(zx + rng.random() * zw, 3),
                        round(zy + rng.random() * zh, 3))
        else:
            position = (round(rng.uniform(0, 1.2), 2),
                        round(rng.uniform(0, 1.2), 2))
        objects.append({
            "id": i + 1,
            "category": category,
            "position": position,
            "state": rng.choice(states) if states else None,
            "held": rng.random() < 0.1,
        })
    present = [o["category"] for o in objects if o["category"] != "crate"]
    conditions = []
    for _ in range(rng.randint(1, 3)):
        kind = rng.choice(["is_in", "is_in", "is_not_in", "has_state"])
        if kind == "has_state":
            category = rng.choice(["beta", "gamma"])
            conditions.append(
                (kind, category, None,
                 rng.choice(CATEGORY_STATES[category])))
        else:
            pool = present if present and rng.random() < 0.7 \
                else list(CATEGORY_STATES)
            conditions.append((kind, rng.choice(pool),
                               rng.choice(list(zones)), None))
    if rng.random() < 0.3:
        placement = ("inside", "crate")
    else:
        placement = ("middle",)
    pool = present if present and rng.random() < 0.7 \
        else ["alpha", "beta", "gamma"]
    action = (rng.choice(pool),
              rng.choice(list(zones)), rng.choice(list(zones)), placement)
    idle = rng.random() < 0.9
    paused = rng.random() < 0.05
    return zones, objects, conditions, action, idle, paused


# -- bridge: build engine-side values from the same case data


def _engine_state(objects, zones):
    percepts = tuple(
        PerceivedObject(o["id"], o["category"], o["position"], o["state"],
                        None, o["held"])
        for o in sorted(objects, key=lambda o: o["id"]))
    zone_objs = tuple(Zone(zid, zid, Rect(*rect))
                      for zid, rect in zones.items())
    return PerceivedState(0, percepts, zone_objs)


def _engine_condition(cond):
    kind, category, zone, state = cond
    return Condition(kind, category, zone=zone, state=state)


def _engine_action(action):
    category, from_zone, to_zone, placement = action
    if placement[0] == "middle":
        built = MiddlePlacement()
    else:
        built = InsidePlacement(placement[1])
    return MoveAction(category, from_zone, to_zone, built)


def _engine_program(rules, paused):
    program = Program()
    for rule_id, conditions, actions in rules:
        program.rules[rule_id] = Rule(
            rule_id, tuple(_engine_condition(c) for c in conditions),
            tuple(_engine_action(a) for a in actions))
    program.paused = paused
    return program


def test_engine_matches_oracle_on_random_worlds():
    rng = random.Random(SEED)
    checked = 0
    flagged_cases = 0
    for _ in range(1200):
        zones, objects, conditions, action, idle, paused = _random_case(rng)
        state = _engine_state(objects, zones)
        engine_conditions = tuple(_engine_condition(c) for c in conditions)
        engine_action = _engine_action(action)

        for cond, engine_cond in zip(conditions, engine_conditions):
            assert evaluate_condition(engine_cond, state)[0] == \
                _oracle_condition_true(cond, objects, zones)

        assert candidate_set(engine_conditions, engine_action, state) == \
            _oracle_candidates(conditions, action, objects, zones)

        rules = [("r0", conditions, [action])]
        program = _engine_program(rules, paused)
        flags, _ = flag_executable(program, state, executor_idle=idle)
        assert [f.source_id for f in flags] == \
            _oracle_flags(rules, objects, zones, idle, paused)
        if flags:
            flagged_cases += 1
            expected = _oracle_candidates(conditions, action, objects, zones)
            assert flags[0].bindings[0].object_id == expected[0]
        checked += 1
    assert checked >= 1000
    assert flagged_cases > 50  # the generator must actually exercise flagging


@given(st.data())
def test_adding_a_condition_never_grows_candidates(data):
    rng = random.Random(data.draw(st.integers(0, 2 ** 32)))
    zones, objects, conditions, action, _, _ = _random_case(rng)
    state = _engine_state(objects, zones)
    engine_action = _engine_action(action)
    base = tuple(_engine_condition(c) for c in conditions)
    extra_src = _random_case(rng)[2][0]
    wider = candidate_set(base, engine_action, state)
    narrower = candidate_set(base + (_engine_condition(extra_src),),
                             engine_action, state)
    assert set(narrower) <= set(wider)


# ---------------------------------------------------------------------------
# pinned examples


def _simple_state(objects, zones):
    return PerceivedState(
        0, tuple(objects),
        tuple(Zone(z, z, rect) for z, rect in zones.items()))


def obj(oid, category, pos, state=None, held=False):
    return PerceivedObject(oid, category, pos, state, None, held)


GREEN = Rect(0.0, 0.0, 0.5, 0.5)
YELLOW = Rect(0.6, 0.0, 0.3, 0.3)


def test_state_condition_filters_candidates():
    # only empty holders in the source zone qualify
    state = _simple_state(
        [obj(1, "holder", (0.1, 0.1), "full"),
         obj(2, "holder", (0.2, 0.1), "empty"),
         obj(3, "holder", (0.3, 0.1), "empty")],
        {"a": GREEN, "b": YELLOW})
    conditions = (has_state("holder", "empty"),)
    action = MoveAction("holder", "a", "b", MiddlePlacement())
    assert candidate_set(conditions, action, state) == [2, 3]


def test_lowest_id_bolt_is_chosen():
    state = _simple_state(
        [obj(4, "bolt", (0.2, 0.2)), obj(2, "bolt", (0.1, 0.1)),
         obj(9, "bolt", (0.3, 0.3))],
        {"green": GREEN, "yellow": YELLOW})
    program = Program()
    program.rules["r"] = Rule(
        "r", (is_in("bolt", "green"),),
        (MoveAction("bolt", "green", "yellow", MiddlePlacement()),))
    flags, _ = flag_executable(program, state, executor_idle=True)
    assert len(flags) == 1
    assert flags[0].bindings[0].object_id == 2
    assert flags[0].bindings[0].target_point == (0.75, 0.15)


def test_busy_executor_suppresses_flags():
    state = _simple_state([obj(1, "bolt", (0.1, 0.1))], {"green": GREEN,
                                                         "yellow": YELLOW})
    program = Program()
    program.rules["r"] = Rule(
        "r", (is_in("bolt", "green"),),
        (MoveAction("bolt", "green", "yellow", MiddlePlacement()),))
    assert flag_executable(program, state, executor_idle=False) == ([], [])
    program.paused = True
    assert flag_executable(program, state, executor_idle=True) == ([], [])


def test_full_grid_blocks_flagging():
    # a 1x3 pallet with all three cells taken cannot accept a fourth object
    pallet = Rect(0.6, 0.0, 0.3, 0.3)
    taken = [obj(i + 10, "holder", p, "assembled")
             for i, p in enumerate([(0.75, 0.05), (0.75, 0.15), (0.75, 0.25)])]
    waiting = obj(1, "holder", (0.1, 0.1), "assembled")
    state = _simple_state([waiting] + taken, {"green": GREEN, "blue": pallet})
    program = Program()
    program.rules["r"] = Rule(
        "r", (is_in("holder", "green"),),
        (MoveAction("holder", "green", "blue", GridPlacement(1, 3)),))
    flags, _ = flag_executable(program, state, executor_idle=True)
    assert flags == []
    # free one cell and the rule flags again, binding that exact cell
    state = _simple_state([waiting] + taken[:1] + taken[2:],
                          {"green": GREEN, "blue": pallet})
    flags, _ = flag_executable(program, state, executor_idle=True)
    assert flags[0].bindings[0].target_point == (0.75, 0.15)


def test_inside_placement_picks_lowest_id_container():
    state = _simple_state(
        [obj(1, "top", (0.1, 0.1)),
         obj(7, "box", (0.7, 0.1)), obj(5, "box", (0.65, 0.2))],
        {"red": GREEN, "yellow": YELLOW})
    program = Program()
    program.rules["r"] = Rule(
        "r", (is_in("top", "red"),),
        (MoveAction("top", "red", "yellow", InsidePlacement("box")),))
    flags, _ = flag_executable(program, state, executor_idle=True)
    assert flags[0].bindings[0].container_id == 5


def test_missing_container_blocks_flagging():
    state = _simple_state([obj(1, "top", (0.1, 0.1))],
                          {"red": GREEN, "yellow": YELLOW})
    program = Program()
    program.rules["r"] = Rule(
        "r", (is_in("top", "red"),),
        (MoveAction("top", "red", "yellow", InsidePlacement("box")),))
    flags, _ = flag_executable(program, state, executor_idle=True)
    assert flags == []


def test_dangling_zone_is_false_with_warning():
    state = _simple_state([obj(1, "bolt", (0.1, 0.1))], {"green": GREEN})
    value, warning = evaluate_condition(is_in("bolt", "ghost"), state)
    assert value is False
    assert warning is not None
    value, warning = evaluate_condition(is_not_in("bolt", "ghost"), state)
    assert value is False
    assert warning is not None


def test_multi_action_rule_binds_every_action():
    state = _simple_state(
        [obj(1, "holder", (0.1, 0.1), "empty"), obj(2, "top", (0.2, 0.2))],
        {"src": GREEN, "dst": YELLOW})
    conditions = (is_not_in("holder", "dst"),)
    actions = (MoveAction("top", "src", "src", InsidePlacement("holder")),
               MoveAction("holder", "src", "dst", MiddlePlacement()))
    bound = bind_all(conditions, actions, state)
    assert bound is not None
    assert bound[0].object_id == 2
    assert bound[0].container_id == 1
    assert bound[1].object_id == 1
    assert bound[1].target_point == (0.75, 0.15)


def test_pending_button_flags_like_a_rule():
    state = _simple_state([obj(1, "bolt", (0.1, 0.1))],
                          {"green": GREEN, "yellow": YELLOW})
    program = Program()
    program.buttons["b"] = ManualTrigger(
        "b", "Deliver", (MoveAction("bolt", "green", "yellow",
                                    MiddlePlacement()),), pending=True)
    flags, _ = flag_executable(program, state, executor_idle=True)
    assert [f.source_id for f in flags] == ["b"]
    program.buttons["b"].pending = False
    assert flag_executable(program, state, executor_idle=True) == ([], [])


def test_disabled_rule_never_flags():
    state = _simple_state([obj(1, "bolt", (0.1, 0.1))],
                          {"green": GREEN, "yellow": YELLOW})
    program = Program()
    program.rules["r"] = Rule(
        "r", (is_in("bolt", "green"),),
        (MoveAction("bolt", "green", "yellow", MiddlePlacement()),),
        enabled=False)
    assert flag_executable(program, state, executor_idle=True) == ([], [])


# ---------------------------------------------------------------------------
# conflict disposition


def _two_flags():
    state = _simple_state(
        [obj(1, "bolt", (0.1, 0.1))],
        {"green": GREEN, "yellow": YELLOW, "blue": Rect(0.6, 0.4, 0.3, 0.3)})
    program = Program()
    program.rules["r1"] = Rule(
        "r1", (is_in("bolt", "green"),),
        (MoveAction("bolt", "green", "yellow", MiddlePlacement()),))
    program.rules["r2"] = Rule(
        "r2", (is_in("bolt", "green"),),
        (MoveAction("bolt", "green", "blue", MiddlePlacement()),))
    flags, _ = flag_executable(program, state, executor_idle=True)
    assert len(flags) == 2
    return program, flags


def test_no_flags_is_a_no_op():
    program = Program()
    outcome = detect_conflict([], program.preferences)
    assert outcome == Disposition("none", None, None)


def test_single_flag_dispatches():
    program, flags = _two_flags()
    outcome = detect_conflict(flags[:1], program.preferences)
    assert outcome.kind == "dispatch"
    assert outcome.binding.source_id == "r1"


def test_two_flags_without_memory_raise_conflict():
    program, flags = _two_flags()
    outcome = detect_conflict(flags, program.preferences)
    assert outcome.kind == "conflict"
    assert outcome.candidates == ("r1", "r2")


def test_remembered_choice_dispatches_silently():
    program, flags = _two_flags()
    program.preferences.remember(["r1", "r2"], "r2")
    outcome = detect_conflict(flags, program.preferences)
    assert outcome.kind == "dispatch"
    assert outcome.binding.source_id == "r2"


def test_superset_does_not_reuse_pair_memory():
    program, _ = _two_flags()
    program.rules["r3"] = Rule(
        "r3", (is_in("bolt", "green"),),
        (MoveAction("bolt", "green", "green", MiddlePlacement()),))
    program.preferences.remember(["r1", "r2"], "r2")
    state = _simple_state(
        [obj(1, "bolt", (0.1, 0.1))],
        {"green": GREEN, "yellow": YELLOW, "blue": Rect(0.6, 0.4, 0.3, 0.3)})
    flags, _ = flag_executable(program, state, executor_idle=True)
    assert len(flags) == 3
    outcome = detect_conflict(flags, program.preferences)
    assert outcome.kind == "conflict"
    assert outcome.candidates == ("r1", "r2", "r3")
