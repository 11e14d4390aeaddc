"""Workspace model: geometry, perception filtering, and manipulations."""

import pytest
from hypothesis import given, strategies as st

from workcell.world import (CategorySpec, CombinationRule, PerceptionConfig,
                            Rect, World, Zone, grid_cells, next_free_cell,
                            objects_in_zone)


def make_world(**kwargs):
    categories = [
        CategorySpec("bolt", color="silver"),
        CategorySpec("holder", color="blue", is_container=True,
                     states=("empty", "full", "assembled")),
        CategorySpec("top", color="red"),
        CategorySpec("kit-box", color="brown", detectable=False,
                     is_container=True),
    ]
    combinations = [
        CombinationRule("top", "holder", "empty", "full", "attached"),
        CombinationRule("bolt", "holder", "full", "assembled", "absorbed"),
    ]
    return World(categories, combinations, **kwargs)


# ---------------------------------------------------------------------------
# geometry


def test_rect_contains_center():
    assert Rect(0, 0, 0.3, 0.3).contains((0.15, 0.15))


def test_rect_contains_boundary_closed():
    assert Rect(0, 0, 0.3, 0.3).contains((0.3, 0.3))
    assert Rect(0, 0, 0.3, 0.3).contains((0.0, 0.0))


def test_rect_excludes_outside():
    assert not Rect(0, 0, 0.3, 0.3).contains((0.31, 0.15))


def test_grid_1x3_centers():
    cells = grid_cells(Rect(0, 0, 0.3, 0.3), columns=1, rows=3)
    assert cells == [(0.15, 0.05), (0.15, 0.15), (0.15, 0.25)]


def test_grid_1x1_is_center():
    assert grid_cells(Rect(0, 0, 0.3, 0.3), 1, 1) == [(0.15, 0.15)]


def test_grid_2x2_row_major():
    cells = grid_cells(Rect(0, 0, 0.4, 0.2), columns=2, rows=2)
    assert cells == [(0.1, 0.05), (0.3, 0.05), (0.1, 0.15), (0.3, 0.15)]


def test_grid_rejects_zero():
    with pytest.raises(ValueError):
        grid_cells(Rect(0, 0, 1, 1), 0, 3)


@given(st.integers(1, 5), st.integers(1, 5),
       st.floats(-2, 2), st.floats(-2, 2),
       st.floats(0.1, 3), st.floats(0.1, 3))
def test_grid_cells_distinct_and_inside(cols, rows, x, y, w, h):
    rect = Rect(x, y, w, h)
    cells = grid_cells(rect, cols, rows)
    assert len(cells) == cols * rows
    assert len(set(cells)) == cols * rows
    for cell in cells:
        assert rect.contains(cell)


def test_next_free_cell_empty_zone():
    rect = Rect(0, 0, 0.3, 0.3)
    assert next_free_cell(rect, 1, 3, []) == (0.15, 0.05)


def test_next_free_cell_skips_occupied():
    # objects sit on the first two 1x3 cells; hand enumeration gives cell 3
    rect = Rect(0, 0, 0.3, 0.3)
    taken = [(0.15, 0.05), (0.15, 0.15)]
    assert next_free_cell(rect, 1, 3, taken) == (0.15, 0.25)


def test_next_free_cell_exhausted():
    rect = Rect(0, 0, 0.3, 0.3)
    taken = [(0.15, 0.05), (0.15, 0.15), (0.15, 0.25)]
    assert next_free_cell(rect, 1, 3, taken) is None


def test_next_free_cell_ignores_far_objects():
    rect = Rect(0, 0, 0.3, 0.3)
    assert next_free_cell(rect, 1, 3, [(0.9, 0.9)]) == (0.15, 0.05)


# ---------------------------------------------------------------------------
# spawning and ids


def test_spawn_assigns_sequential_ids():
    world = make_world()
    a = world.spawn("bolt", (0.1, 0.1))
    b = world.spawn("top", (0.2, 0.1))
    assert (a.id, b.id) == (1, 2)


def test_spawn_default_state_is_first_declared():
    world = make_world()
    holder = world.spawn("holder", (0.1, 0.1))
    assert holder.state == "empty"


def test_spawn_unknown_category():
    with pytest.raises(KeyError):
        make_world().spawn("wrench", (0, 0))


def test_spawn_unknown_state():
    with pytest.raises(ValueError):
        make_world().spawn("holder", (0, 0), state="welded")


# ---------------------------------------------------------------------------
# perception


def test_perceived_view_filters_undetectable():
    world = make_world()
    world.spawn("bolt", (0.1, 0.1))
    world.spawn("kit-box", (0.5, 0.5))
    view = world.perceived_view(7, [])
    assert [o.category for o in view.objects] == ["bolt"]
    assert view.tick == 7


def test_perceived_view_ordered_by_id():
    world = make_world()
    for i in range(5):
        world.spawn("bolt", (0.1 * i, 0.1))
    view = world.perceived_view(0, [])
    assert [o.id for o in view.objects] == [1, 2, 3, 4, 5]


def test_perceived_view_pure():
    world = make_world()
    world.spawn("bolt", (0.1, 0.1))
    zones = [Zone("green", "green", Rect(0, 0, 1, 1))]
    assert world.perceived_view(3, zones) == world.perceived_view(3, zones)


def test_contained_object_reports_container_position():
    world = make_world()
    holder = world.spawn("holder", (0.4, 0.4))
    top = world.spawn("top", (0.1, 0.1))
    world.place_inside(top.id, holder.id)
    view = world.perceived_view(0, [])
    seen = {o.id: o for o in view.objects}
    assert seen[top.id].position == (0.4, 0.4)
    assert seen[top.id].contained_in == holder.id


def test_containment_ref_hidden_when_container_undetectable():
    world = make_world()
    box = world.spawn("kit-box", (0.5, 0.5))
    bolt = world.spawn("bolt", (0.1, 0.1))
    world.place_inside(bolt.id, box.id)
    view = world.perceived_view(0, [])
    seen = {o.id: o for o in view.objects}
    assert seen[bolt.id].contained_in is None
    assert seen[bolt.id].position == (0.5, 0.5)


def test_zone_membership_excludes_held():
    world = make_world()
    bolt = world.spawn("bolt", (0.1, 0.1))
    zones = [Zone("green", "green", Rect(0, 0, 1, 1))]
    world.pick_up(bolt.id)
    view = world.perceived_view(0, zones)
    assert objects_in_zone(view, "green") == []
    assert view.objects[0].held


# ---------------------------------------------------------------------------
# combinations


def test_stack_top_on_empty_holder():
    world = make_world()
    holder = world.spawn("holder", (0.3, 0.3))
    top = world.spawn("top", (0.1, 0.1))
    rule = world.combine(top.id, holder.id)
    assert rule.part_fate == "attached"
    assert world.get(holder.id).state == "full"
    assert world.get(top.id).contained_in == holder.id


def test_bolt_into_full_holder_absorbed():
    world = make_world()
    holder = world.spawn("holder", (0.3, 0.3), state="full")
    bolt = world.spawn("bolt", (0.1, 0.1))
    world.combine(bolt.id, holder.id)
    assert world.get(holder.id).state == "assembled"
    assert bolt.id not in world.objects


def test_bolt_into_empty_holder_rejected():
    world = make_world()
    holder = world.spawn("holder", (0.3, 0.3))
    bolt = world.spawn("bolt", (0.1, 0.1))
    with pytest.raises(ValueError):
        world.combine(bolt.id, holder.id)
    assert bolt.id in world.objects
    assert world.get(holder.id).state == "empty"


def test_combine_touches_only_the_pair():
    world = make_world()
    holder = world.spawn("holder", (0.3, 0.3))
    other = world.spawn("holder", (0.6, 0.3))
    top = world.spawn("top", (0.1, 0.1))
    bystander = world.spawn("bolt", (0.9, 0.9))
    world.combine(top.id, holder.id)
    assert world.get(other.id).state == "empty"
    assert world.get(bystander.id).position == (0.9, 0.9)


def test_place_inside_without_combination_is_plain_containment():
    world = make_world()
    box = world.spawn("kit-box", (0.5, 0.5))
    bolt = world.spawn("bolt", (0.1, 0.1))
    assert world.place_inside(bolt.id, box.id) is None
    assert world.get(bolt.id).contained_in == box.id


def test_place_inside_non_container_rejected():
    world = make_world()
    a = world.spawn("bolt", (0.1, 0.1))
    b = world.spawn("bolt", (0.2, 0.1))
    with pytest.raises(ValueError):
        world.place_inside(a.id, b.id)


# ---------------------------------------------------------------------------
# relocation and containment trees


def test_relocate_moves_contents_along():
    world = make_world()
    holder = world.spawn("holder", (0.3, 0.3))
    top = world.spawn("top", (0.1, 0.1))
    world.combine(top.id, holder.id)
    world.relocate(holder.id, (0.8, 0.2))
    assert world.get(top.id).position == (0.8, 0.2)
    assert world.effective_position(top.id) == (0.8, 0.2)


def test_relocate_pulls_object_out_of_container():
    world = make_world()
    box = world.spawn("kit-box", (0.5, 0.5))
    bolt = world.spawn("bolt", (0.1, 0.1))
    world.place_inside(bolt.id, box.id)
    world.relocate(bolt.id, (0.2, 0.2))
    assert world.get(bolt.id).contained_in is None
    assert world.get(bolt.id).position == (0.2, 0.2)


def test_remove_takes_contents_too():
    world = make_world()
    box = world.spawn("kit-box", (0.5, 0.5))
    bolt = world.spawn("bolt", (0.1, 0.1))
    world.place_inside(bolt.id, box.id)
    world.remove(box.id)
    assert world.objects == {}


def test_pick_up_detaches_from_container():
    world = make_world()
    box = world.spawn("kit-box", (0.5, 0.5))
    bolt = world.spawn("bolt", (0.1, 0.1))
    world.place_inside(bolt.id, box.id)
    world.pick_up(bolt.id)
    assert world.get(bolt.id).contained_in is None
    assert world.get(bolt.id).held


def test_containment_stays_acyclic():
    world = make_world()
    a = world.spawn("holder", (0.1, 0.1))
    b = world.spawn("holder", (0.2, 0.2))
    world.place_inside(a.id, b.id)
    with pytest.raises(ValueError):
        world.place_inside(b.id, b.id)
    # a walk from every object terminates
    for obj in world.objects.values():
        seen = set()
        cursor = obj
        while cursor.contained_in is not None:
            assert cursor.id not in seen
            seen.add(cursor.id)
            cursor = world.get(cursor.contained_in)


def test_free_grid_cell_sees_only_detectable_top_level():
    world = make_world(perception=PerceptionConfig(("bolt", "holder", "top")))
    rect = Rect(0, 0, 0.3, 0.3)
    world.spawn("kit-box", (0.15, 0.05))     # undetectable, does not block
    holder = world.spawn("holder", (0.15, 0.15))
    top = world.spawn("top", (0.1, 0.1))
    world.combine(top.id, holder.id)         # contained, does not block twice
    assert world.free_grid_cell(rect, 1, 3) == (0.15, 0.05)
    world.spawn("bolt", (0.15, 0.05))
    assert world.free_grid_cell(rect, 1, 3) == (0.15, 0.25)
