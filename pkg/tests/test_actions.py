"""Group actions: round-trips, balls, boundaries, coset duality."""

import pytest

from coverlab import (
    BudgetExceededError,
    InputError,
    all_subgroups,
    boundary,
    coset_duality_check,
    finite_permutation_action,
    free_group_action,
    free_quotient_lattice_action,
    generate_group,
    lattice_action,
    orbit_ball,
    word_action,
)
from coverlab.actions import MAX_GROUP_ORDER, permutation_compose, permutation_inverse

S3_GENS = [(1, 0, 2), (1, 2, 0)]
S4_GENS = [(1, 0, 2, 3), (1, 2, 3, 0)]


def test_generator_listing_order():
    act = lattice_action(2)
    assert act.generators() == (1, 2, -1, -2)
    with pytest.raises(InputError):
        act.check_generator(3)
    with pytest.raises(InputError):
        act.check_generator(0)


def test_lattice_round_trips():
    act = lattice_action(3)
    p = (4, -7, 2)
    for g in act.generators():
        assert act.apply(-g, act.apply(g, p)) == p
    assert act.decode(act.encode(p)) == p
    assert act.apply_word((1, 2, -1), p) == (4, -6, 2)


def test_free_group_reduction():
    act = free_group_action(2)
    # leftmost letter acts last: word (1, 2) maps w to g1 g2 w
    w = act.apply_word((1, 2), act.origin)
    assert w == (1, 2)
    assert act.apply(-1, w) == (2,)
    assert act.apply_word(act.inverse_word((1, 2)), w) == act.origin
    # cancellation happens at the prepend site
    assert act.apply(1, (-1, 2)) == (2,)


def test_permutation_action_and_helpers():
    act = finite_permutation_action(S3_GENS, 3)
    assert act.apply(1, 0) == 1
    assert act.apply(-1, act.apply(1, 2)) == 2
    p, q = (1, 2, 0), (1, 0, 2)
    comp = permutation_compose(p, q)
    assert comp == tuple(p[q[i]] for i in range(3))
    assert permutation_compose(p, permutation_inverse(p)) == (0, 1, 2)


def test_quotient_lattice_action_zero_vector():
    act = free_quotient_lattice_action([(1,), (0,)])
    assert act.generator_count == 2
    assert act.apply(1, (5,)) == (6,)
    assert act.apply(2, (5,)) == (5,)
    assert act.translation_vectors == ((1,), (0,))


def test_word_action_composes_words():
    base = lattice_action(1)
    act = word_action(base, [(1, 1), (-1,)])
    assert act.apply(1, (0,)) == (2,)
    assert act.apply(2, (0,)) == (-1,)
    assert act.apply(-1, (2,)) == (0,)


def test_orbit_ball_sizes():
    assert len(orbit_ball(lattice_action(1), (0,), 5).points) == 11
    # diamond in Z^2: 2r^2 + 2r + 1
    assert len(orbit_ball(lattice_action(2), (0, 0), 3).points) == 25
    # 4-regular tree: 1 + 2 (3^r - 1)
    assert len(orbit_ball(free_group_action(2), (), 3).points) == 53


def test_orbit_ball_budget():
    with pytest.raises(BudgetExceededError) as err:
        orbit_ball(lattice_action(2), (0, 0), 50, max_points=30)
    assert err.value.partial_count > 30


def test_orbit_ball_edges_are_sorted_and_within():
    ball = orbit_ball(lattice_action(1), (0,), 2)
    inside = set(ball.points)
    for x, g, y in ball.edges:
        assert x in inside and y in inside and g > 0
    for x, g, y in ball.exterior_edges:
        assert x in inside and y not in inside


def test_boundary_of_interval():
    act = lattice_action(1)
    members = [(i,) for i in range(10)]
    assert boundary(act, members) == frozenset({(0,), (9,)})
    with pytest.raises(InputError):
        boundary(act, [])


def test_generate_group_s3_and_budget():
    group = generate_group(S3_GENS)
    assert len(group) == 6
    with pytest.raises(BudgetExceededError):
        generate_group([tuple((i + 1) % 40 for i in range(40))], max_order=10)


def test_coset_duality_s3_transposition():
    report = coset_duality_check(S3_GENS, [(1, 0, 2)])
    assert report.group_order == 6
    assert report.subgroup_order == 2
    assert report.left_coset_count == 3
    assert report.right_coset_count == 3
    assert report.bijective and report.equivariant and report.ok


def test_all_subgroups_counts():
    assert len(all_subgroups(S3_GENS)) == 6
    assert len(all_subgroups(S4_GENS)) == 30


def test_all_subgroups_duality_smoke():
    for sub in all_subgroups(S3_GENS):
        report = coset_duality_check(S3_GENS, sorted(sub))
        assert report.ok
