import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from cegprop.ceg import count_paths, enumerate_paths, validate_ceg
from cegprop.errors import InstanceTooLargeError
from cegprop.observation import from_edge_sets, vacuous
from cegprop.oracle import (
    TreeParams,
    bench_report,
    brute_force_condition,
    example1_bench,
    model_selection_bench,
    model_selection_bounds,
    model_selection_ceg,
    model_selection_tree,
    random_bench,
    random_observation,
    random_tree,
    selection_state_count,
    tree_condition,
)
from cegprop.positions import build_transporter_ceg, compute_positions
from cegprop.propagation import propagate
from cegprop.tree import validate_tree


def test_oracle_example(example_ceg, example_obs):
    res = brute_force_condition(example_ceg, example_obs)
    assert res.event_probability == pytest.approx(0.682, abs=1e-12)
    assert not res.zero_probability
    assert math.fsum(res.atom_conditionals.values()) == pytest.approx(1, abs=1e-12)


def test_oracle_vacuous(example_ceg):
    res = brute_force_condition(example_ceg, vacuous(example_ceg))
    for e in example_ceg.edges:
        assert res.edge_conditionals[e.id] == pytest.approx(e.prob, abs=1e-12)


def test_oracle_empty_event(example_ceg):
    res = brute_force_condition(example_ceg, from_edge_sets(example_ceg, {"w0": []}))
    assert res.zero_probability


def test_oracle_cap(example_ceg, example_obs):
    with pytest.raises(InstanceTooLargeError):
        brute_force_condition(example_ceg, example_obs, cap=10)


def test_tree_level_agrees(example_tree, example_ceg, example_obs):
    r = propagate(example_ceg, example_obs)
    cond = tree_condition(example_tree, example_ceg, example_obs)
    for tree_edge, value in cond.items():
        if value is not None:
            assert r.pi_hat[example_ceg.tree_edges[tree_edge]] == pytest.approx(value, abs=1e-12)
    # v4_3 lies under the excluded e3 and carries no mass
    assert cond["e10_3"] is None


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([0.0, 0.5, 0.9]))
def test_tree_level_random(seed, bias):
    tree = random_tree(seed, max_depth=4, merge_bias=bias)
    ceg = build_transporter_ceg(tree)
    obs = random_observation(ceg, seed)
    r = propagate(ceg, obs)
    for tree_edge, value in tree_condition(tree, ceg, obs).items():
        if value is not None:
            assert abs(r.pi_hat[ceg.tree_edges[tree_edge]] - value) <= 1e-9


def test_random_tree_deterministic():
    assert random_tree(7, merge_bias=0.5) == random_tree(7, merge_bias=0.5)
    assert random_tree(7) != random_tree(8)


@pytest.mark.parametrize("seed", range(10))
def test_no_bias_all_singletons(seed):
    tree = random_tree(seed, merge_bias=0.0)
    assert validate_tree(tree) == []
    assert all(len(b) == 1 for b in compute_positions(tree).blocks)


def test_params_checked():
    with pytest.raises(ValueError):
        random_tree(0, max_branch=1)
    with pytest.raises(ValueError):
        TreeParams(merge_bias=2).check()


def test_random_observation_positive():
    ceg = build_transporter_ceg(random_tree(3, merge_bias=0.5))
    obs = random_observation(ceg, 3)
    assert brute_force_condition(ceg, obs).event_probability > 0
    assert random_observation(ceg, 3) == obs


@pytest.mark.parametrize("n, m, edges, positions", [(3, 1, 7, 5), (5, 6, 66, 32)])
def test_model_selection_bounds_formula(n, m, edges, positions):
    assert selection_state_count(n) == m
    assert model_selection_bounds(n) == (edges, positions)


@pytest.mark.parametrize("n", [3, 4])
def test_model_selection_path_count(n):
    ceg = model_selection_ceg(n)
    assert validate_ceg(ceg) == []
    paths = enumerate_paths(ceg)
    assert len(paths) == selection_state_count(n) * 2 ** (n - 1)
    assert len(model_selection_tree(n).leaves) == len(paths)


def test_model_selection_small_n_is_exactly_at_bound():
    for n in (3, 4):
        ceg = model_selection_ceg(n)
        assert (len(ceg.edges), len(ceg.positions)) == model_selection_bounds(n)


def test_model_selection_rejects_small_n():
    with pytest.raises(ValueError):
        model_selection_ceg(2)


def test_example_bench():
    rep = example1_bench()
    assert rep.edge_cells == 16
    assert rep.storage_cells == 7 + 16
    assert (rep.backward_edge_ops, rep.forward_edge_ops) == (16, 10)
    assert rep.reported["bn_storage_cells"] == 27
    assert "reported, not recomputed" in rep.to_text()


def test_bench_vacuous(example_ceg):
    rep = bench_report(example_ceg, vacuous(example_ceg))
    assert rep.forward_edge_ops == len(example_ceg.edges)


def test_model_selection_bench_passes():
    rep = model_selection_bench(5)
    assert rep.checks and all(rep.checks.values())


def test_random_bench_deterministic():
    a = random_bench(11).to_json(include_time=False)
    b = random_bench(11).to_json(include_time=False)
    assert a == b
    assert json.loads(a)["name"] == "random-11"


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([0.0, 0.5, 0.9]))
def test_oracle_self_consistent(seed, bias):
    ceg = build_transporter_ceg(random_tree(seed, max_depth=5, merge_bias=bias, leaf_prob=0.15))
    res = brute_force_condition(ceg, random_observation(ceg, seed))
    assert abs(math.fsum(res.atom_conditionals.values()) - 1) <= 1e-12
    values = [*res.atom_conditionals.values(), *res.edge_conditionals.values(),
              *res.downstream_conditionals.values()]
    assert all(0 <= v <= 1 + 1e-15 for v in values)
    assert res.downstream_mass[ceg.root] == pytest.approx(res.event_probability, abs=1e-12)


def test_phi_off_event_is_downstream(example_ceg):
    # exclude e1 only: w1 keeps emphasis but the event never passes it
    from cegprop.observation import from_edge_union

    obs = from_edge_union(example_ceg, [e.id for e in example_ceg.edges if e.id != "e1"])
    r = propagate(example_ceg, obs)
    res = brute_force_condition(example_ceg, obs)
    assert not res.reached["w1"] and r.phi["w1"] == pytest.approx(1.0)
    for w in example_ceg.positions:
        assert r.phi[w] == pytest.approx(res.downstream_mass[w], abs=1e-12)
    for e in example_ceg.edges:
        assert r.pi_hat[e.id] == pytest.approx(res.downstream_conditionals[e.id], abs=1e-12)
