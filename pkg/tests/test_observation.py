import random

import pytest
from hypothesis import given, settings, strategies as st

from cegprop.ceg import enumerate_paths
from cegprop.errors import InvalidPathError, ObservationError
from cegprop.observation import (
    CompatibleObservation,
    Incompatible,
    check_compatibility,
    from_edge_sets,
    from_edge_union,
    paths_of,
    vacuous,
)
from cegprop.oracle import random_observation, random_tree
from cegprop.positions import build_transporter_ceg
from cegprop.reference import EXAMPLE2_EDGES

FIG3_PATHS = {
    ("e1", "e4"), ("e1", "e5", "e10"), ("e1", "e5", "e11"),
    ("e2", "e6", "e10"), ("e2", "e6", "e11"), ("e2", "e7", "e14", "e15"),
}


def test_example2_paths(example_ceg, example_obs):
    assert example_obs.union == frozenset(EXAMPLE2_EDGES)
    assert example_obs.per_position["w3"] == frozenset()
    paths = set(paths_of(example_ceg, example_obs))
    assert paths == FIG3_PATHS
    # same set by filtering all 16 paths
    assert paths == {p for p in enumerate_paths(example_ceg)
                     if set(p) <= set(EXAMPLE2_EDGES)}


def test_vacuous_gives_everything(example_ceg):
    obs = vacuous(example_ceg)
    assert obs.is_vacuous(example_ceg)
    assert len(paths_of(example_ceg, obs)) == 16


def test_blocking_root_gives_nothing(example_ceg):
    obs = from_edge_sets(example_ceg, {"w0": []})
    assert paths_of(example_ceg, obs) == []


def test_single_path(example_ceg):
    obs = from_edge_union(example_ceg, ["e1", "e5", "e10"])
    assert paths_of(example_ceg, obs) == [("e1", "e5", "e10")]


def test_wrong_position_rejected(example_ceg):
    with pytest.raises(ObservationError):
        from_edge_sets(example_ceg, {"w1": ["e6"]})
    with pytest.raises(ObservationError):
        from_edge_union(example_ceg, ["e99"])


def test_fig3_paths_compatible(example_ceg):
    found = check_compatibility(example_ceg, FIG3_PATHS)
    assert isinstance(found, CompatibleObservation)
    assert found.union == frozenset(EXAMPLE2_EDGES)


def test_crossed_pair_incompatible(example_ceg):
    found = check_compatibility(example_ceg, [("e1", "e5", "e10"), ("e2", "e6", "e11")])
    assert isinstance(found, Incompatible)
    induced = set(paths_of(example_ceg, found.induced))
    assert induced == {("e1", "e5", "e10"), ("e1", "e5", "e11"),
                       ("e2", "e6", "e10"), ("e2", "e6", "e11")}
    assert found.witness in {("e1", "e5", "e11"), ("e2", "e6", "e10")}


def test_forced_singleton_compatible(example_ceg):
    assert isinstance(check_compatibility(example_ceg, [("e1", "e4")]), CompatibleObservation)


def test_non_path_rejected(example_ceg):
    with pytest.raises(InvalidPathError):
        check_compatibility(example_ceg, [("e1", "e6")])


instances = st.builds(
    lambda seed, m: (build_transporter_ceg(random_tree(seed, max_depth=4, merge_bias=m)), seed),
    st.integers(0, 10**6), st.sampled_from([0.0, 0.6, 0.9]),
)


@settings(max_examples=60, deadline=None)
@given(instances)
def test_round_trip(instance):
    ceg, seed = instance
    obs = random_observation(ceg, seed)
    paths = paths_of(ceg, obs)
    back = check_compatibility(ceg, paths)
    assert isinstance(back, CompatibleObservation)
    used = {eid for p in paths for eid in p}
    assert back.union == used <= obs.union
    assert sorted(paths_of(ceg, back)) == sorted(paths)


@settings(max_examples=60, deadline=None)
@given(instances, st.integers(0, 10**6))
def test_monotone(instance, seed):
    ceg, base_seed = instance
    obs = random_observation(ceg, base_seed)
    rng = random.Random(seed)
    w = rng.choice(ceg.situations)
    extra = {e.id for e in ceg.out_edges[w]}
    bigger = dict(obs.per_position)
    bigger[w] = frozenset(extra)
    assert set(paths_of(ceg, obs)) <= set(paths_of(ceg, CompatibleObservation(bigger)))
