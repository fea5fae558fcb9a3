import copy

import pytest

from chanopt.scenarios import REGISTRY, ConfigError, get, list_scenarios, run_scenario

NAMES = {
    "weak-counterexample",
    "setwise-counterexample",
    "quantizer-setwise-limit",
    "tv-continuity-sweep",
    "decomposition",
    "interval-quantizer",
    "multistage-uniform-tv",
    "estimation-consistency",
    "best-worst-channel",
}

# small settings so the whole registry runs in a couple of seconds
FAST = {
    "quantizer-setwise-limit": {"exhaust_size": 8, "random_pairs": 50},
    "tv-continuity-sweep": {"draws": 50},
    "interval-quantizer": {"grid_size": 64, "u_size": 129, "instances": 5, "max_size": 24},
    "multistage-uniform-tv": {"t1_instances": 5},
    "estimation-consistency": {"sizes": [100, 1000]},
}


def bump(rows, key, delta, where=lambda r: True):
    for r in rows:
        if where(r):
            r[key] = r[key] + delta
    return rows


# one deliberate corruption per scenario; each must turn at least one check red
CORRUPT = {
    "weak-counterexample": lambda rows: bump(rows, "J_n", 0.3),
    "setwise-counterexample": lambda rows: bump(rows, "J_limit", 1e-6),
    "quantizer-setwise-limit": lambda rows: bump(rows, "dyadic_gap", 0.01, lambda r: r is rows[-1]),
    "tv-continuity-sweep": lambda rows: bump(rows, "lhs", 10.0, lambda r: r is rows[0]),
    "decomposition": lambda rows: bump(rows, "sup_error", 1.0),
    "interval-quantizer": lambda rows: bump(rows, "dp_cost", 1e-15, lambda r: r is rows[1]),
    "multistage-uniform-tv": lambda rows: bump(rows, "gap", 10.0, lambda r: r is rows[-1]),
    "estimation-consistency": lambda rows: bump(rows, "cost_gap", 1.0, lambda r: r is rows[-1]),
    "best-worst-channel": lambda rows: bump(rows, "cost", -1.0, lambda r: r["label"] == "uninformative"),
}


@pytest.fixture(scope="module")
def results():
    return {name: run_scenario(name, FAST.get(name)) for name in sorted(NAMES)}


def test_registry_names():
    assert set(REGISTRY) == NAMES
    assert set(CORRUPT) == NAMES


def test_list_sorted_and_anchored():
    entries = list_scenarios()
    assert [e["name"] for e in entries] == sorted(NAMES)
    assert all(e["anchor"] and e["description"] for e in entries)
    assert entries == list_scenarios()


@pytest.mark.parametrize("name", sorted(NAMES))
def test_default_fast_run_passes(results, name):
    res = results[name]
    assert res.checks, "scenario must declare checks"
    assert res.passed, res.checks
    assert res.passed == all(res.checks.values())
    assert all(tuple(r) == res.columns for r in res.rows)


@pytest.mark.parametrize("name", sorted(NAMES))
def test_corruption_is_caught(results, name):
    res = results[name]
    rows = CORRUPT[name](copy.deepcopy(res.rows))
    checks = get(name).evaluate(rows, res.metrics, res.params)
    assert not all(checks.values()), f"{name} passed a corrupted table"


def test_corrupted_metrics_caught(results):
    res = results["multistage-uniform-tv"]
    metrics = dict(res.metrics, t1_max_abs_diff=1e-6)
    assert not get("multistage-uniform-tv").evaluate(res.rows, metrics, res.params)["single_stage_consistency"]
    res = results["quantizer-setwise-limit"]
    metrics = dict(res.metrics, min_deterministic_gap=0.2)
    assert not get("quantizer-setwise-limit").evaluate(res.rows, metrics, res.params)[
        "deterministic_quantizers_bounded_away"
    ]


def test_unknown_param():
    with pytest.raises(ConfigError):
        run_scenario("decomposition", {"nope": 1})


def test_bad_param_type():
    with pytest.raises(ConfigError):
        run_scenario("decomposition", {"M": "four"})
    with pytest.raises(ConfigError):
        run_scenario("decomposition", {"n_values": []})


def test_unknown_scenario():
    with pytest.raises(ConfigError):
        run_scenario("nope")


def test_n_values_string_accepted():
    res = run_scenario("weak-counterexample", {"n_values": "2,8"})
    assert [r["n"] for r in res.rows] == [2, 8]


def test_setwise_unbalanced_levels_fail():
    # with 2^r not dividing n the dyadic family still sees the wave, so the check must fail
    res = run_scenario("setwise-counterexample", {"n_values": [4], "K": 32, "dyadic_levels": 3})
    assert res.rows[0]["setwise"] > 0
    assert not res.checks["setwise_vanishes_on_dyadic_sets"]
