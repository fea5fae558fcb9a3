"""Named, parameterised experiments.

Every scenario is split into ``execute`` (numerics, returns rows and scalar
metrics) and ``evaluate`` (recomputes each pass/fail check from those rows and
metrics alone). Keeping the checks a function of the emitted data means a
corrupted table fails its checks, which the test suite exercises directly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from math import isclose
from typing import Any, Callable

import numpy as np

from . import constructions as cx
from .channels import Channel, ChannelSequence, convergence_report, join, majorization_check, mixture
from .control import (
    CostSpec,
    best_worst_channel,
    continuity_bound_check,
    evaluate_policy,
    make_action_grid,
    optimal_cost,
    optimal_policy,
)
from .estimation import consistency_curve, empirical_joint, lipschitz_uniform_gap, make_rng, sample_pairs
from .measures import DiscreteMeasure, Grid, TestSetFamily, dyadic_family
from .multistage import ControlledKernel, MultistageModel, solve_exhaustive, uniform_tv_continuity_experiment
from .oracles import enumerate_interval_cost, enumerate_quantizer_cost
from .quantizers import (
    Quantizer,
    RandomQuantizer,
    as_channel,
    cellwise_setwise_gap,
    decompose_random_quantizer,
    optimize_interval_quantizer,
    recombine,
    setwise_to_tv_bound,
)

COLUMNS_VERSION = 1
EXACT = 1e-12


class ConfigError(ValueError):
    pass


def _int(v):
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)) and not (isinstance(v, float) and v.is_integer()):
        raise ConfigError(f"expected an integer, got {v!r}")
    return int(v)


def _float(v):
    if isinstance(v, bool) or not isinstance(v, (int, float, np.integer, np.floating)):
        raise ConfigError(f"expected a number, got {v!r}")
    return float(v)


def _int_list(v):
    if isinstance(v, str):
        v = [s for s in v.split(",") if s.strip()]
        try:
            v = [int(s) for s in v]
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if not isinstance(v, (list, tuple)) or not v:
        raise ConfigError(f"expected a non-empty list of integers, got {v!r}")
    return [_int(x) for x in v]


KINDS = {"int": _int, "float": _float, "int_list": _int_list}


@dataclass(frozen=True)
class Param:
    default: Any
    kind: str
    help: str = ""


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    description: str
    anchor: str
    columns: tuple
    params: dict
    execute: Callable
    evaluate: Callable
    required: tuple = ()

    def resolve(self, given: dict | None) -> dict:
        given = dict(given or {})
        unknown = sorted(set(given) - set(self.params))
        if unknown:
            raise ConfigError(f"{self.name}: unknown parameter(s) {', '.join(unknown)}")
        missing = [k for k in self.required if k not in given]
        if missing:
            raise ConfigError(f"{self.name}: missing required parameter(s) {', '.join(missing)}")
        out = {}
        for key, p in self.params.items():
            raw = given.get(key, p.default)
            try:
                out[key] = KINDS[p.kind](raw)
            except ConfigError as exc:
                raise ConfigError(f"{self.name}.{key}: {exc}") from None
        return out


@dataclass
class ScenarioResult:
    scenario: str
    params: dict
    columns: tuple
    rows: list
    checks: dict
    metrics: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def summary(self, with_time: bool = True) -> dict:
        out = {"pass": self.passed, "checks": dict(self.checks), "metrics": dict(self.metrics)}
        if with_time:
            out["wall_time"] = self.wall_time
        return out


def _nonincreasing(values, slack=EXACT) -> bool:
    return all(b <= a + slack for a, b in zip(values, values[1:]))


def _random_instance(rng, nx, ny, nu):
    xg, yg, ug = Grid.atoms(range(nx)), Grid.atoms(range(ny)), Grid.atoms(range(nu))
    P = DiscreteMeasure(xg, _simplex(rng, nx))
    Q = Channel(xg, yg, np.vstack([_simplex(rng, ny) for _ in range(nx)]))
    cost = CostSpec(xg, ug, rng.uniform(0.0, 1.0, size=(nx, nu)))
    return P, Q, cost


def _simplex(rng, k):
    w = rng.dirichlet(np.ones(k))
    return w / w.sum()


# ---------------------------------------------------------------- weak counterexample


def _weak_execute(p):
    sc = cx.weak_counterexample(p["a"], p["b"], p["n_values"])
    j_lim = optimal_cost(sc.P, sc.limit, sc.cost)
    report = convergence_report(sc.P, sc.seq, sc.limit, sorted(set(p["n_values"])))
    rows = [
        {"n": r.n, "J_n": optimal_cost(sc.P, sc.seq(r.n), sc.cost), "J_limit": j_lim,
         "tv": r.tv, "setwise": r.setwise, "weak": r.weak, "uniform": r.uniform}
        for r in report
    ]
    return rows, {}


def _weak_evaluate(rows, metrics, p):
    a, b = p["a"], p["b"]
    tail = [r for r in rows if r["n"] >= 1.0 / (b - a)]
    j_lim = rows[0]["J_limit"]
    limsup = max(r["J_n"] for r in tail) if tail else float("nan")
    return {
        "J_n_zero": bool(tail) and all(abs(r["J_n"]) <= EXACT for r in tail),
        "J_limit_exact": all(abs(r["J_limit"] - (b - a) ** 2 / 4) <= EXACT for r in rows),
        "tv_stays_one": all(abs(r["tv"] - 1.0) <= EXACT for r in tail),
        "weak_matches_rate": all(abs(r["weak"] - 0.5 * min(2.0, 1.0 / r["n"])) <= 1e-9 for r in rows),
        "weak_decreasing": _nonincreasing([r["weak"] for r in rows]) and rows[-1]["weak"] < rows[0]["weak"],
        "usc_inequality": limsup <= j_lim + EXACT,
        "discontinuity": j_lim - limsup > 1e-9,
    }


# ------------------------------------------------------------- setwise counterexample


def _setwise_execute(p):
    K, r = p["K"], p["dyadic_levels"]
    sc = cx.setwise_counterexample(K)
    j_lim = optimal_cost(sc.P, sc.limit, sc.cost)
    n_values = sorted(set(p["n_values"]))
    yfam = dyadic_family(sc.limit.y_grid, r)
    report = convergence_report(sc.P, sc.seq, sc.limit, n_values, y_family=yfam)
    half = sc.cost.u_grid.index_of(0.5)
    rows = []
    for rep in report:
        qn = sc.seq(rep.n)
        opt = optimal_policy(sc.P, qn, sc.cost)
        chk = continuity_bound_check(sc.P, qn, sc.limit, sc.cost)
        left = cx.left_cells(K, rep.n)
        u = sc.cost.u_grid.coords
        rows.append({
            "n": rep.n, "J_n": opt.cost, "J_limit": j_lim,
            "J_policy_half": evaluate_policy(sc.P, qn, sc.cost, np.full(K, half)),
            "policy_left": float(u[opt.policy[left]].max()), "policy_right": float(u[opt.policy[~left]].max()),
            "tv": rep.tv, "setwise": rep.setwise, "weak": rep.weak, "uniform": rep.uniform,
            "bound_lhs": chk.lhs, "bound_rhs": chk.rhs,
        })
    return rows, {"sup_norm": sc.cost.sup_norm}


def _setwise_evaluate(rows, metrics, p):
    r = p["dyadic_levels"]
    balanced = [row for row in rows if row["n"] % (2**r) == 0]
    return {
        "J_n_one_sixth": all(abs(row["J_n"] - 1 / 6) <= EXACT for row in rows),
        "J_limit_one_quarter": all(abs(row["J_limit"] - 0.25) <= EXACT for row in rows),
        "policy_two_thirds_and_zero": all(
            abs(row["policy_left"] - 2 / 3) <= EXACT and row["policy_right"] == 0.0 for row in rows
        ),
        "half_policy_one_quarter": all(abs(row["J_policy_half"] - 0.25) <= EXACT for row in rows),
        "tv_stays_half": all(abs(row["tv"] - 0.5) <= EXACT for row in rows),
        "setwise_vanishes_on_dyadic_sets": bool(balanced) and all(row["setwise"] <= EXACT for row in balanced),
        "mode_ordering": all(row["setwise"] <= row["tv"] / 2 + EXACT and row["weak"] <= row["tv"] + EXACT for row in rows),
        "usc_inequality": max(row["J_n"] for row in rows) <= rows[0]["J_limit"] + EXACT,
        "discontinuity": rows[0]["J_limit"] - max(row["J_n"] for row in rows) > 1e-9,
        "tv_bound_holds": all(row["bound_lhs"] <= row["bound_rhs"] + 1e-9 for row in rows),
    }


# ------------------------------------------------------- quantizer non-closedness


def _qlimit_execute(p):
    N, r = p["grid_size"], p["dyadic_levels"]
    P, limit, seq = cx.alternating_quantizer_sequence(N)
    lim_ch = limit.as_channel()
    xfam = dyadic_family(P.grid, r)
    report = convergence_report(P, seq, lim_ch, sorted(set(p["n_values"])), x_family=xfam, weak=False)
    nu = P.weights[:, None] * np.ones((1, 2))
    rows = []
    for rep in report:
        qn = seq(rep.n)
        rows.append({
            "n": rep.n, "dyadic_gap": rep.setwise, "all_sets_gap": cellwise_setwise_gap(P, qn, lim_ch),
            "tv": rep.tv, "majorized": majorization_check(P, qn, nu),
        })
    # every deterministic 2-cell quantizer of a small grid stays away from the limit
    E = p["exhaust_size"]
    Pe = DiscreteMeasure.uniform(Grid.uniform(E))
    lim_e = RandomQuantizer(Pe.grid, np.full((E, 2), 0.5)).as_channel()
    worst_case = min(
        cellwise_setwise_gap(Pe, as_channel(Quantizer(Pe.grid, [(m >> i) & 1 for i in range(E)], 2)), lim_e)
        for m in range(2**E)
    )
    # on the full grid the prior is uniform, so the gap of a deterministic quantizer depends
    # only on how many points it puts in cell 0; one representative per count covers all 2^N
    assert np.all(P.weights == P.weights[0])
    full_grid = min(
        cellwise_setwise_gap(P, as_channel(Quantizer(P.grid, (np.arange(N) >= k).astype(int), 2)), lim_ch)
        for k in range(N + 1)
    )
    # symmetric-difference bound on random quantizer pairs
    rng = make_rng(p["seed"])
    violations, draws, max_ratio = 0, p["random_pairs"], 0.0
    for _ in range(draws):
        nx = int(rng.integers(2, 17))
        M = int(rng.integers(2, 6))
        g = Grid.atoms(range(nx))
        Pr = DiscreteMeasure(g, _simplex(rng, nx))
        b = setwise_to_tv_bound(Pr, Quantizer(g, rng.integers(0, M, nx), M), Quantizer(g, rng.integers(0, M, nx), M))
        violations += not b.holds
        if b.cell_sym_diff_sum > 0:
            max_ratio = max(max_ratio, b.tv / b.cell_sym_diff_sum)
    return rows, {"min_deterministic_gap": worst_case, "min_deterministic_gap_full_grid": full_grid,
                  "symdiff_violations": violations,
                  "symdiff_draws": draws, "symdiff_max_ratio": max_ratio}


def _qlimit_evaluate(rows, metrics, p):
    gaps = [r["dyadic_gap"] for r in rows]
    return {
        "dyadic_gap_decreases_to_zero": _nonincreasing(gaps) and gaps[-1] <= EXACT and gaps[0] > EXACT,
        "all_sets_gap_stays_quarter": all(abs(r["all_sets_gap"] - 0.25) <= EXACT for r in rows),
        "deterministic_quantizers_bounded_away": min(metrics["min_deterministic_gap"],
                                                     metrics["min_deterministic_gap_full_grid"]) >= 0.25 - EXACT,
        "majorized_by_prior_times_counting": all(r["majorized"] for r in rows),
        "symdiff_bound_holds": metrics["symdiff_violations"] == 0 and metrics["symdiff_max_ratio"] <= 1 + EXACT,
    }


# ---------------------------------------------------------- TV continuity sweep


def _tv_execute(p):
    rng = make_rng(p["seed"])
    rows = []
    for d in range(p["draws"]):
        P, Q1, cost = _random_instance(rng, p["nx"], p["ny"], p["nu"])
        R = Channel(Q1.x_grid, Q1.y_grid, np.vstack([_simplex(rng, p["ny"]) for _ in range(p["nx"])]))
        eps = float(rng.uniform())
        Q2 = mixture([Q1, R], [1.0 - eps, eps])
        b = continuity_bound_check(P, Q1, Q2, cost)
        rows.append({"draw": d, "eps": eps, "lhs": b.lhs, "rhs": b.rhs, "holds": b.holds})
    return rows, {}


def _tv_evaluate(rows, metrics, p):
    return {
        "all_draws_present": len(rows) == p["draws"],
        "bound_holds": all(r["lhs"] <= r["rhs"] + 1e-9 for r in rows),
        "non_trivial": any(r["lhs"] > 0 for r in rows),
    }


# ---------------------------------------------------------------- decomposition


def _decomp_execute(p):
    rng = make_rng(p["seed"])
    rows = []
    for k in range(p["kernels"]):
        nx, M = p["nx"], p["M"]
        if p["vary_sizes"]:
            nx, M = int(rng.integers(1, nx + 1)), int(rng.integers(2, M + 1))
        g = Grid.atoms(range(nx))
        rq = RandomQuantizer(g, np.vstack([_simplex(rng, M) for _ in range(nx)]))
        for n in sorted(set(p["n_values"])):
            frq = decompose_random_quantizer(rq, n)
            rec = recombine(frq)
            rows.append({
                "kernel": k, "n": n, "components": len(frq.quantizers),
                "sup_error": float(np.abs(rec.kernel - rq.kernel).max()), "bound": 1.0 / n,
            })
    return rows, {}


def _decomp_evaluate(rows, metrics, p):
    return {
        "sup_error_within_1_over_n": all(r["sup_error"] <= 1.0 / r["n"] for r in rows),
        "n_components": all(r["components"] == r["n"] for r in rows),
        "all_rows_present": len(rows) == p["kernels"] * len(set(p["n_values"])),
    }


# --------------------------------------------------------- interval quantizer


def _interval_execute(p):
    rows = []
    N = p["grid_size"]
    x = Grid.uniform(N)
    P = DiscreteMeasure.uniform(x)
    u = make_action_grid(np.linspace(0.0, 1.0, p["u_size"]))
    cost = CostSpec.quadratic(x, u)
    res = optimize_interval_quantizer(P, cost, p["M"])
    oracle, _ = enumerate_interval_cost(P, cost, p["M"])
    rows.append({"instance": "uniform", "N": N, "M": p["M"], "dp_cost": res.cost_value, "oracle_cost": oracle,
                 "first_threshold": res.quantizer.thresholds[0] if res.quantizer.thresholds else float("nan")})
    rng = make_rng(p["seed"])
    for k in range(p["instances"]):
        M = int(rng.integers(1, p["max_cells"] + 1))
        n = int(rng.integers(max(M, 2), p["max_size"] + 1))
        xg = Grid.atoms(np.sort(rng.uniform(0, 1, n)))
        Pr = DiscreteMeasure(xg, _simplex(rng, n))
        ug = Grid.atoms(range(int(rng.integers(2, 9))))
        c = CostSpec(xg, ug, rng.uniform(0, 1, (n, len(ug))))
        r = optimize_interval_quantizer(Pr, c, M)
        o, _ = enumerate_interval_cost(Pr, c, M)
        rows.append({"instance": f"random-{k}", "N": n, "M": M, "dp_cost": r.cost_value, "oracle_cost": o,
                     "first_threshold": r.quantizer.thresholds[0] if r.quantizer.thresholds else float("nan")})
    return rows, {}


def _interval_evaluate(rows, metrics, p):
    uni = rows[0]
    checks = {
        "dp_equals_enumeration": all(r["dp_cost"] == r["oracle_cost"] for r in rows),
        "all_instances_present": len(rows) == p["instances"] + 1,
    }
    if p["M"] == 2:
        checks["uniform_threshold_half"] = abs(uni["first_threshold"] - 0.5) <= 1.0 / uni["N"]
        checks["uniform_cost_one_48th"] = abs(uni["dp_cost"] - 1 / 48) <= 1e-3
    return checks


# ---------------------------------------------------------- multistage uniform TV


def random_model(rng, nx=2, ny=2, nu=2, T=2):
    xg, yg, ug = Grid.atoms(range(nx)), Grid.atoms(range(ny)), Grid.atoms(range(nu))
    initial = DiscreteMeasure(xg, _simplex(rng, nx))
    K = ControlledKernel(np.stack([np.vstack([_simplex(rng, nx) for _ in range(nu)]) for _ in range(nx)]))
    Q = Channel(xg, yg, np.vstack([_simplex(rng, ny) for _ in range(nx)]))
    cost = CostSpec(xg, ug, rng.uniform(0, 1, (nx, nu)))
    return MultistageModel(initial, K, Q, cost, T)


def structured_model(T: int) -> tuple[MultistageModel, Channel]:
    """Two-state sticky chain, mismatch cost, noisy channel and a blind alternative.

    Mixing the noisy channel towards the blind one garbles it, and the garblings
    for ``1/n`` are nested, so the optimal cost can only fall as ``n`` grows.
    """
    g = Grid.atoms([0.0, 1.0])
    initial = DiscreteMeasure.uniform(g)
    K = ControlledKernel.uncontrolled([[0.8, 0.2], [0.3, 0.7]], 2)
    Q = Channel(g, g, [[0.9, 0.1], [0.2, 0.8]])
    cost = CostSpec(g, g, [[0.0, 1.0], [1.0, 0.0]])
    return MultistageModel(initial, K, Q, cost, T), Channel.uninformative(g, g)


def _multi_execute(p):
    rng = make_rng(p["seed"])
    if p["random_model"]:
        model = random_model(rng, 2, 2, 2, p["T"])
        other = Channel(model.channel.x_grid, model.channel.y_grid, np.vstack([_simplex(rng, 2) for _ in range(2)]))
    else:
        model, other = structured_model(p["T"])
    seq = ChannelSequence.mixture_towards(model.channel, other)
    rows = [
        {"n": r.n, "delta": r.delta, "J_n": r.J_n, "J_limit": r.J_limit, "gap": r.gap, "bound": r.bound}
        for r in uniform_tv_continuity_experiment(model, seq, sorted(set(p["n_values"])))
    ]
    worst = 0.0
    for _ in range(p["t1_instances"]):
        nx, ny, nu = (int(v) for v in rng.integers(2, 5, size=3))
        m = random_model(rng, nx, ny, nu, 1)
        worst = max(worst, abs(solve_exhaustive(m).cost - optimal_cost(m.initial, m.channel, m.cost)))
    return rows, {"t1_max_abs_diff": worst, "sup_norm": model.cost.sup_norm}


def _multi_evaluate(rows, metrics, p):
    T = p["T"]
    return {
        "bound_holds": all(r["gap"] <= r["bound"] + 1e-9 for r in rows),
        "bound_formula": all(
            isclose(r["bound"], metrics["sup_norm"] * r["delta"] * T * (T + 1) / 2, rel_tol=1e-12, abs_tol=1e-15)
            for r in rows
        ),
        "delta_decreasing": _nonincreasing([r["delta"] for r in rows]) and rows[-1]["delta"] < rows[0]["delta"],
        "gap_nonincreasing": _nonincreasing([r["gap"] for r in rows]),
        "gap_shrinks": rows[-1]["gap"] < rows[0]["gap"],
        "single_stage_consistency": metrics["t1_max_abs_diff"] <= EXACT,
    }


# ---------------------------------------------------------- estimation consistency


def _est_execute(p):
    sc = cx.setwise_counterexample(p["K"])
    P, Q, cost = sc.P, sc.limit, sc.cost
    curve = consistency_curve(P, Q, cost, p["sizes"], p["seed"])
    pq = join(P, Q)
    rows = []
    for r in curve:
        emp = empirical_joint(sample_pairs(P, Q, r.n, r.seed), Q.x_grid, Q.y_grid)
        lip = lipschitz_uniform_gap(emp, pq, cost, p["lipschitz_bound"], p["net_resolution"])
        rows.append({"n": r.n, "seed": r.seed, "tv": r.tv, "J_hat": r.J_hat, "J_true": r.J_true,
                     "cost_gap": r.cost_gap, "bound": r.bound, "lipschitz_gap": lip})
    return rows, {"sup_norm": cost.sup_norm}


def _est_evaluate(rows, metrics, p):
    return {
        "bound_holds": all(r["cost_gap"] <= metrics["sup_norm"] * r["tv"] + 1e-9 for r in rows),
        "cost_gap_nonincreasing": _nonincreasing([r["cost_gap"] for r in rows], slack=0.0),
        "lipschitz_gap_nonincreasing": _nonincreasing([r["lipschitz_gap"] for r in rows], slack=0.0),
    }


# ---------------------------------------------------------- best / worst channel


def _bw_execute(p):
    rows = []
    g = Grid.atoms([0.0, 1.0])
    P = DiscreteMeasure.uniform(g)
    u = make_action_grid(np.linspace(0, 1, 11), required=[0.5])
    cost = CostSpec.quadratic(g, u)
    fam = [Channel.identity(g), Channel.uninformative(g, g)]
    labels = ["identity", "uninformative"]
    for w in (0.25, 0.5, 0.75):
        fam.append(mixture(fam[:2], [w, 1 - w]))
        labels.append(f"mixture-{w}")
    bw = best_worst_channel(P, fam, cost)
    for i, (lab, c) in enumerate(zip(labels, bw.costs)):
        rows.append({"family": "binary", "index": i, "label": lab, "cost": c,
                     "best": i == bw.best_index, "worst": i == bw.worst_index})
    rng = make_rng(p["seed"])
    N, M = p["quantizer_grid"], 2
    xg = Grid.atoms(np.arange(N) / max(N - 1, 1))
    Pq = DiscreteMeasure(xg, _simplex(rng, N))
    cq = CostSpec.quadratic(xg, make_action_grid(np.linspace(0, 1, 21)))
    quants = [Quantizer(xg, [(m >> i) & 1 for i in range(N)], M) for m in range(M**N)]
    bwq = best_worst_channel(Pq, [as_channel(q) for q in quants], cq)
    for i, c in enumerate(bwq.costs):
        rows.append({"family": "quantizers", "index": i, "label": "".join(str(v) for v in quants[i].cell_of),
                     "cost": c, "best": i == bwq.best_index, "worst": i == bwq.worst_index})
    ob, ow = enumerate_quantizer_cost(Pq, cq, M)
    return rows, {"quantizer_oracle_best": ob, "quantizer_oracle_worst": ow}


def _bw_evaluate(rows, metrics, p):
    binary = [r for r in rows if r["family"] == "binary"]
    quant = [r for r in rows if r["family"] == "quantizers"]
    best = [r for r in binary if r["best"]]
    worst = [r for r in binary if r["worst"]]
    qbest = min(r["cost"] for r in quant)
    qworst = max(r["cost"] for r in quant)
    return {
        "best_is_identity": len(best) == 1 and best[0]["label"] == "identity" and abs(best[0]["cost"]) <= EXACT,
        "worst_is_uninformative": len(worst) == 1 and worst[0]["label"] == "uninformative"
        and abs(worst[0]["cost"] - 0.25) <= EXACT,
        "flags_match_costs": all(
            (r["cost"] == min(x["cost"] for x in fam)) >= r["best"]
            for fam in (binary, quant) for r in fam
        ),
        "quantizer_best_matches_enumeration": abs(qbest - metrics["quantizer_oracle_best"]) <= EXACT,
        "quantizer_worst_matches_enumeration": abs(qworst - metrics["quantizer_oracle_worst"]) <= EXACT,
    }


REGISTRY: dict[str, ScenarioSpec] = {}


def _register(spec: ScenarioSpec):
    REGISTRY[spec.name] = spec


_register(ScenarioSpec(
    "weak-counterexample",
    "Two-atom prior whose channels converge weakly at the input while the optimal cost jumps from 0 to (b-a)^2/4.",
    "weak convergence: channel output a + 1/n collapsing to a",
    ("n", "J_n", "J_limit", "tv", "setwise", "weak", "uniform"),
    {"a": Param(0.0, "float"), "b": Param(1.0, "float"), "n_values": Param([4, 16, 64], "int_list")},
    _weak_execute, _weak_evaluate,
))
_register(ScenarioSpec(
    "setwise-counterexample",
    "Square-wave density channel converging setwise at the input; optimal cost stays at 1/6 below the limit 1/4.",
    "setwise convergence: square-wave density channel",
    ("n", "J_n", "J_limit", "J_policy_half", "policy_left", "policy_right", "tv", "setwise", "weak", "uniform",
     "bound_lhs", "bound_rhs"),
    {"n_values": Param([8], "int_list"), "K": Param(32, "int"), "dyadic_levels": Param(3, "int")},
    _setwise_execute, _setwise_evaluate,
))
_register(ScenarioSpec(
    "quantizer-setwise-limit",
    "Alternating 2-cell quantizers converge setwise at a uniform input to the constant (1/2,1/2) kernel, "
    "which no deterministic quantizer approaches; also sweeps the symmetric-difference TV bound.",
    "quantizers not closed under setwise convergence; setwise implies total variation for quantizers",
    ("n", "dyadic_gap", "all_sets_gap", "tv", "majorized"),
    {"grid_size": Param(64, "int"), "n_values": Param([1, 2, 4, 8, 16, 32], "int_list"),
     "dyadic_levels": Param(3, "int"), "exhaust_size": Param(12, "int"), "random_pairs": Param(500, "int"),
     "seed": Param(0, "int")},
    _qlimit_execute, _qlimit_evaluate,
))
_register(ScenarioSpec(
    "tv-continuity-sweep",
    "Random single-stage instances checking |J(P,Q1)-J(P,Q2)| <= ||c||_inf ||PQ1-PQ2||_TV.",
    "continuity of the optimal cost under total variation",
    ("draw", "eps", "lhs", "rhs", "holds"),
    {"draws": Param(1000, "int"), "nx": Param(8, "int"), "ny": Param(8, "int"), "nu": Param(8, "int"),
     "seed": Param(0, "int")},
    _tv_execute, _tv_evaluate,
))
_register(ScenarioSpec(
    "decomposition",
    "Random quantizer kernels written as averages of n deterministic quantizers; sup error at most 1/n.",
    "random quantizers as limits of finitely randomized quantizers",
    ("kernel", "n", "components", "sup_error", "bound"),
    {"M": Param(4, "int"), "nx": Param(8, "int"), "n_values": Param([2, 4, 8, 16], "int_list"),
     "kernels": Param(1, "int"), "vary_sizes": Param(0, "int", "1: draw |X| and M uniformly up to nx and M"),
     "seed": Param(0, "int")},
    _decomp_execute, _decomp_evaluate,
))
_register(ScenarioSpec(
    "interval-quantizer",
    "Optimal convex-cell (interval) quantizer by dynamic programming, checked against threshold enumeration.",
    "existence of optimal quantizers with convex codecells",
    ("instance", "N", "M", "dp_cost", "oracle_cost", "first_threshold"),
    {"grid_size": Param(256, "int"), "M": Param(2, "int"), "u_size": Param(1025, "int"),
     "instances": Param(50, "int"), "max_size": Param(128, "int"), "max_cells": Param(4, "int"),
     "seed": Param(0, "int")},
    _interval_execute, _interval_evaluate,
))
_register(ScenarioSpec(
    "multistage-uniform-tv",
    "Two-state, two-stage model with mixture channel sequences: optimal-cost gap versus ||c|| delta T(T+1)/2.",
    "multi-stage continuity under uniform total variation convergence",
    ("n", "delta", "J_n", "J_limit", "gap", "bound"),
    {"T": Param(2, "int"), "n_values": Param([1, 2, 4, 8, 16, 32, 64, 128], "int_list"),
     "t1_instances": Param(100, "int"), "seed": Param(0, "int"),
     "random_model": Param(0, "int", "1: draw the model from the seed instead of the fixed sticky chain")},
    _multi_execute, _multi_evaluate,
))
_register(ScenarioSpec(
    "estimation-consistency",
    "Plug-in channel estimates from samples of the uninformative-channel problem; cost gaps and Lipschitz-policy gaps.",
    "empirical consistency of optimal controllers",
    ("n", "seed", "tv", "J_hat", "J_true", "cost_gap", "bound", "lipschitz_gap"),
    {"sizes": Param([100, 1000, 10000], "int_list"), "seed": Param(7, "int"), "K": Param(32, "int"),
     "lipschitz_bound": Param(1.0, "float"), "net_resolution": Param(1 / 32, "float")},
    _est_execute, _est_evaluate,
))
_register(ScenarioSpec(
    "best-worst-channel",
    "Best and worst channels over explicit finite families, including all 2-cell quantizers of a small grid.",
    "existence of best and worst channels",
    ("family", "index", "label", "cost", "best", "worst"),
    {"quantizer_grid": Param(4, "int"), "seed": Param(0, "int")},
    _bw_execute, _bw_evaluate,
))


def list_scenarios() -> list[dict]:
    return [
        {"name": s.name, "required": list(s.required), "optional": sorted(s.params), "description": s.description,
         "anchor": s.anchor, "columns": list(s.columns), "columns_version": COLUMNS_VERSION}
        for s in sorted(REGISTRY.values(), key=lambda s: s.name)
    ]


def get(name: str) -> ScenarioSpec:
    try:
        return REGISTRY[name]
    except KeyError:
        raise ConfigError(f"unknown scenario {name!r}") from None


def run_scenario(name: str, params: dict | None = None) -> ScenarioResult:
    spec = get(name)
    resolved = spec.resolve(params)
    t0 = time.perf_counter()
    rows, metrics = spec.execute(resolved)
    checks = spec.evaluate(rows, metrics, resolved)
    elapsed = time.perf_counter() - t0
    for r in rows:
        if tuple(r) != spec.columns:
            raise AssertionError(f"{name}: row columns {tuple(r)} differ from contract {spec.columns}")
    return ScenarioResult(name, resolved, spec.columns, rows, {k: bool(v) for k, v in checks.items()}, metrics, elapsed)
