"""Command-line scenario runner.

    chanopt list
    chanopt setwise-counterexample --n-values 8 --out out.csv
    chanopt interval-quantizer --config configs/interval.yaml
    chanopt batch --out-dir results/ --jobs 4

Config files are YAML with three top-level keys, all optional except where a
subcommand does not name the scenario::

    scenario: decomposition
    params: {M: 4, nx: 8, n_values: [2, 4, 8, 16]}
    output: {path: decomposition.csv, format: csv}

Unknown keys anywhere in the file are rejected. Exit status: 0 when every check
passes, 1 when a check fails, 2 for configuration errors, 3 when a size guard trips.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from .multistage import NumericGuardError
from .scenarios import COLUMNS_VERSION, REGISTRY, ConfigError, ScenarioResult, get, list_scenarios, run_scenario

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_GUARD = 0, 1, 2, 3
FORMATS = ("csv", "json")
CONFIG_KEYS = {"scenario", "params", "output"}
OUTPUT_KEYS = {"path", "format"}


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML ({exc})") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    unknown = sorted(set(data) - CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {', '.join(map(str, unknown))}")
    params = data.get("params") or {}
    output = data.get("output") or {}
    if not isinstance(params, dict) or not isinstance(output, dict):
        raise ConfigError(f"{path}: 'params' and 'output' must be mappings")
    bad = sorted(set(output) - OUTPUT_KEYS)
    if bad:
        raise ConfigError(f"{path}: unknown output key(s) {', '.join(map(str, bad))}")
    if output.get("format") not in (None, *FORMATS):
        raise ConfigError(f"{path}: output format must be one of {FORMATS}")
    scenario = data.get("scenario")
    if scenario is not None and not isinstance(scenario, str):
        raise ConfigError(f"{path}: scenario must be a string")
    return {"scenario": scenario, "params": dict(params), "output": dict(output)}


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return None if math.isnan(v) or math.isinf(v) else v
    return v


def render(result: ScenarioResult, fmt: str) -> str:
    """Serialised table; everything except wall time, so reruns are byte-identical."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(result.columns)
        for row in result.rows:
            w.writerow([_cell(row[c]) for c in result.columns])
        return buf.getvalue()
    if fmt == "json":
        doc = {
            "scenario": result.scenario,
            "columns_version": COLUMNS_VERSION,
            "params": _plain(result.params),
            "columns": list(result.columns),
            "rows": _plain(result.rows),
            "summary": _plain(result.summary(with_time=False)),
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    raise ConfigError(f"unknown format {fmt!r}")


def summary_text(result: ScenarioResult) -> str:
    lines = [f"{result.scenario}: {'PASS' if result.passed else 'FAIL'} ({result.wall_time:.3f} s)"]
    for name, ok in result.checks.items():
        lines.append(f"  [{'pass' if ok else 'FAIL'}] {name}")
    return "\n".join(lines)


def _format_for(out: str | None, explicit: str | None, from_config: str | None) -> str:
    if explicit:
        return explicit
    if from_config:
        return from_config
    if out and Path(out).suffix.lower() == ".json":
        return "json"
    return "csv"


def _apply_overrides(spec, params: dict, seed, n_values) -> dict:
    params = dict(params)
    if seed is not None:
        if "seed" not in spec.params:
            raise ConfigError(f"{spec.name} takes no seed")
        params["seed"] = seed
    if n_values is not None:
        key = next((k for k in ("n_values", "sizes") if k in spec.params), None)
        if key is None:
            raise ConfigError(f"{spec.name} takes no n values")
        params[key] = n_values
    return params


def execute_job(name: str, params: dict, out: str | None, fmt: str) -> tuple[int, str, str]:
    """Run one scenario and write its table. Returns (exit code, table text, summary text)."""
    try:
        result = run_scenario(name, params)
    except ConfigError as exc:
        return EXIT_CONFIG, "", f"config error: {exc}"
    except NumericGuardError as exc:
        return EXIT_GUARD, "", f"numeric guard: {exc}"
    text = render(result, fmt)
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    return (EXIT_PASS if result.passed else EXIT_FAIL), text, summary_text(result)


def _run_single(args) -> int:
    cfg = load_config(args.config) if args.config else {"scenario": None, "params": {}, "output": {}}
    if cfg["scenario"] not in (None, args.command):
        raise ConfigError(f"config names scenario {cfg['scenario']!r} but the command is {args.command!r}")
    spec = get(args.command)
    params = _apply_overrides(spec, cfg["params"], args.seed, args.n_values)
    spec.resolve(params)  # validate before doing any work
    out = args.out or cfg["output"].get("path")
    fmt = _format_for(out, args.format, cfg["output"].get("format"))
    code, text, summ = execute_job(args.command, params, out, fmt)
    if out:
        print(summ)
    else:
        sys.stdout.write(text)
        print(summ, file=sys.stderr)
    return code


def _run_batch(args) -> int:
    jobs = []
    if args.configs:
        for path in args.configs:
            cfg = load_config(path)
            if not cfg["scenario"]:
                raise ConfigError(f"{path}: batch configs must name a scenario")
            jobs.append((cfg["scenario"], cfg["params"], cfg["output"].get("format")))
    else:
        jobs = [(name, {}, None) for name in sorted(REGISTRY)]
    prepared = []
    for name, params, cfg_fmt in jobs:
        spec = get(name)
        params = _apply_overrides(spec, params, args.seed, None)
        spec.resolve(params)
        fmt = args.format or cfg_fmt or "csv"
        prepared.append((name, params, str(Path(args.out_dir) / f"{name}.{fmt}"), fmt))
    if len({p[2] for p in prepared}) != len(prepared):
        raise ConfigError("batch contains the same scenario twice with the same output format")
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(execute_job, *zip(*prepared)))
    else:
        results = [execute_job(*p) for p in prepared]
    worst = EXIT_PASS
    for code, _, summ in results:
        print(summ)
        worst = max(worst, code)
    return worst


def _print_list(fmt: str | None) -> int:
    entries = list_scenarios()
    if fmt == "json":
        print(json.dumps(entries, indent=2))
        return EXIT_PASS
    for e in entries:
        print(f"{e['name']}\n  {e['description']}\n  anchor: {e['anchor']}")
        print(f"  required: {', '.join(e['required']) or '(none)'}; optional: {', '.join(e['optional'])}")
    return EXIT_PASS


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chanopt", description="Run observation-channel experiments on finite grids.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("list", help="show the scenario registry")
    p.add_argument("--format", choices=("text", "json"), default="text")
    for spec in sorted(REGISTRY.values(), key=lambda s: s.name):
        p = sub.add_parser(spec.name, help=spec.description, description=spec.description)
        p.add_argument("--config", help="YAML config file")
        p.add_argument("--out", help="output file (default: table on stdout)")
        p.add_argument("--format", choices=FORMATS)
        p.add_argument("--seed", type=int)
        p.add_argument("--n-values", dest="n_values", help="comma-separated integers")
    p = sub.add_parser("batch", help="run several scenarios, one output file each")
    p.add_argument("configs", nargs="*", help="config files (default: every scenario with default parameters)")
    p.add_argument("--out-dir", default="results")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list":
            return _print_list(args.format)
        if args.command == "batch":
            return _run_batch(args)
        return _run_single(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericGuardError as exc:
        print(f"numeric guard: {exc}", file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
