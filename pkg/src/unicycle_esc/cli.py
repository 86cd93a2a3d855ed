"""Command line entry point.

``unicycle-esc run --scenario NAME|PATH`` executes a scenario and writes a
bundle of files into the output directory (``--out``, else
``$UNICYCLE_ESC_OUT/<name>``, else ``runs/<name>``):

``trajectory.csv``   sampled run log
``metrics.json``     flat scores of the run
``config.yaml``      config echo; re-running it reproduces the CSV
``lbs.csv``          averaged reference (``--emit-lbs``)
``comparison.json``  paired baseline scores (``--compare-baseline``)

Sweeps (``--sweep omega=40,120`` and/or ``--seeds 0..9``) write one
sub-directory per run plus ``aggregate.json``.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import kernels
from .config import dump_config, parse_config, preset_names, preset_text
from .errors import ConfigError, DivergenceError, FilterNumericalError
from .lbs import reference_for
from .metrics import compare_runs
from .sim import run

log = logging.getLogger("unicycle_esc")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3

SWEEPABLE = {"omega": "omega", "c": "c", "Omega": "Omega", "lambda": "lam", "h": "h", "a0": "a0", "epsilon": "epsilon"}


def _json(obj) -> str:
    def clean(v):
        if isinstance(v, float) and not math.isfinite(v):
            return None
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        return v

    return json.dumps(clean(obj), indent=2, sort_keys=True) + "\n"


def parse_seeds(text: str) -> list[int]:
    """``"3"`` -> [3]; ``"0..9"`` -> [0, ..., 9] (inclusive)."""
    try:
        if ".." in text:
            lo, hi = (int(v) for v in text.split("..", 1))
        else:
            lo = hi = int(text)
    except ValueError:
        raise ConfigError(f"--seeds: expected N or N..M, got {text!r}") from None
    if hi < lo:
        raise ConfigError(f"--seeds: empty range {text!r}")
    return list(range(lo, hi + 1))


def parse_sweep(text: str) -> tuple[str, list[float]]:
    """``"omega=40,120,360"`` -> ("omega", [40.0, 120.0, 360.0])."""
    key, sep, values = text.partition("=")
    if not sep or key not in SWEEPABLE:
        raise ConfigError(f"--sweep: expected KEY=v1,v2,... with KEY in {sorted(SWEEPABLE)}, got {text!r}")
    try:
        vals = [float(v) for v in values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--sweep: values must be numbers, got {values!r}") from None
    if not vals:
        raise ConfigError("--sweep: no values given")
    return key, vals


def run_bundle(cfg, out: Path, emit_lbs: bool = False, compare_baseline: bool = False) -> dict:
    """Run one scenario and write its bundle. Returns a small summary."""
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.yaml").write_text(dump_config(cfg))
    result = run(cfg)
    result.trajectory.to_csv(out / "trajectory.csv")
    (out / "metrics.json").write_text(_json(result.metrics.to_dict()))
    summary = {"dir": str(out), "seed": cfg.seed, **result.metrics.to_dict()}
    if emit_lbs:
        tr = result.trajectory
        ref = reference_for(cfg, a_trace=(tr["t"], tr["a"]))
        ref.rounded().to_csv(out / "lbs.csv")
    if compare_baseline and cfg.variant == "gekf":
        base_cfg = cfg.with_(variant="baseline")
        base = run(base_cfg)
        bdir = out / "baseline"
        bdir.mkdir(exist_ok=True)
        (bdir / "config.yaml").write_text(dump_config(base_cfg))
        base.trajectory.to_csv(bdir / "trajectory.csv")
        (bdir / "metrics.json").write_text(_json(base.metrics.to_dict()))
        comparison = compare_runs(result, base)
        (out / "comparison.json").write_text(_json(comparison))
        summary["comparison"] = comparison
    return summary


def _job(args):
    cfg, out, emit_lbs, compare = args
    try:
        return run_bundle(cfg, out, emit_lbs, compare)
    except (DivergenceError, FilterNumericalError) as exc:
        return {"dir": str(out), "seed": cfg.seed, "error": f"{type(exc).__name__}: {exc}"}


def _default_out(name: str) -> Path:
    base = os.environ.get("UNICYCLE_ESC_OUT")
    return Path(base) / name if base else Path("runs") / name


def cmd_run(ns) -> int:
    cfg = parse_config(ns.scenario)
    if ns.variant:
        cfg = cfg.with_(variant=ns.variant)
    seeds = parse_seeds(ns.seeds) if ns.seeds else [ns.seed if ns.seed is not None else cfg.seed]
    sweep_key, sweep_vals = parse_sweep(ns.sweep) if ns.sweep else (None, [None])
    out = Path(ns.out) if ns.out else _default_out(cfg.name)

    jobs = []
    many = len(seeds) > 1 or sweep_key is not None
    for value, seed in itertools.product(sweep_vals, seeds):
        c = cfg.with_(seed=seed, noise=type(cfg.noise)(cfg.noise.sigma, seed))
        parts = []
        if sweep_key is not None:
            c = c.with_params(**{SWEEPABLE[sweep_key]: value})
            parts.append(f"{sweep_key}={value:g}")
        if len(seeds) > 1:
            parts.append(f"seed-{seed}")
        jobs.append((c, out.joinpath(*parts) if many else out, ns.emit_lbs, ns.compare_baseline))

    log.info("backend=%s runs=%d out=%s", kernels.BACKEND, len(jobs), out)
    if ns.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=ns.jobs) as pool:
            results = list(pool.map(_job, jobs))
    else:
        results = [_job(j) for j in jobs]

    failed = [r for r in results if "error" in r]
    for r in failed:
        log.error("%s: %s", r["dir"], r["error"])
    if many:
        passed = sum(1 for r in results if r.get("all_segments_reached"))
        aggregate = {"scenario": cfg.name, "runs": len(results), "passed": passed, "failed_runs": len(failed), "results": results}
        out.mkdir(parents=True, exist_ok=True)
        (out / "aggregate.json").write_text(_json(aggregate))
        print(f"{passed}/{len(results)} runs reached every source position; wrote {out / 'aggregate.json'}")
    else:
        r = results[0]
        if "error" not in r:
            ct = r["convergence_time"]
            print(f"{cfg.name} [{cfg.variant}] final error {r['steady_state_error']:.4g} m, "
                  f"convergence {'none' if ct is None else f'{ct:g} s'}, a(T) = {r['final_amplitude']:.4g}; wrote {out}")
    return EXIT_DIVERGED if failed else EXIT_OK


def cmd_list(ns) -> int:
    for name in preset_names():
        print(name)
    return EXIT_OK


def cmd_show(ns) -> int:
    sys.stdout.write(preset_text(ns.name))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unicycle-esc", description="Unicycle extremum-seeking source-seeking simulator.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario and write its output bundle")
    r.add_argument("--scenario", required=True, help="preset name or path to a YAML scenario file")
    r.add_argument("--variant", choices=("gekf", "baseline", "lbs-reference"))
    r.add_argument("--seed", type=int)
    r.add_argument("--seeds", help="seed range N..M (inclusive) for a sweep")
    r.add_argument("--sweep", help="parameter sweep KEY=v1,v2,... (KEY is an esc parameter)")
    r.add_argument("--out", help="output directory")
    r.add_argument("--emit-lbs", action="store_true", help="also write the averaged reference trajectory")
    r.add_argument("--compare-baseline", action="store_true", help="also run the fixed-amplitude baseline")
    r.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    r.set_defaults(func=cmd_run)

    ls = sub.add_parser("list", help="list the bundled presets")
    ls.set_defaults(func=cmd_list)

    sh = sub.add_parser("show", help="print a preset's YAML")
    sh.add_argument("name")
    sh.set_defaults(func=cmd_show)
    return parser


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return ns.func(ns)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DivergenceError, FilterNumericalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
