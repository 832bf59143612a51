"""Command line front end: parse flags/config, run a test, write the CSV."""

import argparse
import sys
import time

from .experiments import (ESTIMATORS, CostModel, ExperimentConfig,
                          cost_model, estimator_tallies, run_experiment,
                          write_csv)
from .solvers import parse_nu_law

__all__ = ["parse_cli", "main"]

# config-file keys and their coercions; flags override file values
_INT_KEYS = ("test", "samples", "nx", "nv", "repeats", "seed", "quad_order",
             "checkpoints")
_FLOAT_KEYS = ("epsilon", "vmax", "tf", "dt")
_STR_KEYS = ("estimator", "nu_law", "weights", "truth", "out", "cache_dir")
_LIST_KEYS = ("cv_samples",)


def _parse_config_file(path):
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as err:
        raise ValueError("cannot read config file: %s" % (err,))
    for ln, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError("config line %d is not key = value" % ln)
        key, _, val = line.partition("=")
        key = key.strip().replace("-", "_")
        val = val.strip()
        if key in _INT_KEYS:
            values[key] = int(val)
        elif key in _FLOAT_KEYS:
            values[key] = float(val)
        elif key in _STR_KEYS:
            values[key] = val
        elif key in _LIST_KEYS:
            values[key] = tuple(int(tok) for tok in val.replace(",", " ").split())
        else:
            raise ValueError("unknown config key %r" % (key,))
    return values


def _build_parser():
    p = argparse.ArgumentParser(
        prog="kinuq",
        description="Monte Carlo error curves for the kinetic test problems")
    p.add_argument("--test", type=int, choices=(1, 2, 3))
    p.add_argument("--estimator", choices=ESTIMATORS)
    p.add_argument("--samples", type=int, metavar="M")
    p.add_argument("--cv-samples", type=int, action="append", metavar="M_E",
                   help="control expectation samples; repeat for levels, "
                        "ordered coarse to fine")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--nx", type=int)
    p.add_argument("--nv", type=int)
    p.add_argument("--vmax", type=float)
    p.add_argument("--tf", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--nu-law", metavar="{rho,0.125rho,const:<v>}")
    p.add_argument("--repeats", type=int, metavar="M_a")
    p.add_argument("--seed", type=int)
    p.add_argument("--weights", choices=("optimal", "quasi", "unit"))
    p.add_argument("--out", metavar="path.csv")
    p.add_argument("--config", metavar="file",
                   help="plain-text key = value file; flags override it")
    return p


def parse_cli(argv) -> ExperimentConfig:
    ns = _build_parser().parse_args(argv)
    values = _parse_config_file(ns.config) if ns.config else {}
    for key in _INT_KEYS + _FLOAT_KEYS + _STR_KEYS + _LIST_KEYS:
        if key == "cv_samples":
            if ns.cv_samples is not None:
                values[key] = tuple(ns.cv_samples)
        elif hasattr(ns, key) and getattr(ns, key) is not None:
            values[key] = getattr(ns, key)
    if "test" not in values:
        raise ValueError("a test id is required (--test or config file)")
    if values.get("nu_law") is not None:
        parse_nu_law(values["nu_law"])  # reject bad laws before running
    est = values.get("estimator", "mc")
    if est in ("mscvh2", "mlmc") and not values.get("cv_samples"):
        raise ValueError("estimator %s needs level sample counts "
                         "(--cv-samples, coarse to fine)" % est)
    return ExperimentConfig(**values)


def main(argv=None) -> int:
    try:
        cfg = parse_cli(sys.argv[1:] if argv is None else argv)
        started = time.perf_counter()
        records = run_experiment(cfg)
        wall = time.perf_counter() - started
        out = cfg.out or "test%d_%s.csv" % (cfg.test, cfg.estimator)
        write_csv(records, out)
    except ValueError as err:
        print("error: %s" % err, file=sys.stderr)
        return 1
    model = CostModel(nx=1 if cfg.test == 1 else cfg.nx, nv=cfg.nv,
                      d_x=0 if cfg.test == 1 else 1)
    tallies = dict(estimator_tallies(cfg)[cfg.estimator])
    tallies["wall_time"] = wall
    report = cost_model(tallies, model)
    print("wrote %s" % out)
    print("cost[%s]: full %.4g  cv %.4g  limit %.4g  total %.4g  "
          "wall %.2fs" % (cfg.estimator, report["full"], report["cv"],
                          report["limit"], report["total"],
                          report["wall_time"]))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
