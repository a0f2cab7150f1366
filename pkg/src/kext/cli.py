"""Command-line interface.

Subcommands ``integrate``, ``periods``, ``scan``, ``classify`` and
``verify``.  Exit status: 0 on success, 1 on numerical failure, 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import classify as _cls
from . import periods as _per
from . import spectral as _spec
from .config import ConfigError, RunConfig, from_env, load_config_file
from .dynsys import SQRT38, integrate
from .errors import DomainError, KextError, PreconditionError

EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2


@contextlib.contextmanager
def _output(path):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _info(msg):
    print(msg, file=sys.stderr)


def _map(fn, items, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


# -- commands ----------------------------------------------------------------

def cmd_integrate(cfg):
    traj = integrate(cfg.p, cfg.y_end, cfg.tol)
    with _output(cfg.out) as fh:
        traj.to_csv(fh, n=cfg.samples or None)
    ys, st = traj.sample(max(2001, 8 * traj.n_steps))
    norm = np.hypot(st[:, 0], st[:, 1])
    i = int(np.argmin(norm))
    _info(f"p={cfg.p!r} y_end={cfg.y_end!r} steps={traj.n_steps} "
          f"rejected={traj.n_rejected} max_drift={traj.max_drift:.3e}")
    _info(f"min |(phi1, phi2)| = {norm[i]:.3e} at y = {ys[i]:.6g}")
    return EXIT_OK


def cmd_periods(cfg):
    ps = np.linspace(cfg.p_min, cfg.p_max, cfg.grid)
    rows = _per.period_table(ps, threads=cfg.threads)
    with _output(cfg.out) as fh:
        _per.write_period_table(fh, rows)
    R = np.array([r[3] for r in rows])
    _info(f"{len(rows)} rows; R in [{R.min():.9f}, {R.max():.9f}]; "
          f"T_v > T_u on all rows: {all(r[2] > r[1] for r in rows)}")
    return EXIT_OK


def _scan_entries(cfg):
    fracs = _cls.fractions_in(cfg.r_min, cfg.r_max, cfg.denom_cap)
    _cls._grid_values()  # fill the cache before fanning out
    roots = _map(_cls.solve_ratio_equation, fracs, cfg.threads)
    jobs = [(f, p) for f, ps in zip(fracs, roots) for p in ps]
    r38 = _per.T_V_LIMIT / _per.T_U_SQRT38
    include_38 = cfg.r_min <= r38 <= cfg.r_max
    classes = _map(lambda fp: _cls.classify_periodic(fp[1], fp[0]), jobs, cfg.threads)
    if include_38:
        classes.append(_cls.classify(SQRT38))
    classes.sort(key=lambda c: (c.fraction.denominator if c.fraction else 0,
                                c.fraction.numerator if c.fraction else 0, c.p))
    return classes


def cmd_scan(cfg):
    classes = _scan_entries(cfg)
    with _output(cfg.out) as fh:
        json.dump([c.to_dict() for c in classes], fh, indent=1)
        fh.write("\n")
    good = [c for c in classes if c.extremal_candidate]
    others = [c.zeros_phi1 for c in classes if not c.extremal_candidate]
    _info(f"{len(classes)} periodic solutions; the two-zero condition holds for "
          f"{len(good)}: {[c.p for c in good]}")
    if others:
        _info(f"minimum zeros of phi1 among the others: {min(others)}")
    return EXIT_OK


def cmd_classify(cfg):
    c = _cls.classify(cfg.p)
    with _output(cfg.out) as fh:
        fh.write(c.to_json(indent=1) + "\n")
    return EXIT_OK


def cmd_verify(cfg):
    ode = _spec.verify_extremal(_spec.build_metric_from_ode(grid_size=cfg.n),
                                n=cfg.n, threads=cfg.threads)
    cf = _spec.verify_extremal(_spec.build_metric_closed_form(grid_size=cfg.n),
                               n=cfg.n, threads=cfg.threads)
    out = ode.to_dict()
    out["closed_form"] = cf.to_dict()
    out["closed_form_agreement"] = abs(cf.product / ode.product - 1.0)
    with _output(cfg.out) as fh:
        json.dump(out, fh, indent=1)
        fh.write("\n")
    _info(f"FromODE:    lambda1 = {ode.lambda1:.10f}  multiplicity = {ode.multiplicity}  "
          f"product/pi = {ode.product_over_pi:.10f}")
    _info(f"ClosedForm: lambda1 = {cf.lambda1:.10f}  multiplicity = {cf.multiplicity}  "
          f"product/pi = {cf.product_over_pi:.10f}")
    _info(f"12 E(2 sqrt(2)/3) = {_spec.TARGET_PRODUCT / math.pi:.10f}")
    return EXIT_OK


COMMANDS = {
    "integrate": (cmd_integrate, "integrate the system and write the trajectory CSV",
                  ("p", "y_end", "tol", "samples")),
    "periods": (cmd_periods, "write the period table p,T_u,T_v,R,err_u,err_v",
                ("grid", "p_min", "p_max")),
    "scan": (cmd_scan, "solve R(p) = q/m over a range of fractions and classify",
             ("denom_cap", "r_min", "r_max")),
    "classify": (cmd_classify, "classify the solution for one p", ("p",)),
    "verify": (cmd_verify, "spectral certificate for the extremal metric", ("n",)),
}

_OPTION_HELP = {
    "p": (float, "initial value phi2(0) in (0, 1]"),
    "y_end": (float, "end of the integration interval"),
    "tol": (float, "relative tolerance of the integrator"),
    "samples": (int, "uniform dense samples in the CSV (0: integrator steps)"),
    "grid": (int, "number of p values"),
    "p_min": (float, "smallest p"),
    "p_max": (float, "largest p"),
    "denom_cap": (int, "largest denominator m"),
    "r_min": (float, "lower end of the target range"),
    "r_max": (float, "upper end of the target range"),
    "n": (int, "cells on the half period (even)"),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE",
                        help="plain-text key = value configuration")
    common.add_argument("--out", metavar="PATH", default=None,
                        help="output file ('-' for stdout, the default)")
    common.add_argument("--threads", metavar="N", type=int, default=None,
                        help="worker threads for parallel parts")
    parser = argparse.ArgumentParser(prog="kext", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, helptext, opts) in COMMANDS.items():
        sp = sub.add_parser(name, parents=[common], help=helptext)
        for opt in opts:
            typ, h = _OPTION_HELP[opt]
            sp.add_argument("--" + opt.replace("_", "-"), dest=opt, type=typ,
                            default=None, help=h)
    return parser


def resolve_config(args, environ=None):
    cfg = RunConfig()
    if args.config:
        cfg = cfg.updated(load_config_file(args.config))
    cfg = cfg.updated(from_env(environ))
    flags = {k: v for k, v in vars(args).items()
             if v is not None and k not in ("command", "config")}
    return cfg.updated(flags).validate()


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        parser.error(str(exc))
    func = COMMANDS[args.command][0]
    try:
        return func(cfg)
    except (DomainError, PreconditionError) as exc:
        _info(f"kext {args.command}: usage error: {exc}")
        return EXIT_USAGE
    except (KextError, ArithmeticError, RuntimeError) as exc:
        _info(f"kext {args.command}: numerical failure: {exc}")
        return EXIT_NUMERICAL
