"""Command-line interface: ``rdbsim {run,sweep,figure,validate,theory}``.

Settings resolve in this order, later sources winning: built-in defaults,
environment (``RDBSIM_SEED``, ``RDBSIM_WORKERS``), figure preset, JSON
config file, command-line flags. The resolved settings are written to
the JSON summary under ``"config"``, and that object can be fed back with
``--config``.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time

from . import __version__, bounds
from .engine import SweepSpec, format_csv, power_from_spec, run_sweep
from .presets import PRESETS, get_preset
from .schemes import Scheme
from .validation import SUITES, run_suite

log = logging.getLogger("rdbsim")

DEFAULTS = {
    "schemes": ["single-beam"],
    "M": [1000],
    "q": [0.5],
    "ell": [None],
    "K": None,
    "c_u": 1.0,
    "S": None,
    "c_b": 1.0,
    "gain": "cn",
    "power": "total",
    "power_value": 1.0,
    "metric": "sum",
    "bits": False,
    "allow_duplicate_winners": True,
    "sigma_h2": 1.0,
    "trials": 5000,
    "seed": 0,
    "workers": 1,
    "eps": 0.1,
    "experiment": "sweep",
}
LIST_KEYS = ("schemes", "M", "q", "ell")


class ConfigError(ValueError):
    pass


# ------------------------------------------------------------------ parsing


def _number(text):
    x = float(text)
    return int(x) if x.is_integer() and abs(x) < 2 ** 53 else x


def _int_like(text):
    x = float(text)
    if not x.is_integer():
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    return int(x)


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _number_list(text):
    try:
        return [_number(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    try:
        return [_int_like(t) for t in text.split(",") if t.strip()]
    except (ValueError, argparse.ArgumentTypeError):
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _bool(text):
    t = str(text).lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _add_point_flags(p, multi):
    S = argparse.SUPPRESS
    if multi:
        p.add_argument("--schemes", type=_str_list, default=S,
                       help="comma-separated schemes: " + ", ".join(s.value for s in Scheme))
        p.add_argument("--M", type=_int_list, default=S, help="antenna counts, comma-separated")
        p.add_argument("--q", type=_float_list, default=S, help="user exponents, K = c_u M^q")
        p.add_argument("--ell", type=_float_list, default=S, help="beam exponents, S = c_b M^ell")
    else:
        p.add_argument("--scheme", dest="schemes", type=lambda t: [t], default=S,
                       help=", ".join(s.value for s in Scheme))
        p.add_argument("--M", type=lambda t: [_int_like(t)], default=S, help="antenna count")
        p.add_argument("--q", type=lambda t: [float(t)], default=S, help="user exponent, K = c_u M^q")
        p.add_argument("--ell", type=lambda t: [float(t)], default=S, help="beam exponent, S = c_b M^ell")
    p.add_argument("--K", type=_int_like, default=S, help="explicit user count (overrides q)")
    p.add_argument("--S", type=_int_like, default=S, help="explicit beam count (overrides ell)")
    p.add_argument("--c-u", dest="c_u", type=float, default=S)
    p.add_argument("--c-b", dest="c_b", type=float, default=S)
    p.add_argument("--gain", choices=["unit", "cn"], default=S)
    p.add_argument("--power", choices=["total", "per-user"], default=S,
                   help="fixed total power (rho = P/S) or fixed per-user power (rho = P)")
    p.add_argument("--power-value", dest="power_value", type=float, default=S)
    p.add_argument("--metric", choices=["sum", "per_beam"], default=S)
    p.add_argument("--allow-duplicate-winners", dest="allow_duplicate_winners", type=_bool,
                   default=S)
    p.add_argument("--sigma-h2", dest="sigma_h2", type=float, default=S)
    p.add_argument("--eps", type=float, default=S, help="slack of the overlay brackets")
    _add_run_flags(p)


def _add_run_flags(p):
    S = argparse.SUPPRESS
    p.add_argument("--trials", type=_int_like, default=S, help="trials per grid point")
    p.add_argument("--seed", type=_int_like, default=S, help="master seed (env RDBSIM_SEED)")
    p.add_argument("--workers", type=_int_like, default=S, help="worker processes (env RDBSIM_WORKERS)")
    p.add_argument("--bits", action="store_const", const=True, default=S,
                   help="report rates in bits instead of nats")
    p.add_argument("--experiment", default=S, help="stream label shared by all points")
    p.add_argument("--config", help="flat JSON file of settings")
    p.add_argument("-o", "--output", help="output prefix; writes PREFIX.csv and PREFIX.json")
    p.add_argument("-v", "--verbose", action="store_true", help="log each finished point")


def build_parser():
    parser = argparse.ArgumentParser(prog="rdbsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rdbsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_point_flags(sub.add_parser("run", help="simulate one configuration"), multi=False)
    _add_point_flags(sub.add_parser("sweep", help="simulate a grid of configurations"), multi=True)

    fig = sub.add_parser("figure", help="regenerate a published sweep")
    fig.add_argument("preset", choices=sorted(PRESETS))
    _add_point_flags(fig, multi=True)

    val = sub.add_parser("validate", help="run a self-check suite")
    val.add_argument("suite", choices=sorted(SUITES) + ["all"])
    val.add_argument("--budget", type=float, default=1.0, help="scale of Monte Carlo sample sizes")
    val.add_argument("--seed", type=_int_like, default=None)
    val.add_argument("-o", "--output", help="write the JSON report here as well")

    th = sub.add_parser("theory", help="print closed-form values")
    th.add_argument("query", choices=["fro", "lemma1", "thm1", "thm2", "thm3", "corollary1",
                                      "thm4", "thm5", "cone", "csi"])
    th.add_argument("--q", type=_float_list, default=[0.25, 0.5, 0.75])
    th.add_argument("--ell", type=_float_list, default=[0.1])
    th.add_argument("--M", type=_number_list, default=[1000])
    th.add_argument("--K", type=_number_list, default=[100])
    th.add_argument("--p", type=_float_list, default=[0.0])
    th.add_argument("--eps", type=float, default=0.1)
    th.add_argument("--eta2", type=_float_list, default=[0.2])
    th.add_argument("--json", action="store_true", help="emit JSON records instead of CSV")
    return parser


# --------------------------------------------------------------- resolution


def _env_defaults():
    out = {}
    for key, var in (("seed", "RDBSIM_SEED"), ("workers", "RDBSIM_WORKERS")):
        if os.environ.get(var):
            try:
                out[key] = _int_like(os.environ[var])
            except (ValueError, argparse.ArgumentTypeError):
                raise ConfigError(f"{var} must be an integer, got {os.environ[var]!r}") from None
    return out


def _load_config_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a single JSON object")
    if data.get("tool") == "rdbsim" and isinstance(data.get("config"), dict):
        # a run summary: reuse its resolved settings
        data = data["config"]
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key in LIST_KEYS:
        if key in data and not isinstance(data[key], list):
            data[key] = [data[key]]
    return data


def resolve_config(args, preset=None):
    """Merge defaults, environment, preset, config file and flags into one flat dict."""
    cfg = dict(DEFAULTS)
    cfg.update(_env_defaults())
    if preset:
        cfg.update(get_preset(preset))
    if getattr(args, "config", None):
        cfg.update(_load_config_file(args.config))
    flags = {k: v for k, v in vars(args).items() if k in DEFAULTS}
    cfg.update(flags)
    if cfg["K"] is not None:
        cfg["q"] = [None]
    if cfg["S"] is not None:
        cfg["ell"] = [None]
    return cfg


def spec_from_config(cfg):
    """Turn a resolved flat config into a :class:`SweepSpec`, validating values."""
    for q in cfg["q"]:
        if q is not None and not 0.0 < q <= 1.0:
            raise ConfigError(f"q must lie in (0, 1], got {q}")
    for ell in cfg["ell"]:
        if ell is not None and not 0.0 <= ell < 1.0:
            raise ConfigError(f"ell must lie in [0, 1), got {ell}")
    for M in cfg["M"]:
        if int(M) != M or M < 1:
            raise ConfigError(f"M must be a positive integer, got {M}")
    if cfg["trials"] < 1:
        raise ConfigError("trials must be at least 1")
    if cfg["workers"] < 1:
        raise ConfigError("workers must be at least 1")
    try:
        base = {
            "K": cfg["K"], "c_u": cfg["c_u"], "S": cfg["S"], "c_b": cfg["c_b"],
            "gain": cfg["gain"], "power": power_from_spec(cfg["power"], cfg["power_value"]),
            "metric": cfg["metric"], "bits": bool(cfg["bits"]),
            "allow_duplicate_winners": bool(cfg["allow_duplicate_winners"]),
            "sigma_h2": cfg["sigma_h2"],
        }
        return SweepSpec(
            schemes=tuple(cfg["schemes"]), M_values=tuple(int(m) for m in cfg["M"]),
            q_values=tuple(cfg["q"]), ell_values=tuple(cfg["ell"]), n_trials=int(cfg["trials"]),
            master_seed=int(cfg["seed"]), experiment=str(cfg["experiment"]), eps=cfg["eps"],
            base=base,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


# ------------------------------------------------------------------ commands


def _write_outputs(prefix, csv_text, summary):
    paths = [prefix + ".csv", prefix + ".json"]
    written = []
    try:
        with open(paths[0], "w", encoding="utf-8", newline="") as fh:
            written.append(paths[0])
            fh.write(csv_text)
        with open(paths[1], "w", encoding="utf-8") as fh:
            written.append(paths[1])
            json.dump(summary, fh, indent=2, allow_nan=False)
            fh.write("\n")
    except BaseException:
        for path in written:
            if os.path.exists(path):
                os.remove(path)
        raise
    return paths


def _simulate(args, preset=None):
    cfg = resolve_config(args, preset)
    spec = spec_from_config(cfg)
    if args.command == "run":
        if len(list(spec.points())) != 1:
            raise ConfigError("run takes a single point; use sweep for grids")
    started = time.perf_counter()

    def progress(row):
        log.info("%s M=%s q=%s ell=%s: %s", row["scheme"], row["M"], row.get("q"),
                 row.get("ell"), row.get("mean", row["status"]))

    rows = run_sweep(spec, workers=int(cfg["workers"]), on_row=progress)
    if args.command == "run" and rows[0]["status"] != "ok":
        raise ConfigError(rows[0]["status"].removeprefix("error: "))
    csv_text = format_csv(rows)
    summary = {
        "tool": "rdbsim",
        "version": __version__,
        "command": args.command,
        "preset": preset,
        "config": cfg,
        "master_seed": int(cfg["seed"]),
        "workers": int(cfg["workers"]),
        "points": [{k: r.get(k) for k in ("scheme", "M", "q", "ell", "K", "S", "n_trials", "status")}
                   for r in rows],
        "total_trials": sum(r["n_trials"] for r in rows if r["status"] == "ok"),
        "failed_points": sum(r["status"] != "ok" for r in rows),
        "wall_time_s": round(time.perf_counter() - started, 3),
    }
    if args.output:
        summary["outputs"] = [args.output + ".csv", args.output + ".json"]
        _write_outputs(args.output, csv_text, summary)
    else:
        sys.stdout.write(csv_text)
        json.dump(summary, sys.stderr, indent=2)
        sys.stderr.write("\n")
    return 0


def cmd_validate(args):
    seed = args.seed if args.seed is not None else _env_defaults().get("seed", 0)
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    report = {"tool": "rdbsim", "version": __version__, "master_seed": seed,
              "budget": args.budget, "suites": {}}
    ok = True
    for name in names:
        checks = run_suite(name, args.budget, seed)
        report["suites"][name] = [c.as_dict() for c in checks]
        ok &= all(c.passed for c in checks)
    report["passed"] = ok
    text = json.dumps(report, indent=2)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0 if ok else 1


def _theory_rows(args):
    q_, M_, K_, e = args.q, args.M, args.K, args.eps
    if args.query == "fro":
        return [{"q": q, "gamma_single": bounds.fro_theoretical("single-beam", q),
                 "gamma_multibeam_su": bounds.fro_theoretical("multibeam-su", q),
                 "gamma_multibeam_mu": bounds.fro_theoretical("multibeam-mu", q)} for q in q_]
    if args.query == "lemma1":
        return [_bracket_row({"M": M, "p": p}, bounds.lemma1_bounds(M, p)) for M in M_ for p in args.p]
    if args.query == "thm1":
        return [_bracket_row({"M": M, "q": q, "eps": e}, bounds.thm1_bounds(M, q, e)) for M in M_ for q in q_]
    if args.query == "thm2":
        return [_ratio_row({"q": q}, bounds.thm2_ratio(q)) for q in q_]
    if args.query == "corollary1":
        return [_ratio_row({"q": q, "ell": l}, bounds.corollary1_ratio(q, l)) for q in q_ for l in args.ell]
    if args.query in ("thm3", "thm4", "thm5"):
        fn = getattr(bounds, args.query + "_bounds")
        return [_bracket_row({"M": M, "q": q, "ell": l, "eps": e}, fn(M, q, l, e))
                for M in M_ for q in q_ for l in args.ell]
    if args.query == "cone":
        rows = []
        for M in M_:
            for eta2 in args.eta2:
                if not 0.0 < eta2 < 1.0:
                    raise ValueError(f"eta2 must lie in (0, 1), got {eta2}")
                eta = math.sqrt(eta2)
                for K in K_:
                    rows.append({"M": M, "eta2": eta2, "K": K,
                                 "single": bounds.cone_probability(M, eta),
                                 "nonempty": bounds.cone_nonempty_probability(M, K, eta)})
        return rows
    return [{"M": M, "K": K, "asymptote": bounds.perfect_csi_asymptote(M, K)} for M in M_ for K in K_]


def _bracket_row(row, br):
    row.update(lower=br.lower, upper=br.upper, exponent_lower=br.exponent_lower,
               exponent_upper=br.exponent_upper)
    return row


def _ratio_row(row, r):
    row.update(ratio=r.value, regime=r.regime)
    return row


def cmd_theory(args):
    rows = _theory_rows(args)
    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        sys.stdout.write(format_csv(rows, tuple(rows[0]) if rows else ()))
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "theory":
            return cmd_theory(args)
        return _simulate(args, args.preset if args.command == "figure" else None)
    except ValueError as exc:
        print(f"rdbsim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
