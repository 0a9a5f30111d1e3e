"""Command-line front end.

Subcommands tabulate rate functions and limit curves, or run Monte Carlo
experiments from JSON config files, emitting CSV/JSON tables plus a PNG
figure next to each table (suppress with --no-plot).  Outputs are written
atomically and embed the tool version and the fully resolved config;
saturated values are rendered as the literal token ``inf``.

Exit codes: 0 success; 2 configuration, domain, or range errors;
3 numerical non-convergence.
"""

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .distributions import energy_law, length_law
from .errors import (ConfigError, DomainError, NonConvergenceError,
                     OutOfRangeError, PreconditionError)
from .limits import critical_q, er_gamma, growth_rate, interpolation_rate, rem_free_energy
from .montecarlo import (ExperimentConfig, run_er_max, run_free_energy,
                         run_interpolation, run_tail_estimator)
from .rates import ConvolutionRate, EnergyConjugate, LengthConjugate

_EXPERIMENTS = ("free_energy", "er_max", "interpolation", "tail")

# Per-command config schema: key -> (parser, required).  Unknown keys are
# rejected (fail-closed).
_SCHEMAS = {
    "rates": {
        "energy_law": ("law", True),
        "length_law": ("law", True),
        "x_min": ("number", True),
        "x_max": ("number", True),
        "x_step": ("positive_number", True),
    },
    "limits": {
        "energy_law": ("law", True),
        "length_law": ("law", True),
        "beta": ("number", True),
        "q_min": ("positive_number", True),
        "q_max": ("positive_number", True),
        "q_step": ("positive_number", True),
    },
    "critical-q": {
        "energy_law": ("law", True),
        "length_law": ("law", True),
        "beta": ("positive_number", True),
    },
    "er-gamma": {
        "energy_law": ("law", True),
        "length_law": ("law", True),
        "q_min": ("positive_number", True),
        "q_max": ("positive_number", True),
        "q_step": ("positive_number", True),
    },
    "interpolate": {
        "energy_law": ("law", True),
        "length_law": ("law", True),
        "beta": ("positive_number", True),
        "q": ("positive_number", True),
        "alphas": ("alpha_list", True),
    },
    "simulate": {
        "experiment": ("experiment", True),
        "energy_law": ("law", True),
        "length_law": ("law", True),
        "m": ("positive_int", True),
        "q": ("positive_number", True),
        "beta": ("number", True),
        "replicas": ("positive_int", True),
        "master_seed": ("seed", True),
        "k": ("positive_int", False),
        "x_probe": ("positive_number", False),
    },
}


def _parse_value(path, key, kind, raw):
    def fail(msg):
        raise ConfigError(f"{path}: key {key!r}: {msg}")

    if kind == "law":
        if not isinstance(raw, str):
            fail(f"expected a law tag string, got {raw!r}")
        return raw
    if kind == "experiment":
        if raw not in _EXPERIMENTS:
            fail(f"expected one of {_EXPERIMENTS}, got {raw!r}")
        return raw
    if kind in ("number", "positive_number"):
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            fail(f"expected a number, got {raw!r}")
        if kind == "positive_number" and raw <= 0:
            fail(f"expected a positive number, got {raw!r}")
        return float(raw)
    if kind in ("positive_int", "seed"):
        if isinstance(raw, bool) or not isinstance(raw, int):
            fail(f"expected an integer, got {raw!r}")
        if kind == "positive_int" and raw < 1:
            fail(f"expected a positive integer, got {raw!r}")
        if kind == "seed" and not 0 <= raw < 2 ** 64:
            fail(f"expected a 64-bit unsigned seed, got {raw!r}")
        return raw
    if kind == "alpha_list":
        if not isinstance(raw, list) or not raw:
            fail(f"expected a non-empty list of alphas, got {raw!r}")
        out = []
        for item in raw:
            if item == "inf":
                out.append(math.inf)
            elif not isinstance(item, bool) and isinstance(item, (int, float)):
                if item < 1:
                    fail(f"alphas must be >= 1, got {item!r}")
                out.append(float(item))
            else:
                fail(f"alphas must be numbers or the token 'inf', got {item!r}")
        return out
    raise AssertionError(kind)


def load_config(path, command):
    """Parse and validate a JSON config for the given command (fail-closed)."""
    schema = _SCHEMAS[command]
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"{path}: unknown config keys: {', '.join(unknown)}")
    missing = sorted(k for k, (_, req) in schema.items() if req and k not in raw)
    if missing:
        raise ConfigError(f"{path}: missing required keys: {', '.join(missing)}")
    cfg = {}
    for key, value in raw.items():
        kind, _req = schema[key]
        cfg[key] = _parse_value(path, key, kind, value)
    # Law tags are validated eagerly so bad tags carry the file name.
    for key, factory in (("energy_law", energy_law), ("length_law", length_law)):
        if key in cfg:
            try:
                factory(cfg[key])
            except DomainError as exc:
                raise ConfigError(f"{path}: {exc}") from exc
    return cfg


def format_value(v):
    """One CSV cell: 17 significant digits for reals, literal inf tokens."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return f"{v:.17g}"
    return str(v)


def _config_json(cfg):
    def enc(v):
        if isinstance(v, float) and math.isinf(v):
            return "inf"
        if isinstance(v, list):
            return [enc(i) for i in v]
        return v

    return json.dumps({k: enc(v) for k, v in sorted(cfg.items())})


def write_atomic(path, data):
    """Write bytes through a temp file and rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _table_bytes_csv(columns, rows, cfg):
    lines = [f"# redem {__version__}", f"# config {_config_json(cfg)}",
             ",".join(columns)]
    for row in rows:
        lines.append(",".join(format_value(row[c]) for c in columns))
    return ("\n".join(lines) + "\n").encode("utf-8")


def _table_bytes_json(columns, rows, cfg, extra=None):
    doc = {"version": __version__, "config": cfg, "columns": list(columns),
           "rows": [[row[c] for c in columns] for row in rows]}
    if extra:
        doc.update(extra)
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")


def write_table(out, fmt, columns, rows, cfg, extra=None):
    if fmt == "csv":
        write_atomic(out, _table_bytes_csv(columns, rows, cfg))
    else:
        write_atomic(out, _table_bytes_json(columns, rows, cfg, extra))


def _grid(lo, hi, step):
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + i * step for i in range(max(count, 1))]


def _build_rates(cfg):
    phi = EnergyConjugate(energy_law(cfg["energy_law"]))
    psi_rate = LengthConjugate(length_law(cfg["length_law"]))
    return phi, psi_rate, ConvolutionRate(psi_rate, phi)


def _cmd_rates(cfg, out, fmt, plot):
    phi, psi_rate, nu_rate = _build_rates(cfg)
    rows = []
    for x in _grid(cfg["x_min"], cfg["x_max"], cfg["x_step"]):
        rows.append({"x": x, "phi": phi.value(x), "psi": psi_rate.value(x),
                     "nu": nu_rate.value(x)})
    columns = ("x", "phi", "psi", "nu")
    write_table(out, fmt, columns, rows, cfg)
    if plot:
        from . import figures
        figures.rate_curves(rows, _figure_path(out))
    return rows


def _cmd_limits(cfg, out, fmt, plot):
    beta = cfg["beta"]
    if beta <= 0:
        raise ConfigError(f"beta must be positive for limit tables, got {beta}")
    phi, _psi_rate, nu_rate = _build_rates(cfg)
    rows = []
    for q in _grid(cfg["q_min"], cfg["q_max"], cfg["q_step"]):
        res = growth_rate(nu_rate, beta, q)
        rows.append({
            "q": q,
            "growth_rate": res.growth_rate,
            "free_energy": res.free_energy,
            "rem_f1": rem_free_energy(phi, q),
            "minimizer_x": res.minimizer_x,
            "constraint_active": res.constraint_active,
        })
    columns = ("q", "growth_rate", "free_energy", "rem_f1", "minimizer_x",
               "constraint_active")
    write_table(out, fmt, columns, rows, cfg)
    if plot:
        from . import figures
        figures.limit_curves(rows, _figure_path(out))
    return rows


def _cmd_critical_q(cfg, out, fmt, plot):
    beta = cfg["beta"]
    phi, _psi_rate, nu_rate = _build_rates(cfg)
    rows = []
    marks = {}
    for name, rate in (("phi", phi), ("nu", nu_rate)):
        try:
            q_cr, x0 = critical_q(rate, beta)
        except OutOfRangeError:
            q_cr, x0 = math.inf, math.inf
        rows.append({"rate": name, "q_cr": q_cr, "x0": x0})
        marks[name] = (q_cr, x0)
    diff = rows[1]["q_cr"] - rows[0]["q_cr"]
    print(f"q_cr(nu) - q_cr(phi) = {format_value(diff)} (reported, not asserted)")
    columns = ("rate", "q_cr", "x0")
    write_table(out, fmt, columns, rows, cfg, extra={"q_cr_difference": diff})
    if plot:
        from . import figures
        finite_x0 = [x for _, x in marks.values() if math.isfinite(x)]
        hi = 1.5 * max(finite_x0) if finite_x0 else 2.0
        xs = [hi * i / 48 for i in range(49)]
        curves = {name: [rate.value(x) for x in xs]
                  for name, rate in (("phi", phi), ("nu", nu_rate))}
        figures.critical_points(xs, curves, marks, _figure_path(out))
    return rows


def _cmd_er_gamma(cfg, out, fmt, plot):
    phi, _psi_rate, nu_rate = _build_rates(cfg)
    rows = []
    for q in _grid(cfg["q_min"], cfg["q_max"], cfg["q_step"]):
        gamma_bar = er_gamma(phi, q)
        gamma_tilde = er_gamma(nu_rate, q)
        rows.append({"q": q, "gamma_bar": gamma_bar, "gamma_tilde": gamma_tilde,
                     "excess": gamma_tilde - gamma_bar})
    columns = ("q", "gamma_bar", "gamma_tilde", "excess")
    write_table(out, fmt, columns, rows, cfg)
    if plot:
        from . import figures
        figures.gamma_curves(rows, _figure_path(out))
    return rows


def _cmd_interpolate(cfg, out, fmt, plot):
    _phi, _psi_rate, nu_rate = _build_rates(cfg)
    beta, q = cfg["beta"], cfg["q"]
    rows = [{"alpha": alpha, "value": interpolation_rate(nu_rate, beta, q, alpha)}
            for alpha in cfg["alphas"]]
    columns = ("alpha", "value")
    write_table(out, fmt, columns, rows, cfg)
    if plot:
        from . import figures
        figures.interpolation_curve(rows, _figure_path(out))
    return rows


_RUNNERS = {
    "free_energy": run_free_energy,
    "er_max": run_er_max,
    "interpolation": run_interpolation,
    "tail": run_tail_estimator,
}


def experiment_config(cfg, seed_override=None):
    """Build an ExperimentConfig from a validated simulate config dict."""
    seed = cfg["master_seed"] if seed_override is None else seed_override
    try:
        return ExperimentConfig(
            energy_law=energy_law(cfg["energy_law"]),
            length_law=length_law(cfg["length_law"]),
            m=cfg["m"],
            q=cfg["q"],
            beta=cfg["beta"],
            replicas=cfg["replicas"],
            master_seed=seed,
            k=cfg.get("k"),
            x_probe=cfg.get("x_probe"),
        )
    except (PreconditionError, DomainError) as exc:
        raise ConfigError(str(exc)) from exc


def _cmd_simulate(cfg, out, seed_override, threads, plot):
    experiment = cfg["experiment"]
    if experiment == "interpolation" and "k" not in cfg:
        raise ConfigError("interpolation experiments require the key 'k'")
    if experiment == "tail" and "x_probe" not in cfg:
        raise ConfigError("tail experiments require the key 'x_probe'")
    config = experiment_config(cfg, seed_override)
    resolved = dict(cfg)
    resolved["master_seed"] = config.master_seed
    report = _RUNNERS[experiment](config, threads=threads)

    base = Path(out)
    csv_path = base.with_suffix(".csv")
    per_replica = [{"replica": r, "value": v} for r, v in enumerate(report.values)]
    write_atomic(csv_path, _table_bytes_csv(("replica", "value"), per_replica, resolved))

    summary = {"version": __version__, "config": resolved, "experiment": experiment}
    summary.update(report.summary())
    if experiment == "interpolation" and config.k == config.m:
        twin = run_free_energy(config, threads=threads)
        summary["cross_check_alpha1"] = ("pass" if twin.values == report.values
                                         else "fail")
    json_path = base.with_suffix(".json")
    write_atomic(json_path, (json.dumps(summary, indent=2, sort_keys=True) + "\n")
                 .encode("utf-8"))
    if plot:
        from . import figures
        figures.replica_histogram(report.values, report.theory_value,
                                  _figure_path(base),
                                  title=f"{experiment} ({config.replicas} replicas)")
    print(f"{experiment}: mean={report.mean:.6g} theory={report.theory_value:.6g} "
          f"abs_error={report.abs_error:.3g} N={report.n_used}")
    print(f"wrote {csv_path} and {json_path}")
    return report


def _figure_path(out):
    return Path(out).with_suffix(".png")


def _default_threads():
    raw = os.environ.get("REDEM_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="redem",
        description="Tabulate rate functions and limit curves for random-length "
                    "energy chains, and check them by Monte Carlo simulation.")
    parser.add_argument("--version", action="version", version=f"redem {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    specs = (
        ("rates", "Tabulate phi, psi, and nu on an x grid"),
        ("limits", "Tabulate growth rate and free energies on a q grid"),
        ("critical-q", "Report critical q levels for phi and nu"),
        ("er-gamma", "Tabulate the partial-sum maximum limits on a q grid"),
        ("interpolate", "Tabulate the interpolation-family rate over alphas"),
        ("simulate", "Run a Monte Carlo experiment from a config file"),
    )
    for name, help_text in specs:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", required=True, help="output path (simulate treats "
                       "it as a base for .csv/.json)")
        p.add_argument("--no-plot", action="store_true",
                       help="skip the PNG figure next to the output")
        if name == "simulate":
            p.add_argument("--seed", type=int, default=None,
                           help="override the config's master_seed")
            p.add_argument("--threads", type=int, default=_default_threads(),
                           help="replica worker threads (default: REDEM_THREADS or 1)")
        else:
            p.add_argument("--format", choices=("csv", "json"), default="csv",
                           help="table format (default: csv)")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.command)
        if args.command == "simulate":
            _cmd_simulate(cfg, args.out, args.seed, max(1, args.threads),
                          not args.no_plot)
        else:
            handler = {
                "rates": _cmd_rates,
                "limits": _cmd_limits,
                "critical-q": _cmd_critical_q,
                "er-gamma": _cmd_er_gamma,
                "interpolate": _cmd_interpolate,
            }[args.command]
            handler(cfg, args.out, args.format, not args.no_plot)
            print(f"wrote {args.out}")
    except (ConfigError, DomainError, PreconditionError, OutOfRangeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
