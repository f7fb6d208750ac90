"""Command-line front end.

Settings come from, in decreasing precedence: command-line flags, a
``--config`` file of ``key = value`` lines (``#`` starts a comment), the
``SU11_SEED`` environment variable (seed only), built-in defaults.

Each run writes its table (CSV) or figure (SVG) to ``--out``, prints one
summary line to stdout and exits 0. On failure it prints one JSON error line
to stderr and exits nonzero (2 for configuration errors, 3 for I/O errors,
1 otherwise).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import mcstats, theory
from .ensemble import EnsembleParams, sample_polynomial
from .errors import ConfigError, IoError
from .kacrice import PointConfig, kn_berezin, kn_correlation
from .rootfind import find_roots
from .svg import Axes, Series, write_svg
from .tables import (CORRELATION_COLUMNS, DENSITY_COLUMNS, DISTRIBUTION_COLUMNS, ZEROS_COLUMNS, Table, read_csv,
                     write_csv)

COMMANDS = ("simulate-density", "simulate-distribution", "simulate-correlation", "simulate-outer",
            "theory-table", "kacrice-eval", "compare")
THEORY_QUANTITIES = ("k2", "p", "P", "rho", "hannay", "pN")


def _positive_int(v):
    v = int(v)
    if v < 1:
        raise ValueError("must be >= 1")
    return v


def _nonneg_int(v):
    v = int(v)
    if v < 0:
        raise ValueError("must be >= 0")
    return v


def _unit_open(v):
    v = float(v)
    if not 0.0 < v < 1.0:
        raise ValueError("must lie in (0, 1)")
    return v


def _s_range(v):
    v = float(v)
    if not 0.0 < v <= 10.0:
        raise ValueError("must lie in (0, 10]")
    return v


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:step`` (stop included when it lands on the grid) or a comma list."""
    text = str(text).strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise ValueError("grid must be start:stop:step with step > 0 and stop >= start")
        start, stop, step = parts
        n = int(math.floor((stop - start) / step + 1e-9))
        # grids are given in decimal, so drop the float noise of start + k * step
        return np.round(start + step * np.arange(n + 1), 12)
    return np.array([float(p) for p in text.split(",") if p.strip()])


def parse_points(text: str) -> list[complex]:
    return [complex(p.strip().replace(" ", "")) for p in str(text).split(",") if p.strip()]


# name -> (converter, default, help)
SETTINGS = {
    "L": (_positive_int, 1, "ensemble parameter L >= 1"),
    "N": (_positive_int, 200, "polynomial degree"),
    "M": (_nonneg_int, 0, "truncation order for analytic samples (0 = automatic)"),
    "trials": (_nonneg_int, 1000, "number of Monte Carlo trials"),
    "seed": (_nonneg_int, 0, "base seed (default: SU11_SEED or 0)"),
    "bins": (_positive_int, 10, "number of histogram bins"),
    "s_range": (_s_range, 5.0, "half-width A of the s window [-A, A], A <= 10"),
    "s_grid": (str, "-5:5:0.5", "s grid as start:stop:step or comma list"),
    "r_grid": (str, "0.05:0.95:0.05", "r grid as start:stop:step or comma list"),
    "u_grid": (str, "0:4:0.25", "u grid for --what hannay"),
    "r_max": (_unit_open, mcstats.DEFAULT_R_MAX, "radius of the sampled disk for analytic statistics"),
    "L_list": (str, "", "theory-table: comma-separated L values, one column and curve each (overrides --L)"),
    "what": (str, "k2", "theory quantity: " + ", ".join(THEORY_QUANTITIES)),
    "points": (str, "0,0.5", "comma-separated complex points for kacrice-eval"),
    "method": (str, "permanent", "kacrice-eval method: permanent or berezin"),
    "workers": (_positive_int, 1, "worker processes"),
    "out": (str, "", "output path (default <command>.csv or .svg)"),
    "format": (str, "csv", "output format: csv or svg"),
    "zeros_out": (str, "", "simulate-density: also dump zeros (CSV, or SVG scatter if the name ends in .svg)"),
    "left": (str, "", "compare: left CSV"),
    "right": (str, "", "compare: right CSV"),
    "columns": (str, "", "compare: comma-separated columns (default: all shared except the first)"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="su11zeros", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="key = value settings file (overridden by flags)")
    for name, (_, default, help_) in SETTINGS.items():
        flag = "--" + name.replace("_", "-")
        p.add_argument(flag, dest=name, default=None, help=f"{help_} [default: {default}]")
    return p


def read_config_file(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (t.strip() for t in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in SETTINGS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def resolve_config(argv=None, environ=None) -> dict:
    """Merge flags, config file, environment and defaults into a validated dict."""
    environ = os.environ if environ is None else environ
    ns = build_parser().parse_args(argv)
    raw = {k: default for k, (_, default, _) in SETTINGS.items()}
    if environ.get("SU11_SEED") not in (None, ""):
        raw["seed"] = environ["SU11_SEED"]
    if ns.config:
        raw.update(read_config_file(ns.config))
    raw.update({k: v for k, v in vars(ns).items() if k in SETTINGS and v is not None})
    cfg = {"command": ns.command}
    for k, v in raw.items():
        conv = SETTINGS[k][0]
        try:
            cfg[k] = conv(v)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid {k}={v!r}: {exc}") from None
    if cfg["format"] not in ("csv", "svg"):
        raise ConfigError(f"invalid format={cfg['format']!r}: must be csv or svg")
    if cfg["what"] not in THEORY_QUANTITIES:
        raise ConfigError(f"invalid what={cfg['what']!r}: must be one of {', '.join(THEORY_QUANTITIES)}")
    if cfg["method"] not in ("permanent", "berezin"):
        raise ConfigError(f"invalid method={cfg['method']!r}")
    try:
        parse_L_list(cfg["L_list"])
    except ValueError as exc:
        raise ConfigError(f"invalid L_list={cfg['L_list']!r}: {exc}") from None
    for g in ("s_grid", "r_grid", "u_grid"):
        try:
            parse_grid(cfg[g])
        except ValueError as exc:
            raise ConfigError(f"invalid {g}={cfg[g]!r}: {exc}") from None
    if not cfg["out"]:
        cfg["out"] = f"{cfg['command']}.{cfg['format']}"
    return cfg


# ---------------------------------------------------------------- commands


def _write(cfg, table: Table, series: list[Series], axes: Axes):
    if cfg["format"] == "svg":
        write_svg(cfg["out"], series, axes)
    else:
        write_csv(table, cfg["out"])


def _zeros_dump(cfg):
    params = EnsembleParams(L=cfg["L"], N=cfg["N"], seed=cfg["seed"])
    rows = []
    for t in range(cfg["trials"]):
        zs = find_roots(sample_polynomial(params.for_trial(t)))
        rows += [(t, float(z.real), float(z.imag), float(r)) for z, r in zip(zs.zeros, zs.residuals)]
    table = Table(ZEROS_COLUMNS, rows)
    path = cfg["zeros_out"]
    if path.endswith(".svg"):
        re_, im_ = table.column("re"), table.column("im")
        theta = np.linspace(0, 2 * np.pi, 241)
        write_svg(path, [Series(re_, im_, mode="scatter", marker_size=1.0),
                         Series(np.cos(theta), np.sin(theta), label="|z| = 1", color="#888888")],
                  Axes(xlabel="Re z", ylabel="Im z", title=f"zeros, L={cfg['L']}, N={cfg['N']}",
                       equal_aspect=True, width=560, height=560))
    else:
        write_csv(table, path)


def cmd_simulate_density(cfg):
    params = EnsembleParams(L=cfg["L"], N=cfg["N"], seed=cfg["seed"])
    est = mcstats.scaled_density_estimate(params, cfg["trials"], cfg["s_range"], cfg["bins"], cfg["workers"])
    table = Table.from_columns(est.rows(), DENSITY_COLUMNS)
    series = [Series(est.s, est.p_theory, label="theory"),
              Series(est.s, est.p_hat, label="simulation", mode="scatter", yerr=est.std_err, marker_size=3)]
    _write(cfg, table, series, Axes(xlabel="s", ylabel="p(s)", title=f"scaled density, L={cfg['L']}, N={cfg['N']}"))
    if cfg["zeros_out"]:
        _zeros_dump(cfg)
    with np.errstate(invalid="ignore", divide="ignore"):
        dev = np.nanmax(np.abs(est.p_hat / est.p_theory - 1.0)) if est.trials else float("nan")
    return f"max_rel_dev={dev:.4g}"


def cmd_simulate_distribution(cfg):
    params = EnsembleParams(L=cfg["L"], N=cfg["N"], seed=cfg["seed"])
    trials = max(cfg["trials"], 1)
    est = mcstats.empirical_distribution(params, trials, parse_grid(cfg["s_grid"]), cfg["workers"])
    table = Table.from_columns(est.rows(), DISTRIBUTION_COLUMNS)
    series = [Series(est.s, est.P_theory, label="theory"),
              Series(est.s, est.P_hat, label="simulation", mode="scatter", yerr=est.std_err, marker_size=3)]
    _write(cfg, table, series, Axes(xlabel="s", ylabel="P(s)", title=f"distribution, L={cfg['L']}, N={cfg['N']}"))
    return f"max_abs_dev={np.max(np.abs(est.P_hat - est.P_theory)):.4g}"


def _correlation_output(cfg, est, title):
    table = Table.from_columns(est.rows(), CORRELATION_COLUMNS)
    series = [Series(est.tau, est.k2_theory, label=f"theory L={est.L_theory}"),
              Series(est.tau, est.k2_hat, label="simulation", mode="scatter", yerr=est.std_err, marker_size=3)]
    _write(cfg, table, series, Axes(xlabel="tau", ylabel="k2", title=title))
    with np.errstate(invalid="ignore", divide="ignore"):
        z = np.abs(est.k2_hat - est.k2_theory) / est.std_err
    z = z[np.isfinite(z)]
    return f"max_z={z.max():.3g}" if z.size else "max_z=nan"


def cmd_simulate_correlation(cfg):
    edges = mcstats.default_tau_edges(cfg["r_max"], cfg["bins"])
    est = mcstats.pair_correlation_estimate(cfg["L"], cfg["trials"], cfg["r_max"], edges, cfg["seed"],
                                            cfg["M"] or None, cfg["workers"])
    return _correlation_output(cfg, est, f"pair correlation, L={cfg['L']}")


def cmd_simulate_outer(cfg):
    params = EnsembleParams(L=cfg["L"], N=cfg["N"], seed=cfg["seed"])
    edges = mcstats.default_tau_edges(cfg["r_max"], cfg["bins"])
    res = mcstats.outer_zero_correlation(params, cfg["trials"], cfg["r_max"], edges, cfg["workers"])
    return _correlation_output(cfg, res.outer, f"mapped outer zeros, L={cfg['L']}, N={cfg['N']}")


def _theory_column(what, L, N, x):
    if what == "k2":
        return theory.k2_closed_form(L, x)
    if what == "rho":
        return np.array([theory.density_rho(L, v) for v in x])
    if what == "p":
        return theory.scaled_density(L, x)
    if what == "P":
        return theory.distribution_P(L, x)
    return np.array([theory.finite_N_density(L, N, 1.0 + v / N) / N**2 for v in x])


def parse_L_list(text: str) -> list[int]:
    out = [_positive_int(v) for v in str(text).split(",") if v.strip()]
    if len(set(out)) != len(out):
        raise ValueError("repeated L value")
    return out


def cmd_theory_table(cfg):
    what = cfg["what"]
    if what == "hannay":
        u = parse_grid(cfg["u_grid"])
        table = Table.from_columns({"u": u, "k2": theory.k2_hannay(u)})
        _write(cfg, table, [Series(u, table.column("k2"), label="k2, L -> infinity")],
               Axes(xlabel="u", ylabel="k2"))
        return f"rows={len(table)}"
    Ls = parse_L_list(cfg["L_list"]) or [cfg["L"]]
    name = "p_N" if what == "pN" else what
    if what in ("k2", "rho"):
        x = parse_grid(cfg["r_grid"])
        cols = {"r": x}
        if what == "k2":
            cols["tau"] = theory.tau_from_r(x)
        xl = "r" if what == "k2" else "|z|"
    else:
        x = parse_grid(cfg["s_grid"])
        cols = {"s": x}
        xl = "s"
    series = []
    for L in Ls:
        y = _theory_column(what, L, cfg["N"], x)
        cols[name if len(Ls) == 1 else f"{name}_L{L}"] = y
        series.append(Series(x, y, label=f"{what}, L={L}"))
    table = Table.from_columns(cols)
    _write(cfg, table, series, Axes(xlabel=xl, ylabel=what))
    return f"rows={len(table)}"


def cmd_kacrice_eval(cfg):
    pts = parse_points(cfg["points"])
    pc = PointConfig(np.array(pts, dtype=complex), cfg["L"])
    fn = kn_correlation if cfg["method"] == "permanent" else kn_berezin
    val = float(fn(pc))
    table = Table(("n", "k_n"), [(pc.n, val)])
    if cfg["format"] == "svg":
        raise ConfigError("kacrice-eval writes CSV only")
    write_csv(table, cfg["out"])
    return f"k_{pc.n}={val!r}"


def compare_tables(left: Table, right: Table, columns=None) -> Table:
    if len(left) != len(right):
        raise ConfigError(f"tables differ in row count ({len(left)} vs {len(right)})")
    if columns is None:
        columns = [c for c in left.columns[1:] if c in right.columns]
    rows = []
    for c in columns:
        if c not in left.columns or c not in right.columns:
            raise ConfigError(f"column {c!r} missing from one table")
        a, b = left.column(c).astype(float), right.column(c).astype(float)
        d = np.abs(a - b)
        with np.errstate(invalid="ignore", divide="ignore"):
            rel = np.where(b != 0, d / np.abs(b), np.where(d == 0, 0.0, np.inf))
        rows.append((c, float(np.nanmax(d)) if d.size else 0.0, float(np.nanmax(rel)) if d.size else 0.0))
    return Table(("column", "max_abs", "max_rel"), rows)


def cmd_compare(cfg):
    if not cfg["left"] or not cfg["right"]:
        raise ConfigError("compare needs --left and --right")
    left, right = read_csv(cfg["left"]), read_csv(cfg["right"])
    cols = [c.strip() for c in cfg["columns"].split(",") if c.strip()] or None
    report = compare_tables(left, right, cols)
    write_csv(report, cfg["out"])
    worst = max(report.rows, key=lambda t: t[1]) if report.rows else ("none", 0.0, 0.0)
    return f"max_abs={worst[1]:.4g} max_rel={worst[2]:.4g} column={worst[0]}"


HANDLERS = {
    "simulate-density": cmd_simulate_density,
    "simulate-distribution": cmd_simulate_distribution,
    "simulate-correlation": cmd_simulate_correlation,
    "simulate-outer": cmd_simulate_outer,
    "theory-table": cmd_theory_table,
    "kacrice-eval": cmd_kacrice_eval,
    "compare": cmd_compare,
}


def _error_line(exc: BaseException) -> str:
    return json.dumps({"error": type(exc).__name__, "message": str(exc)})


def run(cfg: dict) -> str:
    t0 = time.perf_counter()
    stat = HANDLERS[cfg["command"]](cfg)
    wall = time.perf_counter() - t0
    return f"command={cfg['command']} seed={cfg['seed']} wall={wall:.2f}s {stat} out={cfg['out']}"


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    if any(a in ("-h", "--help") for a in argv):
        build_parser().print_help()
        return 0
    try:
        cfg = resolve_config(argv)
        print(run(cfg))
        return 0
    except ConfigError as exc:
        print(_error_line(exc), file=sys.stderr)
        return 2
    except IoError as exc:
        print(_error_line(exc), file=sys.stderr)
        return 3
    except Exception as exc:  # module errors surface verbatim
        print(_error_line(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
