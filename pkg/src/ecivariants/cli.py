"""
Command line front end.

    ecivariants ingest    --exports X.csv --macro M.csv --out DIR
    ecivariants compute   --exports X.csv --variant 729 --year 1995 --out DIR
    ecivariants sweep     --exports X.csv --macro M.csv --years 1985:2000 --out DIR
    ecivariants baseline  --trials 1000 --seed 1 [--macro M.csv --year 1995]
    ecivariants rankings  --exports X.csv --variant 729 --year 1995 --top 10

Every subcommand accepts ``--config FILE``, a ``key = value`` file using the
long flag names (``p-threshold = 0.01``); flags given on the command line win.
Exit status: 0 success, 1 data or runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from importlib.metadata import PackageNotFoundError, version

from . import econometrics, matrix_builder, metric_engine, sweep, synthetic, trade_data

log = logging.getLogger("ecivariants")

MODE_CHOICES = ("binary", "share", "raw")

DEFAULTS = {
    "mode": "binary",
    "horizon": 10,
    "years": None,
    "p_threshold": 0.01,
    "fractions": "0.9,0.8",
    "max_iterations": 200,
    "tolerance": 1e-10,
    "degeneracy": 1e-12,
    "threads": 1,
    "trials": 1000,
    "countries": 100,
    "top": 10,
    "bottom": 10,
    "seed": 0,
    "out": ".",
}

# settings that change no output byte; kept out of the provenance echo
NOT_ECHOED = {"out", "threads", "config", "command", "verbose"}


class UsageError(Exception):
    pass


def _version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


def _variant(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("variant must be an integer in 1..729") from None
    if not 1 <= v <= metric_engine.N_VARIANTS:
        raise argparse.ArgumentTypeError("variant must be in 1..729, got %d" % v)
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a positive integer, got %r" % text) from None
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer, got %d" % v)
    return v


def _year_range(text: str) -> tuple[int, int]:
    try:
        a, b = text.split(":")
        a, b = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError("years must look like A:B, got %r" % text) from None
    if b < a:
        raise argparse.ArgumentTypeError("empty year range %s" % text)
    return a, b


def _fractions(text: str) -> tuple[float, ...]:
    try:
        out = tuple(float(t) for t in str(text).split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError("fractions must be comma separated numbers") from None
    if not out or any(not 0 < f <= 1 for f in out):
        raise argparse.ArgumentTypeError("fractions must lie in (0, 1]")
    return out


def _probability(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("p threshold must be in (0, 1)")
    return v


CONVERTERS = {
    "variant": _variant,
    "year": int,
    "horizon": _positive_int,
    "years": _year_range,
    "p_threshold": _probability,
    "fractions": _fractions,
    "max_iterations": _positive_int,
    "tolerance": float,
    "degeneracy": float,
    "threads": _positive_int,
    "trials": _positive_int,
    "countries": _positive_int,
    "top": int,
    "bottom": int,
    "min_count": int,
    "seed": int,
}

CONFIG_KEYS = set(DEFAULTS) | set(CONVERTERS) | {"exports", "macro"}


def read_config(path: str) -> dict:
    """Parse a ``key = value`` file; keys use flag spelling, '#' starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError("cannot read config %s: %s" % (path, exc.strerror)) from None
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError("%s:%d: expected key = value" % (path, no))
        key, value = (t.strip() for t in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in CONFIG_KEYS:
            raise UsageError("%s:%d: unknown setting %r" % (path, no, key))
        conv = CONVERTERS.get(key, str)
        try:
            out[key] = conv(value)
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise UsageError("%s:%d: %s: %s" % (path, no, key, exc)) from None
    return out


@dataclass
class RunConfig:
    command: str
    settings: dict = field(default_factory=dict)
    known: frozenset = frozenset()  # flags this subcommand accepts

    def __getattr__(self, name):
        try:
            return self.settings[name]
        except KeyError:
            raise AttributeError(name) from None

    def get(self, name, default=None):
        v = self.settings.get(name)
        return default if v is None else v

    def require(self, *names):
        missing = [n for n in names if self.settings.get(n) is None]
        if missing:
            raise UsageError("%s needs %s" % (self.command, ", ".join("--" + n.replace("_", "-") for n in missing)))

    @property
    def mode(self) -> str:
        return matrix_builder.MODE_ALIASES[self.settings["mode"]]

    @property
    def iteration_options(self) -> metric_engine.IterationOptions:
        return metric_engine.IterationOptions(
            max_iterations=self.settings["max_iterations"],
            convergence_tolerance=self.settings["tolerance"],
            degeneracy_threshold=self.settings["degeneracy"],
        )


def resolve(args: argparse.Namespace) -> RunConfig:
    given = {k: v for k, v in vars(args).items() if v is not None}
    settings = dict(DEFAULTS)
    if args.config:
        settings.update(read_config(args.config))
    settings.update(given)
    for key in ("fractions",):
        if isinstance(settings.get(key), str):
            settings[key] = _fractions(settings[key])
    if settings.get("mode") not in MODE_CHOICES + ("binary_rca",):
        raise UsageError("mode must be one of %s" % ", ".join(MODE_CHOICES))
    known = frozenset(vars(args))
    return RunConfig(args.command, {k: v for k, v in settings.items() if k in known}, known)


def _digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def provenance(cfg: RunConfig) -> list[str]:
    lines = ["ecivariants %s %s" % (_version(), cfg.command)]
    for key in ("exports", "macro"):
        path = cfg.settings.get(key)
        if path:
            lines.append("input %s=%s sha256=%s" % (key, os.path.basename(path), _digest(path)))
    echo = []
    for key in sorted(cfg.settings):
        if key in NOT_ECHOED or key in ("exports", "macro"):
            continue
        v = cfg.settings[key]
        if v is None:
            continue
        if isinstance(v, tuple):
            v = ":".join(map(str, v)) if key == "years" else ",".join(map(repr, v))
        echo.append("%s=%s" % (key, v))
    lines.append("config " + " ".join(echo))
    return lines


def _open_input(path: str):
    try:
        return open(path, "rb")
    except OSError as exc:
        raise trade_data.DataError("cannot open %s: %s" % (path, exc.strerror)) from None


def _out_dir(cfg: RunConfig) -> str:
    out = cfg.get("out", ".")
    os.makedirs(out, exist_ok=True)
    return out


def _write(path: str, writer, *args, **kwargs):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer(*args, fh, **kwargs)
    return path


def _load_year(cfg: RunConfig, year: int) -> trade_data.ExportMatrix:
    with _open_input(cfg.exports) as fh:
        return trade_data.load_exports(fh, year)


def cmd_ingest(cfg: RunConfig) -> int:
    if not cfg.get("exports") and not cfg.get("macro"):
        raise UsageError("ingest needs --exports and/or --macro")
    prov = provenance(cfg)
    out = _out_dir(cfg)
    if cfg.get("exports"):
        with _open_input(cfg.exports) as fh:
            by_year = trade_data.load_exports_by_year(fh)
        path = _write(os.path.join(out, "exports.csv"), trade_data.write_exports, by_year.values(), provenance=prov)
        for y, m in by_year.items():
            print("exports %d: %d countries, %d products, %d flows" % (y, len(m.countries), len(m.products), m.values.nnz))
        print("wrote %s" % path)
    if cfg.get("macro"):
        with _open_input(cfg.macro) as fh:
            panel = trade_data.load_macro(fh)
        path = _write(os.path.join(out, "macro.csv"), trade_data.write_macro, panel, provenance=prov)
        print("macro: %d records, %d countries, years %s" % (
            len(panel), len(panel.countries), "%d-%d" % (panel.years[0], panel.years[-1]) if len(panel) else "none"))
        print("wrote %s" % path)
    return 0


def cmd_compute(cfg: RunConfig) -> int:
    cfg.require("exports", "variant", "year")
    x = _load_year(cfg, cfg.year)
    w = matrix_builder.build_membership(x, cfg.mode)
    scores = metric_engine.iterate_variant(w, cfg.variant, cfg.iteration_options)
    path = os.path.join(_out_dir(cfg), "scores_v%03d_%d_%s.csv" % (cfg.variant, cfg.year, w.mode))
    _write(path, metric_engine.write_scores, scores, provenance=provenance(cfg))
    print("variant %d %s year %d mode %s: %s after %d iterations%s" % (
        scores.index, scores.variant, scores.year, scores.mode, scores.status, scores.iterations_used,
        " (degenerate)" if scores.degenerate else ""))
    print("wrote %s" % path)
    return 0


def cmd_rankings(cfg: RunConfig) -> int:
    cfg.require("exports", "variant", "year")
    x = _load_year(cfg, cfg.year)
    w = matrix_builder.build_membership(x, cfg.mode)
    scores = metric_engine.iterate_variant(w, cfg.variant, cfg.iteration_options)
    ranked = sweep.export_rankings(scores, cfg.top, cfg.bottom)
    path = os.path.join(_out_dir(cfg), "rankings_v%03d_%d_%s.csv" % (cfg.variant, cfg.year, w.mode))
    _write(path, sweep.write_rankings, ranked, provenance=provenance(cfg))
    for name, rows in (("top", ranked.top), ("bottom", ranked.bottom)):
        print("%s: %s" % (name, " ".join("%d.%s(%.2f)" % (r.rank, r.country, r.value) for r in rows)))
    print("wrote %s" % path)
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    cfg.require("exports", "macro")
    with _open_input(cfg.exports) as fh:
        by_year = trade_data.load_exports_by_year(fh)
    with _open_input(cfg.macro) as fh:
        panel = trade_data.load_macro(fh)
    years = None
    if cfg.get("years"):
        a, b = cfg.years
        years = list(range(a, b + 1))
    report = sweep.run_sweep(by_year, panel, years, cfg.horizon, cfg.mode, cfg.iteration_options,
                             threads=cfg.threads)
    prov = provenance(cfg)
    summary = sweep.headline(report, cfg.fractions, cfg.p_threshold, cfg.get("min_count"))
    out = _out_dir(cfg)
    written = [_write(os.path.join(out, "report.json"), sweep.write_report, report,
                      extra={"provenance": prov, "headline": summary})]
    for y in report.start_years:
        written.append(_write(os.path.join(out, "landscape_%d.csv" % y), sweep.write_landscape, report, y,
                              provenance=prov))
    counts = sweep.significance_counts(report, cfg.p_threshold)
    written.append(_write(os.path.join(out, "significance_counts.csv"), sweep.write_counts, counts, provenance=prov))
    written.append(_write(os.path.join(out, "pattern_robust.csv"), sweep.write_pattern,
                          sweep.export_pattern(summary["robust_variants"]), provenance=prov))
    print("start years: %s" % " ".join(map(str, report.start_years)))
    for y, why in sorted(report.dropped_years.items()):
        print("dropped %d: %s" % (y, why))
    for f, stats in summary["within"].items():
        print("within %g%% of max: pair fraction %.3f, variants always within %.3f, ECI share %.2f" % (
            100 * float(f), stats["pair_fraction"], stats["variant_share_always"], stats["reference_share"] or 0.0))
    print("robust variants (positive, p < %g in >= %d of %d years): %d" % (
        cfg.p_threshold, summary["min_count"], len(report.start_years), summary["robust_count"]))
    for path in written:
        print("wrote %s" % path)
    return 0


def cmd_baseline(cfg: RunConfig) -> int:
    panel, year = None, cfg.get("year")
    if cfg.get("macro"):
        cfg.require("year")
        with _open_input(cfg.macro) as fh:
            panel = trade_data.load_macro(fh)
    result = synthetic.null_baseline(cfg.trials, n_countries=cfg.countries, seed=cfg.seed,
                                     p_threshold=cfg.p_threshold, panel=panel, start_year=year,
                                     horizon=cfg.horizon)
    doc = {
        "provenance": provenance(cfg),
        "trials": result.trials,
        "successes": result.successes,
        "fraction": result.fraction,
        "p_threshold": result.p_threshold,
        "n_countries": result.n_countries,
    }
    path = os.path.join(_out_dir(cfg), "baseline.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print("random scores: %d of %d fits positive at p < %g (fraction %.4f)" % (
        result.successes, result.trials, result.p_threshold, result.fraction))
    print("wrote %s" % path)
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "compute": cmd_compute,
    "sweep": cmd_sweep,
    "baseline": cmd_baseline,
    "rankings": cmd_rankings,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file with defaults for any flag")
    common.add_argument("--exports", help="exports file year,country,product,value")
    common.add_argument("--macro", help="macro file year,country,gdp_pc,population")
    common.add_argument("--mode", choices=MODE_CHOICES, help="weight matrix (default binary)")
    common.add_argument("--horizon", type=_positive_int, help="growth window in years (default 10)")
    common.add_argument("--out", help="output directory (default .)")
    common.add_argument("--max-iterations", dest="max_iterations", type=_positive_int)
    common.add_argument("--tolerance", type=float, help="z-score correlation tolerance (default 1e-10)")
    common.add_argument("--degeneracy", type=float, help="coefficient of variation threshold (default 1e-12)")
    common.add_argument("--p-threshold", dest="p_threshold", type=_probability, help="default 0.01")
    common.add_argument("--seed", type=int)
    common.add_argument("-v", "--verbose", action="store_true", default=None)

    parser = argparse.ArgumentParser(prog="ecivariants", description="Sweeps over 729 economic complexity variants.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ingest", parents=[common], help="validate and canonicalize input files")
    p = sub.add_parser("compute", parents=[common], help="scores of one variant for one year")
    p.add_argument("--variant", type=_variant)
    p.add_argument("--year", type=int)
    p = sub.add_parser("sweep", parents=[common], help="all variants over a range of start years")
    p.add_argument("--years", type=_year_range, help="start years A:B inclusive (default: all usable)")
    p.add_argument("--fractions", type=_fractions, help="within-of-max fractions (default 0.9,0.8)")
    p.add_argument("--min-count", dest="min_count", type=int, help="significant years needed to count as robust")
    p.add_argument("--threads", type=_positive_int, help="start years processed concurrently")
    p = sub.add_parser("baseline", parents=[common], help="significance rate of random scores")
    p.add_argument("--trials", type=_positive_int, help="default 1000")
    p.add_argument("--countries", type=_positive_int, help="countries per synthetic trial (default 100)")
    p.add_argument("--year", type=int, help="start year when --macro is given")
    p = sub.add_parser("rankings", parents=[common], help="top and bottom countries of one variant")
    p.add_argument("--variant", type=_variant)
    p.add_argument("--year", type=int)
    p.add_argument("--top", type=int)
    p.add_argument("--bottom", type=int)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print("ecivariants: error: %s" % exc, file=sys.stderr)
        return 2
    except (trade_data.DataError, econometrics.RankDeficientError, metric_engine.NonFiniteIterationError,
            ValueError, OSError) as exc:
        print("ecivariants: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
