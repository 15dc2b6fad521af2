"""Command line interface: interval construction, testing, and experiments.

Configuration comes from an optional JSON document plus flags; flags win.
The seed falls back to the ``TAILMEAN_SEED`` environment variable when
neither source provides one. Every output file embeds the resolved
configuration and all derived seeds, and is byte-identical across reruns and
worker counts; wall-clock timing goes to stderr only.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 infeasible
cutoff.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from ._rng import derive_seed
from ._validation import (
    check_alpha,
    check_count,
    check_positive,
    check_seed,
    check_theta,
)
from .datagen import DistributionSpec, generate
from .exceptions import (
    DataFormatError,
    InfeasibleCutoffError,
    InvalidParameterError,
)
from .experiments import coverage_study, ga_study
from .gaussian import CovarianceModel, theory_diagnostics
from .resampling import ResamplePlan, empirical_quantile, resample_distribution
from .sci import build_sci, huber_estimate, test_mean
from .truncation import TruncationSpec

_EXIT_OK = 0
_EXIT_CONFIG = 2
_EXIT_DATA = 3
_EXIT_INFEASIBLE = 4

_DEFAULTS = {
    "alpha": 0.1,
    "theta": 1.0,
    "selection_constant": 1.0,
    "kappa": None,
    "n_permutations": 1000,
    "n_replicates": 100,
    "n_gaussian_draws": 2000,
    "seed": 0,
    "input": None,
    "mu0": None,
    "distribution": None,
    "diagnose": None,
}

# Flag destinations that map straight onto config keys.
_FLAG_KEYS = (
    "alpha",
    "theta",
    "selection_constant",
    "kappa",
    "n_permutations",
    "n_replicates",
    "n_gaussian_draws",
    "input",
    "mu0",
)


# ---------------------------------------------------------------------------
# data files
# ---------------------------------------------------------------------------


class _NotNumericRow(Exception):
    pass


def _parse_row(fields, line_no):
    row = []
    for field in fields:
        try:
            value = float(field)
        except ValueError:
            raise _NotNumericRow(field) from None
        if not math.isfinite(value):
            raise DataFormatError(f"line {line_no}: non-finite entry {field!r}")
        row.append(value)
    return row


def read_matrix_csv(path) -> np.ndarray:
    """Numeric CSV, one observation per row; a non-numeric first line is a header.

    Non-finite entries are data errors (reported with their line number), not
    header markers.
    """
    rows = []
    width = None
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        for line_no, fields in enumerate(reader, start=1):
            fields = [f.strip() for f in fields if f.strip() != ""]
            if not fields:
                continue
            try:
                rows.append(_parse_row(fields, line_no))
            except _NotNumericRow as exc:
                if line_no == 1:
                    continue  # header line
                raise DataFormatError(
                    f"line {line_no}: cannot parse {exc.args[0]!r} as a number"
                ) from None
            if width is None:
                width = len(rows[-1])
            elif len(rows[-1]) != width:
                raise DataFormatError(
                    f"line {line_no}: expected {width} columns, got {len(rows[-1])}"
                )
    if not rows:
        raise DataFormatError(f"{path}: no numeric rows found")
    return np.asarray(rows, dtype=float)


def read_vector_csv(path) -> np.ndarray:
    """A vector stored either as one row or one column."""
    matrix = read_matrix_csv(path)
    if 1 not in matrix.shape:
        raise DataFormatError(f"{path}: expected a single row or column of numbers")
    return matrix.ravel()


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_table_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as handle:
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(_fmt(v) for v in row) + "\n")


def write_matrix_csv(path, matrix) -> None:
    with open(path, "w", newline="") as handle:
        for row in matrix:
            handle.write(",".join(repr(float(v)) for v in row) + "\n")


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def write_json(path, payload) -> None:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True)
    with open(path, "w", newline="") as handle:
        handle.write(text + "\n")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def _load_config_file(path) -> dict:
    try:
        with open(path) as handle:
            loaded = json.load(handle)
    except OSError as exc:
        raise InvalidParameterError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidParameterError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(loaded, dict):
        raise InvalidParameterError(f"config {path} must hold a JSON object")
    unknown = set(loaded) - set(_DEFAULTS)
    if unknown:
        raise InvalidParameterError(f"unknown config keys: {sorted(unknown)}")
    return loaded


def resolve_config(args) -> dict:
    """Merge defaults, the JSON config, flags, and the seed fallback chain."""
    config = dict(_DEFAULTS)
    file_config = _load_config_file(args.config) if args.config else {}
    config.update(file_config)
    for key in _FLAG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value

    if args.seed is not None:
        config["seed"] = args.seed
    elif "seed" in file_config:
        config["seed"] = file_config["seed"]
    elif os.environ.get("TAILMEAN_SEED"):
        try:
            config["seed"] = int(os.environ["TAILMEAN_SEED"])
        except ValueError:
            raise InvalidParameterError(
                f"TAILMEAN_SEED must be an integer, got {os.environ['TAILMEAN_SEED']!r}"
            ) from None

    config["alpha"] = check_alpha(config["alpha"])
    config["theta"] = check_theta(config["theta"])
    config["selection_constant"] = check_positive(
        config["selection_constant"], "selection_constant"
    )
    if config["kappa"] is not None:
        config["kappa"] = check_positive(config["kappa"], "kappa")
    config["seed"] = check_seed(int(config["seed"]))
    config["n_permutations"] = check_count(int(config["n_permutations"]), "n_permutations")
    config["n_replicates"] = check_count(int(config["n_replicates"]), "n_replicates")
    config["n_gaussian_draws"] = check_count(
        int(config["n_gaussian_draws"]), "n_gaussian_draws"
    )
    return config


def _covariance_from_dict(entry, dim) -> CovarianceModel:
    if entry is None:
        return CovarianceModel.identity(dim)
    if not isinstance(entry, dict) or "kind" not in entry:
        raise InvalidParameterError("cov must be an object with a 'kind' field")
    kind = entry["kind"]
    if kind == "identity":
        return CovarianceModel.identity(dim)
    if kind == "equicorrelated":
        return CovarianceModel.equicorrelated(dim, float(entry["rho"]))
    if kind == "ar1":
        return CovarianceModel.ar1(dim, float(entry["rho"]))
    if kind == "explicit":
        return CovarianceModel.explicit(np.asarray(entry["matrix"], dtype=float))
    raise InvalidParameterError(f"unknown covariance kind {kind!r}")


def _distribution_from_config(config) -> DistributionSpec:
    entry = config.get("distribution")
    if not isinstance(entry, dict):
        raise InvalidParameterError(
            "this command needs a 'distribution' object in the JSON config"
        )
    try:
        family = entry["family"]
        n = int(entry["n"])
        p = int(entry["p"])
    except KeyError as exc:
        raise InvalidParameterError(f"distribution config missing {exc}") from None
    return DistributionSpec(
        family=family,
        n=n,
        p=p,
        seed=0,
        cov=(
            _covariance_from_dict(entry.get("cov"), p)
            if family in ("gaussian", "student_t")
            else None
        ),
        dof=entry.get("dof"),
        tail_exponent=entry.get("tail_exponent"),
        tail_start=entry.get("tail_start"),
    )


def _resolved_for_report(config, command) -> dict:
    # Worker count and output location are execution details, not semantics;
    # they stay out of the files so reruns compare byte for byte.
    report = {k: v for k, v in config.items() if v is not None}
    report["command"] = command
    return report


def _load_input_matrix(config, run_seed) -> tuple[np.ndarray, dict]:
    if config.get("input"):
        return read_matrix_csv(config["input"]), {}
    if config.get("distribution"):
        data_seed = derive_seed(run_seed, 0)
        spec = _distribution_from_config(config).with_seed(data_seed)
        return generate(spec), {"data_seed": data_seed}
    raise InvalidParameterError(
        "provide --input or a 'distribution' block in the JSON config"
    )


def _output_prefix(args) -> Path | None:
    if getattr(args, "output", None) is None:
        return None
    prefix = Path(args.output)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    return prefix


def _json_path(prefix: Path) -> Path:
    # Append rather than replace a suffix: prefixes may contain dots.
    return prefix.parent / (prefix.name + ".json")


def _csv_path(prefix: Path) -> Path:
    return prefix.parent / (prefix.name + ".csv")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _cmd_sci(args) -> int:
    config = resolve_config(args)
    prefix = _output_prefix(args)
    if prefix is None:
        raise InvalidParameterError("sci requires --output")
    X, seeds = _load_input_matrix(config, config["seed"])
    n, p = X.shape
    spec = TruncationSpec.from_data(
        X,
        theta=config["theta"],
        selection_constant=config["selection_constant"],
        kappa=config["kappa"],
    )
    plan_seed = derive_seed(config["seed"], 1)
    plan = ResamplePlan.for_sample_size(n, config["n_permutations"], plan_seed)
    dist = resample_distribution(X, spec, plan, workers=args.workers)
    cutoff = empirical_quantile(dist, config["alpha"])
    result = build_sci(X, spec, cutoff, config["alpha"])
    estimate = huber_estimate(X, spec).vector

    seeds["plan_seed"] = plan_seed
    rows = [
        (j, result.lower[j], result.upper[j], estimate[j]) for j in range(p)
    ]
    write_table_csv(_csv_path(prefix), ("index", "lower", "upper", "estimate"), rows)
    write_json(
        _json_path(prefix),
        {
            "config": _resolved_for_report(config, "sci"),
            "seeds": seeds,
            "results": {
                "n": n,
                "p": p,
                "kappa": spec.kappa,
                "moment_bound": spec.moment_bound,
                "cutoff": cutoff,
                "dropped_row": plan.dropped_row,
                "mean_width": float(np.mean(result.width)),
            },
        },
    )
    print(f"sci: {p} intervals, kappa={spec.kappa:.6g}, cutoff={cutoff:.6g}")
    return _EXIT_OK


def _cmd_test(args) -> int:
    config = resolve_config(args)
    if not config.get("mu0"):
        raise InvalidParameterError("test requires --mu0 with the hypothesized mean")
    X, seeds = _load_input_matrix(config, config["seed"])
    mu0 = read_vector_csv(config["mu0"])
    spec = TruncationSpec.from_data(
        X,
        theta=config["theta"],
        selection_constant=config["selection_constant"],
        kappa=config["kappa"],
    )
    plan_seed = derive_seed(config["seed"], 1)
    plan = ResamplePlan.for_sample_size(X.shape[0], config["n_permutations"], plan_seed)
    dist = resample_distribution(X, spec, plan, workers=args.workers)
    cutoff = empirical_quantile(dist, config["alpha"])
    decision = test_mean(X, spec, mu0, cutoff)

    seeds["plan_seed"] = plan_seed
    payload = {
        "config": _resolved_for_report(config, "test"),
        "seeds": seeds,
        "results": {
            "statistic": decision.statistic,
            "threshold": decision.threshold,
            "reject": decision.reject,
            "kappa": spec.kappa,
            "cutoff": cutoff,
        },
    }
    prefix = _output_prefix(args)
    if prefix is not None:
        write_json(_json_path(prefix), payload)
    else:
        print(json.dumps(_jsonable(payload), indent=2, sort_keys=True))
    print(
        f"test: statistic={decision.statistic:.6g} threshold={decision.threshold:.6g} "
        f"reject={decision.reject}"
    )
    return _EXIT_OK


def _cmd_coverage(args) -> int:
    config = resolve_config(args)
    prefix = _output_prefix(args)
    if prefix is None:
        raise InvalidParameterError("coverage requires --output")
    base_spec = _distribution_from_config(config)
    report = coverage_study(
        base_spec,
        alpha=config["alpha"],
        theta=config["theta"],
        selection_constant=config["selection_constant"],
        kappa=config["kappa"],
        n_permutations=config["n_permutations"],
        n_replicates=config["n_replicates"],
        seed=config["seed"],
        workers=args.workers,
    )
    header = (
        "replicate",
        "data_seed",
        "plan_seed",
        "kappa",
        "moment_bound",
        "cutoff",
        "covered",
        "mean_width",
    )
    rows = [tuple(rec[k] for k in header) for rec in report["records"]]
    write_table_csv(_csv_path(prefix), header, rows)
    write_json(
        _json_path(prefix),
        {
            "config": _resolved_for_report(config, "coverage"),
            "results": report["summary"],
        },
    )
    summary = report["summary"]
    print(
        f"coverage: {summary['coverage']:.4f} "
        f"(nominal {summary['nominal']:.4f}, se {summary['coverage_se']:.4f})"
    )
    return _EXIT_OK


def _cmd_ga_check(args) -> int:
    config = resolve_config(args)
    prefix = _output_prefix(args)
    if prefix is None:
        raise InvalidParameterError("ga-check requires --output")
    base_spec = _distribution_from_config(config)
    report = ga_study(
        base_spec,
        theta=config["theta"],
        selection_constant=config["selection_constant"],
        kappa=config["kappa"],
        n_replicates=config["n_replicates"],
        n_gaussian_draws=config["n_gaussian_draws"],
        seed=config["seed"],
        workers=args.workers,
    )
    header = (
        "replicate",
        "data_seed",
        "kappa",
        "moment_bound",
        "stat_truncated",
        "stat_plain",
    )
    rows = [tuple(rec[k] for k in header) for rec in report["records"]]
    write_table_csv(_csv_path(prefix), header, rows)
    write_json(
        _json_path(prefix),
        {
            "config": _resolved_for_report(config, "ga-check"),
            "results": report["summary"],
        },
    )
    summary = report["summary"]
    print(
        f"ga-check: ks_truncated={summary['ks_truncated']:.4f} "
        f"ks_plain={summary['ks_plain']:.4f}"
    )
    return _EXIT_OK


def _cmd_generate(args) -> int:
    config = resolve_config(args)
    prefix = _output_prefix(args)
    if prefix is None:
        raise InvalidParameterError("generate requires --output")
    spec = _distribution_from_config(config).with_seed(config["seed"])
    matrix = generate(spec)
    write_matrix_csv(_csv_path(prefix), matrix)
    write_json(
        _json_path(prefix),
        {
            "config": _resolved_for_report(config, "generate"),
            "results": {"n": spec.n, "p": spec.p, "seed": spec.seed},
        },
    )
    print(f"generate: wrote {spec.n}x{spec.p} matrix to {_csv_path(prefix)}")
    return _EXIT_OK


def _cmd_diagnose(args) -> int:
    config = resolve_config(args)
    entry = config.get("diagnose")
    if not isinstance(entry, dict):
        raise InvalidParameterError(
            "diagnose needs a 'diagnose' object with n, p, moment_bound "
            "(and optionally tail_moment_order) in the JSON config"
        )
    try:
        n = int(entry["n"])
        p = int(entry["p"])
        moment_bound = float(entry["moment_bound"])
    except KeyError as exc:
        raise InvalidParameterError(f"diagnose config missing {exc}") from None
    result = theory_diagnostics(
        n,
        p,
        config["theta"],
        moment_bound,
        tail_moment_order=entry.get("tail_moment_order"),
    )
    payload = {
        "config": _resolved_for_report(config, "diagnose"),
        "results": {
            "bound_proxy": result.bound_proxy,
            "ga_condition_ratio": result.ga_condition_ratio,
            "plain_mean_condition_ratio": result.plain_mean_condition_ratio,
        },
    }
    prefix = _output_prefix(args)
    if prefix is not None:
        write_json(_json_path(prefix), payload)
    else:
        print(json.dumps(_jsonable(payload), indent=2, sort_keys=True))
    return _EXIT_OK


_COMMANDS = {
    "sci": _cmd_sci,
    "test": _cmd_test,
    "coverage": _cmd_coverage,
    "ga-check": _cmd_ga_check,
    "generate": _cmd_generate,
    "diagnose": _cmd_diagnose,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tailmean",
        description="Simultaneous confidence intervals for high dimensional means "
        "from heavy-tailed data.",
    )
    parser.add_argument("--version", action="version", version=f"tailmean {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--config", help="JSON configuration file")
        sp.add_argument("--output", help="output path prefix (.json/.csv are appended)")
        sp.add_argument("--alpha", type=float, help="miscoverage level in (0, 1)")
        sp.add_argument("--theta", type=float, help="moment order offset in (0, 1]")
        sp.add_argument(
            "--kappa-const",
            dest="selection_constant",
            type=float,
            help="multiplier of the truncation level rule",
        )
        sp.add_argument("--kappa", type=float, help="explicit truncation level override")
        sp.add_argument(
            "--perms", dest="n_permutations", type=int, help="half-sampling replicates"
        )
        sp.add_argument("--seed", type=int, help="root seed (fallback: TAILMEAN_SEED)")
        sp.add_argument(
            "--reps", dest="n_replicates", type=int, help="experiment replicates"
        )
        sp.add_argument(
            "--gauss-draws",
            dest="n_gaussian_draws",
            type=int,
            help="Gaussian reference draws",
        )
        sp.add_argument("--workers", type=int, default=1, help="worker threads")
        sp.add_argument("--input", help="CSV observation matrix, one row per observation")
        sp.add_argument("--mu0", help="CSV file with the hypothesized mean vector")

    for name, help_text in (
        ("sci", "build simultaneous confidence intervals"),
        ("test", "sup-norm test of a hypothesized mean vector"),
        ("coverage", "replicated coverage study on synthetic data"),
        ("ga-check", "Kolmogorov-distance check against the Gaussian reference"),
        ("generate", "write a synthetic dataset to CSV"),
        ("diagnose", "growth-condition diagnostics only"),
    ):
        add_common(sub.add_parser(name, help=help_text))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        code = _COMMANDS[args.command](args)
    except InfeasibleCutoffError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_INFEASIBLE
    except DataFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_DATA
    except (InvalidParameterError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    print(
        f"[tailmean] {args.command} finished in {time.perf_counter() - started:.2f}s",
        file=sys.stderr,
    )
    return code


if __name__ == "__main__":
    sys.exit(main())
