"""
Command-line front end.

    misslogit fit      --input data.csv --schema schema.json [--estimators all]
    misslogit simulate --config configs/study1.json [--workers 8]
    misslogit diagnose --input data.csv --schema schema.json

Exit status: 0 when every fit converged, 1 on a library error (a JSON
error record is written to stderr), 2 when a fit did not converge.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path
from typing import List, Optional, Sequence

import pandas as pd

from .. import __version__
from ..config import ESTIMATOR_LABELS, VARIANCE_CHOICES, EstimationConfig
from ..data.dataset import Dataset
from ..data.loader import load_csv
from ..data.schema import ColumnSchema
from ..errors import ConfigError, MissLogitError
from ..estimators.context import FitContext
from ..estimators.executor import EstimationExecutor
from ..imputation.pools import fallback_report
from ..selection.diagnostics import mar_check
from ..simulation.config import StudyConfig
from ..simulation.metrics import re_table
from ..simulation.presets import study_config
from ..simulation.runner import run_study
from ..utils.hashing import canonical_hash
from ..utils.logging import configure_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2

DEFAULT_ESTIMATORS = ("CC", "SIPW", "MI1", "MI2")


# ============================================================
# OUTPUT HELPERS
# ============================================================

def _header(seed: int, config_hash: str, *extra: str) -> List[str]:
    return [f"misslogit {__version__}", f"seed={seed}", f"config_hash={config_hash}", *extra]


def _write_frame(frame: pd.DataFrame, path: Path, header: Sequence[str]) -> None:
    with path.open("w") as f:
        for line in header:
            f.write(f"# {line}\n")
        frame.to_csv(f, index=False, float_format="%.6f", lineterminator="\n")
    logger.info("[CLI] Wrote %s | rows=%d", path, len(frame))


def _error_record(error: MissLogitError) -> str:
    return json.dumps({
        "status": "error",
        "kind": type(error).__name__,
        "message": str(error),
        "row": getattr(error, "row", None),
        "field": getattr(error, "field", None) or getattr(error, "column", None),
    })


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_estimators(raw: Optional[str], dataset: Optional[Dataset] = None) -> Optional[tuple]:
    """
    Comma-separated labels, or ``all``. ``all`` includes FULL only when
    the dataset has no missing blocks.
    """
    if raw is None:
        return None

    if raw.strip().lower() == "all":
        if dataset is not None and not dataset.complete_mask.all():
            return tuple(label for label in ESTIMATOR_LABELS if label != "FULL")
        return ESTIMATOR_LABELS

    labels = tuple(label.strip().upper() for label in raw.split(",") if label.strip())
    unknown = [label for label in labels if label not in ESTIMATOR_LABELS]
    if unknown:
        raise ConfigError(f"Unknown estimators: {unknown}", field="estimators")
    return labels


def _load(args: argparse.Namespace):
    schema = ColumnSchema.load(args.schema)
    return schema, load_csv(args.input, schema)


# ============================================================
# COMMANDS
# ============================================================

def cmd_fit(args: argparse.Namespace) -> int:
    schema, dataset = _load(args)

    config = EstimationConfig(
        imputations=args.imputations,
        variance=args.variance,
        estimators=_parse_estimators(args.estimators, dataset) or DEFAULT_ESTIMATORS,
        seed=args.seed,
    )
    config_hash = canonical_hash({
        "schema": schema.model_dump(mode="json"),
        "estimation": asdict(config),
    })

    outcomes = EstimationExecutor().run(FitContext(dataset, config))
    names = dataset.layout.coefficient_names

    rows = [row for outcome in outcomes for result in outcome.results for row in result.to_rows(names)]
    frame = pd.DataFrame(rows, columns=["estimator", "coefficient", "est", "ase", "z", "p_value", "converged"])

    out = _out_dir(args.out)
    _write_frame(frame, out / "coefficients.csv", _header(config.seed, config_hash, f"n={dataset.n}"))

    if not frame.empty:
        wide = pd.concat(
            {
                label: part.set_index("coefficient")[["est", "ase", "z", "p_value"]]
                for label, part in frame.groupby("estimator", sort=False)
            },
            axis=1,
        )
        print(wide.loc[names].to_string(float_format=lambda v: f"{v:.4f}"))

    failures = [o for o in outcomes if not o.is_success]
    for outcome in failures:
        print(json.dumps({
            "status": "error",
            "kind": outcome.error_kind,
            "message": f"{outcome.estimator}: {outcome.error}",
            "row": None,
            "field": "estimators",
        }), file=sys.stderr)

    if failures:
        return EXIT_ERROR
    if not all(o.converged for o in outcomes):
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _study_from_args(args: argparse.Namespace) -> StudyConfig:
    if args.config:
        config = StudyConfig.load(args.config)
    elif args.study:
        config = study_config(args.study, args.variant)
    else:
        raise ConfigError("simulate needs --config or --study", field="config")

    update = {
        "seed": args.seed,
        "reps": args.reps,
        "n": args.n,
        "M": args.imputations,
        "variance": args.variance,
        "estimators": _parse_estimators(args.estimators),
    }
    update = {k: v for k, v in update.items() if v is not None}
    if not update:
        return config
    return StudyConfig.from_dict({**config.model_dump(mode="json"), **update})


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _study_from_args(args)

    logger.info(
        "[CLI] Simulating %s | reps=%d | scenarios=%d | workers=%d",
        config.name,
        config.reps,
        len(config.scenarios()),
        args.workers,
    )

    metrics = run_study(config, workers=args.workers)
    header = _header(config.seed, config.config_hash, f"study={config.name}", f"reps={config.reps}")

    out = _out_dir(args.out)
    metrics.to_csv(out / "metrics.csv", header)

    text = metrics.to_text()
    ratios = re_table(metrics)
    if ratios.shape[1] > 2:
        _write_frame(ratios, out / "re.csv", header)
        text += "\nRelative efficiency\n" + ratios.to_string(index=False, float_format=lambda v: f"{v:.4f}") + "\n"

    (out / "metrics.txt").write_text("\n".join(f"# {line}" for line in header) + "\n" + text)
    print(text, end="")

    return EXIT_NOT_CONVERGED if metrics.warnings else EXIT_OK


def cmd_diagnose(args: argparse.Namespace) -> int:
    schema, dataset = _load(args)
    context = FitContext(dataset, EstimationConfig(estimators=(), seed=args.seed))
    header = _header(args.seed, schema.schema_hash, f"n={dataset.n}")
    out = _out_dir(args.out)

    layout = dataset.layout
    _write_frame(context.table.to_frame([*layout.z, *layout.w]), out / "selection.csv", header)

    counts = dataset.pattern_counts()
    fractions = dataset.pattern_fractions()
    patterns = pd.DataFrame({
        "pattern": list(counts),
        "count": list(counts.values()),
        "fraction": [fractions[k] for k in counts],
    })
    _write_frame(patterns, out / "patterns.csv", header)

    events = fallback_report(context.index)
    fallbacks = pd.DataFrame(
        [e.to_dict() for e in events],
        columns=["record", "method", "block", "level", "key"],
    )
    _write_frame(fallbacks, out / "fallbacks.csv", header)

    check = mar_check(dataset)
    _write_frame(check.coefficients.reset_index(names="regressor"), out / "mar_check.csv", header)

    print(patterns.to_string(index=False, float_format=lambda v: f"{v:.4f}"))
    print(f"\nstrata={len(context.table)} | fallbacks={len(events)} | complete_fraction={check.complete_fraction:.4f}")
    if check.llr_pvalue is not None:
        print(f"complete-case indicator vs (Y, Z, W): LLR p-value={check.llr_pvalue:.4f}")
    if check.note:
        print(check.note)

    return EXIT_OK


# ============================================================
# PARSER
# ============================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="misslogit",
        description="Logistic regression with covariate blocks missing at random.",
    )
    parser.add_argument("--version", action="version", version=f"misslogit {__version__}")
    parser.add_argument("--log-level", default="WARNING")

    sub = parser.add_subparsers(dest="command", required=True)

    def add_data_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--input", required=True, help="CSV dataset")
        p.add_argument("--schema", required=True, help="column-role schema JSON")

    def add_estimation_args(p: argparse.ArgumentParser, defaults: bool) -> None:
        p.add_argument("--estimators", default=None, help="comma-separated labels or 'all'")
        p.add_argument("--variance", choices=VARIANCE_CHOICES, default="both" if defaults else None)
        p.add_argument("--imputations", type=int, default=15 if defaults else None, help="M")

    fit = sub.add_parser("fit", help="fit estimators on a CSV dataset")
    add_data_args(fit)
    add_estimation_args(fit, defaults=True)
    fit.add_argument("--seed", type=int, default=20240101)
    fit.add_argument("--out", default=".")
    fit.set_defaults(handler=cmd_fit)

    simulate = sub.add_parser(
        "simulate",
        help="run a Monte Carlo study",
        epilog=(
            "exit status: 0 on success; 2 when some estimator failed or did not converge "
            "in more than 10% of replications; 1 on an input or configuration error. "
            "Failures at or below 10% still exit 0 and are only counted in the n_failed column."
        ),
    )
    simulate.add_argument("--config", help="study config JSON")
    simulate.add_argument("--study", type=int, choices=(1, 2, 3, 4), help="bundled preset instead of --config")
    simulate.add_argument("--variant", default=None, help="preset sweep entry, e.g. a2")
    add_estimation_args(simulate, defaults=False)
    simulate.add_argument("--seed", type=int, default=None)
    simulate.add_argument("--reps", type=int, default=None)
    simulate.add_argument("--n", type=int, default=None)
    simulate.add_argument("--workers", type=int, default=1)
    simulate.add_argument("--out", default=".")
    simulate.set_defaults(handler=cmd_simulate)

    diagnose = sub.add_parser("diagnose", help="dump selection table, patterns and pool fallbacks")
    add_data_args(diagnose)
    diagnose.add_argument("--seed", type=int, default=20240101)
    diagnose.add_argument("--out", default=".")
    diagnose.set_defaults(handler=cmd_diagnose)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    try:
        return args.handler(args)
    except MissLogitError as e:
        logger.error("[CLI] %s failed | kind=%s | error=%s", args.command, type(e).__name__, e)
        print(_error_record(e), file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
