import argparse
import json
import logging
import os
import sys

from src.models.anonymization import AnonymizationConfig
from src.models.cluster_model import FuzzinessParams
from src.models.sweep import SweepSpec
from src.repositories.microdata_repository import MicrodataRepository
from src.services.benchmark_service import BenchmarkService
from src.services.dataset_service import DatasetService
from src.services.evaluation_service import EvaluationService
from src.services.microaggregation_service import MicroaggregationService
from src.utils.constants import (
    CLUSTER_WORKERS,
    DEFAULT_SEED,
    ETA,
    EXIT_OK,
    INIT_FARTHEST,
    INIT_RANDOM,
    M_FUZZ,
    MAX_ITER,
    METHOD_HM_PFSOM,
    METHODS,
    NORMALIZE_LENIENT,
    NORMALIZE_STRICT,
    TOL,
)
from src.utils.errors import AnonymizationError, SweepSpecError, UsageError
from src.utils.helpers import count_range

logger = logging.getLogger(__name__)


class CliParser(argparse.ArgumentParser):
    """
    ArgumentParser that raises UsageError instead of exiting, so main() owns exit codes.
    """

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser():
    parser = CliParser(prog="anonymizer", description="Microaggregation anonymization toolkit.")
    commands = parser.add_subparsers(dest="command", parser_class=CliParser)
    commands.required = True

    anonymize = commands.add_parser("anonymize", help="Mask a microdata file.")
    _add_input(anonymize)
    anonymize.add_argument("--method", required=True, choices=METHODS)
    anonymize.add_argument("--k", type=int, help="Privacy parameter (minimum group size).")
    anonymize.add_argument("--out", required=True, help="Masked CSV to write.")
    anonymize.add_argument("--groups-count", type=int, help="hm_pfsom: fix the groups per sub-microdata instead of k.")
    anonymize.add_argument("--seed", type=int, default=DEFAULT_SEED)
    anonymize.add_argument("--c-min", type=int, help="hm_pfsom: fewest sub-microdata.")
    anonymize.add_argument("--c-max", type=int, help="hm_pfsom: most sub-microdata (1 keeps one).")
    anonymize.add_argument("--conf-c-min", type=int, help="hm_pfsom: fewest confidential classes.")
    anonymize.add_argument("--conf-c-max", type=int, help="hm_pfsom: most confidential classes.")
    anonymize.add_argument("--m-fuzz", type=float, default=M_FUZZ)
    anonymize.add_argument("--eta", type=float, default=ETA)
    anonymize.add_argument("--tol", type=float, default=TOL)
    anonymize.add_argument("--max-iter", type=int, default=MAX_ITER)
    anonymize.add_argument("--init", choices=(INIT_FARTHEST, INIT_RANDOM), default=INIT_FARTHEST)
    anonymize.add_argument("--workers", type=int, default=CLUSTER_WORKERS, help="Concurrent sub-microdata.")
    anonymize.set_defaults(handler=cmd_anonymize)

    evaluate = commands.add_parser("evaluate", help="Measure information loss and disclosure risk.")
    evaluate.add_argument("--original", "--input", dest="input", required=True, help="Original CSV.")
    evaluate.add_argument("--masked", required=True, help="Masked CSV (identifier columns optional).")
    evaluate.add_argument("--schema", required=True, help="Schema JSON file.")
    evaluate.add_argument("--k", type=int, help="Report whether k-anonymity holds for this k.")
    evaluate.add_argument("--structure", help="Structure JSON of the run; labels give the groups, class labels the diversity verdict.")
    evaluate.add_argument("--sse-normalized", action="store_true", help="Group SSE on normalized attributes.")
    evaluate.add_argument("--encode-categorical", action="store_true")
    evaluate.add_argument("--drop-columns", type=_column_list, default=[])
    evaluate.add_argument("--json", action="store_true", help="Print the report as JSON only.")
    evaluate.set_defaults(handler=cmd_evaluate)

    sweep = commands.add_parser("sweep", help="Run a k-sweep described by a spec file.")
    sweep.add_argument("spec", help="Sweep spec JSON file.")
    sweep.add_argument("--json", action="store_true", help="Print the result rows as JSON.")
    sweep.set_defaults(handler=cmd_sweep)

    inspect = commands.add_parser("inspect", help="Describe a microdata file.")
    _add_input(inspect)
    inspect.set_defaults(handler=cmd_inspect)
    return parser


def _add_input(parser):
    parser.add_argument("--input", required=True, help="Input CSV.")
    parser.add_argument("--schema", required=True, help="Schema JSON file.")
    parser.add_argument("--normalize", choices=(NORMALIZE_STRICT, NORMALIZE_LENIENT), default=NORMALIZE_STRICT)
    parser.add_argument("--encode-categorical", action="store_true", help="Factorize text confidential columns.")
    parser.add_argument("--drop-columns", type=_column_list, default=[], help="Comma-separated columns to ignore.")
    parser.add_argument("--json", action="store_true", help="Print machine-readable output only.")


def _column_list(text):
    return [column.strip() for column in text.split(",") if column.strip()]


def _load(args, path, allow_missing_identifiers=False):
    schema = MicrodataRepository.load_schema(args.schema)
    if args.encode_categorical:
        return MicrodataRepository.load_encoded_table(
            path, schema, drop_columns=args.drop_columns, allow_missing_identifiers=allow_missing_identifiers
        )
    microdata = MicrodataRepository.load_table(
        path, schema, drop_columns=args.drop_columns, allow_missing_identifiers=allow_missing_identifiers
    )
    return microdata, {}


def cmd_anonymize(args):
    if args.k is None and args.groups_count is None:
        raise UsageError("anonymize needs --k (or --groups-count for hm_pfsom).")
    microdata, code_map = _load(args, args.input)
    fuzz = FuzzinessParams(
        m_fuzz=args.m_fuzz, eta=args.eta, max_iter=args.max_iter, tol=args.tol, seed=args.seed, init=args.init
    )
    config = AnonymizationConfig(
        args.method,
        args.k if args.k is not None else 1,
        fuzz=fuzz,
        c_range=count_range(args.c_min, args.c_max),
        conf_c_range=count_range(args.conf_c_min, args.conf_c_max),
        groups_count=args.groups_count,
        normalize=args.normalize,
        workers=args.workers,
    )
    result = MicroaggregationService.anonymize(microdata, config)

    stem = os.path.splitext(args.out)[0]
    MicrodataRepository.save_table(result.masked, args.out)
    if args.method == METHOD_HM_PFSOM:
        MicrodataRepository.save_json(result.to_dict(), f"{stem}.structure.json")
    if code_map:
        MicrodataRepository.save_json(code_map, f"{stem}.codes.json")

    summary = {
        "n": microdata.n,
        "method": args.method,
        "k": config.k,
        "k_max": EvaluationService.k_anonymity_check(result.masked)["k_max"],
    }
    if args.json:
        print(json.dumps(summary))
    else:
        print(" ".join(f"{key}={value}" for key, value in summary.items()))
    return EXIT_OK


def cmd_evaluate(args):
    original, _ = _load(args, args.input)
    masked, _ = _load(args, args.masked, allow_missing_identifiers=True)
    partition = class_labels = scope = None
    if args.structure:
        partition, class_labels, scope = MicrodataRepository.load_structure(args.structure, original.n)
    report = EvaluationService.evaluate(
        original,
        masked,
        partition=partition,
        class_labels=class_labels,
        k=args.k,
        scope=scope,
        sse_normalized=args.sse_normalized,
    )
    data = report.to_dict()
    if args.json:
        print(json.dumps(data))
    else:
        width = max(len(key) for key in data)
        for key, value in data.items():
            print(f"{key:<{width}}  {_display(value)}")
    return EXIT_OK


def cmd_sweep(args):
    spec = SweepSpec.from_dict(_read_json(args.spec, SweepSpecError), base_dir=os.path.dirname(args.spec))
    rows = BenchmarkService.run_sweep(spec)
    paths = BenchmarkService.emit_report(rows, spec)
    if args.json:
        print(json.dumps([row.to_dict() for row in rows]))
    else:
        for path in paths:
            print(path)
    return EXIT_OK


def cmd_inspect(args):
    microdata, code_map = _load(args, args.input)
    stats = DatasetService.column_stats(microdata)
    data = {
        "n": microdata.n,
        "m": microdata.m,
        "attributes": microdata.schema.to_dict()["attributes"],
        "stats": stats.to_dict(),
        "constant_columns": stats.constant_columns(),
        "codes": code_map,
    }
    if args.json:
        print(json.dumps(data))
    else:
        print(f"{microdata.n} records, {microdata.m} attributes")
        for attribute in microdata.schema.attributes:
            column = data["stats"][attribute.name]
            print(
                f"  {attribute.name:<16} {attribute.role:<17} "
                f"min={column['min']:.6g} max={column['max']:.6g} mean={column['mean']:.6g} std={column['std']:.6g}"
            )
    return EXIT_OK


def _read_json(path, error):
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as e:
        raise error(f"Cannot read {path}: {e}") from e


def _display(value):
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, list):
        return ", ".join(_display(item) for item in value)
    return "-" if value is None else str(value)


def main(argv=None):
    """
    Runs one subcommand and returns its exit code: 0 success, 1 usage error,
    2 data error, 3 method failure.
    """
    try:
        args = build_parser().parse_args(argv)
        return args.handler(args)
    except AnonymizationError as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
