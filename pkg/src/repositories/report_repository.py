import json
import logging
import os

import pandas as pd

from src.utils.constants import CSV_FLOAT_FORMAT, REPORT_COLUMNS, REPORT_EXTRA_COLUMNS, SUB_REPORT_COLUMNS
from src.utils.errors import OutputWriteError
from src.utils.helpers import atomic_write_text

logger = logging.getLogger(__name__)

# Metrics repeated one per line in the long format
LONG_METRICS = [column for column in REPORT_COLUMNS if column not in ("method", "k")]
LONG_COLUMNS = ["method", "k", "qids", "metric", "value"]


class ReportRepository:
    @staticmethod
    def report_path(output_dir, dataset_stem, fmt, suffix=""):
        """
        Deterministic file name sweep_<dataset-stem><suffix>.<ext>.
        """
        return os.path.join(output_dir, f"sweep_{dataset_stem}{suffix}.{fmt}")

    @staticmethod
    def write_rows(rows, output_dir, dataset_stem, fmt):
        """
        Write sweep rows (dicts) with the stable column order.

        Returns:
            str: Path of the written file.
        """
        path = ReportRepository.report_path(output_dir, dataset_stem, fmt)
        _write_table(path, rows, REPORT_COLUMNS + REPORT_EXTRA_COLUMNS, fmt, json_columns=("structure",))
        logger.info(f"Wrote {len(rows)} sweep row(s) to {path}")
        return path

    @staticmethod
    def write_long_rows(rows, output_dir, dataset_stem, fmt):
        """
        Plot-ready long format: one line per (qid subset, method, k, metric).
        """
        path = ReportRepository.report_path(output_dir, dataset_stem, fmt, suffix="_long")
        long_rows = [
            {"method": row["method"], "k": row["k"], "qids": row.get("qids"), "metric": metric, "value": row.get(metric)}
            for row in rows
            if row.get("error") is None
            for metric in LONG_METRICS
        ]
        _write_table(path, long_rows, LONG_COLUMNS, fmt)
        logger.info(f"Wrote {len(long_rows)} long-format line(s) to {path}")
        return path

    @staticmethod
    def write_sub_rows(sub_rows, output_dir, dataset_stem, fmt):
        """
        Per sub-microdata comparison, sweep_<dataset-stem>_subs.<ext>.
        """
        path = ReportRepository.report_path(output_dir, dataset_stem, fmt, suffix="_subs")
        _write_table(path, sub_rows, SUB_REPORT_COLUMNS, fmt)
        logger.info(f"Wrote {len(sub_rows)} sub-microdata line(s) to {path}")
        return path

    @staticmethod
    def write_models(models, output_dir, dataset_stem):
        """
        Quasi-identifier clusterings of the hm_pfsom cells, always JSON.
        """
        path = ReportRepository.report_path(output_dir, dataset_stem, "json", suffix="_models")
        _ensure_writable(output_dir)
        atomic_write_text(path, json.dumps(models, indent=2) + "\n")
        logger.info(f"Wrote {len(models)} cluster model(s) to {path}")
        return path


def _write_table(path, records, columns, fmt, json_columns=()):
    _ensure_writable(os.path.dirname(path) or ".")
    ordered = [{column: record.get(column) for column in columns} for record in records]
    if fmt == "json":
        atomic_write_text(path, json.dumps(ordered, indent=2) + "\n")
        return
    frame = pd.DataFrame(ordered, columns=columns)
    for column in json_columns:
        frame[column] = [json.dumps(value, sort_keys=True) if value is not None else None for value in frame[column]]
    atomic_write_text(path, frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"))


def _ensure_writable(output_dir):
    try:
        os.makedirs(output_dir, exist_ok=True)
    except OSError as e:
        raise OutputWriteError(f"Cannot create output directory {output_dir}: {e}") from e
    if not os.access(output_dir, os.W_OK):
        raise OutputWriteError(f"Output directory {output_dir} is not writable.")
