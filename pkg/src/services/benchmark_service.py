import logging
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from src.models.anonymization import AnonymizationConfig
from src.models.partition import Partition
from src.models.sweep import SweepRow
from src.repositories.microdata_repository import MicrodataRepository
from src.repositories.report_repository import ReportRepository
from src.services.dataset_service import DatasetService
from src.services.evaluation_service import EvaluationService
from src.services.microaggregation_service import MicroaggregationService
from src.utils.constants import METHOD_HM_PFSOM, METHOD_MDAV, NORMALIZE_LENIENT
from src.utils.errors import AnonymizationError, ConstantColumnError, DataError, SweepSpecError, UsageError

logger = logging.getLogger(__name__)


class BenchmarkService:
    @staticmethod
    def run_sweep(spec, microdata=None):
        """
        Anonymizes and evaluates every (qid subset, method, k) cell of a sweep.

        Cells run on a bounded worker pool; rows come back in spec order. A cell
        that fails records its error and the sweep continues.

        Args:
            spec (SweepSpec): Methods, k values and options.
            microdata (Microdata): Already loaded table; read from spec.dataset if omitted.

        Returns:
            list: SweepRow per cell.
        """
        if microdata is None:
            schema = MicrodataRepository.load_schema(spec.schema)
            microdata = MicrodataRepository.load_table(spec.dataset, schema, drop_columns=spec.drop_columns)

        tables = {}
        for subset in spec.subsets():
            try:
                tables[subset] = (
                    microdata if subset is None else DatasetService.restrict_quasi_identifiers(microdata, subset)
                )
            except DataError as e:
                raise SweepSpecError(f"Invalid qid subset {list(subset)}: {e}") from e

        jobs = spec.jobs()
        start_time = time.time()
        logger.info(f"Starting sweep of {len(jobs)} cell(s) on {microdata.n} records with {spec.workers} worker(s)")
        with ThreadPoolExecutor(max_workers=spec.workers) as executor:
            rows = list(
                executor.map(
                    lambda job: BenchmarkService.run_cell(tables[job[0]], spec, job[1], job[2], qids=job[0]), jobs
                )
            )
        elapsed_time = time.time() - start_time
        failed = sum(1 for row in rows if not row.ok)
        logger.info(f"Completed sweep in {elapsed_time:.2f} seconds ({failed} failed cell(s))")
        return rows

    @staticmethod
    def run_cell(microdata, spec, method, k, qids=None):
        """
        One timed anonymize + evaluate run; the sub-microdata comparison and the
        cluster model, when asked for, are gathered after the clock stops.
        """
        start = time.perf_counter()
        try:
            config = AnonymizationConfig(
                method,
                k,
                fuzz=spec.fuzz,
                c_range=spec.c_range,
                conf_c_range=spec.conf_c_range,
                normalize=spec.normalize,
            )
            result = MicroaggregationService.anonymize(microdata, config)
            report = EvaluationService.evaluate(
                microdata,
                result.masked,
                result.partition,
                class_labels=result.class_labels,
                k=k,
                scope=result.scope,
            )
        except AnonymizationError as e:
            logger.warning(f"{method} k={k} failed: {e}")
            return SweepRow(method, k, n=microdata.n, wall_time_ms=_elapsed_ms(start), error=str(e), qids=qids)
        wall_time_ms = _elapsed_ms(start)

        metrics = {
            "il": report.il,
            "il_normalized": report.il_normalized,
            "linked": report.dbrl.linked,
            "second_nearest": report.dbrl.second_nearest,
            "expected_matches": report.dbrl.expected_matches,
            "min_sse": report.min_sse,
            "k_max": report.k_anonymous_at,
        }
        row = SweepRow(
            method,
            k,
            metrics=metrics,
            n=microdata.n,
            wall_time_ms=wall_time_ms,
            structure=result.structure_summary(),
            qids=qids,
            diversity_ok=report.diversity_ok,
        )
        if method == METHOD_HM_PFSOM:
            cell = {"method": method, "k": row.k, "qids": row.qids_label}
            if spec.compare_subs:
                row.sub_rows = [{**cell, **entry} for entry in BenchmarkService.compare_subs(microdata, result)]
            if spec.emit_models:
                selection = result.selection.to_dict() if result.selection else None
                row.model = {**cell, "fuzz": config.fuzz.to_dict(), "selection": selection}
        logger.info(f"{method} k={k}: il={report.il:.4f}, linked={report.dbrl.linked}, k_max={report.k_anonymous_at}")
        return row

    @staticmethod
    def compare_subs(microdata, result):
        """
        Every hm_pfsom sub-microdata against MDAV run on the same records with k set
        to the smallest hm_pfsom group of that sub-microdata.

        Args:
            microdata (Microdata): The original table.
            result (AnonymizedResult): An hm_pfsom result.

        Returns:
            list: Two dicts per sub-microdata, the hm_pfsom groups then MDAV.
        """
        entries = []
        for sub in result.sub_structure:
            positions = np.flatnonzero(result.scope == sub.index)
            original = microdata.take(positions)
            local = Partition(
                np.unique(result.partition.labels[positions], return_inverse=True)[1].reshape(-1),
                k_declared=sub.k_effective,
            )
            base = {"sub": sub.index, "size": sub.size, "cs": sub.cs}
            measures = _sub_measures(original, result.masked.take(positions), local)
            entries.append({**base, "algorithm": METHOD_HM_PFSOM, "k_used": sub.k_effective, **measures})

            k_mdav = local.min_size
            try:
                # a sub-microdata may be constant in a quasi-identifier
                config = AnonymizationConfig(METHOD_MDAV, k_mdav, normalize=NORMALIZE_LENIENT)
                mdav = MicroaggregationService.anonymize(original, config)
                measures = _sub_measures(original, mdav.masked, mdav.partition)
            except AnonymizationError as e:
                logger.warning(f"MDAV on sub-microdata {sub.index} failed: {e}")
                measures = {"error": str(e)}
            entries.append({**base, "algorithm": METHOD_MDAV, "k_used": k_mdav, **measures})
        return entries

    @staticmethod
    def emit_report(rows, spec):
        """
        Writes sweep_<dataset-stem>.<ext> for every requested format, plus the
        long format, the sub-microdata comparison and the cluster models when asked.

        Returns:
            list: Paths written.
        """
        if not rows:
            raise UsageError("There are no sweep results to report.")
        data = [row.to_dict() for row in rows]
        sub_rows = [entry for row in rows for entry in row.sub_rows]
        paths = []
        for fmt in spec.formats:
            paths.append(ReportRepository.write_rows(data, spec.output_dir, spec.dataset_stem, fmt))
            if spec.long_format:
                paths.append(ReportRepository.write_long_rows(data, spec.output_dir, spec.dataset_stem, fmt))
            if spec.compare_subs and sub_rows:
                paths.append(ReportRepository.write_sub_rows(sub_rows, spec.output_dir, spec.dataset_stem, fmt))
        models = [row.model for row in rows if row.model is not None]
        if spec.emit_models and models:
            paths.append(ReportRepository.write_models(models, spec.output_dir, spec.dataset_stem))
        return paths


def _sub_measures(original, masked, partition):
    measures = {
        "min_group_size": partition.min_size,
        "groups": partition.g,
        "min_sse": EvaluationService.group_sse(original, partition)["min_sse"],
        "il": None,
        "error": None,
    }
    try:
        measures["il"] = EvaluationService.information_loss(original, masked)["il"]
    except ConstantColumnError:
        logger.info(f"Information loss undefined on {original.n} records with a constant quasi-identifier")
    return measures


def _elapsed_ms(start):
    return (time.perf_counter() - start) * 1000.0
