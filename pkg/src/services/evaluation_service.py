import logging
import math

import numpy as np

from src.models.evaluation_report import DbrlResult, EvaluationReport
from src.models.partition import Partition
from src.services.dataset_service import DatasetService
from src.utils.constants import ROLE_CONFIDENTIAL, ROLE_QUASI_IDENTIFIER
from src.utils.errors import ConstantColumnError, LabelOutOfRangeError, ShapeMismatchError
from src.utils.helpers import exact_column_means, squared_distances

logger = logging.getLogger(__name__)

# Masked records compared against the originals per distance block
DBRL_CHUNK = 1024


class EvaluationService:
    @staticmethod
    def information_loss(original, masked):
        """
        IL = sum_i (1/q) sum_j |x_ij - x'_ij| / (sqrt(2) * S_j) over the q quasi-identifiers,
        S_j the population standard deviation of the original column.

        Returns:
            dict: {"il": ..., "il_normalized": 100 * il / n}
        """
        before, after = EvaluationService._aligned(original, masked, ROLE_QUASI_IDENTIFIER)
        std = before.std(axis=0, ddof=0)
        if np.any(std == 0):
            names = [name for name, s in zip(original.schema.names_with_role(ROLE_QUASI_IDENTIFIER), std) if s == 0]
            raise ConstantColumnError(f"Information loss is undefined for zero-variance quasi-identifier(s) {names}.")
        deviation = np.abs(before - after) / (math.sqrt(2.0) * std)
        il = float(deviation.mean(axis=1).sum())
        return {"il": il, "il_normalized": 100.0 * il / original.n}

    @staticmethod
    def dbrl(original, masked, role=ROLE_QUASI_IDENTIFIER):
        """
        Distance-based record linkage of every masked record against the originals.

        Both tables are min-max normalized with the original's statistics. A record
        is linked when its source is the unique nearest original, and linked to the
        second nearest when the nearest original is unique and its source is the
        unique holder of the next distance. Ties are shared out in expected_matches.
        """
        before, after = EvaluationService._aligned(original, masked, role)
        low = before.min(axis=0)
        span = before.max(axis=0) - low
        span[span == 0] = 1.0
        before = (before - low) / span
        after = (after - low) / span

        n = before.shape[0]
        linked = second = 0
        expected = 0.0
        for start in range(0, n, DBRL_CHUNK):
            rows = np.arange(start, min(start + DBRL_CHUNK, n))
            distances = squared_distances(after[rows], before)
            local = np.arange(rows.size)

            nearest = distances.min(axis=1)
            ties = distances == nearest[:, np.newaxis]
            tie_count = ties.sum(axis=1)
            self_nearest = ties[local, rows]
            linked += int(np.count_nonzero(self_nearest & (tie_count == 1)))
            expected += float(np.sum(self_nearest / tie_count))

            rest = np.where(ties, np.inf, distances)
            runner_up = rest.min(axis=1)
            runner_ties = rest == runner_up[:, np.newaxis]
            self_second = (
                runner_ties[local, rows]
                & (runner_ties.sum(axis=1) == 1)
                & (tie_count == 1)
                & ~self_nearest
                & np.isfinite(runner_up)
            )
            second += int(np.count_nonzero(self_second))

        return DbrlResult(linked, second, n - linked - second, expected)

    @staticmethod
    def group_sse(microdata, partition, role=ROLE_CONFIDENTIAL, normalized=False):
        """
        Sum of squared distances to the group centroid, per group.

        Args:
            microdata (Microdata): Table the partition was built on.
            partition (Partition): The groups.
            role (str): Attributes the distances use; confidential by default.
            normalized (bool): Min-max normalize the attributes first.

        Returns:
            dict: {"sse_per_group": [...], "min_sse": ...}
        """
        if partition.n != microdata.n:
            raise LabelOutOfRangeError(
                f"Partition covers {partition.n} records but the microdata has {microdata.n}."
            )
        values = DatasetService.project(microdata, role)
        if normalized:
            values = DatasetService.normalized_matrix(values, strict=False)
        sse = [
            float(squared_distances(values[members], exact_column_means(values[members])).sum())
            for members in partition.groups()
        ]
        return {"sse_per_group": sse, "min_sse": min(sse)}

    @staticmethod
    def k_anonymity_check(masked, k=None):
        """
        Size of the smallest set of records sharing identical quasi-identifiers.

        Returns:
            dict: {"holds": k_max >= k (None without k), "k_max": ...}
        """
        qids = DatasetService.project(masked, ROLE_QUASI_IDENTIFIER)
        _, counts = np.unique(qids, axis=0, return_counts=True)
        k_max = int(counts.min())
        return {"holds": None if k is None else k_max >= int(k), "k_max": k_max}

    @staticmethod
    def diversity_check(microdata, partition, class_labels, scope=None):
        """
        True iff every group holds a record of every class found in its scope.

        Args:
            microdata (Microdata): Table the partition covers.
            partition (Partition): The groups.
            class_labels (ndarray): (n,) confidential class per record.
            scope (ndarray): (n,) scope per record (e.g. sub-microdata); one scope if omitted.
        """
        class_labels = np.asarray(class_labels)
        scope = np.zeros(microdata.n, dtype=np.int64) if scope is None else np.asarray(scope)
        if partition.n != microdata.n or class_labels.shape != (microdata.n,) or scope.shape != (microdata.n,):
            raise LabelOutOfRangeError(
                f"Partition, class labels and scope must all cover the {microdata.n} records."
            )
        for group, members in enumerate(partition.groups()):
            required = set(np.unique(class_labels[np.isin(scope, scope[members])]).tolist())
            missing = required - set(np.unique(class_labels[members]).tolist())
            if missing:
                logger.debug(f"Group {group} lacks class(es) {sorted(missing)}")
                return False
        return True

    @staticmethod
    def equivalence_partition(masked):
        """
        Groups records with identical quasi-identifier tuples.
        """
        qids = DatasetService.project(masked, ROLE_QUASI_IDENTIFIER)
        _, inverse, counts = np.unique(qids, axis=0, return_inverse=True, return_counts=True)
        return Partition(inverse.reshape(-1), k_declared=int(counts.min()))

    @staticmethod
    def evaluate(original, masked, partition=None, class_labels=None, k=None, scope=None, sse_normalized=False):
        """
        All privacy and utility measures for a masked release.

        Args:
            original (Microdata): The original table.
            masked (Microdata): The released table, row-aligned with the original.
            partition (Partition): Groups of the release; equivalence classes of the
                masked quasi-identifiers when omitted.
            class_labels (ndarray): Confidential classes for the diversity verdict (optional).
            k (int): k for the k-anonymity verdict (optional).
            scope (ndarray): Scope per record for the diversity verdict (optional).
            sse_normalized (bool): Compute group SSE on normalized attributes.

        Returns:
            EvaluationReport: The combined measures.
        """
        EvaluationService._aligned(original, masked, ROLE_QUASI_IDENTIFIER)
        partition = partition or EvaluationService.equivalence_partition(masked)
        loss = EvaluationService.information_loss(original, masked)
        linkage = EvaluationService.dbrl(original, masked)
        sse = EvaluationService.group_sse(original, partition, normalized=sse_normalized)
        anonymity = EvaluationService.k_anonymity_check(masked, k)
        diversity = None
        if class_labels is not None:
            diversity = EvaluationService.diversity_check(original, partition, class_labels, scope)

        logger.info(
            f"Evaluated {original.n} records: il={loss['il']:.4f}, linked={linkage.linked}, k_max={anonymity['k_max']}"
        )
        return EvaluationReport(
            n=original.n,
            il=loss["il"],
            il_normalized=loss["il_normalized"],
            dbrl=linkage,
            sse_per_group=sse["sse_per_group"],
            min_sse=sse["min_sse"],
            k_anonymous_at=anonymity["k_max"],
            k_requested=k,
            k_holds=anonymity["holds"],
            diversity_ok=diversity,
        )

    @staticmethod
    def _aligned(original, masked, role):
        """
        Role projections of both tables, checked to be row- and column-aligned.
        """
        if original.n != masked.n:
            raise ShapeMismatchError(f"Original has {original.n} records but masked has {masked.n}.")
        names = original.schema.names_with_role(role)
        if sorted(masked.schema.names_with_role(role)) != sorted(names):
            raise ShapeMismatchError(
                f"Masked {role} attributes {masked.schema.names_with_role(role)} differ from {names}."
            )
        # columns pair up by name, whatever order each file used
        positions = [masked.schema.names.index(name) for name in names]
        return DatasetService.project(original, role), masked.rows[:, positions]
