import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from src.models.anonymization import AnonymizedResult, SubMicrodata
from src.models.partition import Partition
from src.services.clustering_service import ClusteringService
from src.services.dataset_service import DatasetService
from src.services.evaluation_service import EvaluationService
from src.utils.constants import (
    CLUSTER_WORKERS,
    CRITERION_FIRST_PC,
    CRITERION_ZSCORE_SUM,
    METHOD_HM_PFSOM,
    METHOD_INDIVIDUAL_SORTING,
    METHOD_MDAV,
    METHOD_SINGLE_AXIS_PCA,
    PC_TOL,
    ROLE_CONFIDENTIAL,
    ROLE_QUASI_IDENTIFIER,
)
from src.utils.errors import (
    ClassTooSmallError,
    ConstantColumnError,
    DegenerateModelError,
    InfeasibleKError,
    LabelOutOfRangeError,
    UsageError,
)
from src.utils.helpers import exact_column_means, farthest, nearest_first, squared_distances

logger = logging.getLogger(__name__)


class MicroaggregationService:
    @staticmethod
    def anonymize(microdata, config):
        """
        Runs the configured method and replaces quasi-identifiers by group means.

        Args:
            microdata (Microdata): The original table.
            config (AnonymizationConfig): Method, k and method options.

        Returns:
            AnonymizedResult: Masked table, partition and (hm_pfsom) sub-microdata structure.
        """
        config.check_against(microdata.n)
        start_time = time.time()
        logger.info(f"Starting {config.method} with k={config.k} on {microdata.n} records")

        if config.method == METHOD_HM_PFSOM:
            result = MicroaggregationService.hm_pfsom_anonymize(microdata, config)
        elif config.method == METHOD_INDIVIDUAL_SORTING:
            masked = MicroaggregationService.individual_sorting_mask(microdata, config.k)
            partition = EvaluationService.equivalence_partition(masked)
            result = AnonymizedResult(masked, partition, config)
        else:
            qids = DatasetService.project(microdata, ROLE_QUASI_IDENTIFIER)
            if config.method == METHOD_MDAV:
                names = microdata.schema.names_with_role(ROLE_QUASI_IDENTIFIER)
                normalized = DatasetService.normalized_matrix(qids, strict=config.strict, names=names)
                partition = MicroaggregationService.mdav_partition(normalized, config.k)
            else:
                criterion = CRITERION_FIRST_PC if config.method == METHOD_SINGLE_AXIS_PCA else CRITERION_ZSCORE_SUM
                partition = MicroaggregationService.single_axis_partition(
                    qids, config.k, criterion, strict=config.strict
                )
            masked = MicroaggregationService.centroid_replace(microdata, partition)
            result = AnonymizedResult(masked, partition, config)

        elapsed_time = time.time() - start_time
        logger.info(f"Completed {config.method} with k={config.k} in {elapsed_time:.2f} seconds")
        return result

    @staticmethod
    def mdav_partition(qids, k):
        """
        Maximum Distance to Average Vector grouping.

        While at least 3k records are unassigned, the record farthest from their
        centroid and then the record farthest from it each take their k-1 nearest
        neighbours; 2k..3k-1 leftovers give one more group around the farthest
        record plus a group of the rest; fewer than 2k form the last group.

        Args:
            qids (ndarray): (n, p) quasi-identifier matrix, normally min-max normalized.
            k (int): Minimum group size.

        Returns:
            Partition: Groups of size k..2k-1.
        """
        qids = _as_matrix(qids)
        n = qids.shape[0]
        _check_k(k, n)

        remaining = np.arange(n)
        groups = []
        while remaining.size >= 3 * k:
            centroid = qids[remaining].mean(axis=0)
            record = farthest(squared_distances(qids[remaining], centroid), remaining)
            group = _group_around(qids, record, remaining, k)
            groups.append(group)
            remaining = np.setdiff1d(remaining, group)

            opposite = farthest(squared_distances(qids[remaining], qids[record]), remaining)
            group = _group_around(qids, opposite, remaining, k)
            groups.append(group)
            remaining = np.setdiff1d(remaining, group)

        if remaining.size >= 2 * k:
            centroid = qids[remaining].mean(axis=0)
            record = farthest(squared_distances(qids[remaining], centroid), remaining)
            group = _group_around(qids, record, remaining, k)
            groups.append(group)
            remaining = np.setdiff1d(remaining, group)
        if remaining.size:
            groups.append(remaining)

        return Partition.from_groups(groups, n, k_declared=k)

    @staticmethod
    def individual_sorting_mask(microdata, k):
        """
        Univariate microaggregation of every quasi-identifier on its own.

        Each column is sorted, cut into runs of k (the last run takes the
        remainder) and every value replaced by its run mean. The result is not
        k-anonymous in general.
        """
        _check_k(k, microdata.n)
        rows = np.array(microdata.rows)
        for column in microdata.columns(ROLE_QUASI_IDENTIFIER):
            order = np.argsort(rows[:, column], kind="stable")
            for run in _runs(order, k):
                rows[run, column] = math.fsum(rows[run, column]) / run.size
        return microdata.with_rows(rows)

    @staticmethod
    def single_axis_partition(qids, k, criterion=CRITERION_ZSCORE_SUM, strict=True):
        """
        Projects every record on one axis and groups k successive records.

        Args:
            qids (ndarray): (n, p) quasi-identifier matrix.
            k (int): Minimum group size.
            criterion (str): zscore_sum or first_pc.
            strict (bool): Reject zero-variance attributes instead of scoring them 0.

        Returns:
            Partition: Runs of k along the axis, last run absorbing the remainder.
        """
        qids = _as_matrix(qids)
        _check_k(k, qids.shape[0])
        scores = MicroaggregationService.axis_scores(qids, criterion, strict)
        order = np.argsort(scores, kind="stable")
        labels = np.empty(qids.shape[0], dtype=np.int64)
        for group, run in enumerate(_runs(order, k)):
            labels[run] = group
        return Partition(labels, k_declared=k)

    @staticmethod
    def axis_scores(qids, criterion, strict=True):
        """
        Sum of z-scores, or projection of the z-scores on the leading principal
        axis (sign fixed so its largest-magnitude loading is positive).
        """
        if criterion not in (CRITERION_ZSCORE_SUM, CRITERION_FIRST_PC):
            raise UsageError(f"Unknown single-axis criterion {criterion!r}.")
        mean = qids.mean(axis=0)
        std = qids.std(axis=0, ddof=0)
        if strict and np.any(std == 0):
            raise ConstantColumnError(
                f"Quasi-identifier column(s) {np.flatnonzero(std == 0).tolist()} have zero variance."
            )
        z = (qids - mean) / np.where(std == 0, 1.0, std)
        z[:, std == 0] = 0.0

        if criterion == CRITERION_ZSCORE_SUM:
            return z.sum(axis=1)
        if z.shape[1] == 1:
            return z[:, 0]

        eigenvalues, eigenvectors = np.linalg.eigh(np.cov(z, rowvar=False, bias=True))
        if eigenvalues[-1] <= PC_TOL:
            raise DegenerateModelError("Quasi-identifier covariance is degenerate; no principal axis.")
        loading = eigenvectors[:, -1]
        if loading[np.argmax(np.abs(loading))] < 0:
            loading = -loading
        return z @ loading

    @staticmethod
    def centroid_replace(microdata, partition):
        """
        Every quasi-identifier cell becomes the exact mean of its group;
        other columns are copied unchanged.
        """
        if partition.n != microdata.n:
            raise LabelOutOfRangeError(
                f"Partition covers {partition.n} records but the microdata has {microdata.n}."
            )
        rows = np.array(microdata.rows)
        columns = microdata.columns(ROLE_QUASI_IDENTIFIER)
        for members in partition.groups():
            block = rows[np.ix_(members, columns)]
            rows[np.ix_(members, columns)] = exact_column_means(block)
        return microdata.with_rows(rows)

    @staticmethod
    def diversity_partition(sub, class_labels, k):
        """
        Groups a sub-microdata so every group holds at least k records of every class.

        Quasi-identifiers are min-max normalized with the sub-microdata's own
        statistics. The record farthest from the centroid (computed once) seeds a
        group with its k-1 nearest classmates and the k nearest records of every
        other class, until some class has fewer than k records left. Leftovers
        then join the seeded group with the nearest centroid, in row order.

        Args:
            sub (Microdata): The sub-microdata.
            class_labels (ndarray): (n_sub,) confidential class of every record.
            k (int): Members of each class per group.

        Returns:
            Partition: floor(min_class_size / k) groups.

        Raises:
            ClassTooSmallError: Some class has fewer than k records.
        """
        class_labels = np.asarray(class_labels, dtype=np.int64)
        if class_labels.shape != (sub.n,):
            raise LabelOutOfRangeError(f"Expected {sub.n} class labels, got {class_labels.size}.")
        if int(k) < 1:
            raise UsageError(f"k must be a positive integer, got {k}.")
        classes, sizes = np.unique(class_labels, return_counts=True)
        if sizes.min() < k:
            small = int(classes[np.argmin(sizes)])
            raise ClassTooSmallError(
                f"Confidential class {small} has {int(sizes.min())} record(s), fewer than k={k}; "
                f"lower k to at most {int(sizes.min())}.",
                max_feasible_k=int(sizes.min()),
            )

        qids = DatasetService.normalized_matrix(DatasetService.project(sub, ROLE_QUASI_IDENTIFIER), strict=False)
        to_centroid = squared_distances(qids, qids.mean(axis=0))
        available = np.ones(sub.n, dtype=bool)
        groups = []

        def nearest_of_class(label, record, count, exclude):
            candidates = np.flatnonzero(available & (class_labels == label))
            candidates = candidates[candidates != exclude]
            return nearest_first(squared_distances(qids[candidates], qids[record]), candidates)[:count]

        while all(np.count_nonzero(available & (class_labels == label)) >= k for label in classes):
            candidates = np.flatnonzero(available)
            record = farthest(to_centroid[candidates], candidates)
            group = [record]
            for label in classes:
                if label == class_labels[record]:
                    group.extend(nearest_of_class(label, record, k - 1, record).tolist())
                else:
                    group.extend(nearest_of_class(label, record, k, None).tolist())
            available[group] = False
            groups.append(sorted(group))

        leftovers = np.flatnonzero(available)
        if leftovers.size:
            centroids = np.array([qids[group].mean(axis=0) for group in groups])
            nearest = np.argmin(squared_distances(qids[leftovers], centroids), axis=1)
            for record, group in zip(leftovers, nearest):
                groups[group].append(int(record))

        return Partition.from_groups(groups, sub.n, k_declared=k)

    @staticmethod
    def hm_pfsom_anonymize(microdata, config):
        """
        Hybrid diversity-preserving microaggregation.

        The table is split into sub-microdata by clustering the quasi-identifiers;
        each sub-microdata is split into confidential classes by clustering the
        confidential attributes, then grouped with diversity_partition. Group means
        replace the quasi-identifiers.

        Args:
            microdata (Microdata): The original table.
            config (AnonymizationConfig): k, fuzzy parameters and cluster-count ranges.

        Returns:
            AnonymizedResult: With sub_structure, offset class labels and scope.
        """
        n, k = microdata.n, config.k
        if config.groups_count is None and n < 2 * k:
            raise InfeasibleKError(
                f"hm_pfsom needs at least 2k records: n={n}, k={k}; the largest feasible k is {n // 2}.",
                max_feasible_k=n // 2,
            )

        stats = DatasetService.column_stats(microdata)
        normalized = DatasetService.min_max_normalize(microdata, stats, strict=config.strict)
        qids = DatasetService.project(normalized, ROLE_QUASI_IDENTIFIER)
        confidential = DatasetService.project(normalized, ROLE_CONFIDENTIAL)

        sub_labels, selection = MicroaggregationService._split_sub_microdata(qids, config)
        subs = [np.flatnonzero(sub_labels == index) for index in range(int(sub_labels.max()) + 1)]
        logger.info(f"Split {n} records into {len(subs)} sub-microdata")

        def pipeline(index):
            return MicroaggregationService._anonymize_sub(microdata, confidential, subs[index], index, config)

        if config.workers > 1 and len(subs) > 1:
            with ThreadPoolExecutor(max_workers=config.workers) as executor:
                outcomes = list(executor.map(pipeline, range(len(subs))))
        else:
            outcomes = [pipeline(index) for index in range(len(subs))]

        labels = np.empty(n, dtype=np.int64)
        class_labels = np.empty(n, dtype=np.int64)
        scope = np.empty(n, dtype=np.int64)
        group_offset = class_offset = 0
        structure = []
        for positions, (local, sub) in zip(subs, outcomes):
            labels[positions] = local.labels + group_offset
            class_labels[positions] = sub.class_labels + class_offset
            scope[positions] = sub.index
            group_offset += local.g
            class_offset += sub.cs
            structure.append(sub)

        partition = Partition(labels, k_declared=k)
        masked = MicroaggregationService.centroid_replace(microdata, partition)
        return AnonymizedResult(masked, partition, config, structure, class_labels, scope, selection)

    @staticmethod
    def _split_sub_microdata(qids, config):
        n = qids.shape[0]
        low, high = config.c_range or ClusteringService.default_c_range(n)
        low, high = max(2, low), min(high, n)
        if high < low:
            return np.zeros(n, dtype=np.int64), None
        try:
            selection = ClusteringService.select_partition(
                qids, (low, high), config.fuzz, workers=CLUSTER_WORKERS, min_size=_min_cluster_size(config)
            )
        except DegenerateModelError as e:
            logger.warning(f"No usable quasi-identifier split ({e}); keeping one sub-microdata")
            return np.zeros(n, dtype=np.int64), None
        return selection.hard_labels, selection

    @staticmethod
    def _anonymize_sub(microdata, confidential, positions, index, config):
        n_sub, k = positions.size, config.k
        if config.groups_count is None and n_sub < k:
            raise ClassTooSmallError(
                f"Sub-microdata {index} has {n_sub} record(s), fewer than k={k}; lower k to at most {n_sub}.",
                max_feasible_k=n_sub,
                sub_index=index,
            )

        class_labels = MicroaggregationService._confidential_classes(confidential[positions], index, config)
        cs = int(class_labels.max()) + 1
        if config.groups_count is not None:
            k = int(np.bincount(class_labels).min()) // config.groups_count
            if k < 1:
                raise ClassTooSmallError(
                    f"Sub-microdata {index}: the smallest class cannot fill {config.groups_count} groups.",
                    max_feasible_k=int(np.bincount(class_labels).min()),
                    sub_index=index,
                )

        sub = microdata.take(positions)
        if n_sub < k * cs:
            logger.warning(f"Sub-microdata {index} has {n_sub} records, fewer than k*cs={k * cs}; keeping one group")
            local = Partition(np.zeros(n_sub, dtype=np.int64), k_declared=k)
        else:
            try:
                local = MicroaggregationService.diversity_partition(sub, class_labels, k)
            except ClassTooSmallError as e:
                raise ClassTooSmallError(
                    f"Sub-microdata {index}: {e}", max_feasible_k=e.max_feasible_k, sub_index=index
                ) from e

        structure = SubMicrodata(index, sub.row_ids, cs, class_labels, k, local.g)
        logger.info(f"Sub-microdata {index}: {n_sub} records, {cs} class(es), {local.g} group(s)")
        return local, structure

    @staticmethod
    def _confidential_classes(confidential, index, config):
        n_sub = confidential.shape[0]
        low, high = config.conf_c_range or ClusteringService.default_c_range(n_sub)
        low, high = max(2, low), min(high, n_sub)
        if high < low:
            return np.zeros(n_sub, dtype=np.int64)
        try:
            selection = ClusteringService.select_partition(
                confidential, (low, high), config.fuzz, workers=1, min_size=_min_cluster_size(config)
            )
        except DegenerateModelError as e:
            logger.warning(f"Sub-microdata {index}: no usable confidential split ({e}); using one class")
            return np.zeros(n_sub, dtype=np.int64)
        return selection.hard_labels


def _as_matrix(qids):
    qids = np.asarray(qids, dtype=float)
    return qids[:, np.newaxis] if qids.ndim == 1 else qids


def _check_k(k, n):
    if int(k) < 1:
        raise UsageError(f"k must be a positive integer, got {k}.")
    if k > n:
        raise InfeasibleKError(f"k={k} exceeds the number of records ({n}).", max_feasible_k=n)


def _group_around(qids, record, remaining, k):
    others = remaining[remaining != record]
    nearest = nearest_first(squared_distances(qids[others], qids[record]), others)[: k - 1]
    return np.concatenate([[record], nearest]).astype(np.int64)


def _runs(order, k):
    """
    Splits `order` into consecutive runs of k; the last run takes the remainder.
    """
    count = order.size // k
    return [order[i * k : (i + 1) * k] if i < count - 1 else order[i * k :] for i in range(count)]


def _min_cluster_size(config):
    """
    Smallest sub-microdata or confidential class hm_pfsom can still group.
    """
    return config.groups_count if config.groups_count is not None else config.k
