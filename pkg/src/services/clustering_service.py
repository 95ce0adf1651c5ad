import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from src.models.cluster_model import ClusterModel, FuzzinessParams, PartitionSelection
from src.utils.constants import CLUSTER_WORKERS, DISTANCE_FLOOR, INIT_RANDOM
from src.utils.errors import DataError, DegenerateModelError, UsageError
from src.utils.helpers import squared_distances

logger = logging.getLogger(__name__)


class ClusteringService:
    @staticmethod
    def fp_cluster(data, c, params=None):
        """
        Fuzzy-possibilistic c-means on the rows of `data`.

        Memberships are normalized over centers per record, typicalities over
        records per center; centers are the (u^m + t^eta)-weighted means.

        Args:
            data (ndarray): (n, d) matrix.
            c (int): Number of clusters, 1 <= c <= n.
            params (FuzzinessParams): Fuzzifiers, stopping rule and initialization.

        Returns:
            ClusterModel: Centers, memberships and typicalities at the fixed point.
        """
        params = params or FuzzinessParams()
        data = ClusteringService._checked_data(data)
        n = data.shape[0]
        c = int(c)
        if c < 1 or c > n:
            raise UsageError(f"Cluster count must satisfy 1 <= c <= n={n}, got c={c}.")

        centers = data[ClusteringService.initial_centers(data, c, params)]
        trace = []
        converged = False
        iterations = 0
        for iterations in range(1, params.max_iter + 1):
            D2 = ClusteringService._floored_distances(data, centers)
            U = ClusteringService.memberships(D2, params.m_fuzz)
            T = ClusteringService.typicalities(D2, params.eta)
            weights = U**params.m_fuzz + T**params.eta
            updated = (weights.T @ data) / weights.sum(axis=0)[:, np.newaxis]

            movement = np.sqrt(((updated - centers) ** 2).sum(axis=1)).max()
            centers = updated
            trace.append(ClusteringService.objective(data, centers, U, T, params))
            if movement < params.tol:
                converged = True
                break

        D2 = ClusteringService._floored_distances(data, centers)
        U = ClusteringService.memberships(D2, params.m_fuzz)
        T = ClusteringService.typicalities(D2, params.eta)
        logger.debug(f"fp_cluster c={c}: {iterations} iteration(s), converged={converged}")
        return ClusterModel(centers, U, T, iterations, converged, trace)

    @staticmethod
    def initial_centers(data, c, params):
        """
        Row indices of the c starting centers.

        The default sweep starts at the record nearest the grand mean and then
        repeatedly takes the record farthest from every chosen one; ties go to
        the lowest row index.
        """
        n = data.shape[0]
        if params.init == INIT_RANDOM:
            rng = np.random.default_rng(params.seed)
            return rng.choice(n, size=c, replace=False)

        chosen = [int(np.argmin(squared_distances(data, data.mean(axis=0))))]
        nearest_chosen = squared_distances(data, data[chosen[0]])
        while len(chosen) < c:
            candidates = nearest_chosen.copy()
            candidates[chosen] = -np.inf
            pick = int(np.argmax(candidates))
            chosen.append(pick)
            nearest_chosen = np.minimum(nearest_chosen, squared_distances(data, data[pick]))
        return np.array(chosen, dtype=np.int64)

    @staticmethod
    def memberships(D2, m_fuzz):
        """
        u_ij = 1 / sum_k (d_ij / d_ik)^(2 / (m - 1)); every row sums to 1.
        """
        ratio = D2 / D2.min(axis=1, keepdims=True)
        inverse = ratio ** (-1.0 / (m_fuzz - 1.0))
        return inverse / inverse.sum(axis=1, keepdims=True)

    @staticmethod
    def typicalities(D2, eta):
        """
        t_ij = 1 / sum_l (d_ij / d_lj)^(2 / (eta - 1)); every column sums to 1.
        """
        ratio = D2 / D2.min(axis=0, keepdims=True)
        inverse = ratio ** (-1.0 / (eta - 1.0))
        return inverse / inverse.sum(axis=0, keepdims=True)

    @staticmethod
    def objective(data, centers, U, T, params):
        """
        J = sum_i sum_j (u_ij^m + t_ij^eta) * d_ij^2.
        """
        D2 = ClusteringService._floored_distances(data, centers)
        return float(((U**params.m_fuzz + T**params.eta) * D2).sum())

    @staticmethod
    def pcaes(data, model):
        """
        Partition coefficient and exponential separation index; higher is better.

        PCAES = sum_j sum_i u_ij^2 / u_M - sum_j exp(-min_{k != j} |v_j - v_k|^2 / beta_T)
        with u_M = min_j sum_i u_ij^2 and beta_T the mean squared distance of the
        centers to the mean of the data.

        Raises:
            UsageError: Fewer than two clusters.
            DegenerateModelError: Every center coincides.
        """
        data = ClusteringService._checked_data(data)
        if model.c < 2:
            raise UsageError(f"PCAES needs at least two clusters, got c={model.c}.")

        centers = model.centers
        pairwise = squared_distances(centers, centers)
        if pairwise.max() <= DISTANCE_FLOOR:
            raise DegenerateModelError(f"All {model.c} cluster centers coincide.")
        beta = squared_distances(centers, data.mean(axis=0)).sum() / model.c
        if beta <= DISTANCE_FLOOR:
            raise DegenerateModelError("Cluster centers have no spread around the data mean.")

        compactness = (model.U**2).sum(axis=0)
        np.fill_diagonal(pairwise, np.inf)
        separation = np.exp(-pairwise.min(axis=1) / beta)
        return float((compactness / compactness.min()).sum() - separation.sum())

    @staticmethod
    def select_partition(data, c_range=None, params=None, workers=CLUSTER_WORKERS, min_size=1):
        """
        Sweeps the cluster count and keeps the model with the best PCAES score.

        Args:
            data (ndarray): (n, d) matrix.
            c_range (tuple): (c_min, c_max) with 2 <= c_min <= c_max <= n;
                defaults to (2, ceil(sqrt(n))).
            params (FuzzinessParams): Passed to every fp_cluster run.
            workers (int): Candidates fitted concurrently.
            min_size (int): Candidates whose hardened non-empty clusters hold fewer
                records are skipped like degenerate ones.

        Returns:
            PartitionSelection: Winning model with empty clusters pruned, hard labels
            and the score of every feasible candidate. Ties go to the smaller c.

        Raises:
            DegenerateModelError: No candidate is both non-degenerate and feasible.
        """
        params = params or FuzzinessParams()
        data = ClusteringService._checked_data(data)
        n = data.shape[0]
        c_min, c_max = c_range if c_range is not None else ClusteringService.default_c_range(n)
        if not 2 <= c_min <= c_max <= n:
            raise UsageError(f"Cluster count range must satisfy 2 <= c_min <= c_max <= n={n}, got [{c_min}, {c_max}].")

        candidates = list(range(int(c_min), int(c_max) + 1))

        def fit(c):
            model = ClusteringService.fp_cluster(data, c, params)
            try:
                score = ClusteringService.pcaes(data, model)
            except DegenerateModelError as e:
                logger.warning(f"Skipping c={c}: {e}")
                return model, None
            sizes = np.bincount(ClusteringService.hard_labels(data, model.centers), minlength=c)
            smallest = int(sizes[sizes > 0].min())
            if smallest < min_size:
                logger.info(f"Skipping c={c}: a cluster of {smallest} record(s) is below {min_size}")
                return model, None
            return model, score

        if workers > 1 and len(candidates) > 1:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                fitted = list(executor.map(fit, candidates))
        else:
            fitted = [fit(c) for c in candidates]

        scores = {c: score for c, (_, score) in zip(candidates, fitted) if score is not None}
        if not scores:
            raise DegenerateModelError(
                f"No candidate cluster count in [{c_min}, {c_max}] is non-degenerate "
                f"with every cluster of at least {min_size} record(s)."
            )

        best_c = None
        for c in candidates:
            if c in scores and (best_c is None or scores[c] > scores[best_c]):
                best_c = c
        model = fitted[candidates.index(best_c)][0]
        labels = ClusteringService.hard_labels(data, model.centers)
        model, labels = ClusteringService._prune_empty(model, labels)
        logger.info(f"Selected c={best_c} ({model.c} non-empty) from [{c_min}, {c_max}] for {n} records")
        return PartitionSelection(model, labels, scores, best_c)

    @staticmethod
    def hard_labels(data, centers):
        """
        Nearest-center label of every record; ties go to the lower center index.
        """
        return np.argmin(squared_distances(data, np.atleast_2d(centers)), axis=1).astype(np.int64)

    @staticmethod
    def default_c_range(n):
        return (2, max(2, math.ceil(math.sqrt(n))))

    @staticmethod
    def _prune_empty(model, labels):
        present = np.unique(labels)
        if present.size == model.c:
            return model, labels
        logger.info(f"Pruning {model.c - present.size} empty cluster(s)")
        U = model.U[:, present]
        U = U / U.sum(axis=1, keepdims=True)
        pruned = ClusterModel(
            model.centers[present],
            U,
            model.T[:, present],
            model.iterations_run,
            model.converged,
            model.objective_trace,
        )
        return pruned, np.searchsorted(present, labels)

    @staticmethod
    def _floored_distances(data, centers):
        return np.maximum(squared_distances(data, centers), DISTANCE_FLOOR)

    @staticmethod
    def _checked_data(data):
        data = np.asarray(data, dtype=float)
        if data.ndim == 1:
            data = data[:, np.newaxis]
        if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] == 0:
            raise DataError("Clustering needs a non-empty (n, d) matrix.")
        return data
