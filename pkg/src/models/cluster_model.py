import numpy as np

from src.utils.constants import DEFAULT_SEED, ETA, INIT_FARTHEST, INIT_RANDOM, M_FUZZ, MAX_ITER, TOL
from src.utils.errors import UsageError


class FuzzinessParams:
    """
    Parameters of the fuzzy-possibilistic learning process.

    Attributes:
        - `m_fuzz`      Fuzzifier of the memberships (> 1).
        - `eta`         Fuzzifier of the typicalities (> 1).
        - `max_iter`    Iteration cap (>= 1).
        - `tol`         Stop once no center moves more than this (> 0).
        - `seed`        Seed for the random initialization.
        - `init`        "farthest" (deterministic sweep) or "random".
    """

    def __init__(self, m_fuzz=M_FUZZ, eta=ETA, max_iter=MAX_ITER, tol=TOL, seed=DEFAULT_SEED, init=INIT_FARTHEST):
        if not m_fuzz > 1:
            raise UsageError(f"m_fuzz must be greater than 1, got {m_fuzz}.")
        if not eta > 1:
            raise UsageError(f"eta must be greater than 1, got {eta}.")
        if not tol > 0:
            raise UsageError(f"tol must be positive, got {tol}.")
        if int(max_iter) < 1:
            raise UsageError(f"max_iter must be at least 1, got {max_iter}.")
        if init not in (INIT_FARTHEST, INIT_RANDOM):
            raise UsageError(f"Unknown initialization {init!r}.")
        self.m_fuzz = float(m_fuzz)
        self.eta = float(eta)
        self.max_iter = int(max_iter)
        self.tol = float(tol)
        self.seed = int(seed)
        self.init = init

    def to_dict(self):
        return {
            "m_fuzz": self.m_fuzz,
            "eta": self.eta,
            "max_iter": self.max_iter,
            "tol": self.tol,
            "seed": self.seed,
            "init": self.init,
        }

    @staticmethod
    def from_dict(data):
        data = data or {}
        return FuzzinessParams(
            m_fuzz=data.get("m_fuzz", M_FUZZ),
            eta=data.get("eta", ETA),
            max_iter=data.get("max_iter", MAX_ITER),
            tol=data.get("tol", TOL),
            seed=data.get("seed", DEFAULT_SEED),
            init=data.get("init", INIT_FARTHEST),
        )


class ClusterModel:
    """
    Result of fuzzy-possibilistic clustering.

    Attributes:
        - `centers`         (c, d) cluster prototypes.
        - `U`               (n, c) memberships; every row sums to 1.
        - `T`               (n, c) typicalities; every column sums to 1.
        - `iterations_run`  Number of alternating updates performed.
        - `converged`       True if center movement fell below tol.
        - `objective_trace` Objective value after each iteration.
    """

    def __init__(self, centers, U, T, iterations_run, converged, objective_trace=None):
        self.centers = np.array(centers, dtype=float)
        self.U = np.array(U, dtype=float)
        self.T = np.array(T, dtype=float)
        self.iterations_run = int(iterations_run)
        self.converged = bool(converged)
        self.objective_trace = list(objective_trace or [])
        for array in (self.centers, self.U, self.T):
            array.setflags(write=False)

    @property
    def c(self):
        return self.centers.shape[0]

    def to_dict(self):
        return {
            "c": self.c,
            "centers": self.centers.tolist(),
            "U": self.U.tolist(),
            "T": self.T.tolist(),
            "iterations_run": self.iterations_run,
            "converged": self.converged,
            "objective_trace": [float(value) for value in self.objective_trace],
        }


class PartitionSelection:
    """
    The best-scoring model of a cluster-count sweep and its hard labels.

    Attributes:
        - `model`           The selected ClusterModel (empty clusters pruned).
        - `hard_labels`     (n,) nearest-center label per record.
        - `scores`          {c: PCAES score} for every non-degenerate candidate.
        - `selected_c`      Cluster count of the winning candidate before pruning.
    """

    def __init__(self, model, hard_labels, scores, selected_c):
        self.model = model
        self.hard_labels = np.array(hard_labels, dtype=np.int64)
        self.hard_labels.setflags(write=False)
        self.scores = dict(scores)
        self.selected_c = int(selected_c)

    def to_dict(self):
        return {
            "model": self.model.to_dict(),
            "hard_labels": self.hard_labels.tolist(),
            "scores": {str(c): score for c, score in self.scores.items()},
            "selected_c": self.selected_c,
        }
