import numpy as np

from src.utils.errors import LabelOutOfRangeError


class Partition:
    """
    A disjoint grouping of records.

    Attributes:
        - `labels`      (n,) group id per record, ids 0..g-1.
        - `g`           Number of groups; every group is non-empty.
        - `k_declared`  Privacy parameter the partition was built for.
    """

    def __init__(self, labels, k_declared=1, g=None):
        labels = np.array(labels, dtype=np.int64)
        if labels.ndim != 1 or labels.size == 0:
            raise LabelOutOfRangeError("Partition labels must be a non-empty vector.")
        g = int(labels.max()) + 1 if g is None else int(g)
        if labels.min() < 0 or labels.max() >= g:
            raise LabelOutOfRangeError(f"Partition labels must lie in [0, {g - 1}].")
        sizes = np.bincount(labels, minlength=g)
        if np.any(sizes == 0):
            empty = np.flatnonzero(sizes == 0).tolist()
            raise LabelOutOfRangeError(f"Partition groups {empty} are empty.")
        labels.setflags(write=False)
        self.labels = labels
        self.g = g
        self.k_declared = int(k_declared)

    @property
    def n(self):
        return self.labels.size

    @property
    def sizes(self):
        return np.bincount(self.labels, minlength=self.g)

    @property
    def min_size(self):
        return int(self.sizes.min())

    def members(self, group):
        return np.flatnonzero(self.labels == group)

    def groups(self):
        """
        Member positions of every group, in group order.
        """
        return [self.members(group) for group in range(self.g)]

    @staticmethod
    def from_groups(groups, n, k_declared=1):
        """
        Builds a partition from a list of member-position lists covering 0..n-1.
        """
        labels = np.full(n, -1, dtype=np.int64)
        for group_id, members in enumerate(groups):
            labels[np.asarray(members, dtype=np.int64)] = group_id
        if np.any(labels < 0):
            missing = np.flatnonzero(labels < 0).tolist()
            raise LabelOutOfRangeError(f"Records {missing} belong to no group.")
        return Partition(labels, k_declared=k_declared, g=len(groups))

    def to_dict(self):
        return {
            "labels": self.labels.tolist(),
            "g": self.g,
            "k_declared": self.k_declared,
        }

    @staticmethod
    def from_dict(data):
        return Partition(data["labels"], k_declared=data.get("k_declared", 1), g=data.get("g"))
