from collections import Counter

import numpy as np

from src.models.cluster_model import FuzzinessParams
from src.utils.constants import METHODS, METHOD_HM_PFSOM, NORMALIZE_LENIENT, NORMALIZE_STRICT
from src.utils.errors import InfeasibleKError, UsageError


def _as_range(value, name):
    if value is None:
        return None
    try:
        low, high = (int(bound) for bound in value)
    except (TypeError, ValueError) as e:
        raise UsageError(f"{name} must be a pair [c_min, c_max], got {value!r}.") from e
    if low < 1 or low > high:
        raise UsageError(f"{name} must satisfy 1 <= c_min <= c_max, got [{low}, {high}].")
    return (low, high)


class AnonymizationConfig:
    """
    Settings of one anonymization run.

    Attributes:
        - `method`          One of mdav, individual_sorting, single_axis_zscore,
                            single_axis_pca, hm_pfsom.
        - `k`               Privacy parameter (>= 1).
        - `fuzz`            FuzzinessParams (hm_pfsom only).
        - `c_range`         Sub-microdata count range override (hm_pfsom only);
                            (1, 1) keeps the whole table as one sub-microdata.
        - `conf_c_range`    Confidential class count range override (hm_pfsom only).
        - `groups_count`    Fix the number of groups per sub-microdata instead of k
                            (hm_pfsom only); k per sub becomes floor(min_class / groups_count).
        - `normalize`       "strict" rejects constant columns, "lenient" maps them to 0.
        - `workers`         Concurrent sub-microdata pipelines.
    """

    def __init__(
        self,
        method,
        k,
        fuzz=None,
        c_range=None,
        conf_c_range=None,
        groups_count=None,
        normalize=NORMALIZE_STRICT,
        workers=1,
    ):
        if method not in METHODS:
            raise UsageError(f"Unknown method {method!r}; expected one of {', '.join(METHODS)}.")
        if int(k) < 1:
            raise UsageError(f"k must be a positive integer, got {k}.")
        if normalize not in (NORMALIZE_STRICT, NORMALIZE_LENIENT):
            raise UsageError(f"normalize must be strict or lenient, got {normalize!r}.")
        if groups_count is not None and int(groups_count) < 1:
            raise UsageError(f"groups_count must be a positive integer, got {groups_count}.")
        self.method = method
        self.k = int(k)
        self.fuzz = fuzz or FuzzinessParams()
        self.c_range = _as_range(c_range, "c_range")
        self.conf_c_range = _as_range(conf_c_range, "conf_c_range")
        self.groups_count = None if groups_count is None else int(groups_count)
        self.normalize = normalize
        self.workers = max(1, int(workers))

    @property
    def strict(self):
        return self.normalize == NORMALIZE_STRICT

    def check_against(self, n):
        """
        Validates k against a table of n records; hm_pfsom needs n >= 2k unless
        the group count is fixed instead.
        """
        if self.method == METHOD_HM_PFSOM and self.groups_count is None and n < 2 * self.k:
            raise InfeasibleKError(
                f"hm_pfsom needs at least 2k records: n={n}, k={self.k}; the largest feasible k is {n // 2}.",
                max_feasible_k=n // 2,
            )
        if self.k > n:
            raise InfeasibleKError(
                f"k={self.k} exceeds the number of records ({n}); use k <= {n}.",
                max_feasible_k=n,
            )


class SubMicrodata:
    """
    One quasi-identifier block of an hm_pfsom run.

    Attributes:
        - `index`           Position of the block among the sub-microdata.
        - `row_ids`         Row ids of its records.
        - `cs`              Number of confidential classes found in it.
        - `class_labels`    (n_sub,) class of every member, aligned with row_ids.
        - `k_effective`     k used inside the block.
        - `group_count`     Groups formed inside the block.
    """

    def __init__(self, index, row_ids, cs, class_labels, k_effective, group_count):
        self.index = int(index)
        self.row_ids = np.array(row_ids, dtype=np.int64)
        self.cs = int(cs)
        self.class_labels = np.array(class_labels, dtype=np.int64)
        self.k_effective = int(k_effective)
        self.group_count = int(group_count)

    @property
    def size(self):
        return self.row_ids.size

    @property
    def class_sizes(self):
        return np.bincount(self.class_labels, minlength=self.cs).tolist()

    def to_dict(self):
        return {
            "index": self.index,
            "size": self.size,
            "cs": self.cs,
            "class_sizes": self.class_sizes,
            "k_effective": self.k_effective,
            "groups": self.group_count,
        }


class AnonymizedResult:
    """
    Output of an anonymization run.

    Attributes:
        - `masked`          Microdata with quasi-identifiers replaced; other columns untouched.
        - `partition`       The Partition whose centroids replaced the quasi-identifiers.
        - `config`          The AnonymizationConfig used.
        - `sub_structure`   List of SubMicrodata (hm_pfsom only, else empty).
        - `class_labels`    (n,) confidential class per record, offset per sub so classes of
                            different blocks never share an id (hm_pfsom only).
        - `scope`           (n,) sub-microdata index per record (hm_pfsom only).
        - `selection`       PartitionSelection of the quasi-identifier split (hm_pfsom only;
                            None when the table stayed one sub-microdata).
    """

    def __init__(self, masked, partition, config, sub_structure=None, class_labels=None, scope=None, selection=None):
        self.masked = masked
        self.partition = partition
        self.config = config
        self.sub_structure = list(sub_structure or [])
        self.class_labels = None if class_labels is None else np.array(class_labels, dtype=np.int64)
        self.scope = None if scope is None else np.array(scope, dtype=np.int64)
        self.selection = selection

    @property
    def method(self):
        return self.config.method

    def structure_summary(self):
        """
        Compact {c, cs} summary for sweep rows.
        """
        if self.method != METHOD_HM_PFSOM:
            return None
        return {"c": len(self.sub_structure), "cs": [sub.cs for sub in self.sub_structure]}

    def to_dict(self):
        """
        The partition and sub-microdata structure in the JSON layout of the structure file.
        """
        groups = []
        for members in self.partition.groups():
            entry = {"size": int(members.size)}
            if self.class_labels is not None:
                counts = Counter(int(label) for label in self.class_labels[members])
                entry["class_counts"] = {str(label): counts[label] for label in sorted(counts)}
            groups.append(entry)
        data = {"method": self.method, "k": self.config.k}
        data.update(self.partition.to_dict())
        data["groups"] = groups
        data["subs"] = [sub.to_dict() for sub in self.sub_structure]
        if self.class_labels is not None:
            data["class_labels"] = self.class_labels.tolist()
        if self.scope is not None:
            data["scope"] = self.scope.tolist()
        return data
