import numpy as np

from src.models.attribute_schema import Attribute, AttributeSchema
from src.models.microdata import ColumnStats, Microdata
from src.models.synthetic import SyntheticMicrodata, SyntheticSpec
from src.utils.constants import ROLE_CONFIDENTIAL, ROLE_QUASI_IDENTIFIER
from src.utils.errors import ConstantColumnError, RoleAbsentError, ShapeMismatchError


class DatasetService:
    @staticmethod
    def column_stats(microdata):
        """
        Min, max, mean and population standard deviation of every attribute.

        Args:
            microdata (Microdata): The table.

        Returns:
            ColumnStats: Statistics aligned with the schema order.
        """
        rows = microdata.rows
        low = rows.min(axis=0)
        high = rows.max(axis=0)
        # rounding must not push the mean outside [min, max]
        mean = np.clip(rows.mean(axis=0), low, high)
        std = rows.std(axis=0, ddof=0)
        std[low == high] = 0.0
        return ColumnStats(microdata.schema.names, low, high, mean, std)

    @staticmethod
    def min_max_normalize(microdata, stats, strict=True):
        """
        Map every attribute to [0, 1] with v' = (v - min) / (max - min).

        Args:
            microdata (Microdata): The table to normalize.
            stats (ColumnStats): Statistics to normalize with (may come from another table).
            strict (bool): Reject constant columns; otherwise they map to 0.

        Returns:
            Microdata: Normalized copy, same schema and row ids.
        """
        span = DatasetService._checked_span(stats, microdata, strict)
        safe = np.where(span == 0, 1.0, span)
        rows = (microdata.rows - stats.min) / safe
        rows[:, span == 0] = 0.0
        return microdata.with_rows(rows)

    @staticmethod
    def denormalize(microdata, stats):
        """
        Inverse of min_max_normalize; constant columns come back as their value.
        """
        if len(stats.names) != microdata.m:
            raise ShapeMismatchError("Statistics and microdata have different attribute counts.")
        return microdata.with_rows(microdata.rows * stats.span + stats.min)

    @staticmethod
    def normalized_matrix(matrix, strict=True, names=None):
        """
        Min-max normalize a bare matrix column-wise with its own statistics.
        """
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        low = matrix.min(axis=0)
        span = matrix.max(axis=0) - low
        if strict and np.any(span == 0):
            constant = np.flatnonzero(span == 0).tolist()
            labels = [names[i] for i in constant] if names else constant
            raise ConstantColumnError(f"Constant column(s) {labels} cannot be min-max normalized.")
        normalized = (matrix - low) / np.where(span == 0, 1.0, span)
        normalized[:, span == 0] = 0.0
        return normalized

    @staticmethod
    def project(microdata, role):
        """
        The n x (columns with `role`) matrix, rows in the table's order.
        """
        return microdata.rows[:, microdata.columns(role)]

    @staticmethod
    def restrict_quasi_identifiers(microdata, names):
        """
        The table with only the quasi-identifiers in `names`; other attributes stay.
        """
        available = microdata.schema.names_with_role(ROLE_QUASI_IDENTIFIER)
        unknown = [name for name in names if name not in available]
        if unknown:
            raise RoleAbsentError(f"{unknown} are not quasi-identifiers of the table; it has {available}.")
        kept = [
            attribute
            for attribute in microdata.schema.attributes
            if attribute.role != ROLE_QUASI_IDENTIFIER or attribute.name in names
        ]
        return microdata.restrict(AttributeSchema(kept))

    @staticmethod
    def synthesize(spec):
        """
        Deterministic blob/class microdata for tests and benchmarks.

        Record i belongs to blob i mod b and class (i div b) mod c, so every blob
        holds every class in near-equal numbers.

        Args:
            spec (SyntheticSpec or dict): The recipe.

        Returns:
            SyntheticMicrodata: The table with blob and class ground truth.
        """
        if not isinstance(spec, SyntheticSpec):
            spec = SyntheticSpec.from_dict(spec)
        rng = np.random.default_rng(spec.seed)
        blobs = spec.qid_blob_centers
        classes = spec.conf_class_centers
        index = np.arange(spec.n)
        blob_labels = index % blobs.shape[0]
        class_labels = (index // blobs.shape[0]) % classes.shape[0]

        qids = blobs[blob_labels] + spec.noise_scale * rng.standard_normal((spec.n, blobs.shape[1]))
        conf = classes[class_labels] + spec.noise_scale * rng.standard_normal((spec.n, classes.shape[1]))

        attributes = [Attribute(f"q{j}", ROLE_QUASI_IDENTIFIER) for j in range(blobs.shape[1])]
        attributes += [Attribute(f"s{j}", ROLE_CONFIDENTIAL) for j in range(classes.shape[1])]
        microdata = Microdata(AttributeSchema(attributes), np.hstack([qids, conf]))
        return SyntheticMicrodata(microdata, blob_labels, class_labels)

    @staticmethod
    def _checked_span(stats, microdata, strict):
        if list(stats.names) != microdata.schema.names:
            raise ShapeMismatchError(
                f"Statistics cover {stats.names}, microdata has {microdata.schema.names}."
            )
        span = np.array(stats.span)
        if strict and np.any(span == 0):
            raise ConstantColumnError(
                f"Constant column(s) {stats.constant_columns()} cannot be min-max normalized; "
                "drop them or use lenient normalization."
            )
        return span
