import numpy as np

from src.utils.errors import DataError, ShapeMismatchError


def _frozen(array, dtype):
    array = np.array(array, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


class Microdata:
    """
    A numeric record matrix bound to an attribute schema.

    Attributes:
        - `schema`      The AttributeSchema of the columns.
        - `rows`        (n, m) float matrix, read-only, every cell finite.
        - `row_ids`     Stable record identifiers (0..n-1 at load).
    """

    def __init__(self, schema, rows, row_ids=None):
        rows = np.asarray(rows, dtype=float)
        if rows.ndim != 2:
            raise ShapeMismatchError(f"Microdata rows must be a 2-D matrix, got {rows.ndim} dimension(s).")
        if rows.shape[0] < 1:
            raise DataError("Microdata needs at least one record.")
        if rows.shape[1] != schema.m:
            raise ShapeMismatchError(
                f"Microdata has {rows.shape[1]} columns but the schema names {schema.m} attributes."
            )
        if not np.all(np.isfinite(rows)):
            bad_row, bad_col = np.argwhere(~np.isfinite(rows))[0]
            raise DataError(
                f"Non-finite value in record {bad_row}, column {schema.names[bad_col]!r}."
            )
        if row_ids is None:
            row_ids = np.arange(rows.shape[0])
        row_ids = np.asarray(row_ids, dtype=np.int64)
        if row_ids.shape != (rows.shape[0],):
            raise ShapeMismatchError("row_ids must have one entry per record.")

        self.schema = schema
        self.rows = _frozen(rows, float)
        self.row_ids = _frozen(row_ids, np.int64)

    @property
    def n(self):
        return self.rows.shape[0]

    @property
    def m(self):
        return self.rows.shape[1]

    def columns(self, role):
        """
        Column positions of `role` in this table.
        """
        return self.schema.indices(role)

    def with_rows(self, rows):
        """
        Same schema and row ids, different values.
        """
        return Microdata(self.schema, rows, self.row_ids)

    def take(self, indices):
        """
        The records at `indices` (positions, not row ids), keeping their row ids.
        """
        indices = np.asarray(indices, dtype=np.int64)
        return Microdata(self.schema, self.rows[indices], self.row_ids[indices])

    def restrict(self, schema):
        """
        The columns named by `schema`, in that schema's order.
        """
        positions = [self.schema.names.index(name) for name in schema.names]
        return Microdata(schema, self.rows[:, positions], self.row_ids)

    def __repr__(self):
        return f"Microdata(n={self.n}, m={self.m}, columns={self.schema.names})"


class ColumnStats:
    """
    Per-attribute descriptive statistics in native units.

    Attributes:
        - `names`   Attribute names, aligned with the arrays below.
        - `min`     Column minima.
        - `max`     Column maxima.
        - `mean`    Column means.
        - `std`     Population standard deviations (divide by n).
    """

    def __init__(self, names, min, max, mean, std):
        self.names = list(names)
        self.min = _frozen(min, float)
        self.max = _frozen(max, float)
        self.mean = _frozen(mean, float)
        self.std = _frozen(std, float)

    @property
    def span(self):
        return self.max - self.min

    def constant_columns(self):
        return [name for name, span in zip(self.names, self.span) if span == 0]

    def to_dict(self):
        return {
            name: {
                "min": float(self.min[i]),
                "max": float(self.max[i]),
                "mean": float(self.mean[i]),
                "std": float(self.std[i]),
            }
            for i, name in enumerate(self.names)
        }
