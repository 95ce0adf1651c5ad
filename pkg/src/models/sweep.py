import os

from src.models.cluster_model import FuzzinessParams
from src.utils.constants import (
    BENCH_WORKERS,
    DEFAULT_SEED,
    METHODS,
    NORMALIZE_LENIENT,
    NORMALIZE_STRICT,
    REPORT_COLUMNS,
    REPORT_FORMATS,
)
from src.utils.errors import SweepSpecError, UsageError


def _integer(value, name):
    if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
        raise SweepSpecError(f"{name} must be an integer, got {value!r}.")
    try:
        return int(value)
    except (TypeError, ValueError) as e:
        raise SweepSpecError(f"{name} must be an integer, got {value!r}.") from e


def _listed(values, name):
    if values is None:
        return []
    if isinstance(values, (str, bytes, dict)) or not hasattr(values, "__iter__"):
        raise SweepSpecError(f"{name} must be a list, got {values!r}.")
    return list(values)


def _count_range(value, name):
    if value is None:
        return None
    bounds = _listed(value, name)
    if len(bounds) != 2:
        raise SweepSpecError(f"{name} must be a pair [c_min, c_max], got {value!r}.")
    low, high = (_integer(bound, name) for bound in bounds)
    if low < 1 or low > high:
        raise SweepSpecError(f"{name} must satisfy 1 <= c_min <= c_max, got [{low}, {high}].")
    return (low, high)


def _qid_subsets(value):
    subsets = []
    for subset in _listed(value, "qid_subsets"):
        names = [str(name) for name in _listed(subset, "each qid subset")]
        if not names or len(set(names)) != len(names):
            raise SweepSpecError(f"A qid subset must list distinct attribute names, got {subset!r}.")
        subsets.append(tuple(names))
    return subsets


class SweepSpec:
    """
    A k-sweep over several methods on one dataset.

    Attributes:
        - `dataset`         Path to the CSV file.
        - `schema`          Path to the schema JSON file.
        - `methods`         Methods to run, in report order.
        - `k_values`        Strictly increasing privacy parameters.
        - `seed`            Seed forwarded to the clustering parameters.
        - `output_dir`      Directory receiving sweep_<stem>.<ext>.
        - `formats`         Report formats to emit (csv, json).
        - `long_format`     Also emit one row per (method, k, metric).
        - `drop_columns`    Columns removed from the file before the schema check.
        - `fuzz`            FuzzinessParams for hm_pfsom rows.
        - `c_range`         Sub-microdata count override for hm_pfsom rows.
        - `conf_c_range`    Confidential class count override for hm_pfsom rows.
        - `normalize`       strict or lenient constant-column handling.
        - `workers`         Bounded worker pool size.
        - `qid_subsets`     Quasi-identifier name tuples; every cell is repeated with only
                            those quasi-identifiers. Empty means all of them, once.
        - `compare_subs`    Also report every hm_pfsom sub-microdata against MDAV run on it.
        - `emit_models`     Also write the quasi-identifier clustering of hm_pfsom cells.
    """

    def __init__(
        self,
        dataset,
        schema,
        methods,
        k_values,
        seed=DEFAULT_SEED,
        output_dir=".",
        formats=("csv",),
        long_format=False,
        drop_columns=None,
        fuzz=None,
        c_range=None,
        conf_c_range=None,
        normalize=NORMALIZE_STRICT,
        workers=BENCH_WORKERS,
        qid_subsets=None,
        compare_subs=False,
        emit_models=False,
    ):
        methods = _listed(methods, "methods")
        k_values = [_integer(k, "k") for k in _listed(k_values, "k_values")]
        formats = _listed(formats, "formats")
        if not methods:
            raise SweepSpecError("Sweep spec needs at least one method.")
        unknown = [method for method in methods if method not in METHODS]
        if unknown:
            raise SweepSpecError(f"Unknown method(s) in sweep spec: {', '.join(map(str, unknown))}.")
        if not k_values:
            raise SweepSpecError("Sweep spec needs at least one k value.")
        if any(k < 1 for k in k_values):
            raise SweepSpecError(f"k values must be positive, got {k_values}.")
        if any(b <= a for a, b in zip(k_values, k_values[1:])):
            raise SweepSpecError(f"k values must be strictly increasing, got {k_values}.")
        bad_formats = [fmt for fmt in formats if fmt not in REPORT_FORMATS]
        if bad_formats or not formats:
            raise SweepSpecError(f"Report formats must be among {REPORT_FORMATS}, got {formats}.")
        if normalize not in (NORMALIZE_STRICT, NORMALIZE_LENIENT):
            raise SweepSpecError(f"normalize must be strict or lenient, got {normalize!r}.")

        self.dataset = dataset
        self.schema = schema
        self.methods = methods
        self.k_values = k_values
        self.seed = _integer(seed, "seed")
        self.output_dir = output_dir
        self.formats = formats
        self.long_format = bool(long_format)
        self.drop_columns = [str(column) for column in _listed(drop_columns, "drop_columns")]
        self.fuzz = fuzz or FuzzinessParams(seed=self.seed)
        self.c_range = _count_range(c_range, "c_range")
        self.conf_c_range = _count_range(conf_c_range, "conf_c_range")
        self.normalize = normalize
        self.workers = max(1, _integer(workers, "workers"))
        self.qid_subsets = _qid_subsets(qid_subsets)
        self.compare_subs = bool(compare_subs)
        self.emit_models = bool(emit_models)

    @property
    def dataset_stem(self):
        return os.path.splitext(os.path.basename(self.dataset))[0]

    def subsets(self):
        """
        Quasi-identifier subsets to run; None stands for all of them.
        """
        return self.qid_subsets or [None]

    def jobs(self):
        """
        (qid subset, method, k) cells in spec order.
        """
        return [(subset, method, k) for subset in self.subsets() for method in self.methods for k in self.k_values]

    @staticmethod
    def from_dict(data, base_dir=None):
        """
        Builds a spec from parsed JSON; relative paths resolve against `base_dir`.
        """
        if not isinstance(data, dict):
            raise SweepSpecError("Sweep spec must be a JSON object.")
        missing = [key for key in ("dataset", "schema", "methods", "k_values") if key not in data]
        if missing:
            raise SweepSpecError(f"Sweep spec is missing {', '.join(missing)}.")
        paths = {key: data.get(key, ".") for key in ("dataset", "schema", "output_dir")}
        not_text = [key for key, path in paths.items() if not isinstance(path, str)]
        if not_text:
            raise SweepSpecError(f"Sweep spec paths must be strings: {', '.join(not_text)}.")

        def resolve(path):
            if base_dir and not os.path.isabs(path):
                return os.path.join(base_dir, path)
            return path

        seed = _integer(data.get("seed", DEFAULT_SEED), "seed")
        fuzz_data = data.get("fuzz") or {}
        if not isinstance(fuzz_data, dict):
            raise SweepSpecError("Sweep spec fuzz must be a JSON object.")
        fuzz_data = dict(fuzz_data)
        fuzz_data.setdefault("seed", seed)
        try:
            fuzz = FuzzinessParams.from_dict(fuzz_data)
        except (UsageError, TypeError, ValueError) as e:
            raise SweepSpecError(f"Invalid fuzzy parameters in sweep spec: {e}") from e

        return SweepSpec(
            dataset=resolve(paths["dataset"]),
            schema=resolve(paths["schema"]),
            methods=data["methods"],
            k_values=data["k_values"],
            seed=seed,
            output_dir=resolve(paths["output_dir"]),
            formats=data.get("formats", ["csv"]),
            long_format=data.get("long_format", False),
            drop_columns=data.get("drop_columns"),
            fuzz=fuzz,
            c_range=data.get("c_range"),
            conf_c_range=data.get("conf_c_range"),
            normalize=data.get("normalize", NORMALIZE_STRICT),
            workers=data.get("workers", BENCH_WORKERS),
            qid_subsets=data.get("qid_subsets"),
            compare_subs=data.get("compare_subs", False),
            emit_models=data.get("emit_models", False),
        )


class SweepRow:
    """
    One (qid subset, method, k) cell of a sweep.

    Attributes:
        - `method`, `k`     The cell.
        - `metrics`         {column: value} for the stable report columns.
        - `n`               Records evaluated.
        - `wall_time_ms`    Anonymize + evaluate time.
        - `structure`       hm_pfsom {c, cs} summary (optional).
        - `error`           Failure message when the cell did not complete.
        - `qids`            Quasi-identifier subset of the cell (None for all).
        - `diversity_ok`    Diversity verdict of hm_pfsom cells (None otherwise).
        - `sub_rows`        Per sub-microdata comparison records (compare_subs only).
        - `model`           Quasi-identifier PartitionSelection as a dict (emit_models only).
    """

    def __init__(
        self,
        method,
        k,
        metrics=None,
        n=None,
        wall_time_ms=0.0,
        structure=None,
        error=None,
        qids=None,
        diversity_ok=None,
        sub_rows=None,
        model=None,
    ):
        self.method = method
        self.k = int(k)
        self.metrics = dict(metrics or {})
        self.n = n
        self.wall_time_ms = float(wall_time_ms)
        self.structure = structure
        self.error = error
        self.qids = None if qids is None else tuple(qids)
        self.diversity_ok = diversity_ok
        self.sub_rows = list(sub_rows or [])
        self.model = model

    @property
    def ok(self):
        return self.error is None

    @property
    def qids_label(self):
        return None if self.qids is None else "+".join(self.qids)

    def to_dict(self):
        row = {column: None for column in REPORT_COLUMNS}
        row.update(self.metrics)
        row["method"] = self.method
        row["k"] = self.k
        row["wall_time_ms"] = self.wall_time_ms
        linked = self.metrics.get("linked")
        row["linked_pct"] = 100.0 * linked / self.n if linked is not None and self.n else None
        row["diversity_ok"] = self.diversity_ok
        row["qids"] = self.qids_label
        row["error"] = self.error
        row["structure"] = self.structure
        return row
