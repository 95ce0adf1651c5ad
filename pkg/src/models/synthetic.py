import numpy as np

from src.utils.constants import DEFAULT_SEED
from src.utils.errors import UsageError


class SyntheticSpec:
    """
    Recipe for generated test microdata.

    Attributes:
        - `n`                   Number of records.
        - `qid_blob_centers`    (b, p) quasi-identifier blob centers.
        - `conf_class_centers`  (c, s) confidential class centers.
        - `noise_scale`         Standard deviation of the Gaussian noise.
        - `seed`                Random seed.
    """

    def __init__(self, n, qid_blob_centers, conf_class_centers, noise_scale=1.0, seed=DEFAULT_SEED):
        blobs = np.atleast_2d(np.asarray(qid_blob_centers, dtype=float)) if len(qid_blob_centers) else None
        classes = np.atleast_2d(np.asarray(conf_class_centers, dtype=float)) if len(conf_class_centers) else None
        if int(n) < 1:
            raise UsageError(f"Synthetic data needs n >= 1, got {n}.")
        if blobs is None or classes is None:
            raise UsageError("Synthetic data needs at least one blob center and one class center.")
        if noise_scale < 0:
            raise UsageError(f"noise_scale must be non-negative, got {noise_scale}.")
        self.n = int(n)
        self.qid_blob_centers = blobs
        self.conf_class_centers = classes
        self.noise_scale = float(noise_scale)
        self.seed = int(seed)

    @staticmethod
    def from_dict(data):
        if not data:
            raise UsageError("Synthetic spec is empty.")
        return SyntheticSpec(
            n=data.get("n", 0),
            qid_blob_centers=data.get("qid_blob_centers", []),
            conf_class_centers=data.get("conf_class_centers", []),
            noise_scale=data.get("noise_scale", 1.0),
            seed=data.get("seed", DEFAULT_SEED),
        )


class SyntheticMicrodata:
    """
    Generated microdata with its ground truth.

    Attributes:
        - `microdata`       The generated Microdata.
        - `blob_labels`     (n,) quasi-identifier blob of every record.
        - `class_labels`    (n,) confidential class of every record.
    """

    def __init__(self, microdata, blob_labels, class_labels):
        self.microdata = microdata
        self.blob_labels = np.asarray(blob_labels, dtype=np.int64)
        self.class_labels = np.asarray(class_labels, dtype=np.int64)
