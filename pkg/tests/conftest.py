import json

import numpy as np
import pytest

from src.models.attribute_schema import Attribute, AttributeSchema
from src.models.microdata import Microdata
from src.services.dataset_service import DatasetService
from src.utils.constants import ROLE_CONFIDENTIAL, ROLE_IDENTIFIER, ROLE_QUASI_IDENTIFIER

# ZIP code, age, disease (0 Cancer, 1 Heart Disease, 2 Viral Infection)
PATIENTS = [
    (2025, 28, 1),
    (2022, 29, 1),
    (2022, 25, 2),
    (2020, 24, 2),
    (1012, 50, 0),
    (1012, 55, 1),
    (1013, 47, 2),
    (1013, 49, 2),
    (1023, 31, 0),
    (1022, 34, 0),
    (1021, 35, 0),
    (1021, 37, 0),
]

DISEASES = {0: "Cancer", 1: "Heart Disease", 2: "Viral Infection"}

# ZIP code, age, salary
SALARIES = [
    (1011, 22, 500),
    (1007, 22, 550),
    (1012, 23, 600),
    (1009, 25, 1600),
    (1010, 28, 1500),
    (1011, 29, 1800),
    (1013, 31, 2900),
    (1010, 32, 3200),
    (1008, 32, 3600),
    (1010, 29, 1650),
    (1009, 26, 1550),
    (1011, 27, 1700),
    (1008, 33, 3800),
]

# Salary classes 0 low, 1 middle, 2 high
SALARY_CLASSES = [0, 0, 0, 1, 1, 1, 2, 2, 2, 1, 1, 1, 2]


def make_schema(confidential="Disease", identifier=None):
    attributes = []
    if identifier:
        attributes.append(Attribute(identifier, ROLE_IDENTIFIER))
    attributes += [
        Attribute("ZIPcode", ROLE_QUASI_IDENTIFIER),
        Attribute("Age", ROLE_QUASI_IDENTIFIER),
        Attribute(confidential, ROLE_CONFIDENTIAL),
    ]
    return AttributeSchema(attributes)


def make_microdata(qids, confidential=None):
    """
    Microdata with quasi-identifiers q0.. and confidential columns s0.. .
    """
    qids = np.asarray(qids, dtype=float)
    if qids.ndim == 1:
        qids = qids[:, np.newaxis]
    n = qids.shape[0]
    confidential = np.zeros((n, 1)) if confidential is None else np.asarray(confidential, dtype=float).reshape(n, -1)
    attributes = [Attribute(f"q{j}", ROLE_QUASI_IDENTIFIER) for j in range(qids.shape[1])]
    attributes += [Attribute(f"s{j}", ROLE_CONFIDENTIAL) for j in range(confidential.shape[1])]
    return Microdata(AttributeSchema(attributes), np.hstack([qids, confidential]))


@pytest.fixture
def patients():
    return Microdata(make_schema("Disease"), PATIENTS)


@pytest.fixture
def salaries():
    return Microdata(make_schema("Salary"), SALARIES)


@pytest.fixture
def salary_classes():
    return np.array(SALARY_CLASSES)


@pytest.fixture
def blobs():
    """
    Three well separated two-dimensional blobs with two classes each.
    """
    spec = {
        "n": 150,
        "qid_blob_centers": [[0.0, 0.0], [10.0, 0.0], [5.0, 10.0]],
        "conf_class_centers": [[0.0], [20.0]],
        "noise_scale": 0.5,
        "seed": 3,
    }
    return DatasetService.synthesize(spec)


@pytest.fixture
def patients_files(tmp_path):
    """
    Table of patients with an identifier column and text diseases, plus its schema.
    """
    lines = ["id,ZIPcode,Age,Disease"]
    lines += [f"{i + 1},{zip_code},{age},{DISEASES[code]}" for i, (zip_code, age, code) in enumerate(PATIENTS)]
    data = tmp_path / "patients.csv"
    data.write_text("\n".join(lines) + "\n", encoding="utf-8")
    schema = tmp_path / "schema.json"
    schema.write_text(json.dumps(make_schema("Disease", identifier="id").to_dict()), encoding="utf-8")
    return data, schema


@pytest.fixture
def numeric_files(tmp_path):
    """
    Numeric patients table (diseases coded) with an identifier column, plus its schema.
    """
    lines = ["id,ZIPcode,Age,Disease"]
    lines += [f"{i + 1},{zip_code},{age},{code}" for i, (zip_code, age, code) in enumerate(PATIENTS)]
    data = tmp_path / "numeric.csv"
    data.write_text("\n".join(lines) + "\n", encoding="utf-8")
    schema = tmp_path / "schema.json"
    schema.write_text(json.dumps(make_schema("Disease", identifier="id").to_dict()), encoding="utf-8")
    return data, schema
