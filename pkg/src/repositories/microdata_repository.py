import io
import json
import logging
import os

import numpy as np
import pandas as pd

from src.models.attribute_schema import AttributeSchema
from src.models.microdata import Microdata
from src.models.partition import Partition
from src.utils.constants import CSV_FLOAT_FORMAT, ROLE_CONFIDENTIAL, ROLE_IDENTIFIER
from src.utils.errors import CellParseError, DataError, LabelOutOfRangeError, SchemaMismatchError, ShapeMismatchError
from src.utils.helpers import atomic_write_text, factorize_column

logger = logging.getLogger(__name__)


class MicrodataRepository:
    @staticmethod
    def load_schema(path):
        """
        Read a schema file {"attributes": [{"name": ..., "role": ...}]}.
        """
        try:
            with open(path, encoding="utf-8") as handle:
                data = json.load(handle)
        except FileNotFoundError as e:
            raise DataError(f"Schema file {path} does not exist.") from e
        except (OSError, json.JSONDecodeError) as e:
            raise DataError(f"Schema file {path} is not valid JSON: {e}") from e
        return AttributeSchema.from_dict(data)

    @staticmethod
    def parse_schema_text(text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise DataError(f"Schema payload is not valid JSON: {e}") from e
        return AttributeSchema.from_dict(data)

    @staticmethod
    def load_table(path, schema, drop_columns=None, allow_missing_identifiers=False):
        """
        Load a CSV file into Microdata, rows in file order.

        Args:
            path (str): RFC-4180 CSV with a header row.
            schema (AttributeSchema): Expected columns and roles.
            drop_columns (list): Columns removed before the header check (optional).
            allow_missing_identifiers (bool): Accept files without the identifier
                columns, e.g. a released table.

        Returns:
            Microdata: The parsed table.
        """
        microdata, _ = MicrodataRepository.load_encoded_table(
            path,
            schema,
            drop_columns=drop_columns,
            allow_missing_identifiers=allow_missing_identifiers,
            encode_categorical=False,
        )
        return microdata

    @staticmethod
    def load_encoded_table(path, schema, drop_columns=None, allow_missing_identifiers=False, encode_categorical=True):
        """
        Like load_table, but text confidential columns may be factorized to codes.

        Returns:
            tuple: (Microdata, {column: {value: code}})
        """
        if not os.path.exists(path):
            raise DataError(f"Input file {path} does not exist.")
        logger.info(f"Loading microdata from {path}")
        try:
            frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
        except (OSError, UnicodeDecodeError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise DataError(f"Could not read {path}: {e}") from e
        return MicrodataRepository._parse_frame(
            frame, schema, path, drop_columns, allow_missing_identifiers, encode_categorical
        )

    @staticmethod
    def parse_table_text(text, schema, allow_missing_identifiers=False, encode_categorical=False):
        """
        Parse CSV text (e.g. a service payload) into Microdata and a code map.
        """
        try:
            frame = pd.read_csv(io.StringIO(text), dtype=str, keep_default_na=False)
        except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise DataError(f"Could not parse CSV payload: {e}") from e
        return MicrodataRepository._parse_frame(
            frame, schema, "<payload>", None, allow_missing_identifiers, encode_categorical
        )

    @staticmethod
    def _parse_frame(frame, schema, source, drop_columns, allow_missing_identifiers, encode_categorical):
        frame = frame.drop(columns=[column for column in (drop_columns or []) if column in frame.columns])
        header = [str(column) for column in frame.columns]

        if allow_missing_identifiers and not any(name in header for name in _identifier_names(schema)):
            schema = schema.release_schema()

        missing = [name for name in schema.names if name not in header]
        extra = [name for name in header if name not in schema.names]
        if missing or extra:
            raise SchemaMismatchError(
                f"Header of {source} does not match the schema: missing {missing}, unexpected {extra}."
            )
        if frame.shape[0] < 1:
            raise DataError(f"{source} has no records.")
        schema = schema.in_order(header)

        confidential = set(schema.names_with_role(ROLE_CONFIDENTIAL))
        columns = []
        code_map = {}
        for name in schema.names:
            raw = frame[name].to_numpy(dtype=object)
            try:
                values = raw.astype(float)
            except ValueError:
                if encode_categorical and name in confidential and all(str(v).strip() for v in raw):
                    values, code_map[name] = factorize_column(raw)
                else:
                    raise CellParseError(_describe_bad_cell(raw, name, source))
            if not np.all(np.isfinite(values)):
                row = int(np.flatnonzero(~np.isfinite(values))[0])
                raise CellParseError(
                    f"{source}: record {row}, column {name!r} holds {raw[row]!r}, which is not a finite number."
                )
            columns.append(values)

        rows = np.column_stack(columns)
        logger.info(f"Parsed {rows.shape[0]} records with {rows.shape[1]} attributes from {source}")
        return Microdata(schema, rows), code_map

    @staticmethod
    def table_text(microdata, drop_roles=(ROLE_IDENTIFIER,)):
        """
        CSV text of `microdata` in its column order (the input file's header order for loaded
        tables); floats keep 17 significant digits.
        """
        keep = [i for i, attribute in enumerate(microdata.schema.attributes) if attribute.role not in drop_roles]
        frame = pd.DataFrame(
            microdata.rows[:, keep],
            columns=[microdata.schema.names[i] for i in keep],
        )
        return frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")

    @staticmethod
    def save_table(microdata, path, drop_roles=(ROLE_IDENTIFIER,)):
        """
        Write `microdata` to `path` atomically.

        Args:
            microdata (Microdata): Table to write.
            path (str): Destination CSV.
            drop_roles (tuple): Roles left out of the file; identifiers by default.
        """
        atomic_write_text(path, MicrodataRepository.table_text(microdata, drop_roles))
        logger.info(f"Wrote {microdata.n} records to {path}")

    @staticmethod
    def save_json(data, path):
        atomic_write_text(path, json.dumps(data, indent=2, sort_keys=False) + "\n")
        logger.info(f"Wrote {path}")

    @staticmethod
    def load_structure(path, n=None):
        """
        Read a structure file written by anonymize.

        Args:
            path (str): The structure JSON file.
            n (int): Records the structure must cover (optional).

        Returns:
            tuple: (Partition, class labels or None, scope or None)
        """
        try:
            with open(path, encoding="utf-8") as handle:
                data = json.load(handle)
        except (OSError, json.JSONDecodeError) as e:
            raise DataError(f"Cannot read structure file {path}: {e}") from e
        return MicrodataRepository.parse_structure(data, path, n)

    @staticmethod
    def parse_structure_text(text, n=None):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise DataError(f"Structure payload is not valid JSON: {e}") from e
        return MicrodataRepository.parse_structure(data, "<payload>", n)

    @staticmethod
    def parse_structure(data, source, n=None):
        """
        Partition, class labels and scope of a parsed structure object.
        """
        if not isinstance(data, dict) or not isinstance(data.get("labels"), list):
            raise DataError(f'Structure {source} must be a JSON object with a "labels" list.')
        try:
            partition = Partition.from_dict(data)
            arrays = [
                None if data.get(key) is None else np.array(data[key], dtype=np.int64)
                for key in ("class_labels", "scope")
            ]
        except (LabelOutOfRangeError, TypeError, ValueError) as e:
            raise DataError(f"Structure {source} is malformed: {e}") from e

        n = partition.n if n is None else n
        if partition.n != n:
            raise ShapeMismatchError(f"Structure {source} labels {partition.n} records, the table has {n}.")
        for key, array in zip(("class_labels", "scope"), arrays):
            if array is not None and array.shape != (n,):
                raise ShapeMismatchError(f"Structure {source}: {key} must hold one entry per record.")
        class_labels, scope = arrays
        return partition, class_labels, scope


def _identifier_names(schema):
    return {attribute.name for attribute in schema.attributes if attribute.role == ROLE_IDENTIFIER}


def _describe_bad_cell(raw, name, source):
    for row, value in enumerate(raw):
        text = str(value).strip()
        if not text:
            return f"{source}: record {row}, column {name!r} is empty; missing values are not imputed."
        try:
            float(text)
        except ValueError:
            return f"{source}: record {row}, column {name!r} holds {value!r}, which is not a number."
    return f"{source}: column {name!r} could not be parsed."
