"""Tabular metadata schema and vectorization.

Categorical fields encode to vocabulary indices (a reserved index marks a
missing value); numeric fields min-max normalize into [0, 1] with missing
values mapped to the midpoint 0.5. The index form is what the embedding-based
tabular encoder consumes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from ltmx.errors import ConfigurationError, DataError

MISSING = None


@dataclass(frozen=True)
class CategoricalField:
    name: str
    vocabulary: tuple[str, ...]

    @property
    def missing_index(self) -> int:
        return len(self.vocabulary)

    @property
    def cardinality(self) -> int:
        # vocabulary plus the reserved missing slot
        return len(self.vocabulary) + 1


@dataclass(frozen=True)
class NumericField:
    name: str
    low: float
    high: float

    def __post_init__(self):
        if not self.high > self.low:
            raise ConfigurationError(f"field {self.name}: range [{self.low}, {self.high}] is empty")


Field = CategoricalField | NumericField


@dataclass(frozen=True)
class TabularSchema:
    fields: tuple[Field, ...]

    @property
    def width(self) -> int:
        return len(self.fields)

    def categorical_positions(self) -> list[tuple[int, CategoricalField]]:
        return [(i, f) for i, f in enumerate(self.fields) if isinstance(f, CategoricalField)]

    def numeric_positions(self) -> list[int]:
        return [i for i, f in enumerate(self.fields) if isinstance(f, NumericField)]

    def to_dict(self) -> dict:
        out = []
        for f in self.fields:
            if isinstance(f, CategoricalField):
                out.append({"type": "categorical", "name": f.name, "vocabulary": list(f.vocabulary)})
            else:
                out.append({"type": "numeric", "name": f.name, "low": f.low, "high": f.high})
        return {"fields": out}

    @classmethod
    def from_dict(cls, payload: Mapping) -> "TabularSchema":
        fields: list[Field] = []
        for item in payload["fields"]:
            if item["type"] == "categorical":
                fields.append(CategoricalField(item["name"], tuple(item["vocabulary"])))
            elif item["type"] == "numeric":
                fields.append(NumericField(item["name"], float(item["low"]), float(item["high"])))
            else:
                raise ConfigurationError(f"unknown tabular field type {item['type']!r}")
        return cls(tuple(fields))


def encode_tabular(record: Mapping[str, Any], schema: TabularSchema) -> np.ndarray:
    """Encode one record into a float32 vector, one slot per schema field."""
    out = np.empty(schema.width, dtype=np.float32)
    for i, field in enumerate(schema.fields):
        value = record.get(field.name, MISSING)
        if isinstance(field, CategoricalField):
            if value is MISSING:
                out[i] = field.missing_index
            else:
                try:
                    out[i] = field.vocabulary.index(value)
                except ValueError:
                    raise DataError(
                        f"field {field.name!r}: value {value!r} not in vocabulary {list(field.vocabulary)}"
                    ) from None
        else:
            if value is MISSING:
                out[i] = 0.5
            else:
                v = float(value)
                if not field.low <= v <= field.high:
                    raise DataError(f"field {field.name!r}: value {v} outside [{field.low}, {field.high}]")
                out[i] = (v - field.low) / (field.high - field.low)
    return out


def encode_records(records: list[Mapping[str, Any]], schema: TabularSchema) -> np.ndarray:
    return np.stack([encode_tabular(r, schema) for r in records])
