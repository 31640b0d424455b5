"""
File formats (pydantic models) and the text forms of exact numbers.

Every structured file the command line reads or writes is one of the
models below; validation errors surface as pydantic ValidationError and
are reported as input errors.
"""
from __future__ import annotations

from fractions import Fraction
from pydantic import BaseModel, Field, field_validator, model_validator


def rational_str(value: Fraction | int) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(text: str) -> Fraction:
    text = str(text).strip()
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a rational number: {text!r}") from None
    return value


def real_str(value: float) -> str:
    return format(float(value), ".12g")


def _unique(labels: list[str], what: str) -> list[str]:
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate {what}")
    return labels


class FunctionTableFile(BaseModel):
    name: str = "table"
    x_labels: list[str]
    s_labels: list[str]
    a_labels: list[str] = Field(min_length=1)
    rows: list[list[int]]
    params: dict = Field(default_factory=dict)
    notes: dict = Field(default_factory=dict)

    @field_validator("x_labels", "s_labels", "a_labels")
    @classmethod
    def labels_unique(cls, v: list[str]) -> list[str]:
        return _unique(v, "labels")

    @model_validator(mode="after")
    def check_shape(self) -> "FunctionTableFile":
        if len(self.rows) != len(self.x_labels):
            raise ValueError(f"{len(self.rows)} rows for {len(self.x_labels)} points")
        n_a = len(self.a_labels)
        for i, row in enumerate(self.rows):
            if len(row) != len(self.s_labels):
                raise ValueError(f"row {i} has {len(row)} entries, expected {len(self.s_labels)}")
            if any(not 0 <= v < n_a for v in row):
                raise ValueError(f"row {i} has an entry outside [0, {n_a})")
        return self


class IncidenceFile(BaseModel):
    points: list[str]
    block_indices: list[str]
    rows: list[list[int]]

    @field_validator("points", "block_indices")
    @classmethod
    def labels_unique(cls, v: list[str]) -> list[str]:
        return _unique(v, "labels")

    @model_validator(mode="after")
    def check_matrix(self) -> "IncidenceFile":
        if not self.rows or len(self.rows) != len(self.points):
            raise ValueError(f"{len(self.rows)} rows for {len(self.points)} points")
        for i, row in enumerate(self.rows):
            if len(row) != len(self.block_indices):
                raise ValueError(f"row {i} has {len(row)} entries, expected {len(self.block_indices)}")
            if any(v not in (0, 1) for v in row):
                raise ValueError(f"row {i} is not 0/1")
        return self


class MosaicFile(BaseModel):
    points: list[str]
    block_indices: list[str]
    a_labels: list[str] = Field(min_length=1)
    members: list[list[list[int]]]

    @field_validator("points", "block_indices", "a_labels")
    @classmethod
    def labels_unique(cls, v: list[str]) -> list[str]:
        return _unique(v, "labels")

    @model_validator(mode="after")
    def check_members(self) -> "MosaicFile":
        if len(self.members) != len(self.a_labels):
            raise ValueError(f"{len(self.members)} members for {len(self.a_labels)} values")
        for member in self.members:
            IncidenceFile(points=self.points, block_indices=self.block_indices, rows=member)
        return self


class SourceFile(BaseModel):
    x_labels: list[str]
    z_labels: list[str]
    probabilities: list[list[str]]

    @field_validator("x_labels", "z_labels")
    @classmethod
    def labels_unique(cls, v: list[str]) -> list[str]:
        return _unique(v, "labels")

    @model_validator(mode="after")
    def check_mass(self) -> "SourceFile":
        if len(self.probabilities) != len(self.x_labels):
            raise ValueError(f"{len(self.probabilities)} rows for {len(self.x_labels)} x values")
        total = Fraction(0)
        for i, row in enumerate(self.probabilities):
            if len(row) != len(self.z_labels):
                raise ValueError(f"row {i} has {len(row)} entries, expected {len(self.z_labels)}")
            for cell in row:
                p = parse_rational(cell)
                if p < 0:
                    raise ValueError(f"negative probability {cell}")
                total += p
        if total != 1:
            raise ValueError(f"probabilities sum to {total}, not 1")
        return self

    def matrix(self) -> list[list[Fraction]]:
        return [[parse_rational(c) for c in row] for row in self.probabilities]


class LatinSquareFile(BaseModel):
    labels: list[str] = Field(min_length=1)
    rows: list[list[str]]

    @field_validator("labels")
    @classmethod
    def labels_unique(cls, v: list[str]) -> list[str]:
        return _unique(v, "labels")

    @model_validator(mode="after")
    def check_symbols(self) -> "LatinSquareFile":
        known = set(self.labels)
        if len(self.rows) != len(self.labels) or any(len(r) != len(self.labels) for r in self.rows):
            raise ValueError("latin square must be n x n over its labels")
        for row in self.rows:
            unknown = set(row) - known
            if unknown:
                raise ValueError(f"unknown symbols {sorted(unknown)}")
        return self

