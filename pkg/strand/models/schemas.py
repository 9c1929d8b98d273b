"""Pydantic models for the JSON interchange format and benchmark rows."""

from pydantic import BaseModel, ConfigDict, Field, model_validator


# ── Diagram documents ────────────────────────────────────────────────────────

class FiniteFunctionModel(BaseModel):
    """A finite function as ``{"target": n, "table": [...]}``."""

    model_config = ConfigDict(extra="forbid")

    target: int = Field(..., ge=0)
    table: list[int] = Field(default_factory=list)

    @model_validator(mode="after")
    def _in_range(self) -> "FiniteFunctionModel":
        bad = [v for v in self.table if not 0 <= v < self.target]
        if bad:
            raise ValueError(f"table entry {bad[0]} outside [0, {self.target})")
        return self


class GraphModel(BaseModel):
    """The apex graph; ``W`` is the wire count and must match ``wn``."""

    model_config = ConfigDict(extra="forbid")

    W: int = Field(..., ge=0)
    wi: FiniteFunctionModel
    wo: FiniteFunctionModel
    xi: FiniteFunctionModel
    xo: FiniteFunctionModel
    pi: FiniteFunctionModel
    po: FiniteFunctionModel
    wn: FiniteFunctionModel
    xn: FiniteFunctionModel

    @model_validator(mode="after")
    def _wire_count(self) -> "GraphModel":
        if len(self.wn.table) != self.W:
            raise ValueError(f"W is {self.W} but wn labels {len(self.wn.table)} wires")
        return self


class OpModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = Field(..., min_length=1)
    typings: list[tuple[list[int], list[int]]] = Field(..., min_length=1)


class SignatureModel(BaseModel):
    """A signature by object names and operations with their typings."""

    model_config = ConfigDict(extra="forbid")

    objects: list[str] = Field(default_factory=list)
    ops: list[OpModel] = Field(default_factory=list)


class DiagramDocument(BaseModel):
    """A whole diagram file: signature, both legs and the apex graph."""

    model_config = ConfigDict(extra="forbid")

    sig: SignatureModel
    s: FiniteFunctionModel
    t: FiniteFunctionModel
    G: GraphModel


# ── Benchmarks ───────────────────────────────────────────────────────────────

class BenchRow(BaseModel):
    """Median wall time of one phase for one benchmark configuration."""

    shape: str = Field(..., pattern=r"^(chain|balanced|random)$")
    leaves: int = Field(..., ge=1)
    phase: str
    median_ms: float = Field(..., ge=0)
    repeat: int = Field(..., ge=1)
