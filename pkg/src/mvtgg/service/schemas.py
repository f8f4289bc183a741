"""Request and response bodies. Documents travel as the JSON formats of ``mvtgg.io``."""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field

from ..bench import STRATEGIES

Document = dict[str, Any]
Strategy = Literal["svm-b", "mvm-b", "svm-i", "mvm-i"]


class _Body(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TransformRequest(_Body):
    tgg: Document
    history: Document
    strategy: Literal["svm", "mvm"] = "mvm"
    seed: int | None = None


class StateResponse(BaseModel):
    state: Document
    summary: dict[str, Any]


class SyncRequest(_Body):
    state: Document
    mods: Document
    tgg: Document | None = None
    strategy: Literal["svm", "mvm"] | None = None
    seed: int | None = None


class ProjectRequest(_Body):
    state: Document
    version: int


class GraphResponse(BaseModel):
    graph: Document


class VerifyRequest(_Body):
    tgg: Document
    history: Document
    mods: Document | None = None
    seed: int | None = None


class CompareRequest(_Body):
    a: Document
    b: Document


class BenchRequest(_Body):
    tgg: Document
    history: Document
    mods: Document | None = None
    strategies: list[Strategy] = Field(default_factory=lambda: list(STRATEGIES), min_length=1)
    repeat: int = Field(1, ge=1, le=50)
    seed: int | None = None
    inject_fault: Strategy | None = None


class GenerateRequest(_Body):
    seed: int = 0
    versions: int = Field(6, ge=1, le=500)
    branch_p: float = Field(0.2, ge=0, le=1)
    merge_p: float = Field(0.2, ge=0, le=1)
    ops: int = Field(2, ge=0, le=100)
    max_elements: int = Field(60, ge=1)
    max_total: int | None = Field(None, ge=1)
    untranslatable_p: float = Field(0.05, ge=0, le=1)
    tgg: Document | None = None


class HistoryResponse(BaseModel):
    history: Document


class CompactRequest(_Body):
    state: Document


class SessionCreate(_Body):
    tgg: Document
    history: Document
    seed: int | None = None


class SessionInfo(BaseModel):
    session: str
    summary: dict[str, Any]


class ModsRequest(_Body):
    mods: Document

