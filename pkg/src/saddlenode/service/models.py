from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field


class SystemRequest(BaseModel):
    system_text: str = Field(description="JSON system document")
    order: int = Field(70, ge=1)


class ExpandResponse(BaseModel):
    csv: str


class SinfRequest(SystemRequest):
    method: Literal["last_term", "aitken"] = "last_term"


class SinfResponse(BaseModel):
    value: float
    error_estimate: float
    method: str
    N: int
    a: float
    route: str
    tail_model: str
    meta: dict


class ScanRequest(BaseModel):
    a_range: tuple[float, float] = (-6.0, 0.0)
    b_range: tuple[float, float] = (-2.0, 2.0)
    na: int = Field(64, ge=2)
    nb: int = Field(64, ge=2)
    order: int = Field(70, ge=4)
    workers: int = Field(1, ge=1)
    fit_branches: list[int] = [2, 3, 4]


class ScanResponse(BaseModel):
    csv: str
    pgm: str
    contours_csv: str
    fits: list[dict]


class NormalizeResponse(BaseModel):
    document: str


class BorelRequest(SystemRequest):
    a: float | None = None
    panels: int = Field(64, ge=8)
    pade_order: int | None = None
    x: float | None = Field(None, gt=0)


class BorelResponse(BaseModel):
    csv: str
    sup_Z: float
    roundtrip_error: float
    residual: float | None
    residual_truncated: bool
    borel_sum: float | None


class VerifyRequest(BaseModel):
    trials: int = Field(100_000, ge=1)
    seed: int = 0


class VerifyRow(BaseModel):
    name: str
    passed: bool
    detail: str


class VerifyResponse(BaseModel):
    rows: list[VerifyRow]
    all_passed: bool
