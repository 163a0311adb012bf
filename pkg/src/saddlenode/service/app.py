"""FastAPI application wrapping the numerical core.

Domain and input errors (any ValueError or LookupError) come back as HTTP 400
with the message in ``detail``; failures of the numerics themselves
(ArithmeticError) come back as 422.
"""
from __future__ import annotations

import json
import math

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, io
from ..asymptotics import estimate_sinf, expand_raw, expand_rescaled, expansion_csv
from ..borel import (borel_disc, borel_pade_laplace, deconvolve_singularity,
                     inequality_samplers, residual_yeqn)
from ..quadrature import integrate_halfline
from ..riccati import NotFoundError, branch_fit, scan, zero_contours
from ..special import beta_check, digamma, empirical_constant, log_gamma
from ..system import NormalizedSystem, RawSystem, normalize, parse_system, system_to_doc
from .models import (BorelRequest, BorelResponse, ExpandResponse, NormalizeResponse,
                     ScanRequest, ScanResponse, SinfRequest, SinfResponse, SystemRequest,
                     VerifyRequest, VerifyResponse, VerifyRow)

app = FastAPI(title="saddlenode", version=__version__)


@app.exception_handler(ValueError)
async def _value_error(request: Request, exc: ValueError):
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.exception_handler(LookupError)
async def _lookup_error(request: Request, exc: LookupError):
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.exception_handler(ArithmeticError)
async def _arith_error(request: Request, exc: ArithmeticError):
    return JSONResponse(status_code=422, content={"detail": str(exc)})


def _system_config(req: SystemRequest, sys, **extra) -> dict:
    cfg = {"order": req.order, "system": system_to_doc(sys)}
    cfg.update(extra)
    return cfg


def _expansion(sys, N: int):
    if isinstance(sys, NormalizedSystem):
        return expand_rescaled(sys, N)
    return expand_raw(sys, N)


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/expand", response_model=ExpandResponse)
def expand(req: SystemRequest) -> ExpandResponse:
    sys = parse_system(req.system_text)
    exp = _expansion(sys, req.order)
    cfg = _system_config(req, sys, command="expand", path=exp.flags["path"])
    return ExpandResponse(csv=io.header_lines(cfg) + expansion_csv(exp))


@app.post("/sinf", response_model=SinfResponse)
def sinf(req: SinfRequest) -> SinfResponse:
    if req.order < 10:
        raise ValueError("N too small: the S_inf estimate needs N >= 10")
    given = sys = parse_system(req.system_text)
    route = "given"
    if isinstance(sys, RawSystem):
        sys, _ = normalize(sys, req.order)
        route = "normalized"
    est = estimate_sinf(expand_rescaled(sys, req.order), req.method)
    info = est.to_json()
    cfg = _system_config(req, given, command="sinf", method=est.method)
    return SinfResponse(value=est.value, error_estimate=est.error_estimate, method=est.method,
                        N=est.N_used, a=sys.a, route=route, tail_model=info["tail_model"],
                        meta={"version": __version__, "config": cfg})


@app.post("/scan", response_model=ScanResponse)
def scan_endpoint(req: ScanRequest) -> ScanResponse:
    smap = scan(req.a_range, req.b_range, req.na, req.nb, req.order, req.workers)
    contours = zero_contours(smap)
    # worker count is left out on purpose: it must not change the bytes
    cfg = {"command": "scan", "a_range": list(req.a_range), "b_range": list(req.b_range),
           "grid": [req.na, req.nb], "order": req.order}
    fits = []
    for k in req.fit_branches:
        try:
            fits.append(branch_fit(contours, k, smap.cell).to_json())
        except NotFoundError as exc:
            fits.append({"k": k, "error": str(exc)})
    return ScanResponse(csv=io.scan_csv(smap, cfg), pgm=io.scan_pgm(smap, cfg),
                        contours_csv=io.contours_csv(contours, cfg), fits=fits)


@app.post("/normalize", response_model=NormalizeResponse)
def normalize_endpoint(req: SystemRequest) -> NormalizeResponse:
    sys = parse_system(req.system_text)
    if not isinstance(sys, RawSystem):
        raise ValueError("system is already in normalized form")
    ns, rec = normalize(sys, req.order)
    doc = system_to_doc(ns)
    doc["transform"] = rec.to_json()
    doc["meta"] = {"version": __version__, "config": _system_config(req, sys, command="normalize")}
    return NormalizeResponse(document=json.dumps(doc, indent=1, sort_keys=True) + "\n")


@app.post("/borel", response_model=BorelResponse)
def borel(req: BorelRequest) -> BorelResponse:
    sys = parse_system(req.system_text)
    exp = _expansion(sys, req.order)
    a = sys.a if req.a is None else req.a
    profile = deconvolve_singularity(exp, a)
    points = 0.4 * np.exp(2j * np.pi * np.arange(10) / 10)
    res = residual_yeqn(sys, borel_disc(exp), points, panels=req.panels)
    total = None
    if req.x is not None:
        total = borel_pade_laplace(exp, req.x, pade_order=req.pade_order)
    summary = {"sup_Z": profile.sup_Z, "roundtrip_error": profile.roundtrip_error(),
               "residual": res.value, "residual_truncated": res.truncated,
               "residual_points": "10 points on |w| = 0.4", "borel_sum": total}
    cfg = _system_config(req, sys, command="borel", kernel_a=a, panels=req.panels,
                         pade_order=req.pade_order, x=req.x)
    return BorelResponse(csv=io.profile_csv(profile, cfg, summary), sup_Z=profile.sup_Z,
                         roundtrip_error=summary["roundtrip_error"], residual=res.value,
                         residual_truncated=res.truncated, borel_sum=total)


def verify_rows(trials: int = 100_000, seed: int = 0) -> list[VerifyRow]:
    rows = []
    lb = inequality_samplers("lowerbound1", trials=trials, seed=seed)
    rows.append(VerifyRow(name="lowerbound1", passed=lb["violations"] == 0,
                          detail=f"{lb['violations']} violations / {trials}"))
    emb = inequality_samplers("embedding")
    rows.append(VerifyRow(name="embedding", passed=7.5 <= emb["max"] <= 7.66,
                          detail=f"grid max {emb['max']:.6f} at p = {emb['argmax_p']:.4g}"))
    quarter = integrate_halfline(lambda s: s / (1.0 + s ** 4))
    err = abs(quarter - math.pi / 4)
    rows.append(VerifyRow(name="quarter_pi", passed=err <= 1e-10,
                          detail=f"|quadrature - pi/4| = {err:.2e}"))
    rng = np.random.default_rng(seed)
    worst = 0.0
    for x, y in rng.uniform(0.2, 5.0, size=(20, 2)):
        lhs, rhs = beta_check(float(x), float(y))
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    rows.append(VerifyRow(name="beta_check", passed=worst <= 1e-8,
                          detail=f"worst relative error {worst:.2e} over 20 points"))
    xs = np.linspace(0.1, 300.0, 400)
    rec = max(abs(log_gamma(x + 1) - log_gamma(x) - math.log(x)) for x in xs)
    rows.append(VerifyRow(name="log_gamma_recurrence", passed=rec <= 1e-12,
                          detail=f"max defect {rec:.2e}"))
    psi = np.array([digamma(x) for x in np.linspace(0.05, 50.0, 500)])
    rows.append(VerifyRow(name="digamma_increasing", passed=bool(np.all(np.diff(psi) > 0)),
                          detail="500-point grid on [0.05, 50]"))
    drift = max(abs(empirical_constant("conv", b, n_max=400) - empirical_constant("conv", b, n_max=200))
                for b in (-1.5, 0.0, 2.0))
    rows.append(VerifyRow(name="conv_constant_stable", passed=drift == 0.0,
                          detail=f"n_max 200 vs 400 drift {drift:.1e}"))
    return rows


@app.post("/verify", response_model=VerifyResponse)
def verify(req: VerifyRequest) -> VerifyResponse:
    rows = verify_rows(req.trials, req.seed)
    return VerifyResponse(rows=rows, all_passed=all(r.passed for r in rows))
