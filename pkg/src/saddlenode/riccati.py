"""The Riccati family x^2 y' + (1 + a x) y = b x^2 + y^2: S_N evaluation,
sign maps over the (a, b) plane, zero contours and branch fits."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .asymptotics import expand_rescaled
from .contours import marching_squares
from .system import RawSystem, normalize, riccati_f


class NotFoundError(LookupError):
    pass


def riccati_phi(a: float, b: float, N: int) -> np.ndarray:
    """phi_0..phi_N from phi_n + (n-1+a) phi_{n-1} = b delta_{n2} + sum phi_i phi_{n-i}.

    Plain floats; meant for moderate N where the values stay in range.
    """
    phi = np.zeros(N + 1)
    for n in range(2, N + 1):
        p = b if n == 2 else 0.0
        for i in range(2, n - 1):
            p += phi[i] * phi[n - i]
        phi[n] = p - (n - 1 + a) * phi[n - 1]
    return phi


def _shift(a: float) -> float:
    # smallest a + k (k >= 0 integer) with a + k > -1, so n + c > 1 for n >= 2
    return a if a > -2.0 else a + math.ceil(-1.0 - a) + 1


def _sn_kernel(a: float, bs, N: int) -> np.ndarray:
    """S_N = (-1)^N phi_N / Gamma(N + a) for every b in ``bs``.

    Runs the recursion on u_n = phi_n / Gamma(n + c), with c = a moved off
    the gamma poles by an integer shift, so each step only multiplies by
    gamma ratios and nothing overflows.
    """
    bs = np.atleast_1d(np.asarray(bs, dtype=float))
    if N < 4:
        raise ValueError("N must be >= 4")
    if N + a <= 0:
        raise ValueError("Gamma(N + a) needs N + a > 0")
    c = _shift(a)
    lg = np.array([math.lgamma(n + c) if n + c > 0 else np.nan for n in range(N + 1)])
    u = np.zeros((N + 1, bs.size))
    for n in range(2, N + 1):
        acc = bs * math.exp(-lg[2]) if n == 2 else np.zeros(bs.size)
        for i in range(2, n - 1):
            acc = acc + math.exp(lg[i] + lg[n - i] - lg[n]) * (u[i] * u[n - i])
        ratio = 1.0 if c == a else (n - 1 + a) / (n - 1 + c)
        u[n] = acc - ratio * u[n - 1]
    return (-1) ** N * u[N] * math.exp(lg[N] - math.lgamma(N + a))


def riccati_sn(a: float, b: float, N: int = 70, route: str = "direct") -> float:
    """S_N(a, b).

    route="direct" evaluates (-1)^N phi_N / Gamma(N + a) for the equation as
    given (any a; gamma poles are avoided by rescaling).  route="normalized"
    reduces to a >= 2 first and returns s_N of the reduced system, whose tail
    converges faster (O(N^-2) instead of O(N^-1)).
    """
    if route == "direct":
        return float(_sn_kernel(a, [b], N)[0])
    if route == "normalized":
        ns, _ = normalize(RawSystem(a, riccati_f(b)), N)
        return float(expand_rescaled(ns, N).s[N])
    raise ValueError(f"unknown route {route!r}")


@dataclass(frozen=True)
class SignMap:
    """``values[i, j]`` is S_N(a_values[i], b_values[j])."""

    a_values: np.ndarray
    b_values: np.ndarray
    values: np.ndarray
    N_used: int

    @property
    def signs(self) -> np.ndarray:
        return np.sign(self.values).astype(int)

    @property
    def cell(self) -> tuple[float, float]:
        da = (self.a_values[-1] - self.a_values[0]) / (len(self.a_values) - 1)
        db = (self.b_values[-1] - self.b_values[0]) / (len(self.b_values) - 1)
        return float(da), float(db)


def _row(args):
    a, bs, N = args
    return _sn_kernel(a, bs, N)


def scan(a_range, b_range, na: int, nb: int, N: int = 70, workers: int = 1) -> SignMap:
    """S_N over an na x nb grid; one task per a value, so the result does not
    depend on how many workers evaluate it."""
    a_lo, a_hi = map(float, a_range)
    b_lo, b_hi = map(float, b_range)
    if na < 2 or nb < 2:
        raise ValueError("grid needs at least 2 points per axis")
    if not (a_lo < a_hi and b_lo < b_hi):
        raise ValueError("ranges must satisfy lo < hi")
    a_values = np.linspace(a_lo, a_hi, na)
    b_values = np.linspace(b_lo, b_hi, nb)
    tasks = [(float(a), b_values, N) for a in a_values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row, tasks, chunksize=max(1, na // (4 * workers))))
    else:
        rows = [_row(t) for t in tasks]
    values = np.vstack(rows)
    if not np.all(np.isfinite(values)):
        raise ArithmeticError("non-finite S_N in scan")
    return SignMap(a_values, b_values, values, N)


def zero_contours(smap: SignMap) -> list[np.ndarray]:
    """Zero level set of S_N as polylines of (a, b) points (no smoothing)."""
    lines = marching_squares(smap.b_values, smap.a_values, smap.values)
    return [line[:, ::-1].copy() for line in lines]


@dataclass(frozen=True)
class BranchFit:
    k: int
    slope: float
    intercept: float
    rms: float
    points: int

    def to_json(self) -> dict:
        return {"k": self.k, "slope": self.slope, "intercept": self.intercept,
                "rms": self.rms, "points": self.points,
                "expected_slope": -1.0 / (self.k - 1)}


def branch_fit(contours, k: int, cell: tuple[float, float]) -> BranchFit:
    """Fit a = slope * b + intercept to the contour leaving (-k, 0).

    Every polyline passing within two cells of (-k, 0) is walked in both
    directions from its vertex nearest that point, for as long as it stays in
    the box |b| <= 0.5, |a + k| < 0.75 (neighbouring branches start a unit
    away).  Vertices on the trivial branch b = 0 are dropped before fitting.
    """
    da, db = cell
    pts = []
    for line in contours:
        dist = np.maximum(np.abs(line[:, 0] + k) / da, np.abs(line[:, 1]) / db)
        if dist.min() > 2.0:
            continue
        inbox = (np.abs(line[:, 1]) <= 0.5) & (np.abs(line[:, 0] + k) < 0.75)
        j0 = int(np.argmin(dist))
        lo = hi = j0
        while lo > 0 and inbox[lo - 1]:
            lo -= 1
        while hi < len(line) - 1 and inbox[hi + 1]:
            hi += 1
        seg = line[lo:hi + 1]
        pts.append(seg[np.abs(seg[:, 1]) >= db / 2])
    pts = np.vstack(pts) if pts else np.zeros((0, 2))
    if len(pts) < 5:
        raise NotFoundError(f"no zero contour near (a, b) = ({-k}, 0)")
    A = np.column_stack([pts[:, 1], np.ones(len(pts))])
    (slope, intercept), *_ = np.linalg.lstsq(A, pts[:, 0], rcond=None)
    rms = float(np.sqrt(np.mean((A @ [slope, intercept] - pts[:, 0]) ** 2)))
    return BranchFit(k, float(slope), float(intercept), rms, len(pts))


def derivative_probe(a: float, h: float = 1e-4, N: int = 200) -> float:
    """Central difference of S_N in b at b = 0."""
    if not a > -2.0:
        raise ValueError("derivative_probe needs a > -2")
    if not 0.0 < h <= 0.01:
        raise ValueError("h must lie in (0, 0.01]")
    plus, minus = _sn_kernel(a, [h, -h], N)
    return float((plus - minus) / (2.0 * h))


@dataclass(frozen=True)
class QProbe:
    value: float
    extrapolated: bool
    samples: dict
    second_difference: float

    def to_json(self) -> dict:
        return {"value": self.value, "extrapolated": self.extrapolated,
                "samples": {repr(k): v for k, v in self.samples.items()},
                "second_difference": self.second_difference}


def q_probe(b_values, N: int = 400) -> QProbe:
    """Q(-2, 0) as the b -> 0 limit of S_N(-2, b) / b^2.

    Two samples are combined by linear (Richardson) extrapolation in b.  The
    raw second difference (S(h) - 2 S(0) + S(-h)) / h^2 at the smallest h is
    reported alongside; it estimates the second b-derivative, which is 2 Q.
    """
    b_values = sorted({float(b) for b in b_values}, reverse=True)
    if not b_values or any(b == 0.0 for b in b_values):
        raise ValueError("need nonzero b values")
    S = _sn_kernel(-2.0, b_values, N)
    g = {b: float(s / b ** 2) for b, s in zip(b_values, S)}
    if len(b_values) >= 2:
        b1, b2 = b_values[-2], b_values[-1]
        value = (b1 * g[b2] - b2 * g[b1]) / (b1 - b2)
        extrapolated = True
    else:
        value = g[b_values[0]]
        extrapolated = False
    h = b_values[-1]
    sp, s0, sm = _sn_kernel(-2.0, [h, 0.0, -h], N)
    second = float((sp - 2 * s0 + sm) / h ** 2)
    return QProbe(float(value), extrapolated, g, second)
