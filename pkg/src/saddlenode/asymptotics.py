"""Center-manifold coefficients, the rescaled partial sums
s_n = (-1)^n phi_n / Gamma(n + a) and estimates of their limit."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .series import ZERO, BSeries, SignedLog
from .system import NormalizedSystem, RawSystem, center_manifold_recursion

EPS = np.finfo(float).eps


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class Expansion:
    """phi[n] and s[n] for n = 0..N (index 0 and 1 kept for alignment).

    ``s`` holds NaN where Gamma(n + a) is not evaluated (n + a <= 0).
    """

    a: float
    phi: np.ndarray  # object array of SignedLog
    s: np.ndarray
    N: int
    flags: dict = field(default_factory=dict)
    # plain doubles from the float path, kept because log storage loses
    # about |log phi_n| eps of relative accuracy
    phi_values: np.ndarray | None = None

    def phi_float(self) -> np.ndarray:
        if self.phi_values is not None:
            return self.phi_values.copy()
        return np.array([float(c) for c in self.phi])

    def delta_s(self) -> np.ndarray:
        d = np.full(self.N + 1, np.nan)
        d[1:] = np.diff(self.s)
        return d


@dataclass(frozen=True)
class SinfEstimate:
    value: float
    error_estimate: float
    method: str
    N_used: int
    noise_floor: float = 0.0

    def to_json(self) -> dict:
        return {"value": self.value, "error_estimate": self.error_estimate,
                "method": self.method, "N": self.N_used,
                "tail_model": "sum_{j>N} K/j^3 ~ K/(2 N^2)"}


def _lgammas(a: float, N: int) -> np.ndarray:
    lg = np.full(N + 1, np.nan)
    for n in range(N + 1):
        if n + a > 0:
            lg[n] = math.lgamma(n + a)
    return lg


def expand_rescaled(sys: NormalizedSystem, N: int) -> Expansion:
    """s_n from s_n = s_{n-1} + (-1)^n p_n / Gamma(n + a), all in rescaled form.

    With v[l][k] = (-1)^k (phi^l)_k / Gamma(k + a) the products only need the
    weights Gamma(i + a) Gamma(k - i + a) / Gamma(k + a), so nothing
    overflows for any N.
    """
    if not isinstance(sys, NormalizedSystem):
        raise DomainError("expand_rescaled needs a normalized system (a >= 2); call normalize first")
    if sys.a < 2.0:
        raise DomainError("a < 2: normalize the system first")
    if N < 4:
        raise ValueError("N must be >= 4")
    sys.require_order(N)
    a = sys.a
    lg = _lgammas(a, N)
    f0 = sys.f0_dense(N)
    groups = sys.f2.by_y_power()
    L = max(groups, default=1)
    s = np.zeros(N + 1)
    v = {l: np.zeros(N + 1) for l in range(2, L + 1)}
    for n in range(2, N + 1):
        # (phi^l)_k has leading order 2l, so v[l] at n - 2 only needs s up to n - 4.
        k = n - 2
        for l in range(2, L + 1):
            lo, hi = 2 * (l - 1), k - 2
            if hi >= lo:
                i = np.arange(lo, hi + 1)
                w = np.exp(lg[i] + lg[k - i] - lg[k])
                v[l][k] = float(np.dot(v[l - 1][i] if l > 2 else s[i], s[k - i] * w))
        term = (-1) ** n * f0[n - 2] * math.exp(-lg[n])
        for l, row in groups.items():
            for m, c in row.items():
                kk = n - 2 - m
                if kk >= 2 * l:
                    term += c * (-1) ** m * v[l][kk] * math.exp(lg[kk] - lg[n])
        s[n] = s[n - 1] + term
    phi = np.empty(N + 1, dtype=object)
    phi[0] = phi[1] = ZERO
    for n in range(2, N + 1):
        sl = SignedLog.from_float(s[n])
        phi[n] = sl.scale_log(lg[n]) if n % 2 == 0 else (-sl).scale_log(lg[n])
    s[:2] = 0.0
    return Expansion(a, phi, s, N, {"path": "rescaled", "cancelled": 0})


def _float_recursion(a: float, f, N: int):
    with np.errstate(over="ignore", invalid="ignore"):
        vals = center_manifold_recursion(a, f, N, 0.0)
    if not all(math.isfinite(v) and abs(v) < 1e300 for v in vals):
        return None
    return np.array(vals, dtype=float)


def expand_raw(sys, N: int, scalar: str = "auto") -> Expansion:
    """phi_n by the direct recursion.

    ``scalar`` picks the arithmetic: "float" while Gamma(n + a) fits a double,
    "signedlog" for any N, and "auto" (default) tries floats when N + a <= 170
    and falls back to signed logs if anything overflows.  Plain floats keep
    integer-valued coefficients exact, which matters on analytic branches
    where the recursion amplifies every rounding error.  s_n is filled only
    where n + a > 0.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    if scalar not in ("auto", "float", "signedlog"):
        raise ValueError(f"unknown scalar kind {scalar!r}")
    if isinstance(sys, NormalizedSystem):
        a, f = sys.a, sys.as_raw_f()
    elif isinstance(sys, RawSystem):
        a, f = sys.a, sys.f
    else:
        raise TypeError("expand_raw expects a RawSystem or NormalizedSystem")
    sys.require_order(N)
    phi_list = values = None
    used = "signedlog"
    if scalar == "float" or (scalar == "auto" and N + a <= 170):
        values = _float_recursion(a, f, N)
        if values is None and scalar == "float":
            raise OverflowError("coefficients leave the float range; use scalar='signedlog'")
        if values is not None:
            used = "float"
            phi_list = [SignedLog.from_float(float(v)) for v in values]
    if phi_list is None:
        phi_list = center_manifold_recursion(a, f, N, ZERO)
    phi = np.empty(N + 1, dtype=object)
    phi[:] = phi_list
    s = np.full(N + 1, np.nan)
    s[0] = 0.0
    for n in range(1, N + 1):
        if n + a > 0:
            c = phi[n]
            if values is not None and n + a < 171:
                s[n] = (-1) ** n * values[n] / math.gamma(n + a)
            elif c.sign == 0:
                s[n] = 0.0
            else:
                s[n] = (-1) ** n * c.sign * math.exp(c.logmag - math.lgamma(n + a))
    cancelled = int(sum(1 for c in phi if c.cancelled))
    return Expansion(a, phi, s, N, {"path": "raw", "scalar": used, "cancelled": cancelled}, values)


def linear_partial_sums(a: float, f: np.ndarray, N: int) -> np.ndarray:
    """S_n = sum_{j=1}^n (-1)^j f_j / Gamma(j + a) for a y-independent f (a > -1)."""
    if not a > -1.0:
        raise DomainError("closed form needs a > -1")
    fd = np.zeros(N + 1)
    m = min(N + 1, len(f))
    fd[:m] = f[:m]
    j = np.arange(1, N + 1)
    terms = (-1.0) ** j * fd[1:] * np.exp(-np.array([math.lgamma(k + a) for k in j]))
    return np.concatenate([[0.0], np.cumsum(terms)])


def _noise_floor(exp: Expansion) -> float:
    s = exp.s[np.isfinite(exp.s)]
    if s.size == 0:
        return 0.0
    d = np.abs(np.diff(s))
    return float(EPS * (d.sum() + np.abs(s).max()))


def estimate_sinf(exp: Expansion, method: str = "last_term") -> SinfEstimate:
    """Estimate lim s_n from the computed tail."""
    N = exp.N
    if N < 10:
        raise ValueError("N too small: estimate_sinf needs N >= 10")
    s = exp.s
    if not np.all(np.isfinite(s[N - 2:N + 1])):
        raise ValueError("s_n undefined near N")
    d1 = s[N] - s[N - 1]
    d0 = s[N - 1] - s[N - 2]
    floor = _noise_floor(exp)
    if method in ("last_term", "last"):
        value = float(s[N])
        err = abs(d1) * N / 2.0
        method = "last_term"
    elif method == "aitken":
        denom = d1 - d0
        if denom == 0.0 or abs(d1) <= floor:
            value = float(s[N])
        else:
            value = float(s[N] - d1 * d1 / denom)
        # For algebraic tails Aitken is not exact; the size of the correction it
        # applied is used as a conservative proxy for its remaining error.
        err = abs(value - s[N])
    else:
        raise ValueError(f"unknown method {method!r}")
    err = max(err, floor)
    return SinfEstimate(value, float(err), method, N, floor)


def decay_diagnostics(exp: Expansion, window: tuple[int, int] | None = None) -> dict:
    """Log-log slope of |s_n - s_{n-1}| and K_hat = max |Delta s_n| n^3 over a window.

    The default window is [N/2, N].  When the differences are all below the
    float-noise threshold the slope is reported as -inf with K_hat = 0.
    """
    N = exp.N
    if window is None:
        if N < 50:
            raise ValueError("decay_diagnostics needs N >= 50")
        window = (N // 2, N)
    lo, hi = window
    n = np.arange(lo, hi + 1)
    d = np.abs(exp.s[n] - exp.s[n - 1])
    scale = np.nanmax(np.abs(exp.s[np.isfinite(exp.s)])) if np.any(np.isfinite(exp.s)) else 0.0
    threshold = 64 * EPS * max(scale, np.finfo(float).tiny)
    keep = np.isfinite(d) & (d > threshold)
    if keep.sum() < 3:
        return {"slope": -math.inf, "K_hat": 0.0, "window": [lo, hi], "points": int(keep.sum())}
    slope, _ = np.polyfit(np.log(n[keep]), np.log(d[keep]), 1)
    K_hat = float(np.max(d[keep] * n[keep].astype(float) ** 3))
    return {"slope": float(slope), "K_hat": K_hat, "window": [lo, hi], "points": int(keep.sum())}


def expansion_csv(exp: Expansion) -> str:
    """Rows n, sign phi_n, log|phi_n|, s_n, Delta s_n (17 significant digits)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "sign_phi", "log_abs_phi", "s_n", "delta_s"])
    d = exp.delta_s()
    for n in range(1, exp.N + 1):
        c = exp.phi[n]
        logmag = "-inf" if c.sign == 0 else f"{c.logmag:.17g}"
        w.writerow([n, c.sign, logmag, f"{exp.s[n]:.17g}", f"{d[n]:.17g}"])
    return buf.getvalue()
