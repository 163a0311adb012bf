"""Saddle-node systems x^2 y' = -(1 + a x) y + f(x, y): file format, the
order-by-order center-manifold recursion and the reduction to the form

    x^2 y' = -(1 + a x) y + x^2 f0(x) + x^2 y^2 f2(x, y),   a >= 2.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from math import comb
from typing import Any

import numpy as np

from .series import BSeries, SignedLog, USeries, exp_integral_series


class SystemParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class SystemValidationError(ValueError):
    pass


def _check_raw_f(f: BSeries) -> None:
    for key, name in (((0, 0), "f(0,0)"), ((0, 1), "df/dy(0,0)"), ((1, 1), "d2f/dxdy(0,0)")):
        c = f.coeff(*key)
        if c != 0.0:
            raise SystemValidationError(
                f"coefficient {list(key)} ({name}) must vanish, got {c!r}")


@dataclass(frozen=True)
class RawSystem:
    """``f.terms[(m, l)]`` multiplies x^m y^l.

    ``order`` is the highest power of x through which f is known; ``None``
    means f is an exact polynomial.
    """

    a: float
    f: BSeries
    order: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        if not math.isfinite(self.a):
            raise SystemValidationError("a must be finite")
        _check_raw_f(self.f)
        if self.order is not None and self.f.terms and self.f.x_degree > self.order:
            raise SystemValidationError(f"term beyond declared order {self.order}")

    def require_order(self, n: int) -> None:
        if self.order is not None and n > self.order:
            raise ValueError(f"system is known through x^{self.order}; x^{n} requested")


@dataclass(frozen=True)
class NormalizedSystem:
    """x^2 y' = -(1 + a x) y + x^2 f0(x) + sum_l x^2 f2_l(x) y^l.

    ``f0[k]`` multiplies x^(k+2); ``f2.terms[(n, l)]`` (l >= 2) multiplies
    x^(n+2) y^l.  ``order`` is the highest power of x in the right-hand side
    through which the data is known (``None`` for exact polynomials).
    """

    a: float
    f0: np.ndarray
    f2: BSeries = field(default_factory=BSeries)
    order: int | None = None

    def __post_init__(self):
        a = float(self.a)
        if not math.isfinite(a) or a < 2.0:
            raise SystemValidationError(f"normalized systems need a >= 2, got a = {a!r}")
        object.__setattr__(self, "a", a)
        f0 = np.array(self.f0, dtype=float).ravel()
        f0.setflags(write=False)
        object.__setattr__(self, "f0", f0)
        for (n, l) in self.f2.terms:
            if l < 2:
                raise SystemValidationError(f"f2 coefficient [{n}, {l}] needs l >= 2")
        if self.order is not None:
            if len(f0) > max(self.order - 1, 0) and np.any(f0[max(self.order - 1, 0):] != 0):
                raise SystemValidationError(f"f0 term beyond declared order {self.order}")
            if self.f2.terms and self.f2.x_degree + 2 > self.order:
                raise SystemValidationError(f"f2 term beyond declared order {self.order}")

    def require_order(self, n: int) -> None:
        if self.order is not None and n > self.order:
            raise ValueError(f"system is known through x^{self.order}; x^{n} requested")

    def f0_dense(self, K: int) -> np.ndarray:
        """f0 coefficients for k = 0..K (zero-padded)."""
        out = np.zeros(K + 1)
        m = min(K + 1, len(self.f0))
        out[:m] = self.f0[:m]
        return out

    @property
    def f0_series(self) -> USeries:
        return USeries.from_dense(self.f0 if len(self.f0) else [0.0])

    def as_raw_f(self) -> BSeries:
        """The full right-hand side nonlinearity as an (x, y) coefficient map."""
        terms = {(k + 2, 0): c for k, c in enumerate(self.f0) if c != 0.0}
        for (n, l), c in self.f2.terms.items():
            terms[(n + 2, l)] = terms.get((n + 2, l), 0.0) + c
        return BSeries(terms)


@dataclass(frozen=True)
class TransformRecord:
    """y = sum_{n<=M+1} prefix[n-1] x^n + x^M q(x) y_normalized."""

    M: int
    prefix: np.ndarray
    q: USeries
    a_original: float
    a_normalized: float
    a_input: float | None = None

    def __post_init__(self):
        prefix = np.array(self.prefix, dtype=float)
        prefix.setflags(write=False)
        object.__setattr__(self, "prefix", prefix)
        if abs(float(self.q.coeff(0)) - 1.0) > 1e-15:
            raise ValueError("q(0) must equal 1")
        if self.M < 2 and not getattr(self, "_allow_degenerate", False):
            raise ValueError("M >= 2 is required (degenerate records are for tests only)")
        if self.M >= 2 and len(prefix) != self.M + 1:
            raise ValueError(f"prefix must hold phi_1..phi_{self.M + 1}")

    @classmethod
    def identity(cls, order: int) -> "TransformRecord":
        """M = 0, no prefix, q = 1.  Only meant for tests."""
        rec = object.__new__(cls)
        object.__setattr__(rec, "_allow_degenerate", True)
        rec.__init__(0, np.zeros(0), USeries.from_dense([1.0], order), 0.0, 0.0, 0.0)
        return rec

    def to_json(self) -> dict:
        return {
            "M": self.M,
            "prefix": [float(c) for c in self.prefix],
            "q": [float(c) for c in self.q.dense()],
            "a_input": self.a_input,
            "a_original": self.a_original,
            "a_normalized": self.a_normalized,
        }


def required_M(a: float) -> int:
    return max(2, 2 + math.ceil(-a))


# ---------------------------------------------------------------- file format

def _num(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SystemValidationError(f"{where}: expected a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise SystemValidationError(f"{where}: number must be finite")
    return v


def _int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise SystemValidationError(f"{where}: expected an integer, got {value!r}")
    if value < 0:
        raise SystemValidationError(f"{where}: exponent must be >= 0")
    return value


def _entries(doc: dict, key: str, width: int) -> list:
    rows = doc.get(key, [])
    if not isinstance(rows, list):
        raise SystemValidationError(f"'{key}' must be a list")
    out = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != width:
            raise SystemValidationError(f"{key}[{i}] must be a list of {width} numbers")
        *idx, c = row
        out.append(tuple(_int(v, f"{key}[{i}]") for v in idx) + (_num(c, f"{key}[{i}]"),))
    return out


def riccati_f(b: float) -> BSeries:
    return BSeries({(2, 0): float(b), (0, 2): 1.0})


def system_from_doc(doc: Any):
    if not isinstance(doc, dict):
        raise SystemValidationError("system document must be a JSON object")
    kind = doc.get("kind")
    if "a" not in doc:
        raise SystemValidationError("missing field 'a'")
    a = _num(doc["a"], "a")
    order = doc.get("order")
    if order is not None:
        order = _int(order, "order")
    if kind == "riccati":
        if "b" not in doc:
            raise SystemValidationError("riccati system needs field 'b'")
        return RawSystem(a, riccati_f(_num(doc["b"], "b")), order)
    if kind == "raw":
        terms: dict = {}
        for n, l, c in _entries(doc, "f", 3):
            terms[(n, l)] = terms.get((n, l), 0.0) + c
        return RawSystem(a, BSeries(terms), order)
    if kind == "normalized":
        f0_rows = _entries(doc, "f0", 2)
        size = max((n for n, _ in f0_rows), default=-1) + 1
        f0 = np.zeros(size)
        for n, c in f0_rows:
            f0[n] += c
        terms = {}
        for n, l, c in _entries(doc, "f2", 3):
            if l < 2:
                raise SystemValidationError(f"f2 coefficient [{n}, {l}] needs l >= 2")
            terms[(n, l)] = terms.get((n, l), 0.0) + c
        return NormalizedSystem(a, f0, BSeries(terms), order)
    raise SystemValidationError(f"unknown kind {kind!r}; expected raw, normalized or riccati")


def parse_system(text: str | bytes):
    """Parse a JSON system document into a RawSystem or NormalizedSystem."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SystemParseError(exc.msg, exc.lineno) from None
    return system_from_doc(doc)


def system_to_doc(sys) -> dict:
    if isinstance(sys, NormalizedSystem):
        doc = {
            "kind": "normalized",
            "a": sys.a,
            "f0": [[k, float(c)] for k, c in enumerate(sys.f0) if c != 0.0],
            "f2": [[n, l, c] for (n, l), c in sys.f2.terms.items()],
        }
    else:
        doc = {"kind": "raw", "a": sys.a, "f": [[n, l, c] for (n, l), c in sys.f.terms.items()]}
    if sys.order is not None:
        doc["order"] = sys.order
    return doc


def dump_system(sys) -> str:
    return json.dumps(system_to_doc(sys), indent=1)


# ------------------------------------------------------- center-manifold recursion

def center_manifold_recursion(a: float, f: BSeries, N: int, zero, on_step=None) -> list:
    """phi_0..phi_N from phi_n = [f(x, phi)]_n - (n - 1 + a) phi_{n-1}.

    Works for any scalar type supporting +, * with floats (float, SignedLog).
    Needs f_{0,1} = f_{1,1} = 0 so that the right-hand side at order n only
    involves phi_1..phi_{n-1}.
    """
    groups = f.by_y_power()
    L = max(groups, default=0)
    phi = [zero] * (N + 1)
    # pw[l][k] = (phi^l)_k, filled in as soon as it is determined.
    pw = [None, phi] + [[zero] * (N + 1) for _ in range(2, L + 1)]
    for n in range(1, N + 1):
        for l in range(2, L + 1):
            acc = zero
            prev = pw[l - 1]
            for i in range(l - 1, n):
                u, v = prev[i], phi[n - i]
                if _nonzero(u) and _nonzero(v):
                    acc = acc + u * v
            pw[l][n] = acc
        p = zero
        for l, row in groups.items():
            for m, c in row.items():
                k = n - m
                if k < 0:
                    continue
                if l == 0:
                    if k == 0:
                        p = p + c
                elif k >= 1:
                    t = pw[l][k]
                    if _nonzero(t):
                        p = p + t * c
        prev = phi[n - 1]
        phi[n] = p + prev * (-(n - 1 + a)) if _nonzero(prev) else p
        if on_step is not None:
            on_step(n, p)
    return phi


def _nonzero(v) -> bool:
    if isinstance(v, SignedLog):
        return v.sign != 0
    return v != 0.0


def low_order_prefix(sys: RawSystem, K: int) -> np.ndarray:
    """phi_1..phi_K of the formal center manifold (float recursion)."""
    if K < 1:
        raise ValueError("K must be >= 1")
    sys.require_order(K)
    return np.array(center_manifold_recursion(sys.a, sys.f, K, 0.0)[1:], dtype=float)


# ------------------------------------------------------------- normal form

def _dense_mul(u: np.ndarray, v: np.ndarray, K: int) -> np.ndarray:
    return np.convolve(u[:K + 1], v[:K + 1])[:K + 1]


def normalize(sys: RawSystem, N: int) -> tuple[NormalizedSystem, TransformRecord]:
    """Bring a raw system into the a >= 2 form, valid through x^N.

    Substitutes y = P(x) + x^M q(x) Y with P the (M+1)-term prefix of the
    center manifold.  All intermediate series are carried to order N + M.
    A term 2 f_{0,2} phi_1 x y produced by the translation is absorbed into
    a, so ``a_original`` can differ from the input a.
    """
    if not isinstance(sys, RawSystem):
        raise TypeError("normalize expects a RawSystem")
    f = sys.f
    phi1 = f.coeff(1, 0)
    alpha = 2.0 * f.coeff(0, 2) * phi1
    a_eff = sys.a - alpha
    M = required_M(a_eff)
    if N < M + 4:
        raise ValueError(f"N = {N} too small; need N >= M + 4 = {M + 4}")
    K = N + M
    sys.require_order(K)

    prefix = low_order_prefix(sys, M + 1)
    P = np.zeros(K + 1)
    P[1:M + 2] = prefix

    groups = f.by_y_power()
    L = max(groups, default=0)
    Ppow = [np.eye(1, K + 1, 0).ravel()]
    for _ in range(L):
        Ppow.append(_dense_mul(Ppow[-1], P, K))
    # c_j(x) = sum_{m,l} f_{m,l} C(l, j) x^m P^(l-j): f(x, P + u) = sum_j c_j u^j
    c = [np.zeros(K + 1) for _ in range(L + 1)]
    for l, row in groups.items():
        for m, coef in row.items():
            if m > K:
                continue
            for j in range(l + 1):
                c[j][m:] += coef * comb(l, j) * Ppow[l - j][:K + 1 - m]

    n = np.arange(K + 1)
    dP = np.zeros(K + 1)
    dP[2:] = (n[1:K] * P[1:K])  # x^2 P'
    axP = np.zeros(K + 1)
    axP[1:] = sys.a * P[:K]
    R = c[0] - dP - P - axP
    scale = max(1.0, float(np.max(np.abs(c[0][:M + 2]))), float(np.max(np.abs(P))))
    if np.max(np.abs(R[:M + 2])) > 1e-9 * scale:
        raise ArithmeticError("prefix does not annihilate low orders; recursion inconsistent")

    c1 = c[1].copy() if L >= 1 else np.zeros(K + 1)
    c1[:2] = 0.0  # c1[0] = f_{0,1} = 0; c1[1] = alpha is moved into a
    Q = K - M  # orders of q that can be needed
    q = exp_integral_series(USeries.from_dense(c1[:Q + 2], Q + 1, leading_order=2), Q)
    qinv = exp_integral_series(USeries.from_dense(-c1[:Q + 2], Q + 1, leading_order=2), Q)
    qd, qinvd = q.dense(), qinv.dense()

    R_over_q = _dense_mul(R, np.pad(qinvd, (0, K - Q)), K)
    f0 = R_over_q[M + 2:N + 1].copy()  # f0[k] multiplies x^(k+2), k <= N - 2

    f2_terms = {}
    qpow = np.pad(qd, (0, K - Q))
    for j in range(2, L + 1):
        cj_q = _dense_mul(c[j], qpow, K)  # c_j q^(j-1)
        shift = (j - 1) * M
        for nn in range(max(0, shift - 2), N - 1):
            val = cj_q[nn + 2 - shift]
            if val != 0.0:
                f2_terms[(nn, j)] = val
        qpow = _dense_mul(qpow, np.pad(qd, (0, K - Q)), K)

    a_norm = a_eff + M
    normalized = NormalizedSystem(a_norm, f0, BSeries(f2_terms), order=N)
    record = TransformRecord(M, prefix, q, a_eff, a_norm, sys.a)
    return normalized, record


def pullback_expansion(tilde_phi: USeries, rec: TransformRecord, N: int) -> USeries:
    """Coefficients through x^N of prefix + x^M q(x) tilde_phi(x)."""
    if tilde_phi.leading_order < 2 and any(
            float(tilde_phi.coeff(k)) != 0.0 for k in range(tilde_phi.leading_order, min(2, tilde_phi.order + 1))):
        raise ValueError("tilde_phi must be O(x^2)")
    M = rec.M
    need = N - M
    if tilde_phi.order < need:
        raise ValueError(f"tilde_phi known through x^{tilde_phi.order}; x^{need} needed for order {N}")
    if rec.q.order < max(need - 2, 0):
        raise ValueError(f"q known through x^{rec.q.order}; x^{need - 2} needed for order {N}")
    if len(rec.prefix) > N:
        raise ValueError(f"order {N} shorter than the prefix length {len(rec.prefix)}")
    out = np.zeros(N + 1)
    out[1:len(rec.prefix) + 1] = rec.prefix
    if need >= 0:
        t = tilde_phi.to_float().dense()[:need + 1]
        qd = np.zeros(need + 1)
        m = min(need + 1, rec.q.order + 1)
        qd[:m] = rec.q.dense()[:m]
        out[M:] += np.convolve(t, qd)[:need + 1]
    return USeries.from_dense(out, N)
