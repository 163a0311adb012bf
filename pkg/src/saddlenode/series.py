"""Truncated power series in x, bivariate coefficient maps in (x, y) and
signed-log scalars.

Coefficients are either plain floats (stored in a float64 array) or
:class:`SignedLog` values (stored in an object array).  Every operation takes
an explicit truncation order and refuses to read past what its inputs hold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

# |x| + |y| > CANCELLATION_LIMIT * |x + y| marks a SignedLog sum as unreliable.
CANCELLATION_LIMIT = 1e12
_LOG_CANCELLATION_LIMIT = math.log(CANCELLATION_LIMIT)


@dataclass(frozen=True, slots=True)
class SignedLog:
    """A real number stored as ``sign * exp(logmag)``.

    ``sign == 0`` is an exact zero whatever ``logmag`` holds.  ``cancelled``
    is sticky: it is set when an opposite-sign addition lost more than about
    twelve digits and is carried through every later operation.
    """

    sign: int
    logmag: float = 0.0
    cancelled: bool = False

    @classmethod
    def from_float(cls, x: float) -> "SignedLog":
        if x == 0.0:
            return ZERO
        if not math.isfinite(x):
            raise ValueError(f"cannot represent {x!r} as SignedLog")
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    @classmethod
    def lift(cls, x) -> "SignedLog":
        return x if isinstance(x, SignedLog) else cls.from_float(float(x))

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.logmag)

    to_float = __float__

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def __neg__(self) -> "SignedLog":
        return SignedLog(-self.sign, self.logmag, self.cancelled)

    def __mul__(self, other) -> "SignedLog":
        other = SignedLog.lift(other)
        flag = self.cancelled or other.cancelled
        if self.sign == 0 or other.sign == 0:
            return SignedLog(0, 0.0, flag)
        return SignedLog(self.sign * other.sign, self.logmag + other.logmag, flag)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "SignedLog":
        other = SignedLog.lift(other)
        if other.sign == 0:
            raise ZeroDivisionError("SignedLog division by zero")
        if self.sign == 0:
            return SignedLog(0, 0.0, self.cancelled or other.cancelled)
        return SignedLog(self.sign * other.sign, self.logmag - other.logmag,
                         self.cancelled or other.cancelled)

    def __add__(self, other) -> "SignedLog":
        other = SignedLog.lift(other)
        flag = self.cancelled or other.cancelled
        if other.sign == 0:
            return self if not flag or self.cancelled else SignedLog(self.sign, self.logmag, True)
        if self.sign == 0:
            return other if not flag or other.cancelled else SignedLog(other.sign, other.logmag, True)
        hi, lo = (self, other) if self.logmag >= other.logmag else (other, self)
        d = lo.logmag - hi.logmag  # <= 0
        if hi.sign == lo.sign:
            return SignedLog(hi.sign, hi.logmag + math.log1p(math.exp(d)), flag)
        if d == 0.0:
            return SignedLog(0, 0.0, True)
        e = math.exp(d)
        # log of (|x| + |y|) / |x + y|
        if math.log1p(e) - math.log1p(-e) > _LOG_CANCELLATION_LIMIT:
            flag = True
        return SignedLog(hi.sign, hi.logmag + math.log1p(-e), flag)

    __radd__ = __add__

    def __sub__(self, other) -> "SignedLog":
        return self + (-SignedLog.lift(other))

    def __rsub__(self, other) -> "SignedLog":
        return SignedLog.lift(other) + (-self)

    def scale_log(self, log_factor: float) -> "SignedLog":
        """Multiply by ``exp(log_factor)``."""
        if self.sign == 0:
            return self
        return SignedLog(self.sign, self.logmag + log_factor, self.cancelled)


ZERO = SignedLog(0, 0.0)
ONE = SignedLog(1, 0.0)


def _kind_of(values) -> str:
    arr = np.asarray(values)
    if arr.dtype == object:
        return "signedlog"
    return "float"


@dataclass(frozen=True)
class USeries:
    """Coefficients of ``x**leading_order .. x**order``.

    ``coeffs[k - leading_order]`` is the coefficient of ``x**k``.
    """

    leading_order: int
    coeffs: np.ndarray
    order: int

    def __post_init__(self):
        if self.leading_order < 0:
            raise ValueError("leading_order must be >= 0")
        coeffs = self.coeffs
        if not isinstance(coeffs, np.ndarray):
            coeffs = list(coeffs)
            if any(isinstance(c, SignedLog) for c in coeffs):
                arr = np.empty(len(coeffs), dtype=object)
                arr[:] = [SignedLog.lift(c) for c in coeffs]
            else:
                arr = np.asarray(coeffs, dtype=float)
        elif coeffs.dtype == object:
            arr = np.empty(len(coeffs), dtype=object)
            arr[:] = [SignedLog.lift(c) for c in coeffs]
        else:
            arr = np.array(coeffs, dtype=float)
        expected = self.order - self.leading_order + 1
        if expected < 0:
            raise ValueError("order must be >= leading_order - 1")
        if arr.shape != (expected,):
            raise ValueError(
                f"expected {expected} coefficients for x^{self.leading_order}..x^{self.order}, "
                f"got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def from_dense(cls, dense: Iterable, order: int | None = None, leading_order: int = 0) -> "USeries":
        """Build from coefficients of x^0, x^1, ...; entries below leading_order must be zero."""
        dense = list(dense)
        if order is None:
            order = len(dense) - 1
        if len(dense) < order + 1:
            dense = dense + [0.0] * (order + 1 - len(dense))
        for k in range(min(leading_order, len(dense))):
            if float(dense[k]) != 0.0:
                raise ValueError(f"coefficient of x^{k} is nonzero below leading order {leading_order}")
        return cls(leading_order, dense[leading_order:order + 1], order)

    @classmethod
    def zero(cls, order: int, leading_order: int = 0, kind: str = "float") -> "USeries":
        n = max(order - leading_order + 1, 0)
        if kind == "signedlog":
            arr = np.empty(n, dtype=object)
            arr[:] = [ZERO] * n
            return cls(leading_order, arr, order)
        return cls(leading_order, np.zeros(n), order)

    @classmethod
    def monomial(cls, k: int, order: int, coeff: float = 1.0) -> "USeries":
        dense = np.zeros(order + 1)
        if k <= order:
            dense[k] = coeff
        return cls(min(k, order + 1), dense[min(k, order + 1):], order)

    @property
    def kind(self) -> str:
        return _kind_of(self.coeffs)

    def coeff(self, k: int):
        if k > self.order:
            raise IndexError(f"x^{k} is beyond truncation order {self.order}")
        if k < self.leading_order:
            return ZERO if self.kind == "signedlog" else 0.0
        return self.coeffs[k - self.leading_order]

    def dense(self) -> np.ndarray:
        """Coefficients of x^0..x^order (float series only)."""
        if self.kind != "float":
            raise TypeError("dense() is for float series; use to_float() first")
        out = np.zeros(self.order + 1)
        out[self.leading_order:] = self.coeffs
        return out

    def to_float(self) -> "USeries":
        if self.kind == "float":
            return self
        return USeries(self.leading_order, np.array([float(c) for c in self.coeffs]), self.order)

    def to_signedlog(self) -> "USeries":
        if self.kind == "signedlog":
            return self
        arr = np.empty(len(self.coeffs), dtype=object)
        arr[:] = [SignedLog.from_float(float(c)) for c in self.coeffs]
        return USeries(self.leading_order, arr, self.order)

    def truncate(self, order: int) -> "USeries":
        if order > self.order:
            raise ValueError(f"cannot extend truncation order {self.order} to {order}")
        if order < self.leading_order:
            return USeries.zero(order, min(self.leading_order, order + 1), self.kind)
        return USeries(self.leading_order, self.coeffs[:order - self.leading_order + 1], order)

    def shift(self, m: int) -> "USeries":
        """Multiply by x**m (m >= 0); the truncation order moves with it."""
        if m < 0:
            raise ValueError("shift only by non-negative powers")
        return USeries(self.leading_order + m, self.coeffs, self.order + m)

    def __len__(self) -> int:
        return self.order + 1


def _capacity(A: USeries, B: USeries) -> int:
    return min(A.order + B.leading_order, B.order + A.leading_order)


def cauchy_product(A: USeries, B: USeries, N: int) -> USeries:
    """Product of two series truncated at x**N."""
    if A.kind != B.kind:
        raise TypeError(f"mismatched scalar kinds: {A.kind} and {B.kind}")
    if N > _capacity(A, B):
        raise ValueError(f"order {N} exceeds product capacity {_capacity(A, B)}")
    lo = A.leading_order + B.leading_order
    if lo > N:
        return USeries.zero(N, N + 1, A.kind)
    if A.kind == "float":
        full = np.convolve(A.coeffs, B.coeffs)
        out = full[:N - lo + 1]
        if len(out) < N - lo + 1:
            out = np.concatenate([out, np.zeros(N - lo + 1 - len(out))])
        return USeries(lo, out, N)
    out = np.empty(N - lo + 1, dtype=object)
    for n in range(lo, N + 1):
        acc = ZERO
        for i in range(A.leading_order, n - B.leading_order + 1):
            a = A.coeffs[i - A.leading_order]
            b = B.coeffs[n - i - B.leading_order]
            if a.sign and b.sign:
                acc = acc + a * b
        out[n - lo] = acc
    return USeries(lo, out, N)


def series_power(A: USeries, l: int, N: int) -> USeries:
    """A**l truncated at x**N, for l >= 1."""
    if l < 1:
        raise ValueError("series_power needs l >= 1")
    if l == 1:
        if N > A.order:
            raise ValueError(f"order {N} exceeds truncation order {A.order}")
        return A.truncate(N)
    result = A
    for _ in range(l - 1):
        result = cauchy_product(result, A, min(_capacity(result, A), N))
    if result.order < N:
        raise ValueError(f"order {N} exceeds power capacity {result.order}")
    return result


@dataclass(frozen=True)
class BSeries:
    """Sparse coefficients of a bivariate series: ``terms[(n, l)]`` multiplies x**n y**l.

    ``n_max`` and ``l_max`` are the orders through which the data is known;
    ``None`` means the data is an exact polynomial in that variable.
    """

    terms: Mapping[tuple[int, int], float] = field(default_factory=dict)
    n_max: int | None = None
    l_max: int | None = None

    def __post_init__(self):
        clean = {}
        for (n, l), c in dict(self.terms).items():
            n, l = int(n), int(l)
            if n < 0 or l < 0:
                raise ValueError(f"negative exponent in term ({n}, {l})")
            if self.n_max is not None and n > self.n_max:
                raise ValueError(f"term ({n}, {l}) beyond n_max={self.n_max}")
            if self.l_max is not None and l > self.l_max:
                raise ValueError(f"term ({n}, {l}) beyond l_max={self.l_max}")
            c = float(c)
            if c != 0.0:
                clean[(n, l)] = clean.get((n, l), 0.0) + c
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    def coeff(self, n: int, l: int) -> float:
        return self.terms.get((n, l), 0.0)

    @property
    def y_degree(self) -> int:
        return max((l for (_, l) in self.terms), default=0)

    @property
    def x_degree(self) -> int:
        return max((n for (n, _) in self.terms), default=0)

    def by_y_power(self) -> dict[int, dict[int, float]]:
        out: dict[int, dict[int, float]] = {}
        for (n, l), c in self.terms.items():
            out.setdefault(l, {})[n] = c
        return out


def compose_f(f: BSeries, phi: USeries, N: int) -> USeries:
    """Coefficients of f(x, phi(x)) through x**N (float series)."""
    if phi.leading_order < 2:
        raise ValueError("compose_f needs phi with leading_order >= 2")
    if f.n_max is not None and N > f.n_max:
        raise ValueError(f"order {N} exceeds the x-order {f.n_max} through which f is known")
    phi = phi.to_float()
    if phi.order < N:
        raise ValueError(f"phi known through x^{phi.order}, need x^{N}")
    out = np.zeros(N + 1)
    groups = f.by_y_power()
    for n, c in groups.get(0, {}).items():
        if n <= N:
            out[n] += c
    power = None
    for l in range(1, max(groups, default=0) + 1):
        if l * phi.leading_order > N:
            break
        power = phi.truncate(N) if power is None else cauchy_product(power, phi, N)
        if l not in groups:
            continue
        dense = power.dense()
        for n, c in groups[l].items():
            if n <= N:
                out[n:] += c * dense[:N + 1 - n]
    return USeries.from_dense(out, N)


def exp_series(g: USeries, N: int) -> USeries:
    """exp(g) for a float series with g(0) = 0, truncated at x**N."""
    g = g.to_float()
    if g.order < N:
        raise ValueError(f"g known through x^{g.order}, need x^{N}")
    gd = g.dense()
    if gd[0] != 0.0:
        raise ValueError("exp_series expects g(0) = 0")
    q = np.zeros(N + 1)
    q[0] = 1.0
    kg = np.arange(N + 1) * gd[:N + 1]
    for n in range(1, N + 1):
        q[n] = np.dot(kg[1:n + 1], q[n - 1::-1][:n]) / n
    return USeries.from_dense(q, N)


def exp_integral_series(f1: USeries, N: int) -> USeries:
    """q(x) = exp(int_0^x s**-2 f1(s) ds) through x**N; needs f1 = O(x**2)."""
    if f1.leading_order < 2:
        dense_low = [float(f1.coeff(k)) for k in range(f1.leading_order, min(2, f1.order + 1))]
        if any(c != 0.0 for c in dense_low):
            raise ValueError("exp_integral_series needs f1 with leading_order >= 2")
    if f1.order < N + 1:
        raise ValueError(f"f1 known through x^{f1.order}; q through x^{N} needs x^{N + 1}")
    fd = f1.to_float().dense()
    g = np.zeros(N + 1)
    for k in range(1, N + 1):
        g[k] = fd[k + 1] / k
    return exp_series(USeries.from_dense(g, N), N)


def _log_factorial(n: int) -> float:
    return math.lgamma(n + 1)


def borel_coeffs(phi: USeries) -> USeries:
    """Borel transform: Phi_{n-1} = phi_n / (n-1)!, as a series in w."""
    lo = phi.leading_order
    if lo == 0:
        c0 = phi.coeff(0)
        if float(c0) != 0.0:
            raise ValueError("Borel transform is defined on x C[[x]]; constant term present")
        phi = USeries(1, phi.coeffs[1:], phi.order) if phi.order >= 1 else USeries.zero(0, 1, phi.kind)
        lo = 1
    if phi.kind == "float":
        out = np.empty(len(phi.coeffs))
        for idx, c in enumerate(phi.coeffs):
            n = lo + idx
            if n - 1 <= 170:
                out[idx] = c / math.factorial(n - 1)
            elif c == 0.0:
                out[idx] = 0.0
            else:
                out[idx] = math.copysign(math.exp(math.log(abs(c)) - _log_factorial(n - 1)), c)
        return USeries(lo - 1, out, phi.order - 1)
    out = np.empty(len(phi.coeffs), dtype=object)
    out[:] = [c.scale_log(-_log_factorial(lo + idx - 1)) for idx, c in enumerate(phi.coeffs)]
    return USeries(lo - 1, out, phi.order - 1)


def inverse_borel_coeffs(Phi: USeries) -> USeries:
    """Inverse of :func:`borel_coeffs`: phi_n = (n-1)! Phi_{n-1}."""
    lo = Phi.leading_order
    if Phi.kind == "float":
        out = np.empty(len(Phi.coeffs))
        for idx, c in enumerate(Phi.coeffs):
            k = lo + idx
            if k <= 170:
                out[idx] = c * math.factorial(k)
            elif c == 0.0:
                out[idx] = 0.0
            else:
                out[idx] = math.copysign(math.exp(math.log(abs(c)) + _log_factorial(k)), c)
        return USeries(lo + 1, out, Phi.order + 1)
    out = np.empty(len(Phi.coeffs), dtype=object)
    out[:] = [c.scale_log(_log_factorial(lo + idx)) for idx, c in enumerate(Phi.coeffs)]
    return USeries(lo + 1, out, Phi.order + 1)
