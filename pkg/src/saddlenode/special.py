"""Gamma-family functions on the positive reals and the gamma-ratio sums
used to bound convolution tails.

log_gamma and digamma are thin wrappers around ``math.lgamma`` and
``scipy.special.digamma``; the value added here is the domain contract.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .quadrature import unit_rule


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class GammaEval:
    x: float
    log_gamma: float
    digamma: float | None = None

    @classmethod
    def at(cls, x: float, with_digamma: bool = False) -> "GammaEval":
        return cls(x, log_gamma(x), digamma(x) if with_digamma else None)


def _check_positive(x: float, name: str = "x") -> float:
    x = float(x)
    if not (x > 0.0) or not math.isfinite(x):
        raise DomainError(f"{name} must be a finite positive real, got {x!r}")
    return x


def log_gamma(x: float) -> float:
    """log Gamma(x) for x > 0."""
    return math.lgamma(_check_positive(x))


def log_gamma_array(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0.0)):
        raise DomainError("log_gamma_array needs every argument > 0")
    return sp.gammaln(x)


def digamma(x: float) -> float:
    return float(sp.digamma(_check_positive(x)))


def gamma_ratio(x: float, b: float) -> float:
    """Gamma(x + b) / Gamma(x)."""
    x = _check_positive(x)
    _check_positive(x + b, "x + b")
    if b == 0.0:
        return 1.0
    return math.exp(math.lgamma(x + b) - math.lgamma(x))


def _graded_power_half(g, p: float, nodes: int) -> float:
    """int_0^{1/2} t**(p-1) g(t) dt with the endpoint power removed.

    t = v**k / 2 turns t**(p-1) dt into a smooth multiple of v**(k p - 1) dv;
    k is chosen so that k p >= 12.
    """
    k = max(1, math.ceil(12.0 / p))
    v, w = unit_rule(nodes)
    t = 0.5 * v ** k
    jac = k * 0.5 ** p * v ** (k * p - 1.0)
    return float(np.dot(w, jac * g(t)))


def beta_check(x: float, y: float, quad_panels: int = 128) -> tuple[float, float]:
    """Quadrature of int_0^inf s**(y-1) (1+s)**-(x+y) ds against the Beta value.

    After s = t/(1-t) the integrand is t**(y-1) (1-t)**(x-1) on [0, 1]; each
    half is integrated with a power substitution that removes the endpoint
    singularity, then ``quad_panels`` Gauss-Legendre nodes.
    """
    x = _check_positive(x)
    y = _check_positive(y)
    left = _graded_power_half(lambda t: (1.0 - t) ** (x - 1.0), y, quad_panels)
    right = _graded_power_half(lambda t: (1.0 - t) ** (y - 1.0), x, quad_panels)
    rhs = math.exp(math.lgamma(x) + math.lgamma(y) - math.lgamma(x + y))
    return left + right, rhs


def _log_gammas(b: float, n_max: int) -> np.ndarray:
    # lg[n] = log Gamma(n + b); only n >= 2 is ever read, and n + b > 0 there.
    lg = np.full(n_max + 1, np.nan)
    for n in range(2, n_max + 1):
        lg[n] = math.lgamma(n + b)
    return lg


def inequality_quotients(kind: str, b: float, aux: float, n_max: int) -> np.ndarray:
    """Quotients LHS_n / Gamma_{n-2} for 4 <= n <= n_max, Gamma_n := Gamma(n + b).

    conv: sum_{k=2}^{n-2} Gamma_k Gamma_{n-k}
    rho:  sum_{j=2}^{n-2} rho**(j-n+2) Gamma_j
    xi:   sum_{l=2}^{floor(n/2)} xi**(l-2) Gamma_{n-2(l-1)}
    Entry i of the result belongs to n = i + 4.
    """
    if not b > -2.0:
        raise DomainError(f"b must exceed -2, got {b!r}")
    if kind not in ("conv", "rho", "xi"):
        raise ValueError(f"unknown kind {kind!r}")
    if kind != "conv":
        _check_positive(aux, "rho" if kind == "rho" else "xi")
    if n_max < 4:
        raise ValueError("n_max must be >= 4")
    lg = _log_gammas(b, n_max)
    out = np.empty(n_max - 3)
    for n in range(4, n_max + 1):
        if kind == "conv":
            k = np.arange(2, n - 1)
            terms = lg[k] + lg[n - k] - lg[n - 2]
        elif kind == "rho":
            j = np.arange(2, n - 1)
            terms = (j - n + 2) * math.log(aux) + lg[j] - lg[n - 2]
        else:
            l = np.arange(2, n // 2 + 1)
            terms = (l - 2) * math.log(aux) + lg[n - 2 * (l - 1)] - lg[n - 2]
        out[n - 4] = float(np.exp(terms).sum())
    return out


def empirical_constant(kind: str, b: float, aux: float = 1.0, n_max: int = 200) -> float:
    """Largest quotient over 4 <= n <= n_max; see :func:`inequality_quotients`."""
    return float(inequality_quotients(kind, b, aux, n_max).max())
