"""Independent reference values and brute-force recursions.

Frozen numbers were computed once outside the package (scipy adaptive
quadrature, exponential integral) and are kept here verbatim; the helper
functions use exact rational arithmetic so they share no code with the
library.
"""
from __future__ import annotations

import math
from fractions import Fraction

# int_0^inf e^(-10 w) / (1 + w) dw; scipy.integrate.quad and e^10 E_1(10) agree.
EULER_LAPLACE_AT_0_1 = 0.09156333393978809
LOG_SQRT_PI = 0.5723649429247001
EULER_GAMMA = 0.5772156649015329
INV_GAMMA_1_5 = 1.1283791670955126  # 2 / sqrt(pi)


def riccati_exact(a: Fraction, b: Fraction, N: int) -> list[Fraction]:
    """phi_0..phi_N of x^2 y' + (1 + a x) y = b x^2 + y^2, in exact rationals."""
    phi = [Fraction(0)] * (N + 1)
    for n in range(2, N + 1):
        p = b if n == 2 else Fraction(0)
        for i in range(2, n - 1):
            p += phi[i] * phi[n - i]
        phi[n] = p - (n - 1 + a) * phi[n - 1]
    return phi


def raw_recursion_exact(a: Fraction, terms: dict, N: int) -> list[Fraction]:
    """phi_1..phi_N for a general polynomial f, with f(x, phi) composed naively."""
    phi = [Fraction(0)] * (N + 1)
    for n in range(1, N + 1):
        # [f(x, phi)]_n only involves phi_1..phi_{n-1}
        trunc = phi[:n] + [Fraction(0)] * (N + 1 - n)
        p = Fraction(0)
        for (m, l), c in terms.items():
            if m > n:
                continue
            p += Fraction(c) * power_coeff(trunc, l, n - m)
        phi[n] = p - (n - 1 + a) * phi[n - 1] if n >= 2 else p
    return phi


def power_coeff(series: list, l: int, k: int):
    """Coefficient of x^k in series(x)^l by repeated naive convolution."""
    acc = [Fraction(1)] + [Fraction(0)] * k
    for _ in range(l):
        acc = [sum(acc[i] * series[j - i] for i in range(j + 1)) for j in range(k + 1)]
    return acc[k]


def naive_convolution(A: list, B: list, N: int) -> list:
    return [sum(A[i] * B[n - i] for i in range(n + 1) if i < len(A) and n - i < len(B))
            for n in range(N + 1)]


def log_factorial(n: int) -> float:
    return math.lgamma(n + 1)
