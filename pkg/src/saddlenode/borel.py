"""Borel-plane numerics on the unit disc: convolutions, the auxiliary
equation (w + 1) Y + a * Y = H, the Borel form of the center-manifold
equation, the singularity profile Z = Phi (1 + w)^(a+1), the weighted norm
and Borel-Pade-Laplace summation along the positive ray."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import toeplitz

from .asymptotics import Expansion
from .quadrature import panel_rule, unit_rule
from .series import BSeries, USeries, borel_coeffs
from .system import NormalizedSystem, RawSystem


class BorelDomainError(ValueError):
    pass


class SingularApproximantError(ArithmeticError):
    pass


@dataclass(frozen=True)
class DiscFunction:
    """An analytic function on B_radius(0), either from Taylor coefficients
    (``coeffs[k]`` multiplies w^k) or from a vectorised callable."""

    coeffs: np.ndarray | None = None
    func: Callable | None = None
    radius: float = 1.0

    def __post_init__(self):
        if (self.coeffs is None) == (self.func is None):
            raise ValueError("give exactly one of coeffs or func")
        if not 0.0 < self.radius <= 1.0:
            raise ValueError("radius of validity must lie in (0, 1]")
        if self.coeffs is not None:
            c = np.asarray(self.coeffs)
            c = c.astype(complex if np.iscomplexobj(c) else float)
            object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_series(cls, Phi: USeries, radius: float = 1.0) -> "DiscFunction":
        return cls(coeffs=Phi.to_float().dense(), radius=radius)

    @classmethod
    def from_callable(cls, f: Callable, radius: float = 1.0) -> "DiscFunction":
        return cls(func=f, radius=radius)

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        if self.func is not None:
            return np.asarray(self.func(w), dtype=complex)
        out = np.zeros_like(w)
        for c in self.coeffs[::-1]:
            out = out * w + c
        return out


def _check_point(w, radius: float):
    if np.any(np.abs(w) >= radius):
        raise BorelDomainError(f"|w| must stay below the radius of validity {radius}")


def convolve_quad(Y: DiscFunction, Z: DiscFunction, w, panels: int = 64):
    """(Y * Z)(w) = w int_0^1 Y(w t) Z(w (1 - t)) dt by Gauss-Legendre.

    ``panels`` is the number of nodes on [0, 1] (exact for polynomial
    integrands of degree below 2 * panels).
    """
    if panels < 8:
        raise ValueError("panels must be >= 8")
    w = np.asarray(w, dtype=complex)
    _check_point(w, min(Y.radius, Z.radius))
    t, wt = unit_rule(panels)
    ws = w[..., None]
    vals = Y(ws * t) * Z(ws * (1.0 - t))
    out = w * (vals @ wt)
    return out[()] if out.ndim == 0 else out


def _on_cut(w) -> bool:
    w = np.asarray(w, dtype=complex)
    return bool(np.any((np.abs(w.imag) == 0.0) & (w.real <= -1.0)))


def solve_aux(H: DiscFunction, a: float, w, panels: int = 64):
    """Y(w) = H(w)/(1+w) - a (1+w)^-(a+1) int_0^w H(s) (1+s)^(a-1) ds.

    The unique solution of (w + 1) Y + a * Y = H with Y(0) = 0; principal
    branch, cut along (-inf, -1].
    """
    if not a > 1.0:
        raise BorelDomainError("solve_aux needs a > 1")
    if abs(complex(H(0.0))) > 1e-12:
        raise BorelDomainError("solve_aux needs H(0) = 0")
    if _on_cut(w):
        raise BorelDomainError("w lies on the branch cut (-inf, -1]")
    w = np.asarray(w, dtype=complex)
    t, wt = unit_rule(panels)
    ws = w[..., None]
    s = ws * t
    integral = w * ((H(s) * (1.0 + s) ** (a - 1.0)) @ wt)
    out = H(w) / (1.0 + w) - a * (1.0 + w) ** (-(a + 1.0)) * integral
    return out[()] if out.ndim == 0 else out


def _conv_power(Phi: DiscFunction, l: int, s: np.ndarray, t, wt) -> np.ndarray:
    """The l-fold convolution Phi * ... * Phi at the points s (nested quadrature)."""
    if l == 1:
        return Phi(s)
    inner = s[..., None] * t
    rest = _conv_power(Phi, l - 1, s[..., None] * (1.0 - t), t, wt)
    return s * ((Phi(inner) * rest) @ wt)


def _conv_with(G: np.ndarray, Phi: DiscFunction, l: int, w: np.ndarray, t, wt) -> np.ndarray:
    """(G * Phi^{*l})(w) with G a polynomial given by coefficients."""
    g = DiscFunction(coeffs=G)
    ws = w[..., None]
    return w * ((g(ws * (1.0 - t)) * _conv_power(Phi, l, ws * t, t, wt)) @ wt)


@dataclass(frozen=True)
class Residual:
    value: float
    truncated: bool
    per_point: np.ndarray = field(repr=False, default=None)


def residual_yeqn(sys, Phi: DiscFunction, points, panels: int = 64, L_max: int = 8) -> Residual:
    """max |(w+1) Phi + a * Phi - F0 - sum_l F_l * Phi^{*l}| over ``points``.

    Works for raw and normalized systems: every term f_{m,l} x^m y^l becomes
    B(x^m) * Phi^{*l} (l-fold convolution, so Phi^{*1} = Phi), with
    Phi^{*l} alone when m = 0.
    """
    if isinstance(sys, NormalizedSystem):
        a, f = sys.a, sys.as_raw_f()
    elif isinstance(sys, RawSystem):
        a, f = sys.a, sys.f
    else:
        raise TypeError("residual_yeqn expects a RawSystem or NormalizedSystem")
    pts = np.asarray(points, dtype=complex).ravel()
    if pts.size == 0:
        raise ValueError("no evaluation points")
    _check_point(pts, Phi.radius)
    t, wt = unit_rule(panels)
    truncated = f.y_degree > L_max

    # group by y-power: the x-part of each group is one polynomial in w
    groups: dict[int, np.ndarray] = {}
    plain: dict[int, float] = {}
    for (m, l), c in f.terms.items():
        if l > L_max:
            continue
        if m == 0:
            plain[l] = plain.get(l, 0.0) + c
            continue
        G = groups.setdefault(l, np.zeros(0))
        if len(G) < m:
            G = np.pad(G, (0, m - len(G)))
        G[m - 1] += c * math.exp(-math.lgamma(m))
        groups[l] = G

    lhs = (pts + 1.0) * Phi(pts) + a * pts * ((Phi(pts[:, None] * t)) @ wt)
    rhs = np.zeros_like(pts)
    for l, G in groups.items():
        if l == 0:
            rhs += DiscFunction(coeffs=G)(pts)
        else:
            rhs += _conv_with(G, Phi, l, pts, t, wt)
    for l, c in plain.items():
        rhs += c * _conv_power(Phi, l, pts, t, wt)
    per_point = np.abs(lhs - rhs)
    return Residual(float(per_point.max()), truncated, per_point)


def borel_disc(exp_or_series, radius: float = 1.0) -> DiscFunction:
    """DiscFunction of the Borel transform of an Expansion or float USeries."""
    return DiscFunction.from_series(borel_series(exp_or_series), radius)


def borel_series(exp_or_series) -> USeries:
    if isinstance(exp_or_series, Expansion):
        if exp_or_series.phi_values is not None:
            phi = USeries(1, exp_or_series.phi_values[1:], exp_or_series.N)
        else:
            phi = USeries(1, exp_or_series.phi[1:], exp_or_series.N)
    else:
        phi = exp_or_series
    return borel_coeffs(phi).to_float()


# ---------------------------------------------------------------- singularity profile

def binomial_kernel(a: float, n: int) -> np.ndarray:
    """Taylor coefficients of (1 + w)^-(a+1): (-1)^k Gamma(a+1+k) / (k! Gamma(a+1))."""
    k = np.arange(n + 1)
    lg = np.array([math.lgamma(a + 1 + j) - math.lgamma(j + 1) for j in k]) - math.lgamma(a + 1)
    return (-1.0) ** k * np.exp(lg)


@dataclass(frozen=True)
class SingularityProfile:
    a: float
    Phi_n: np.ndarray
    Z_n: np.ndarray
    sup_Z: float

    def reconvolve(self) -> np.ndarray:
        K = binomial_kernel(self.a, len(self.Z_n) - 1)
        return np.convolve(self.Z_n, K)[:len(self.Z_n)]

    def roundtrip_error(self) -> float:
        """max |reconvolved - Phi_n| relative to max |Phi_n|."""
        scale = float(np.max(np.abs(self.Phi_n))) or 1.0
        return float(np.max(np.abs(self.reconvolve() - self.Phi_n)) / scale)

    def abel_boundary(self, r: float | None = None) -> dict:
        """Abel-regularised Z(-1) next to -Gamma(a+1) S with S the last s-value.

        Shipped as a diagnostic only; no relation between the two is asserted.
        """
        n = np.arange(len(self.Z_n))
        if r is None:
            r = 1.0 - 1.0 / len(self.Z_n)
        return {"r": r, "Z_at_minus_r": float(np.sum((-r) ** n * self.Z_n))}


def inverse_kernel(a: float, n: int) -> np.ndarray:
    """Taylor coefficients of (1 + w)^(a+1), the inverse of :func:`binomial_kernel`."""
    out = np.empty(n + 1)
    out[0] = 1.0
    for k in range(1, n + 1):
        out[k] = out[k - 1] * (a + 2 - k) / k
    return out


def deconvolve_singularity(phi, a: float) -> SingularityProfile:
    """Z_n from Phi_n = sum_k Z_{n-k} (-1)^k Gamma(a+1+k) / (k! Gamma(a+1)).

    Phi_n = phi_{n+1} / n! is formed from the expansion (in doubles when
    the float path produced it, in log space otherwise), then the unit-diagonal
    triangular system is solved by forward substitution, so reconvolving
    reproduces Phi_n to rounding.  The kernel grows like k^a, which leaves
    an absolute error of order n^(a+1) eps in Z_n; convolving with
    :func:`inverse_kernel` gives a better-conditioned cross-check.
    """
    if not a > -1.0:
        raise BorelDomainError("deconvolve_singularity needs a > -1")
    Phi = borel_series(phi).dense()
    n = len(Phi)
    K = binomial_kernel(a, n - 1)
    Z = np.zeros(n)
    for j in range(n):
        Z[j] = Phi[j] - np.dot(K[1:j + 1], Z[j - 1::-1][:j]) if j else Phi[0]
    return SingularityProfile(float(a), Phi, Z, float(np.max(np.abs(Z))))


# ---------------------------------------------------------------- weighted norm

@dataclass(frozen=True)
class NormParams:
    epsilon: float
    a: float
    delta: float | None = None
    sample_grid: np.ndarray | None = None

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.a > 1:
            raise ValueError("a must exceed 1")
        delta = self.epsilon ** (2.0 / 3.0) if self.delta is None else float(self.delta)
        if not 0 < delta < 0.5:
            raise ValueError("delta must lie in (0, 1/2)")
        object.__setattr__(self, "delta", delta)
        if self.sample_grid is None:
            object.__setattr__(self, "sample_grid", default_grid())
        else:
            g = np.asarray(self.sample_grid, dtype=complex).ravel()
            object.__setattr__(self, "sample_grid", g)


def default_grid(n_r: int = 80, n_theta: int = 96, r_min: float = 1e-4, r_max: float = 0.999) -> np.ndarray:
    """Polar grid in B_1(0) with log-spaced radii (w = 0 itself excluded)."""
    r = np.geomspace(r_min, r_max, n_r)
    th = np.linspace(-np.pi, np.pi, n_theta, endpoint=False)
    return (r[:, None] * np.exp(1j * th)[None, :]).ravel()


def norm_weight(w: np.ndarray, p: NormParams) -> np.ndarray:
    r = np.abs(w)
    return np.exp(-r / p.epsilon) * (1.0 + (r / p.epsilon) ** 4) / r * np.abs(1.0 + w) ** (p.a + 1.0)


def triple_norm_eval(Y: DiscFunction | Callable, p: NormParams) -> float:
    """Grid maximum of |Y(w)| e^(-|w|/eps) (1 + |w|^4/eps^4) |w|^-1 |1+w|^(a+1)."""
    g = p.sample_grid
    if g.size == 0:
        raise ValueError("empty sample grid")
    if np.any(np.abs(g + 1.0) < 1e-6):
        raise ValueError("sample grid must stay 1e-6 away from w = -1")
    if np.any(g == 0):
        raise ValueError("sample grid must exclude w = 0")
    vals = np.abs(np.asarray(Y(g))) * norm_weight(g, p)
    return float(vals.max())


# ---------------------------------------------------------------- sampled inequalities

def inequality_samplers(kind: str, trials: int = 100_000, delta: float = 0.5, seed: int = 0,
                        grid: int = 2001) -> dict:
    """Empirical checks of two elementary inequalities.

    lowerbound1: |1 + w(1-t)| >= (|1+w| + t)/sqrt(5) for w in B_delta(-1) and
    B_1(0), t in (0, 1), sampled uniformly (``trials`` pairs).
    embedding: max of e^(-r p)(1 + r^4 p^4) / (e^(-p)(1 + p^4)) over a
    ``grid`` x ``grid`` mesh of (p, r) in [0, 20] x (1, 50].
    """
    if kind == "lowerbound1":
        if not 0.0 < delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if trials < 1:
            raise ValueError("trials must be >= 1")
        rng = np.random.default_rng(seed)
        ws = np.empty(0, dtype=complex)
        while ws.size < trials:
            m = 2 * (trials - ws.size) + 64
            rad = delta * np.sqrt(rng.random(m))
            ang = 2 * np.pi * rng.random(m)
            w = -1.0 + rad * np.exp(1j * ang)
            ws = np.concatenate([ws, w[np.abs(w) < 1.0]])
        w = ws[:trials]
        t = rng.random(trials)
        t[t == 0.0] = 0.5
        margin = np.abs(1.0 + w * (1.0 - t)) - (np.abs(1.0 + w) + t) / math.sqrt(5.0)
        return {"kind": kind, "trials": trials, "violations": int(np.sum(margin < 0)),
                "worst_margin": float(margin.min())}
    if kind == "embedding":
        p = np.linspace(0.0, 20.0, grid)[:, None]
        r = np.linspace(1.0, 50.0, grid)[1:][None, :]
        rp = r * p
        q = np.exp(p - rp) * (1.0 + rp ** 4) / (1.0 + p ** 4)
        i, j = np.unravel_index(np.argmax(q), q.shape)
        return {"kind": kind, "trials": int(q.size), "violations": 0, "max": float(q[i, j]),
                "argmax_p": float(p[i, 0]), "argmax_r": float(r[0, j]),
                "worst_margin": float(7.66 - q[i, j])}
    raise ValueError(f"unknown kind {kind!r}")


# ---------------------------------------------------------------- Borel-Pade-Laplace

def robust_pade(c: np.ndarray, m: int, n: int, tol: float = 1e-14) -> tuple[np.ndarray, np.ndarray]:
    """Type (m, n) Pade approximant p/q of the series with coefficients c.

    SVD-based: the degrees are reduced until the Toeplitz block has full
    rank, which removes spurious pole-zero pairs and handles series that are
    exactly rational (e.g. 1/(1+w) requested at type (20, 20)).
    """
    c = np.asarray(c, dtype=float)
    need = m + n + 1
    if len(c) < need:
        raise ValueError(f"Pade type ({m}, {n}) needs {need} coefficients, got {len(c)}")
    c = c[:need].copy()
    ts = tol * np.linalg.norm(c)
    if np.all(np.abs(c[:m + 1]) <= ts):
        return np.zeros(1), np.ones(1)
    row = np.zeros(n + 1)
    row[0] = c[0]
    col = c
    while True:
        if n == 0:
            return c[:m + 1].copy(), np.ones(1)
        Z = toeplitz(col[:m + n + 1], row[:n + 1])
        C = Z[m + 1:m + n + 1, :]
        rho = int(np.sum(np.linalg.svd(C, compute_uv=False) > ts))
        if rho == n:
            break
        m -= n - rho
        n = rho
    _, _, Vh = np.linalg.svd(C)
    b = Vh[-1].conj()
    D = np.diag(np.abs(b) + math.sqrt(np.finfo(float).eps))
    Q, _ = np.linalg.qr((C @ D).T, mode="complete")
    b = D @ Q[:, n]
    b /= np.linalg.norm(b)
    a = Z[:m + 1, :] @ b
    lam = int(np.argmax(np.abs(b) > tol))
    b = b[lam:]
    a = a[lam:]
    keep_a = np.nonzero(np.abs(a) > tol)[0]
    a = a[:keep_a[-1] + 1] if keep_a.size else np.zeros(1)
    keep_b = np.nonzero(np.abs(b) > tol)[0]
    b = b[:keep_b[-1] + 1]
    a, b = a / b[0], b / b[0]
    return a, b


def borel_pade_laplace(phi, x: float, pade_order: int | None = None, ray_panels: int = 8,
                       ray_cutoff: float | None = None, nodes: int = 64) -> float:
    """Laplace integral int_0^cutoff e^(-w/x) [Pade of Phi](w) dw, cutoff >= 30 x.

    ``phi`` is an Expansion or a float USeries in x.  The Pade type is
    (pade_order, pade_order), default N/2 - 1.
    """
    if not x > 0:
        raise ValueError("x must be positive")
    Phi = borel_series(phi).dense()
    if pade_order is None:
        pade_order = max(len(Phi) // 2 - 1, 0)
    if ray_cutoff is None:
        ray_cutoff = 40.0 * x
    if ray_cutoff < 30.0 * x:
        raise ValueError("ray_cutoff must be >= 30 x")
    if not np.any(Phi):
        return 0.0
    num, den = robust_pade(Phi, pade_order, pade_order)
    if len(den) > 1:
        roots = np.roots(den[::-1])
        real = roots[np.abs(roots.imag) <= 1e-10 * (1.0 + np.abs(roots))].real
        if np.any((real >= 0.0) & (real <= ray_cutoff)):
            raise SingularApproximantError("Pade denominator vanishes on the integration ray; lower the order")
    w, wt = panel_rule(0.0, ray_cutoff, nodes, ray_panels)
    vals = np.polyval(num[::-1], w) / np.polyval(den[::-1], w)
    return float(np.dot(wt, np.exp(-w / x) * vals))
