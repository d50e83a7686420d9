"""Window constructions and lower-bound certificates for exponential sums.

The certificate function for separation q, order n, even derivative order
p = 2r is

    psi = ((2*pi*n)^p - (-1)^r sum_s d^p/dx_s^p) applied to prod_l (phi*phi)(x_l)

built from a compactly supported univariate window phi.  Its transform is

    psi_hat(v) = ((2*pi*n)^p - sum_s (2*pi*v_s)^p) * prod_l phi_hat(v_l)^2,

nonnegative inside the l^p ball of radius n and nonpositive outside, while
psi itself is supported on [-q,q]^d.  Whenever psi(0) > 0, Poisson summation
turns the pair into a positive lower bound psi(0)/max psi_hat on the Gram
matrix of the exponentials with q-separated frequencies.

Four window variants are provided: the polynomial family (1-(2x/q)^2)^r for
any r >= 1, a half-period cosine (p=2), a raised cosine (p=4), and the
clamped-beam eigenfunction (p=4) whose frequency is the first positive root
of cos(t)*sinh(t) + cosh(t)*sin(t).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad
from scipy.optimize import minimize_scalar
from scipy.special import eval_legendre, spherical_jn

from .ensemble import DiracEnsemble, separation
from .moments import MultiIndexBox, phase_matrix

VARIANTS = ("poly", "cos", "raised_cos", "biharmonic")

_QUAD_KW = dict(epsabs=1e-13, epsrel=1e-13, limit=200)

_sigma_cache: list = []


def sigma_root() -> float:
    """First positive root of cos(t)*sinh(t) + cosh(t)*sin(t), near 2.365.

    Located by bisection on [2, 3] to 1e-12; the residual there is below
    1e-9 because the root is simple with slope 2*cos(t)*cosh(t).
    """
    if _sigma_cache:
        return _sigma_cache[0]

    def g(t):
        return math.cos(t) * math.sinh(t) + math.cosh(t) * math.sin(t)

    lo, hi = 2.0, 3.0
    if not g(lo) > 0 > g(hi):
        raise RuntimeError("bisection bracket lost")
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    assert abs(g(root)) <= 1e-9
    _sigma_cache.append(root)
    return root


def _biharmonic_ab(sigma: float) -> tuple:
    denom = math.cosh(sigma) - math.cos(sigma)
    return math.cosh(sigma) / denom, math.cos(sigma) / denom


@dataclass(frozen=True)
class WindowFunction:
    """Compactly supported even window on (-q/2, q/2).

    `r` is the derivative order entering the construction (p = 2r): r for the
    polynomial family, 1 for the cosine, 2 for raised cosine and biharmonic.
    """

    variant: str
    q: float
    r: int

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown window variant {self.variant!r}")
        if not self.q > 0:
            raise ValueError("support parameter q must be positive")
        if self.r < 1:
            raise ValueError("derivative order r must be >= 1")
        fixed = {"cos": 1, "raised_cos": 2, "biharmonic": 2}
        if self.variant in fixed and self.r != fixed[self.variant]:
            raise ValueError(f"{self.variant} window requires r={fixed[self.variant]}")

    @property
    def p(self) -> int:
        return 2 * self.r

    @classmethod
    def poly(cls, q: float, r: int = 1) -> "WindowFunction":
        return cls(variant="poly", q=q, r=r)

    @classmethod
    def cosine(cls, q: float) -> "WindowFunction":
        return cls(variant="cos", q=q, r=1)

    @classmethod
    def raised_cosine(cls, q: float) -> "WindowFunction":
        return cls(variant="raised_cos", q=q, r=2)

    @classmethod
    def biharmonic(cls, q: float) -> "WindowFunction":
        return cls(variant="biharmonic", q=q, r=2)


def window_for_order(p: int, q: float, variant: str | None = None) -> WindowFunction:
    """Window with derivative order p; defaults to the best constant per p."""
    if p % 2 != 0 or p < 2:
        raise ValueError("p must be an even integer >= 2")
    if variant is None:
        variant = {2: "cos", 4: "biharmonic"}.get(p, "poly")
    if variant == "poly":
        return WindowFunction.poly(q, r=p // 2)
    win = {
        "cos": WindowFunction.cosine,
        "raised_cos": WindowFunction.raised_cosine,
        "biharmonic": WindowFunction.biharmonic,
    }[variant](q)
    if win.p != p:
        raise ValueError(f"variant {variant} has p={win.p}, not {p}")
    return win


def eval_phi(window: WindowFunction, x):
    """Pointwise window value; zero outside (-q/2, q/2).  Broadcasts."""
    x = np.asarray(x, dtype=float)
    q = window.q
    inside = np.abs(x) < q / 2
    xs = np.where(inside, x, 0.0)
    if window.variant == "poly":
        vals = (1.0 - (2.0 * xs / q) ** 2) ** window.r
    elif window.variant == "cos":
        vals = np.cos(np.pi * xs / q)
    elif window.variant == "raised_cos":
        vals = 1.0 + np.cos(2.0 * np.pi * xs / q)
    else:
        sigma = sigma_root()
        a, b = _biharmonic_ab(sigma)
        u = 2.0 * sigma * xs / q
        vals = a * np.cos(u) - b * np.cosh(u)
    out = np.where(inside, vals, 0.0)
    return float(out) if out.ndim == 0 else out


def phi_first_deriv(window: WindowFunction, x):
    """First derivative of the window inside its support (zero outside)."""
    x = np.asarray(x, dtype=float)
    q = window.q
    inside = np.abs(x) < q / 2
    xs = np.where(inside, x, 0.0)
    if window.variant == "poly":
        vals = window.r * (1.0 - (2.0 * xs / q) ** 2) ** (window.r - 1) * (-8.0 * xs / q**2)
    elif window.variant == "cos":
        vals = -(np.pi / q) * np.sin(np.pi * xs / q)
    elif window.variant == "raised_cos":
        alpha = 2.0 * np.pi / q
        vals = -alpha * np.sin(alpha * xs)
    else:
        sigma = sigma_root()
        a, b = _biharmonic_ab(sigma)
        u = 2.0 * sigma * xs / q
        vals = (2.0 * sigma / q) * (-a * np.sin(u) - b * np.sinh(u))
    out = np.where(inside, vals, 0.0)
    return float(out) if out.ndim == 0 else out


def phi_rth_deriv(window: WindowFunction, x):
    """The weak r-th derivative entering the construction (zero outside).

    For the polynomial family this is (-1)^r q^{-r} 4^r r! P_r(2x/q) with the
    Legendre polynomial P_r.
    """
    x = np.asarray(x, dtype=float)
    q, r = window.q, window.r
    inside = np.abs(x) < q / 2
    xs = np.where(inside, x, 0.0)
    if window.variant == "poly":
        scale = (-1.0) ** r * 4.0**r * math.factorial(r) / q**r
        vals = scale * eval_legendre(r, 2.0 * xs / q)
    elif window.variant == "cos":
        vals = -(np.pi / q) * np.sin(np.pi * xs / q)
    elif window.variant == "raised_cos":
        alpha = 2.0 * np.pi / q
        vals = -(alpha**2) * np.cos(alpha * xs)
    else:
        sigma = sigma_root()
        a, b = _biharmonic_ab(sigma)
        u = 2.0 * sigma * xs / q
        vals = (2.0 * sigma / q) ** 2 * (-a * np.cos(u) - b * np.cosh(u))
    out = np.where(inside, vals, 0.0)
    return float(out) if out.ndim == 0 else out


def _overlap(q: float, x: float) -> tuple:
    return max(-q / 2, x - q / 2), min(q / 2, x + q / 2)


def _gauss_legendre_integral(f, lo: float, hi: float, nodes: int) -> float:
    # exact for polynomial integrands of degree <= 2*nodes - 1
    xg, wg = leggauss(nodes)
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    return float(half * np.sum(wg * f(mid + half * xg)))


def autocorr(window: WindowFunction, x: float) -> float:
    """(phi*phi)(x); exactly zero for |x| >= q.

    Closed forms for the cosine windows, exact Gauss-Legendre for the
    polynomial family, adaptive quadrature for the biharmonic window.
    """
    q = window.q
    x = abs(float(x))
    if x >= q:
        return 0.0
    if window.variant == "cos":
        return q / (2 * np.pi) * math.sin(np.pi * x / q) + 0.5 * (q - x) * math.cos(
            np.pi * x / q
        )
    if window.variant == "raised_cos":
        alpha = 2 * np.pi / q
        return (q - x) * (1.0 + 0.5 * math.cos(alpha * x)) + 1.5 / alpha * math.sin(
            alpha * x
        )
    lo, hi = _overlap(q, x)
    if window.variant == "poly":
        return _gauss_legendre_integral(
            lambda u: eval_phi(window, u) * eval_phi(window, u - x),
            lo,
            hi,
            nodes=2 * window.r + 1,
        )
    val, _ = quad(lambda u: eval_phi(window, u) * eval_phi(window, u - x), lo, hi, **_QUAD_KW)
    return val


def autocorr_at_zero(window: WindowFunction) -> float:
    """Closed-form (phi*phi)(0) = integral of phi^2."""
    q, r, p = window.q, window.r, window.p
    if window.variant == "poly":
        log_val = (
            0.5 * math.log(math.pi)
            + math.lgamma(p + 1)
            - math.log(2.0)
            - math.lgamma(p + 1.5)
        )
        return q * math.exp(log_val)
    if window.variant == "cos":
        return q / 2
    if window.variant == "raised_cos":
        return 1.5 * q
    sigma = sigma_root()
    a, b = _biharmonic_ab(sigma)
    cross = math.cos(sigma) * math.sinh(sigma) + math.sin(sigma) * math.cosh(sigma)
    return (
        q
        / (2 * sigma)
        * (
            a**2 * (sigma + 0.5 * math.sin(2 * sigma))
            + b**2 * (sigma + 0.5 * math.sinh(2 * sigma))
            - 2 * a * b * cross
        )
    )


def deriv_autocorr(window: WindowFunction, x: float) -> float:
    """Convolution (phi^(r) * phi^(r))(x); exactly zero for |x| >= q.

    Since phi^(r) has parity (-1)^r, the convolution equals
    (-1)^r * integral phi^(r)(u) phi^(r)(u - x) du.
    """
    q, r = window.q, window.r
    x = abs(float(x))
    if x >= q:
        return 0.0
    if window.variant == "cos":
        return -(
            np.pi**2 / (2 * q**2) * (q - x) * math.cos(np.pi * x / q)
            - np.pi / (2 * q) * math.sin(np.pi * x / q)
        )
    if window.variant == "raised_cos":
        alpha = 2 * np.pi / q
        return alpha**4 / 2 * ((q - x) * math.cos(alpha * x) - math.sin(alpha * x) / alpha)
    lo, hi = _overlap(q, x)
    if window.variant == "poly":
        val = _gauss_legendre_integral(
            lambda u: phi_rth_deriv(window, u) * phi_rth_deriv(window, u - x),
            lo,
            hi,
            nodes=r + 1,
        )
        return (-1.0) ** r * val
    val, _ = quad(
        lambda u: phi_rth_deriv(window, u) * phi_rth_deriv(window, u - x), lo, hi, **_QUAD_KW
    )
    return val  # r = 2 for the biharmonic window


def deriv_autocorr_at_zero(window: WindowFunction) -> float:
    """Closed-form (phi^(r) * phi^(r))(0) = (-1)^r integral (phi^(r))^2."""
    q, r, p = window.q, window.r, window.p
    if window.variant == "poly":
        log_val = (
            p * math.log(4.0)
            + 2 * math.lgamma(r + 1)
            - math.log(p + 1.0)
            - (p - 1) * math.log(q)
        )
        return (-1.0) ** r * math.exp(log_val)
    if window.variant == "cos":
        return -(np.pi**2) / q**2 * autocorr_at_zero(window)
    if window.variant == "raised_cos":
        return 8 * np.pi**4 / q**3
    sigma = sigma_root()
    # eigenfunction identity: the fourth derivative reproduces the window
    return 16 * sigma**4 / q**4 * autocorr_at_zero(window)


def phi_hat(window: WindowFunction, v):
    """Fourier transform integral phi(x) e^{-2*pi*i*v*x} dx; real and even.

    Removable singularities of the cosine variants are rewritten through
    sin(x)/x, which covers them exactly.  The polynomial family reduces to
    spherical Bessel functions: phi_hat(v) = q r! 2^r j_r(w)/w^r, w = pi*q*v.
    """
    v = np.asarray(v, dtype=float)
    q, r = window.q, window.r
    u = np.abs(q * v)
    if window.variant == "cos":
        out = q * np.sinc(0.5 - u) / (1.0 + 2.0 * u)
    elif window.variant == "raised_cos":
        near = np.abs(u) < 0.5
        safe = np.where(near, 0.5, u)  # dummy away from the u=0 form's pole
        out = np.where(
            near,
            q * np.sinc(u) / np.maximum(1.0 - u**2, 0.25),
            q * np.sinc(1.0 - safe) / (safe * (1.0 + safe)),
        )
    elif window.variant == "biharmonic":
        sigma = sigma_root()
        a, b = _biharmonic_ab(sigma)
        w = np.pi * q * v
        icos = q / 2 * (np.sinc((sigma - w) / np.pi) + np.sinc((sigma + w) / np.pi))
        icosh = (
            q
            * (sigma * math.sinh(sigma) * np.cos(w) + w * math.cosh(sigma) * np.sin(w))
            / (sigma**2 + w**2)
        )
        out = a * icos - b * icosh
    else:
        w = np.pi * u
        small = w < 1e-2
        ws = np.where(small, 1.0, w)
        bessel = spherical_jn(r, ws) / ws**r
        series = (
            1.0 - w**2 / (2 * (2 * r + 3)) + w**4 / (8 * (2 * r + 3) * (2 * r + 5))
        ) / _double_factorial(2 * r + 1)
        out = q * math.factorial(r) * 2.0**r * np.where(small, series, bessel)
    return float(out) if out.ndim == 0 else out


def _double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2))


@dataclass(frozen=True)
class PsiSpec:
    """Parameters of one certificate function: window, dimension, order."""

    window: WindowFunction
    d: int
    p: int
    n: float

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        if not self.n > 0:
            raise ValueError("order n must be positive")
        if self.p != self.window.p:
            raise ValueError(f"p={self.p} inconsistent with window p={self.window.p}")

    @classmethod
    def for_window(cls, window: WindowFunction, d: int, n: float) -> "PsiSpec":
        return cls(window=window, d=d, p=window.p, n=n)


def psi_at_zero(spec: PsiSpec) -> float:
    """Closed-form psi(0); positive iff n*q exceeds the window threshold."""
    a0 = autocorr_at_zero(spec.window)
    b0 = deriv_autocorr_at_zero(spec.window)
    r = spec.window.r
    bracket = (2 * np.pi * spec.n) ** spec.p * a0 - (-1.0) ** r * spec.d * b0
    return a0 ** (spec.d - 1) * bracket


def threshold_nq(window: WindowFunction, d: int) -> float:
    """Minimal n*q with psi(0) > 0; independent of q by scaling."""
    a0 = autocorr_at_zero(window)
    b0 = deriv_autocorr_at_zero(window)
    r = window.r
    ratio = d * (-1.0) ** r * b0 / ((2 * np.pi) ** window.p * a0)
    return ratio ** (1.0 / window.p) * window.q


def eval_psi(spec: PsiSpec, x) -> float:
    """psi(x) for a point x in R^d; exactly zero when max_s |x_s| >= q."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (spec.d,):
        raise ValueError(f"expected a point with {spec.d} coordinates")
    win, r = spec.window, spec.window.r
    a_vals = np.array([autocorr(win, xs) for xs in x])
    d_vals = np.array([deriv_autocorr(win, xs) for xs in x])
    # products with one factor left out, without dividing by possible zeros
    prefix = np.concatenate([[1.0], np.cumprod(a_vals)])
    suffix = np.concatenate([np.cumprod(a_vals[::-1])[::-1], [1.0]])
    leave_one_out = prefix[:-1] * suffix[1:]
    total = (2 * np.pi * spec.n) ** spec.p * prefix[-1]
    total -= (-1.0) ** r * np.sum(d_vals * leave_one_out)
    return float(total)


def eval_psi_hat(spec: PsiSpec, v):
    """psi_hat at frequency points v with shape (..., d).  Broadcasts."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != spec.d:
        raise ValueError(f"expected last axis of length {spec.d}")
    bracket = (2 * np.pi * spec.n) ** spec.p - np.sum((2 * np.pi * v) ** spec.p, axis=-1)
    profile = phi_hat(spec.window, v)
    out = bracket * np.prod(np.asarray(profile) ** 2, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def constant_Cp(p: int) -> float:
    """The order constant (Gamma(p/2+1)Gamma(p+3/2)/(pi^p Gamma((p+3)/2)))^(1/p)."""
    if p < 2 or p % 2 != 0:
        raise ValueError("p must be an even integer >= 2")
    log_val = (
        math.lgamma(p / 2 + 1)
        + math.lgamma(p + 1.5)
        - p * math.log(math.pi)
        - math.lgamma((p + 3) / 2)
    )
    value = math.exp(log_val / p)
    assert value <= (2 * p + 3) / (math.e * math.pi)
    return value


@dataclass(frozen=True)
class InghamConstants:
    """Winning dimension constant c_d with the construction that attains it."""

    p: int
    C_p: float
    d: int
    c_d: float
    construction: str


def constant_cd(d: int) -> InghamConstants:
    """c_d = 2 * min over constructions of (base constant) * d^(1/p).

    Candidates: the polynomial family over even p up to 2*ceil(log d) + 8
    (the proof-level choice p = 2*ceil(log d) plus margin), the cosine window
    (base 1/2 at p=2), the raised cosine ((1/3)^(1/4) at p=4) and the
    biharmonic window (sigma/pi at p=4).
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    candidates = []
    p_max = 2 * math.ceil(math.log(d)) + 8 if d > 1 else 8
    for p in range(2, p_max + 1, 2):
        candidates.append((constant_Cp(p), p, f"poly(p={p})"))
    candidates.append((0.5, 2, "cos"))
    candidates.append(((1.0 / 3.0) ** 0.25, 4, "raised_cos"))
    candidates.append((sigma_root() / math.pi, 4, "biharmonic"))
    best = min(candidates, key=lambda c: 2 * c[0] * d ** (1.0 / c[1]))
    base, p, label = best
    return InghamConstants(
        p=p, C_p=base, d=d, c_d=2 * base * d ** (1.0 / p), construction=label
    )


def log_bound_cd(d: int) -> tuple:
    """Logarithmic bounds (proof level, statement level) dominating c_d.

    Returns ((7 + 4*log d)/(pi*sqrt(e)), 3 + 2*log d) and asserts that the
    computed c_d stays below the statement-level bound.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    proof_level = (7 + 4 * math.log(d)) / (math.pi * math.sqrt(math.e))
    statement_level = 3 + 2 * math.log(d)
    assert constant_cd(d).c_d <= statement_level
    return proof_level, statement_level


def _psi_hat_on_axes(spec: PsiSpec, axes: list) -> np.ndarray:
    grids = np.meshgrid(*axes, indexing="ij")
    points = np.stack(grids, axis=-1)
    return eval_psi_hat(spec, points)


def psi_hat_max(spec: PsiSpec, samples_per_axis: int = 201) -> float:
    """Estimate max over R^d of psi_hat by sampling plus local refinement.

    Since phi >= 0 for every variant, |phi_hat| peaks at zero and the
    maximum is attained at v = 0; the search keeps that honest numerically.
    The sampling window [-n - 1/q, n + 1/q] per axis always contains the
    region where psi_hat is positive.
    """
    if samples_per_axis % 2 == 0:
        samples_per_axis += 1  # keep 0 on the grid
    limit = spec.n + 1.0 / spec.window.q
    axis = np.linspace(-limit, limit, samples_per_axis)
    step = axis[1] - axis[0]

    if spec.d <= 2:
        values = _psi_hat_on_axes(spec, [axis] * spec.d)
        best_flat = int(np.argmax(values))
        best = np.array(
            [axis[i] for i in np.unravel_index(best_flat, values.shape)], dtype=float
        )
    else:
        # coordinatewise ascent over the shared univariate sample values
        best = np.zeros(spec.d)
        for _ in range(10):
            moved = False
            for s in range(spec.d):
                trial = np.tile(best, (samples_per_axis, 1))
                trial[:, s] = axis
                vals = eval_psi_hat(spec, trial)
                top = int(np.argmax(vals))
                if axis[top] != best[s]:
                    best[s] = axis[top]
                    moved = True
            if not moved:
                break

    # continuous coordinatewise polish around the best sample
    current = float(eval_psi_hat(spec, best))
    for _ in range(3):
        for s in range(spec.d):
            def neg(t, s=s):
                point = best.copy()
                point[s] = t
                return -eval_psi_hat(spec, point)

            res = minimize_scalar(
                neg,
                bounds=(best[s] - step, best[s] + step),
                method="bounded",
                options={"xatol": 1e-12},
            )
            if -res.fun > current:
                best[s] = res.x
                current = -res.fun
    return max(current, float(eval_psi_hat(spec, np.zeros(spec.d))))


def sign_pattern_check(spec: PsiSpec, per_axis: int = 41, span: float = 2.0) -> bool:
    """Verify the sign split of psi_hat across the l^p ball of radius n.

    Samples a grid over [-span*n, span*n] on the first min(d, 2) axes
    (remaining coordinates zero) and checks sign(psi_hat) against the side of
    the ball wherever the window product is not negligible.
    """
    axis = np.linspace(-span * spec.n, span * spec.n, per_axis)
    naxes = min(spec.d, 2)
    grids = np.meshgrid(*([axis] * naxes), indexing="ij")
    points = np.zeros(grids[0].shape + (spec.d,))
    for s in range(naxes):
        points[..., s] = grids[s]
    values = eval_psi_hat(spec, points)
    profile = phi_hat(spec.window, points)
    product = np.prod(np.asarray(profile) ** 2, axis=-1)
    norms = np.sum(np.abs(points) ** spec.p, axis=-1) ** (1.0 / spec.p)
    tol = 1e-12 * np.max(np.abs(values))
    mask = product > 1e-14
    bad_inside = mask & (norms < spec.n) & (values < -tol)
    bad_outside = mask & (norms > spec.n) & (values > tol)
    return not (np.any(bad_inside) or np.any(bad_outside))


@dataclass(frozen=True)
class InghamCertificate:
    """Numeric certificate data for one (variant, p, d, n, q) choice.

    `lower_bound_c` is psi(0)/max psi_hat; it is a valid Gram lower bound
    exactly when psi(0) > 0 (the `certified` property).  No optimality of
    this particular constant is claimed.
    """

    variant: str
    p: int
    d: int
    n: float
    q: float
    psi_zero: float
    autocorr0: float
    deriv_autocorr0: float
    threshold_nq: float
    psi_hat_max: float
    lower_bound_c: float
    sign_check: bool

    @property
    def certified(self) -> bool:
        return self.psi_zero > 0

    def to_json(self) -> dict:
        data = {
            "variant": self.variant,
            "p": self.p,
            "d": self.d,
            "n": self.n,
            "q": self.q,
            "psi_zero": self.psi_zero,
            "autocorr0": self.autocorr0,
            "deriv_autocorr0": self.deriv_autocorr0,
            "threshold_nq": self.threshold_nq,
            "psi_hat_max": self.psi_hat_max,
            "lower_bound_c": self.lower_bound_c,
            "sign_check": self.sign_check,
            "certified": self.certified,
        }
        return data

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)


def build_certificate(
    spec: PsiSpec, samples_per_axis: int = 201, sign_per_axis: int = 41
) -> InghamCertificate:
    """Assemble the certificate for one parameter choice."""
    zero = psi_at_zero(spec)
    hat_max = psi_hat_max(spec, samples_per_axis=samples_per_axis)
    return InghamCertificate(
        variant=spec.window.variant,
        p=spec.p,
        d=spec.d,
        n=spec.n,
        q=spec.window.q,
        psi_zero=zero,
        autocorr0=autocorr_at_zero(spec.window),
        deriv_autocorr0=deriv_autocorr_at_zero(spec.window),
        threshold_nq=threshold_nq(spec.window, spec.d),
        psi_hat_max=hat_max,
        lower_bound_c=zero / hat_max,
        sign_check=sign_pattern_check(spec, per_axis=sign_per_axis),
    )


def lp_ball_indices(d: int, n: int, p: int) -> np.ndarray:
    """Integer multi-indices k with ||k||_p <= n, as an (K, d) array."""
    if p % 2 != 0 or p < 2:
        raise ValueError("p must be an even integer >= 2")
    box = MultiIndexBox(d=d, n=int(math.floor(n)), signed=True)
    idx = box.indices()
    keep = np.sum(np.abs(idx.astype(object)) ** p, axis=1) <= n**p
    return idx[np.asarray(keep, dtype=bool)]


@dataclass(frozen=True, eq=False)
class InghamBoundReport:
    """Certificate plus the empirical Gram lower bound for one ensemble."""

    certificate: InghamCertificate
    empirical_lower: float
    ball_size: int
    separation_q: float


def ingham_lower_bound(
    ensemble: DiracEnsemble,
    n: int,
    p: int,
    variant: str | None = None,
    samples_per_axis: int = 201,
) -> InghamBoundReport:
    """Certificate for the ensemble's separation plus lambda_min of the Gram
    matrix of its exponentials over the l^p ball of radius n.

    When psi(0) <= 0 the certificate is reported uncertified; no exception.
    """
    q = separation(ensemble).q if ensemble.size >= 2 else 0.5
    window = window_for_order(p, q, variant=variant)
    spec = PsiSpec.for_window(window, d=ensemble.dimension, n=n)
    certificate = build_certificate(spec, samples_per_axis=samples_per_axis)
    indices = lp_ball_indices(ensemble.dimension, n, p)
    vand = phase_matrix(ensemble.points_array, indices)
    gram = vand @ vand.conj().T
    empirical = float(np.linalg.eigvalsh(gram)[0])
    return InghamBoundReport(
        certificate=certificate,
        empirical_lower=empirical,
        ball_size=indices.shape[0],
        separation_q=q,
    )
