"""Oscillatory box integrals ``v_P``/``v_1``, the truncated singular integral and a real-density check.

All integrals have integrands ``e(beta . w(xi))`` where ``w`` is the vector of
``(Phi_j, D)`` values, so every routine here drives one engine: evaluate the
system at quadrature nodes once, then apply a kernel to the value matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.stats import qmc

from circlekit.boxes import grid_slice
from circlekit.config import chunked
from circlekit.forms import ParametricExpansion
from circlekit.points import ArcPoint

METHODS = ("tensor_gauss", "low_discrepancy_mc")
MAX_TENSOR_DIM = 6
_REPLICATES = 8
_EPS = np.finfo(np.float64).eps

Kernel = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuadratureSpec:
    method: str = "tensor_gauss"
    points_per_axis: int = 8
    sample_count: int = 1 << 14
    tolerance: float = 1e-6
    seed: int = 0
    max_nodes: int = 1 << 22

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown quadrature method {self.method!r}")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.points_per_axis < 1 or self.sample_count < 2 or self.max_nodes < 1:
            raise ValueError("node counts must be positive")


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error: float
    method: str
    nodes: int
    converged: bool

    @property
    def real(self) -> float:
        return self.value.real

    @property
    def imag(self) -> float:
        return self.value.imag


def e(x: np.ndarray) -> np.ndarray:
    return np.exp(2j * np.pi * x)


def system_values(exp: ParametricExpansion, points: np.ndarray) -> np.ndarray:
    """Float ``(N, r+1)`` matrix of ``(Phi_j, D)`` at real points."""
    pts = np.asarray(points, dtype=np.float64)
    return np.stack([f.evaluate_batch(pts) for f in exp.system], axis=1)


def value_bounds(exp: ParametricExpansion, half_width: float) -> np.ndarray:
    """``sum |c| * h^deg`` for each system form: a bound for ``|w_c|`` on ``[-h, h]^{ms}``."""
    return np.array([sum(abs(c) for c in f.terms.values()) * half_width**f.degree for f in exp.system], dtype=np.float64)


def _fsum_complex(parts: list[np.ndarray]) -> np.ndarray:
    stack = np.array(parts)
    re = [math.fsum(col) for col in stack.real.T]
    im = [math.fsum(col) for col in stack.imag.T]
    return np.array(re) + 1j * np.array(im)


def _tensor(exp: ParametricExpansion, half_width: float, n: int, kernel: Kernel, chunk: int) -> np.ndarray:
    x, w = leggauss(n)
    x, w = x * half_width, w * half_width
    dim = exp.ms
    parts = []
    for start, stop in chunked(n**dim, chunk):
        digits = grid_slice(dim, 0, n, start, stop)
        vals = system_values(exp, x[digits])
        weights = np.prod(w[digits], axis=1)
        parts.append(weights @ kernel(vals))
    return _fsum_complex(parts)


def _sobol(exp: ParametricExpansion, half_width: float, spec: QuadratureSpec, kernel: Kernel, chunk: int) -> tuple[np.ndarray, np.ndarray]:
    dim = exp.ms
    vol = (2 * half_width) ** dim
    m = max(1, math.ceil(math.log2(spec.sample_count)))
    estimates = []
    for child in np.random.SeedSequence(spec.seed).spawn(_REPLICATES):
        u = qmc.Sobol(dim, scramble=True, seed=np.random.default_rng(child)).random_base2(m)
        parts = []
        for start, stop in chunked(u.shape[0], chunk):
            vals = system_values(exp, half_width * (2 * u[start:stop] - 1))
            parts.append(kernel(vals).sum(axis=0))
        estimates.append(_fsum_complex(parts) * vol / u.shape[0])
    est = np.array(estimates)
    mean = est.mean(axis=0)
    err = 2 * np.abs(est - mean).std(axis=0, ddof=1) / math.sqrt(_REPLICATES)
    return mean, err


def integrate(
    exp: ParametricExpansion,
    half_width: float,
    kernel: Kernel,
    width: int,
    max_phase: float,
    spec: QuadratureSpec,
    magnitude: float | None = None,
    chunk: int = 1 << 16,
) -> list[QuadResult]:
    """``int_{[-h, h]^{ms}} kernel(w(xi)) dxi`` for a kernel returning ``width`` columns.

    ``max_phase`` bounds the phase of the integrand in cycles and sets the node
    count (four nodes per oscillation per axis). The tensor rule is refined once
    and the difference serves as error estimate; past ``max_nodes`` or six
    dimensions the scrambled-Sobol estimate with replicate spread is used.
    """
    dim = exp.ms
    vol = (2 * half_width) ** dim
    n1 = max(spec.points_per_axis, math.ceil(8 * max_phase))
    n2 = n1 + max(2, n1 // 2)
    floor = 64 * _EPS * (vol if magnitude is None else magnitude)
    tensor_ok = spec.method == "tensor_gauss" and dim <= MAX_TENSOR_DIM and n2**dim <= spec.max_nodes
    if tensor_ok:
        coarse = _tensor(exp, half_width, n1, kernel, chunk)
        fine = _tensor(exp, half_width, n2, kernel, chunk)
        err = np.abs(fine - coarse) + floor
        method, nodes, value = "tensor_gauss", n2**dim, fine
    else:
        value, err = _sobol(exp, half_width, spec, kernel, chunk)
        err = err + floor
        method, nodes = "low_discrepancy_mc", _REPLICATES * (1 << max(1, math.ceil(math.log2(spec.sample_count))))
    return [
        QuadResult(complex(v), float(er), method, nodes, bool(er <= spec.tolerance * max(1.0, abs(v))))
        for v, er in zip(value[:width], err[:width])
    ]


def _beta_matrix(exp: ParametricExpansion, betas) -> np.ndarray:
    if isinstance(betas, ArcPoint):
        betas = [betas]
    rows = [b.vector(exp.index_set) if isinstance(b, ArcPoint) else np.asarray(b, dtype=np.float64) for b in betas]
    mat = np.atleast_2d(np.array(rows, dtype=np.float64))
    if mat.shape[1] != exp.r + 1:
        raise ValueError(f"beta vectors need r + 1 = {exp.r + 1} entries")
    return mat


def box_integrals(exp: ParametricExpansion, half_width: float, betas, spec: QuadratureSpec | None = None) -> list[QuadResult]:
    """``int_{[-h, h]^{ms}} e(F_0(xi; beta)) dxi`` for each beta (unscaled)."""
    spec = spec or QuadratureSpec()
    B = _beta_matrix(exp, betas)
    max_phase = float((np.abs(B) @ value_bounds(exp, half_width)).max())
    return integrate(exp, half_width, lambda w: e(w @ B.T), B.shape[0], max_phase, spec)


def v1(exp: ParametricExpansion, beta, spec: QuadratureSpec | None = None) -> QuadResult:
    return box_integrals(exp, 1.0, [beta], spec)[0]


def v1_batch(exp: ParametricExpansion, betas, spec: QuadratureSpec | None = None) -> list[QuadResult]:
    return box_integrals(exp, 1.0, betas, spec)


# -- truncated singular integral ------------------------------------------------------


@dataclass(frozen=True)
class ChiInfResult:
    value: float
    imag: float
    error: float
    method: str
    converged: bool
    R: float


def _outer_counts(exp: ParametricExpansion, R: float, shift: float, spec: QuadratureSpec) -> list[int]:
    wmax = value_bounds(exp, 1.0)
    wmax[-1] += abs(shift)
    return [max(spec.points_per_axis, math.ceil(8 * R * w)) for w in wmax]


def _separable_kernel(levels: Sequence[Sequence[int]], R: float, shift: float) -> Kernel:
    """``prod_c sum_k omega_k e(beta_k w_c)``: a tensor rule over ``[-R, R]^{r+1}``, factorised.

    One output column per entry of ``levels`` (node counts per beta axis).
    """
    rules = [[leggauss(n) for n in counts] for counts in levels]

    def kernel(w: np.ndarray) -> np.ndarray:
        w = w.copy()
        w[:, -1] -= shift
        out = np.ones((w.shape[0], len(rules)), dtype=np.complex128)
        for col, level in enumerate(rules):
            for c, (x, om) in enumerate(level):
                out[:, col] *= e(np.outer(w[:, c], R * x)) @ (R * om)
        return out

    return kernel


def _sinc_kernel(R: float, shift: float) -> Kernel:
    """``prod_c int_{-R}^{R} e(beta w_c) dbeta = prod_c 2R sinc(2R w_c)``."""

    def kernel(w: np.ndarray) -> np.ndarray:
        w = w.copy()
        w[:, -1] -= shift
        return np.prod(2 * R * np.sinc(2 * R * w), axis=1).astype(np.complex128)[:, None]

    return kernel


def chi_inf_truncated(
    exp: ParametricExpansion, b: int, P: float, R: float, spec: QuadratureSpec | None = None, closed_form: bool = False
) -> ChiInfResult:
    """``int_{[-R, R]^{r+1}} v_1(beta) e(-b beta_0 / P^{2m}) dbeta``.

    The outer tensor rule is separable in the beta coordinates, so the nested
    sum factorises into one product of one-dimensional sums per inner node.
    With ``closed_form`` the beta integrals are done exactly instead (a
    product of sinc kernels), giving an independent route to the same number.
    """
    if not R > 0:
        raise ValueError("R must be positive")
    spec = spec or QuadratureSpec()
    shift = b / float(P) ** (2 * exp.m) if P else 0.0
    if P == 0 and b:
        raise ValueError("P = 0 only admits b = 0")
    wmax = value_bounds(exp, 1.0)
    wmax[-1] += abs(shift)
    max_phase = R * float(wmax.sum())
    volume = (2 * R) ** (exp.r + 1) * 2.0**exp.ms
    if closed_form:
        res = integrate(exp, 1.0, _sinc_kernel(R, shift), 1, max_phase, spec, magnitude=volume)[0]
    else:
        counts = _outer_counts(exp, R, shift, spec)
        finer = [n + max(2, n // 2) for n in counts]
        kernel = _separable_kernel([counts, finer], R, shift)
        coarse, fine = integrate(exp, 1.0, kernel, 2, max_phase, spec, magnitude=volume)
        err = fine.error + abs(fine.value - coarse.value)
        res = QuadResult(fine.value, err, fine.method, fine.nodes, err <= spec.tolerance * max(1.0, abs(fine.value)))
    return ChiInfResult(res.value.real, res.value.imag, res.error, res.method, res.converged, R)


def chi_inf_trace(exp: ParametricExpansion, b: int, P: float, radii: Sequence[float], spec: QuadratureSpec | None = None) -> list[ChiInfResult]:
    return [chi_inf_truncated(exp, b, P, R, spec) for R in radii]


# -- decay harness ----------------------------------------------------------------------


def _case(exp: ParametricExpansion) -> str:
    if exp.d == 2 * exp.m:
        raise ValueError("d = 2m is excluded; no decay bound is available")
    return "2m>d" if exp.d < 2 * exp.m else "d>2m"


def v1_bound(exp: ParametricExpansion, beta: np.ndarray, k: float, l: float) -> float:
    """Min-of-powers envelope for ``|v_1(beta)|`` at implicit constant 1 (``eps`` dropped)."""
    m, d = exp.m, exp.d
    bj = float(np.max(np.abs(beta[:-1]))) if len(beta) > 1 else 0.0
    b0 = abs(float(beta[-1]))
    mixed = lambda a, c: 1.0 / (a / l + c / k)  # noqa: E731
    if _case(exp) == "2m>d":
        exps = (l / (2 * m - 1), mixed(2 * m - 1, d - 1))
        terms = [b0 ** -exps[0] if b0 else math.inf, bj ** -exps[1] if bj else math.inf]
    else:
        exps = (k / (d - 1), 1.0 / (3 * (d - 1) / k + (2 * m - 1) / l))
        terms = [bj ** -exps[0] if bj else math.inf, b0 ** -exps[1] if b0 else math.inf]
    return min(1.0, *terms)


@dataclass(frozen=True)
class DecayRow:
    direction: int
    t: float
    abs_v1: float
    error: float
    bound: float
    ratio: float


def v1_decay_harness(
    exp: ParametricExpansion,
    directions: Sequence[Sequence[float]],
    magnitudes: Sequence[float],
    k: float,
    l: float,
    spec: QuadratureSpec | None = None,
) -> list[DecayRow]:
    """``|v_1(t u)|`` along rays against the decay envelope; ``ratio = |v_1| / envelope``."""
    rows = []
    for i, u in enumerate(directions):
        u = np.asarray(u, dtype=np.float64)
        betas = [t * u for t in magnitudes]
        for t, beta, res in zip(magnitudes, betas, v1_batch(exp, betas, spec)):
            bound = v1_bound(exp, beta, k, l)
            rows.append(DecayRow(i, float(t), abs(res.value), res.error, bound, abs(res.value) / bound))
    return rows


# -- real density --------------------------------------------------------------------------


@dataclass(frozen=True)
class MCEstimate:
    value: float
    ci_low: float
    ci_high: float
    n_samples: int
    extras: dict = field(default_factory=dict)


def real_density_mc(
    exp: ParametricExpansion, b: int, P: float, epsilon: float, n_samples: int = 1 << 18, seed: int = 0
) -> MCEstimate:
    """``vol{xi : |Phi_j| < eps, |D - b/P^{2m}| < eps} / (2 eps)^{r+1}`` with a normal 95% interval."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    rng = np.random.default_rng(seed)
    shift = b / float(P) ** (2 * exp.m) if P else 0.0
    hits = 0
    done = 0
    for start, stop in chunked(n_samples, 1 << 16):
        xi = rng.uniform(-1.0, 1.0, size=(stop - start, exp.ms))
        w = system_values(exp, xi)
        w[:, -1] -= shift
        hits += int(np.count_nonzero(np.all(np.abs(w) < epsilon, axis=1)))
        done += stop - start
    p = hits / done
    scale = 2.0**exp.ms / (2 * epsilon) ** (exp.r + 1)
    half = 1.96 * math.sqrt(p * (1 - p) / done)
    return MCEstimate(p * scale, max(0.0, p - half) * scale, (p + half) * scale, done, {"hits": hits})
