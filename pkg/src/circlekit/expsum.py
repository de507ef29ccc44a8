"""Weyl sums over boxes, complete sums modulo q and the orthogonality counting oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from circlekit.archimedean import QuadResult, QuadratureSpec, box_integrals
from circlekit.boxes import grid_slice, iter_grid
from circlekit.config import Budget, CircleKitError, chunked, resolve
from circlekit.forms import Form, ParametricExpansion
from circlekit.points import ArcPoint, RationalPoint, frac_mul

MAX_TABLE_ENTRIES = 1 << 25


class RoundingError(CircleKitError):
    """An orthogonality sum did not land on an integer; a phase is wrong somewhere."""


def _e(x):
    return np.exp(2j * np.pi * x)


def roots_of_unity(q: int) -> np.ndarray:
    return _e(np.arange(q) / q)


def _fsum_complex(parts) -> complex:
    parts = list(parts)
    return complex(math.fsum(p.real for p in parts), math.fsum(p.imag for p in parts))


def t_sum(exp: ParametricExpansion, P: int, alpha: ArcPoint, budget: Budget | None = None, chunk: int = 1 << 17) -> complex:
    """``T_P(alpha) = sum_{x in [-P, P]^{ms}} e(sum_j alpha_j Phi_j(x) + alpha_0 D(x))``."""
    if P < 0:
        raise ValueError("P must be non-negative")
    budget = resolve(budget)
    width = 2 * P + 1
    budget.require("t_sum", width**exp.ms)
    coeffs = alpha.vector(exp.index_set) % 1.0
    parts = []
    for pts in iter_grid(exp.ms, -P, width, chunk):
        vals = exp.values(pts)
        phase = np.zeros(pts.shape[0])
        for c, a in enumerate(coeffs):
            if a:
                phase += frac_mul(a, vals[:, c])
        parts.append(np.sum(_e(phase)))
    return _fsum_complex(parts)


def _residue_counts(exp: ParametricExpansion, rp: RationalPoint, chunk: int) -> np.ndarray:
    """Number of ``x mod q`` with ``sum_c a_c w_c(x) = k (mod q)``, for each ``k``."""
    q = rp.q
    a = rp.vector(exp.index_set)
    counts = np.zeros(q, dtype=np.int64)
    for pts in iter_grid(exp.ms, 0, q, chunk):
        k = (exp.values_mod(pts, q) @ a) % q
        counts += np.bincount(k, minlength=q)
    return counts


def s_q(exp: ParametricExpansion, rp: RationalPoint, budget: Budget | None = None, chunk: int = 1 << 17) -> complex:
    """``S_q(a) = sum_{x mod q} e(F_0(x; a / q))`` via exact residues and a root-of-unity table."""
    budget = resolve(budget)
    budget.require("s_q", rp.q**exp.ms)
    counts = _residue_counts(exp, rp, chunk)
    table = roots_of_unity(rp.q)
    return _fsum_complex(counts * table)


# -- value histograms and all complete sums at once -----------------------------------


def _split_terms(form: Form, left: int) -> tuple[list[tuple[int, ...]], list[Form]]:
    """Group monomials by their exponent on the first ``left`` variables."""
    groups: dict[tuple[int, ...], dict[tuple[int, ...], int]] = {}
    for e, c in form.terms.items():
        groups.setdefault(e[:left], {})[e[left:]] = c
    keys = sorted(groups)
    return keys, [Form(form.num_vars - left, groups[k]) for k in keys]


def _monomials_mod(points: np.ndarray, exps: list[tuple[int, ...]], q: int) -> np.ndarray:
    out = np.ones((points.shape[0], len(exps)), dtype=np.int64)
    for col, ex in enumerate(exps):
        for k, e in enumerate(ex):
            for _ in range(e):
                out[:, col] = (out[:, col] * points[:, k]) % q
    return out


def value_histogram(exp: ParametricExpansion, q: int, budget: Budget | None = None, block: int = 1 << 22) -> np.ndarray:
    """``H[w] = #{x mod q : (Phi_j(x), D(x)) = w (mod q)}`` as an array of shape ``(q,) * (r+1)``.

    Each form is written as ``sum_e x_left^e * G_e(x_right)`` with the first
    column as ``x_left``; residues for every (left, right) pair then come from
    one matrix product, exact in float64 since entries stay below ``2**53``.
    """
    budget = resolve(budget)
    budget.require("value_histogram", q**exp.ms)
    size = q ** (exp.r + 1)
    if size > MAX_TABLE_ENTRIES:
        raise CircleKitError(f"a table of {size} complete sums is too large")
    left = exp.s if exp.m > 1 else exp.ms - 1
    right_dim = exp.ms - left
    lpts = grid_slice(left, 0, q, 0, q**left)
    rpts = grid_slice(right_dim, 0, q, 0, q**right_dim)
    factors = []
    for f in exp.system:
        keys, parts = _split_terms(f, left)
        lm = _monomials_mod(lpts, keys, q).astype(np.float64)
        rm = np.stack([g.evaluate_mod(rpts, q) for g in parts]).astype(np.float64)
        if len(keys) * (q - 1) ** 2 >= 2**53:
            raise CircleKitError("modulus too large for exact float products")
        factors.append((lm, rm))
    hist = np.zeros(size, dtype=np.int64)
    rows = max(1, block // max(1, rpts.shape[0]))
    for start, stop in chunked(lpts.shape[0], rows):
        flat = np.zeros((stop - start, rpts.shape[0]), dtype=np.int64)
        for lm, rm in factors:
            vals = np.rint(lm[start:stop] @ rm).astype(np.int64) % q
            flat = flat * q + vals
        hist += np.bincount(flat.ravel(), minlength=size)
    return hist.reshape((q,) * (exp.r + 1))


def complete_sum_table(exp: ParametricExpansion, q: int, budget: Budget | None = None) -> np.ndarray:
    """``S_q(a)`` for every ``a in (Z/q)^{r+1}``; entry ``[a_j..., a_0]``.

    ``S_q(a) = sum_w H[w] e(a . w / q)`` is a separable discrete Fourier
    transform of the value histogram, applied one axis at a time with the
    ``q x q`` root-of-unity matrix.
    """
    hist = value_histogram(exp, q, budget).astype(np.complex128)
    idx = np.arange(q)
    W = roots_of_unity(q)[np.outer(idx, idx) % q]
    out = hist
    for axis in range(out.ndim):
        out = np.moveaxis(np.tensordot(W, out, axes=([1], [axis])), 0, axis)
    return out


# -- box integrals and the major-arc approximation -------------------------------------------


def v_box(exp: ParametricExpansion, P: float, beta, spec: QuadratureSpec | None = None) -> QuadResult:
    """``v_P(beta) = int_{[-P, P]^{ms}} e(F_0(xi; beta)) dxi``."""
    return box_integrals(exp, float(P), [beta], spec)[0]


def nearest_offset(alpha: ArcPoint, rp: RationalPoint, index_set) -> np.ndarray:
    """``beta = alpha - a/q`` with each coordinate wrapped into ``[-1/2, 1/2)``."""
    beta = alpha.vector(index_set) - rp.vector(index_set) / rp.q
    return (beta + 0.5) % 1.0 - 0.5


@dataclass(frozen=True)
class MajorArcResidual:
    lhs: float
    rhs_scale: float
    t_value: complex
    s_value: complex
    v_value: QuadResult

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs_scale


def major_arc_residual(
    exp: ParametricExpansion,
    P: int,
    alpha: ArcPoint,
    rp: RationalPoint,
    spec: QuadratureSpec | None = None,
    budget: Budget | None = None,
) -> MajorArcResidual:
    """``|T_P(alpha) - q^{-ms} S_q(a) v_P(beta)|`` against ``P^{ms-1} q (sum_j |beta_j| P^d + |beta_0| P^{2m} + 1)``."""
    beta = nearest_offset(alpha, rp, exp.index_set)
    t = t_sum(exp, P, alpha, budget)
    s = s_q(exp, rp, budget)
    v = v_box(exp, P, beta, spec)
    lhs = abs(t - s * v.value / rp.q**exp.ms)
    rhs = P ** (exp.ms - 1) * rp.q * (np.abs(beta[:-1]).sum() * P**exp.d + abs(beta[-1]) * P ** (2 * exp.m) + 1)
    return MajorArcResidual(float(lhs), float(rhs), t, s, v)


# -- orthogonality counting oracle ---------------------------------------------------------


def dft_moduli(exp: ParametricExpansion, P: int, b: int, budget: Budget | None = None) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Distinct shifted value vectors on the box, their multiplicities and per-coordinate moduli."""
    budget = resolve(budget)
    budget.require("count_via_dft", (2 * P + 1) ** exp.ms)
    pts = grid_slice(exp.ms, -P, 2 * P + 1, 0, (2 * P + 1) ** exp.ms)
    vals = exp.values(pts)
    if vals.dtype == object:
        raise CircleKitError("box values exceed int64")
    vals[:, -1] -= b
    uniq, counts = np.unique(vals, axis=0, return_counts=True)
    moduli = [1 + 2 * int(np.abs(uniq[:, c]).max()) for c in range(uniq.shape[1])]
    return uniq, counts, moduli


def count_via_dft(exp: ParametricExpansion, P: int, b: int, budget: Budget | None = None, block: int = 1 << 22) -> int:
    """``#{x in box : Phi_j(x) = 0, D(x) = b}`` by summing ``T`` over every point ``a/Q``.

    Coordinate ``c`` uses ``Q_c = 1 + 2 max |w_c|`` so that ``w_c = 0`` is the
    only residue killed by none of the characters; the box sum at each
    ``a/Q`` is grouped over identical value vectors.
    """
    budget = resolve(budget)
    uniq, counts, moduli = dft_moduli(exp, P, b, budget)
    n_a = math.prod(moduli)
    budget.require("count_via_dft", n_a * uniq.shape[0])
    residues = [np.mod(uniq[:, c], q) for c, q in enumerate(moduli)]
    tables = [roots_of_unity(q) for q in moduli]
    *heads, q0 = moduli
    head_count = math.prod(heads)
    rows = max(1, block // (uniq.shape[0] * q0))
    weights = counts.astype(np.complex128)
    parts = []
    # characters in the last coordinate form one matrix, the others are walked in blocks
    last = tables[-1][np.outer(np.arange(q0), residues[-1]) % q0]
    for start, stop in chunked(head_count, rows):
        a_head = _mixed_radix(heads, start, stop)
        char = np.ones((stop - start, uniq.shape[0]), dtype=np.complex128)
        for c, q in enumerate(heads):
            char *= tables[c][np.outer(a_head[:, c], residues[c]) % q]
        sums = (char[:, None, :] * last[None, :, :]) @ weights
        parts.append(sums.sum())
    total = _fsum_complex(parts) / n_a
    nearest = round(total.real)
    if abs(total - nearest) > 1e-6:
        raise RoundingError(f"orthogonality sum {total} is not within 1e-6 of an integer")
    return int(nearest)


def _mixed_radix(radices: list[int], start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((stop - start, len(radices)), dtype=np.int64)
    for k in range(len(radices) - 1, -1, -1):
        out[:, k] = idx % radices[k]
        idx //= radices[k]
    return out
