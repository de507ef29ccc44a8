"""p-adic densities, truncated singular series and complete-sum bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from circlekit.boxes import cross, grid
from circlekit.config import Budget, CircleKitError, map_ordered, resolve
from circlekit.expsum import complete_sum_table, roots_of_unity
from circlekit.forms import Form, ParametricExpansion
from circlekit.lattice import stage_forms

DUAL_TOLERANCE = 1e-6
STABLE_TOLERANCE = 1e-6


class DualFormulaMismatch(CircleKitError):
    """Character-sum and congruence-count densities disagree."""


class ImaginaryResidue(CircleKitError):
    """A quantity that must be real came out with a sizeable imaginary part."""


def is_prime(n: int) -> bool:
    return n >= 2 and all(n % k for k in range(2, math.isqrt(n) + 1))


# -- exact congruence counts ------------------------------------------------------------


@dataclass(frozen=True)
class _ModTask:
    first: np.ndarray
    cands: np.ndarray
    stages: list[list[Form]]
    disc: Form
    modulus: int
    b: int
    chunk: int


def _count_extensions(task: _ModTask) -> int:
    M = task.modulus
    partial = task.first
    rows = max(1, task.chunk // max(1, task.cands.shape[0]))
    total = 0
    last = len(task.stages)
    for k in range(2, last + 1):
        pieces = []
        for start in range(0, partial.shape[0], rows):
            block = cross(partial[start:start + rows], task.cands)
            keep = np.ones(block.shape[0], dtype=bool)
            for f in task.stages[k - 1]:
                keep &= f.evaluate_mod(block, M) == 0
            block = block[keep]
            if k == last:
                total += int(np.count_nonzero(task.disc.evaluate_mod(block, M) == task.b % M))
            else:
                pieces.append(block)
        if k < last:
            partial = np.concatenate(pieces) if pieces else partial[:0]
    if last == 1:
        total = int(np.count_nonzero(task.disc.evaluate_mod(partial, M) == task.b % M))
    return total


def congruence_count(exp: ParametricExpansion, modulus: int, b: int, budget: Budget | None = None, chunk: int = 1 << 20) -> int:
    """``#{x mod M : Phi_j(x) = 0 for all j, D(x) = b (mod M)}``.

    Columns are fixed one at a time, each pre-filtered by ``F(x_c) = 0 (mod M)``,
    so only partial tuples that can still extend are kept.
    """
    if modulus < 1:
        raise ValueError("modulus must be positive")
    budget = resolve(budget)
    budget.require("congruence_count", modulus**exp.s)
    pts = grid(exp.s, 0, modulus)
    cands = pts[exp.form.evaluate_mod(pts, modulus) == 0]
    budget.require("congruence_count", modulus**exp.s + cands.shape[0] ** exp.m)
    stages = stage_forms(exp)
    first = cands
    for f in stages[0]:
        first = first[f.evaluate_mod(first, modulus) == 0]
    disc = exp.disc
    groups = [first[first[:, 0] == v] for v in range(modulus)] if budget.workers > 1 else [first]
    tasks = [_ModTask(g, cands, stages, disc, modulus, b, chunk) for g in groups if g.shape[0]]
    return sum(map_ordered(_count_extensions, tasks, budget.workers))


# -- p-adic densities -------------------------------------------------------------------


@dataclass(frozen=True)
class ChiP:
    p: int
    i: int
    character: float
    count: float
    exact: Fraction

    @property
    def value(self) -> float:
        return self.count


def character_density(exp: ParametricExpansion, q: int, b: int, budget: Budget | None = None) -> complex:
    """``q^{-ms} sum_a S_q(a) e(-a_0 b / q)`` over every ``a mod q``."""
    table = complete_sum_table(exp, q, budget)
    twist = roots_of_unity(q)[(-np.arange(q) * b) % q]
    return complex((table @ twist).sum()) / q**exp.ms


def chi_p_truncated(exp: ParametricExpansion, p: int, i: int, b: int, budget: Budget | None = None) -> ChiP:
    """Both forms of ``chi_p^{(i)}(b)``: character sum and normalised congruence count.

    Raises ``DualFormulaMismatch`` when they differ by ``1e-6`` or more.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if i < 0:
        raise ValueError("depth must be non-negative")
    q = p**i
    exact = Fraction(congruence_count(exp, q, b, budget)) / Fraction(q) ** (exp.ms - exp.r - 1)
    char = character_density(exp, q, b, budget)
    if abs(char.imag) >= DUAL_TOLERANCE or abs(char.real - float(exact)) >= DUAL_TOLERANCE:
        raise DualFormulaMismatch(f"p={p}, i={i}: character form {char} vs count form {float(exact)}")
    return ChiP(p, i, char.real, float(exact), exact)


@dataclass(frozen=True)
class LocalDensitySeries:
    p: int
    values: list[tuple[int, float]]
    stabilized: bool
    tolerance: float = STABLE_TOLERANCE

    @property
    def last(self) -> float:
        return self.values[-1][1]


def local_density_series(
    exp: ParametricExpansion, p: int, b: int, max_depth: int, budget: Budget | None = None, tolerance: float = STABLE_TOLERANCE
) -> LocalDensitySeries:
    """``chi_p^{(i)}`` for ``i = 1..max_depth`` from exact counts, stopping once two successive steps move less than ``tolerance``."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    values: list[tuple[int, float]] = []
    quiet = 0
    for i in range(1, max_depth + 1):
        q = p**i
        chi = Fraction(congruence_count(exp, q, b, budget)) / Fraction(q) ** (exp.ms - exp.r - 1)
        if values and abs(float(chi) - values[-1][1]) < tolerance:
            quiet += 1
        else:
            quiet = 0
        values.append((i, float(chi)))
        if quiet >= 2:
            return LocalDensitySeries(p, values, True, tolerance)
    return LocalDensitySeries(p, values, False, tolerance)


def euler_product(exp: ParametricExpansion, primes, b: int, max_depth: int, budget: Budget | None = None) -> tuple[float, list[LocalDensitySeries]]:
    series = [local_density_series(exp, p, b, max_depth, budget) for p in primes]
    return math.prod(s.last for s in series), series


# -- singular series ----------------------------------------------------------------------


def reduced_mask(q: int, ndim: int) -> np.ndarray:
    """Boolean array over ``(Z/q)^ndim``: joint gcd of all entries with ``q`` equals 1."""
    g = np.full((q,) * ndim, q, dtype=np.int64)
    idx = np.arange(q)
    for axis in range(ndim):
        shape = [1] * ndim
        shape[axis] = q
        g = np.gcd(g, idx.reshape(shape))
    return g == 1


def series_term(exp: ParametricExpansion, q: int, b: int, budget: Budget | None = None) -> complex:
    """``A(q) = q^{-ms} sum_{a mod q, (a, q) = 1} S_q(a) e(-a_0 b / q)``."""
    table = complete_sum_table(exp, q, budget)
    twist = roots_of_unity(q)[(-np.arange(q) * b) % q]
    mask = reduced_mask(q, exp.r + 1)
    return complex(((table * twist) * mask).sum()) / q**exp.ms


@dataclass(frozen=True)
class SeriesResult:
    value: float
    imag: float
    terms: list[tuple[int, float]]


def singular_series_partial(exp: ParametricExpansion, Q: int, b: int, budget: Budget | None = None) -> SeriesResult:
    """``sum_{q <= Q} A(q)``; the imaginary part must vanish to ``1e-6``."""
    if Q < 1:
        raise ValueError("Q must be positive")
    terms = [(q, series_term(exp, q, b, budget)) for q in range(1, Q + 1)]
    total = complex(math.fsum(t.real for _, t in terms), math.fsum(t.imag for _, t in terms))
    if abs(total.imag) >= DUAL_TOLERANCE:
        raise ImaginaryResidue(f"partial series has imaginary part {total.imag}")
    return SeriesResult(total.real, total.imag, [(q, t.real) for q, t in terms])


# -- bounds for complete sums -------------------------------------------------------------


@dataclass(frozen=True)
class SqBoundRow:
    q: int
    a: tuple[int, ...]
    value: float
    first_bound: float
    second_bound: float

    @property
    def ratio(self) -> float:
        return self.value / min(self.first_bound, self.second_bound)


def sq_bounds(exp: ParametricExpansion, q: int, a: tuple[int, ...], k: float, l: float) -> tuple[float, float]:
    """The two envelopes for ``|q^{-ms} S_q(a)|`` at implicit constant 1; ``a`` ends with ``a_0``."""
    m, d = exp.m, exp.d
    if d == 2 * m:
        raise ValueError("d = 2m is excluded")
    if d < 2 * m:
        first = (q / math.gcd(q, a[-1])) ** (-l / (2 * m - 1))
        second = q ** (-1.0 / ((2 * m - 1) / l + (d - 1) / k))
    else:
        g = q
        for v in a[:-1]:
            g = math.gcd(g, v)
        first = (q / g) ** (-k / (d - 1))
        second = q ** (-1.0 / (3 * (d - 1) / k + (2 * m - 1) / l))
    return first, second


def sq_bound_harness(exp: ParametricExpansion, q_max: int, k: float, l: float, budget: Budget | None = None) -> list[SqBoundRow]:
    rows = []
    for q in range(1, q_max + 1):
        table = complete_sum_table(exp, q, budget)
        mask = reduced_mask(q, exp.r + 1)
        for a in zip(*np.nonzero(mask)):
            a = tuple(int(v) for v in a)
            first, second = sq_bounds(exp, q, a, k, l)
            rows.append(SqBoundRow(q, a, abs(table[a]) / q**exp.ms, first, second))
    return rows
