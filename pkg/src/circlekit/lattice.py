"""Box enumeration of solutions, Gram discriminants, rank and saturation."""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence, TextIO

import numpy as np

from circlekit.boxes import cross, grid
from circlekit.config import Budget, CircleKitError, map_ordered, resolve
from circlekit.forms import Form, ParametricExpansion, gram_disc, unflatten

CSV_HEADER = ["entries", "disc", "rank", "sat_index", "primitive"]


class RankDeficientError(CircleKitError, ValueError):
    """Saturation is only defined for matrices of full column rank."""


@dataclass(frozen=True)
class SolutionRecord:
    matrix: tuple[tuple[int, ...], ...]  # s rows, m columns
    disc_value: int
    rank: int
    saturation_index: int | None
    primitive: bool | None

    @property
    def flat(self) -> tuple[int, ...]:
        s, m = len(self.matrix), len(self.matrix[0])
        return tuple(self.matrix[n][i] for i in range(m) for n in range(s))

    def csv_row(self) -> list[str]:
        return [
            ",".join(map(str, self.flat)),
            str(self.disc_value),
            str(self.rank),
            "" if self.saturation_index is None else str(self.saturation_index),
            "" if self.primitive is None else str(self.primitive).lower(),
        ]


# -- exact linear algebra -----------------------------------------------------------


def _as_rows(x) -> list[list[int]]:
    arr = np.asarray(x, dtype=object)
    if arr.ndim != 2:
        raise ValueError("expected a 2-D integer matrix")
    return [[int(v) for v in row] for row in arr]


def rank_of(x) -> int:
    """Rank over the rationals by fraction-free elimination."""
    a = _as_rows(x)
    rows, cols = len(a), len(a[0]) if a else 0
    rank = 0
    prev = 1
    for c in range(cols):
        pivot = next((i for i in range(rank, rows) if a[i][c] != 0), None)
        if pivot is None:
            continue
        a[rank], a[pivot] = a[pivot], a[rank]
        for i in range(rank + 1, rows):
            for j in range(c + 1, cols):
                a[i][j] = (a[i][j] * a[rank][c] - a[i][c] * a[rank][j]) // prev
            a[i][c] = 0
        prev = a[rank][c]
        rank += 1
        if rank == rows:
            break
    return rank


def smith_normal_form(x) -> tuple[list[int], list[list[int]]]:
    """Elementary divisors of an integer matrix and the inverse left transform.

    Returns ``(divisors, left_inv)`` with ``x = left_inv @ S @ W`` for the
    Smith form ``S = diag(divisors)`` and some unimodular ``W``; ``left_inv``
    is unimodular ``s x s``. Zero divisors are kept (one per min(s, m) slot).
    """
    a = _as_rows(x)
    s, m = len(a), len(a[0])
    linv = [[int(i == j) for j in range(s)] for i in range(s)]

    def row_add(dst: int, src: int, c: int) -> None:
        # row_dst += c * row_src; left_inv absorbs the inverse operation
        a[dst] = [u + c * v for u, v in zip(a[dst], a[src])]
        for row in linv:
            row[src] -= c * row[dst]

    def row_swap(i: int, j: int) -> None:
        a[i], a[j] = a[j], a[i]
        for row in linv:
            row[i], row[j] = row[j], row[i]

    def col_add(dst: int, src: int, c: int) -> None:
        for row in a:
            row[dst] += c * row[src]

    def col_swap(i: int, j: int) -> None:
        for row in a:
            row[i], row[j] = row[j], row[i]

    divisors = []
    for t in range(min(s, m)):
        while True:
            nonzero = [(abs(a[i][j]), i, j) for i in range(t, s) for j in range(t, m) if a[i][j]]
            if not nonzero:
                divisors.extend([0] * (min(s, m) - t))
                return divisors, linv
            _, pi, pj = min(nonzero)
            row_swap(t, pi)
            col_swap(t, pj)
            done = True
            for i in range(t + 1, s):
                if a[i][t]:
                    row_add(i, t, -(a[i][t] // a[t][t]))
                    if a[i][t]:
                        done = False
            for j in range(t + 1, m):
                if a[t][j]:
                    col_add(j, t, -(a[t][j] // a[t][t]))
                    if a[t][j]:
                        done = False
            if not done:
                continue
            bad = next((i for i in range(t + 1, s) for j in range(t + 1, m) if a[i][j] % a[t][t]), None)
            if bad is not None:
                row_add(t, bad, 1)
                continue
            if a[t][t] < 0:
                a[t] = [-v for v in a[t]]
                for row in linv:
                    row[t] = -row[t]
            divisors.append(a[t][t])
            break
    return divisors, linv


def saturation_index(x) -> int:
    """Index of the lattice spanned by the columns inside its saturation ``(QL) ∩ Z^s``."""
    rows = _as_rows(x)
    m = len(rows[0])
    if rank_of(rows) < m:
        raise RankDeficientError("saturation index needs linearly independent columns")
    divisors, _ = smith_normal_form(rows)
    out = 1
    for dv in divisors:
        out *= dv
    return out


def saturation_basis(x) -> list[list[int]]:
    """An ``s x m`` matrix whose columns form a basis of the saturation."""
    rows = _as_rows(x)
    m = len(rows[0])
    if rank_of(rows) < m:
        raise RankDeficientError("saturation needs linearly independent columns")
    _, linv = smith_normal_form(rows)
    return [row[:m] for row in linv]


def make_record(matrix) -> SolutionRecord:
    rows = _as_rows(matrix)
    m = len(rows[0])
    disc = gram_disc(rows)
    rank = rank_of(rows)
    sat = saturation_index(rows) if rank == m else None
    return SolutionRecord(
        matrix=tuple(tuple(r) for r in rows),
        disc_value=disc,
        rank=rank,
        saturation_index=sat,
        primitive=None if sat is None else sat == 1,
    )


# -- enumeration --------------------------------------------------------------------------


def _restrict(form: Form, nvars: int) -> Form:
    return Form(nvars, {e[:nvars]: c for e, c in form.terms.items()})


def _column_candidates(exp: ParametricExpansion, values: np.ndarray) -> np.ndarray:
    """Vectors over ``values`` (lex order) on ``F = 0``; every column of a solution is one."""
    pts = np.asarray(values, dtype=np.int64)[grid(exp.s, 0, len(values))]
    keep = exp.form.evaluate_batch(pts) == 0
    return pts[keep]


def stage_forms(exp: ParametricExpansion) -> list[list[Form]]:
    """For stage k (columns 1..k fixed): the ``Phi_j`` with ``max(j) == k`` restricted to ``ks`` variables."""
    stages = []
    for k in range(1, exp.m + 1):
        stages.append([_restrict(exp.phi_map[j], k * exp.s) for j in exp.index_set if max(j) == k])
    return stages


@dataclass(frozen=True)
class _Task:
    exp: ParametricExpansion
    first: np.ndarray
    cands: np.ndarray
    disc_filter: int | None
    chunk: int


def _extend(task: _Task) -> np.ndarray:
    exp = task.exp
    stages = stage_forms(exp)
    partial = task.first
    rows = max(1, task.chunk // max(1, task.cands.shape[0]))
    for k in range(2, exp.m + 1):
        pieces = []
        for start in range(0, partial.shape[0], rows):
            block = cross(partial[start:start + rows], task.cands)
            keep = np.ones(block.shape[0], dtype=bool)
            for f in stages[k - 1]:
                keep &= f.evaluate_batch(block) == 0
            pieces.append(block[keep])
        partial = np.concatenate(pieces) if pieces else np.empty((0, k * exp.s), dtype=np.int64)
    if task.disc_filter is not None and partial.shape[0]:
        partial = partial[exp.disc.evaluate_batch(partial) == task.disc_filter]
    return partial


def solution_array(
    exp: ParametricExpansion,
    P: int,
    disc_filter: int | None = None,
    budget: Budget | None = None,
    chunk: int = 1 << 20,
) -> np.ndarray:
    """Flat solutions in ``[-P, P]^{ms}`` as an ``(N, ms)`` array in lexicographic order.

    Columns are fixed left to right; after column ``k`` every ``Phi_j`` with
    ``max(j) == k`` is checked, and each column is pre-filtered by ``F = 0``
    (``Phi_{(c,...,c)} = F(x_c)``). ``D`` is checked on complete tuples.
    """
    if P < 0:
        raise ValueError("P must be non-negative")
    budget = resolve(budget)
    cands = _column_candidates(exp, np.arange(-P, P + 1))
    n = cands.shape[0]
    budget.require("enumerate_solutions", (2 * P + 1) ** exp.s + n**exp.m)
    stages = stage_forms(exp)
    first = cands
    for f in stages[0]:
        first = first[f.evaluate_batch(first) == 0] if first.shape[0] else first
    # partition by the leading entry of column 1; order restored by concatenation
    groups = [first[first[:, 0] == v] for v in range(-P, P + 1)] if budget.workers > 1 else [first]
    tasks = [_Task(exp, g, cands, disc_filter, chunk) for g in groups if g.shape[0]]
    parts = map_ordered(_extend, tasks, budget.workers)
    if not parts:
        return np.empty((0, exp.ms), dtype=np.int64)
    return np.concatenate(parts)


def enumerate_solutions(
    exp: ParametricExpansion,
    P: int,
    disc_filter: int | None = None,
    budget: Budget | None = None,
) -> Iterator[SolutionRecord]:
    for flat in solution_array(exp, P, disc_filter, budget):
        yield make_record(unflatten(flat, exp.s))


def stream_solutions(
    exp: ParametricExpansion,
    P: int,
    callback: Callable[[SolutionRecord], None],
    disc_filter: int | None = None,
    budget: Budget | None = None,
) -> int:
    n = 0
    for rec in enumerate_solutions(exp, P, disc_filter, budget):
        callback(rec)
        n += 1
    return n


def count_Nm(exp: ParametricExpansion, P: int, budget: Budget | None = None) -> int:
    return int(solution_array(exp, P, None, budget).shape[0])


def count_Nm_b(exp: ParametricExpansion, P: int, b: int, budget: Budget | None = None) -> int:
    return int(solution_array(exp, P, b, budget).shape[0])


def disc_distribution(exp: ParametricExpansion, P: int, budget: Budget | None = None) -> dict[int, int]:
    """``b -> count_Nm_b(P, b)`` over every realised discriminant value."""
    sols = solution_array(exp, P, None, budget)
    if not sols.shape[0]:
        return {}
    return dict(sorted(Counter(int(v) for v in exp.disc.evaluate_batch(sols)).items()))


def write_solutions_csv(records: Sequence[SolutionRecord] | Iterator[SolutionRecord], out: TextIO) -> int:
    writer = csv.writer(out, delimiter=";", lineterminator="\n")
    writer.writerow(CSV_HEADER)
    n = 0
    for rec in records:
        writer.writerow(rec.csv_row())
        n += 1
    return n


def solutions_csv(records) -> str:
    buf = io.StringIO()
    write_solutions_csv(records, buf)
    return buf.getvalue()
