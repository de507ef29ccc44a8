"""Rational approximation, arc families on the torus, pruning schedules and hypothesis arithmetic.

Every inequality that defines an arc is read with implicit constant 1. Arc
points are arrays whose last coordinate is ``alpha_0``; families that only
see ``alpha_J`` (``Md``, ``Md_dagger``) or only ``alpha_0`` (``M0``) ignore the rest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from circlekit.config import Budget, CircleKitError, resolve
from circlekit.forms import ParametricExpansion, d_forms_batch, rank_r
from circlekit.boxes import iter_grid
from circlekit.points import ArcPoint, RationalPoint

FAMILIES = ("M0", "M_theta_eta", "N", "Md", "Md_dagger", "M_d_gt")
REL_TOL = 1e-12


class PruningInfeasible(CircleKitError, ValueError):
    """A pruning schedule was requested under a violated precondition."""


# -- continued fractions ------------------------------------------------------------------


def convergents(alpha: float | Fraction) -> list[tuple[int, int]]:
    """All convergents ``(q, a)`` of the exact rational value of ``alpha``."""
    x = Fraction(alpha)
    out = []
    p_prev, p = 1, math.floor(x)
    q_prev, q = 0, 1
    out.append((q, p))
    frac = x - math.floor(x)
    while frac:
        x = 1 / frac
        a = math.floor(x)
        frac = x - a
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        out.append((q, p))
    return out


def rational_approx(alpha: float, Q: int) -> tuple[int, int]:
    """Reduced ``a/q`` with ``q <= Q`` minimising ``|q alpha - a|`` (largest convergent denominator ``<= Q``)."""
    if Q < 1:
        raise ValueError("Q must be at least 1")
    best = (1, round(alpha))
    for q, a in convergents(alpha):
        if q > Q:
            break
        best = (q, a)
    return best


def _torus_dist(x: np.ndarray) -> np.ndarray:
    return np.abs(x - np.rint(x))


# -- parameters ----------------------------------------------------------------------------


@dataclass(frozen=True)
class ArcParams:
    eta: float
    theta: float
    k: float
    l: float
    coupled: bool = True

    def __post_init__(self):
        for name in ("eta", "theta"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must lie in (0, 1]")
        if not (self.k > 0 and self.l > 0):
            raise ValueError("k and l must be positive")
        if self.coupled and abs(self.k * self.theta - self.l * self.eta) > REL_TOL * max(self.k * self.theta, self.l * self.eta):
            raise ValueError("coupled parameters need k * theta = l * eta")

    @classmethod
    def from_theta(cls, theta: float, k: float, l: float) -> "ArcParams":
        return cls(eta=k * theta / l, theta=theta, k=k, l=l, coupled=True)

    @classmethod
    def from_eta(cls, eta: float, k: float, l: float) -> "ArcParams":
        return cls(eta=eta, theta=l * eta / k, k=k, l=l, coupled=True)


def omega(params: ArcParams, m: int, d: int, r: int) -> float:
    """Width exponent of the homogenised arcs ``N``."""
    if d < 2 * m:
        return (r * (d - 1) + (2 * m - 1) * params.k / params.l) * params.theta
    return ((2 * m - 1) + 3 * (d - 1) * params.l / params.k) * params.eta


def volume_exponent(family: str, params: ArcParams, m: int, d: int, r: int) -> float:
    th, et = params.theta, params.eta
    return {
        "M0": -2 * m + 2 * (2 * m - 1) * et,
        "M_theta_eta": -2 * m - r * d + 2 * r * (d - 1) * th + (r + 2) * (2 * m - 1) * et,
        "N": -2 * m - r * d + (2 * r + 3) * omega(params, m, d, r),
        "Md": -r * d + 2 * r * (d - 1) * th,
        "Md_dagger": -r * d + (3 * r + 2) * (d - 1) * th,
        "M_d_gt": -r * d - 2 * m + (3 * r + 5) * (d - 1) * th + 2 * (2 * m - 1) * et,
    }[family]


# -- vectorised membership ----------------------------------------------------------------------


def _floor_pow(P: float, e: float) -> int:
    return max(0, math.floor(P**e * (1 + REL_TOL)))


def _within(dist: np.ndarray, bound) -> np.ndarray:
    return dist <= np.asarray(bound) * (1 + REL_TOL)


def _first_q(alpha: np.ndarray, Q: int, bound_at) -> tuple[np.ndarray, np.ndarray]:
    """Smallest ``q <= Q`` with ``||q alpha_c|| <= bound_at(q)`` for every column (0 when none)."""
    n = alpha.shape[0]
    found = np.zeros(n, dtype=np.int64)
    for q in range(1, Q + 1):
        todo = found == 0
        if not todo.any():
            break
        ok = np.all(_within(_torus_dist(q * alpha[todo]), bound_at(q)), axis=1)
        idx = np.nonzero(todo)[0][ok]
        found[idx] = q
    return found > 0, found


def _coordinatewise(alpha: np.ndarray, Q: int, bound: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-coordinate smallest ``q_c <= Q`` with ``||q_c alpha_c|| <= bound``."""
    n, c = alpha.shape
    found = np.zeros((n, c), dtype=np.int64)
    for q in range(1, Q + 1):
        hit = (found == 0) & _within(_torus_dist(q * alpha), bound)
        found[hit] = q
        if (found > 0).all():
            break
    return (found > 0).all(axis=1), found


def _dagger(alpha_j: np.ndarray, P: float, theta: float, d: int, Qmax: int | None = None):
    Q = _floor_pow(P, 2 * (d - 1) * theta) if Qmax is None else Qmax
    bound = P ** (-d + 3 * (d - 1) * theta)
    return _first_q(alpha_j, Q, lambda q: bound)


def members(points: np.ndarray, P: float, params: ArcParams, family: str, m: int, d: int) -> np.ndarray:
    """Membership of each row of ``points`` (``(n, r+1)``, last column ``alpha_0``)."""
    return _members(np.atleast_2d(np.asarray(points, dtype=np.float64)) % 1.0, P, params, family, m, d)[0]


def _members(pts: np.ndarray, P: float, params: ArcParams, family: str, m: int, d: int):
    if family not in FAMILIES:
        raise ValueError(f"unknown arc family {family!r}")
    r = pts.shape[1] - 1
    th, et = params.theta, params.eta
    a0 = pts[:, -1:]
    aj = pts[:, :-1]
    if family == "M0":
        Q = _floor_pow(P, (2 * m - 1) * et)
        bound = P ** (-2 * m + (2 * m - 1) * et)
        ok, q = _first_q(a0, Q, lambda q: bound)
        return ok, {"q0": q}
    if family == "Md":
        ok, qs = _coordinatewise(aj, _floor_pow(P, (d - 1) * th), P ** (-d + (d - 1) * th))
        return ok, {"qj": qs}
    if family == "Md_dagger":
        ok, q = _dagger(aj, P, th, d)
        return ok, {"q": q}
    if family == "N":
        w = omega(params, m, d, r)
        bounds = np.array([P ** (-d + w)] * r + [P ** (-2 * m + w)])
        ok, q = _first_q(pts, _floor_pow(P, w), lambda q: q * bounds)
        return ok, {"q": q}
    if family == "M_theta_eta":
        Q0 = _floor_pow(P, (2 * m - 1) * et)
        QJ = _floor_pow(P, (d - 1) * th)
        b0 = P ** (-2 * m + (2 * m - 1) * et)
        bj = P ** (-d + (d - 1) * th + (2 * m - 1) * et)
        ok = np.zeros(pts.shape[0], dtype=bool)
        q0s = np.zeros(pts.shape[0], dtype=np.int64)
        qjs = np.zeros((pts.shape[0], r), dtype=np.int64)
        for q0 in range(1, Q0 + 1):
            todo = ~ok
            x0 = q0 * a0[todo, 0]
            cand = _within(_torus_dist(x0), b0) & (np.gcd(np.rint(x0).astype(np.int64) % q0, q0) == 1)
            idx = np.nonzero(todo)[0][cand]
            if not idx.size:
                continue
            good, qj = _coordinatewise(q0 * aj[idx], QJ, bj)
            ok[idx[good]] = True
            q0s[idx[good]] = q0
            qjs[idx[good]] = qj[good]
        return ok, {"q0": q0s, "qj": qjs}
    # M_d_gt
    Q0 = _floor_pow(P, (2 * m - 1) * et)
    b0 = P ** (-2 * m + 3 * (d - 1) * th + (2 * m - 1) * et)
    Qt = _floor_pow(P, 2 * (d - 1) * th)
    bj = P ** (-d + 3 * (d - 1) * th)
    ok = np.zeros(pts.shape[0], dtype=bool)
    qts = np.zeros(pts.shape[0], dtype=np.int64)
    q0s = np.zeros(pts.shape[0], dtype=np.int64)
    for qt in range(1, Qt + 1):
        todo = np.nonzero(~ok)[0]
        if not todo.size:
            break
        cand = todo[np.all(_within(_torus_dist(qt * aj[todo]), bj), axis=1)]
        if not cand.size:
            continue
        good, q0 = _first_q(qt * a0[cand], Q0, lambda q: b0)
        ok[cand[good]] = True
        qts[cand[good]] = qt
        q0s[cand[good]] = q0[good]
    return ok, {"q": qts, "q0": q0s}


@dataclass(frozen=True)
class Membership:
    member: bool
    witness: RationalPoint | None
    denominators: dict = field(default_factory=dict)


def _nearest(q: int, x: float) -> int:
    return int(round(q * x)) % q


def _reduce(q: int, a0: int, a: dict) -> RationalPoint:
    g = q
    for v in [a0, *a.values()]:
        g = math.gcd(g, v)
    return RationalPoint(q // g, a0 // g, {j: v // g for j, v in a.items()})


def arc_membership(point: ArcPoint, P: float, params: ArcParams, family: str, m: int, d: int) -> Membership:
    """Whether ``point`` lies in ``family``; the witness is expressed over a common denominator."""
    index = list(point.alphas)
    vec = np.array([point.alphas[j] for j in index] + [point.alpha0]) % 1.0
    ok, info = _members(vec[None, :], P, params, family, m, d)
    if not ok[0]:
        return Membership(False, None)
    aj, a0 = vec[:-1], vec[-1]
    if family == "M0":
        q0 = int(info["q0"][0])
        return Membership(True, _reduce(q0, _nearest(q0, a0), {j: 0 for j in index}), {"q0": q0})
    if family in ("N", "Md_dagger"):
        q = int(info["q"][0])
        a = {j: _nearest(q, x) for j, x in zip(index, aj)}
        return Membership(True, _reduce(q, _nearest(q, a0) if family == "N" else 0, a), {"q": q})
    if family == "Md":
        qj = [int(v) for v in info["qj"][0]]
        q = math.lcm(*qj) if qj else 1
        a = {j: _nearest(qc, x) * (q // qc) for j, x, qc in zip(index, aj, qj)}
        return Membership(True, _reduce(q, 0, a), {"qj": qj})
    if family == "M_theta_eta":
        q0 = int(info["q0"][0])
        qj = [int(v) for v in info["qj"][0]]
        L = math.lcm(*qj) if qj else 1
        q = q0 * L
        a = {j: _nearest(q0 * qc, x) * (L // qc) for j, x, qc in zip(index, aj, qj)}
        return Membership(True, _reduce(q, _nearest(q0, a0) * L, a), {"q0": q0, "qj": qj})
    qt, q0 = int(info["q"][0]), int(info["q0"][0])
    q = qt * q0
    a = {j: _nearest(qt, x) * q0 for j, x in zip(index, aj)}
    return Membership(True, _reduce(q, _nearest(q, a0), a), {"q_tilde": qt, "q0": q0})


# -- Monte-Carlo volumes ----------------------------------------------------------------------


@dataclass(frozen=True)
class VolumeEstimate:
    family: str
    value: float
    ci_low: float
    ci_high: float
    bound_exponent: float
    bound: float
    n_samples: int

    @property
    def ratio(self) -> float:
        return self.value / self.bound


def family_dimension(family: str, r: int) -> int:
    return {"M0": 1, "Md": r, "Md_dagger": r}.get(family, r + 1)


def arc_volume_mc(
    family: str, P: float, params: ArcParams, m: int, d: int, n_samples: int = 10_000, seed: int = 0, chunk: int = 1 << 14
) -> VolumeEstimate:
    """Uniform sampling on the family's torus with a normal 95% interval."""
    if n_samples < 10_000:
        raise ValueError("at least 10^4 samples are required")
    r = rank_r(m, d)
    dim = family_dimension(family, r)
    hits = 0
    for task, start in enumerate(range(0, n_samples, chunk)):
        rng = np.random.default_rng(np.random.SeedSequence([seed, task]))
        u = rng.random((min(chunk, n_samples - start), dim))
        pts = np.zeros((u.shape[0], r + 1))
        if family == "M0":
            pts[:, -1] = u[:, 0]
        elif dim == r:
            pts[:, :-1] = u
        else:
            pts = u
        hits += int(members(pts, P, params, family, m, d).sum())
    p = hits / n_samples
    half = 1.96 * math.sqrt(p * (1 - p) / n_samples)
    e = volume_exponent(family, params, m, d, r)
    return VolumeEstimate(family, p, max(0.0, p - half), min(1.0, p + half), e, float(P) ** e, n_samples)


# -- pruning schedules ---------------------------------------------------------------------------

PRUNING_KINDS = ("eta_first", "theta_second", "theta_first", "eta_second")


@dataclass(frozen=True)
class PruningSchedule:
    kind: str
    values: list[float]
    gap_bound: float
    constraint: str

    def __len__(self) -> int:
        return len(self.values)


def _descend(start: float, end: float, gap_bound: float) -> list[float]:
    """Equal steps from ``start`` down to ``end``, each strictly below ``gap_bound``."""
    if start == end:
        return [start]
    steps = math.floor((start - end) / gap_bound) + 1
    return [start - (start - end) * i / steps for i in range(steps)] + [end]


def _require(ok: bool, label: str, detail: str) -> None:
    if not ok:
        raise PruningInfeasible(f"{label} violated: {detail}")


def pruning_schedule(kind: str, *, m: int, d: int, k: float = 1.0, l: float = 1.0, start=None, end: float) -> PruningSchedule:
    """Decreasing sequence ending at ``end`` whose gaps meet the kind's strict constraint.

    ``eta_first`` descends from 1 to ``eta_*`` with ``l * gap < (l - 2(2m-1)) eta_* - rd``;
    ``theta_second`` from ``theta_* = (l/k) eta_*`` to ``theta`` with
    ``k * gap < (k - 2r(d-1) - (r+2)(2m-1) k/l) theta``; ``theta_first`` from 1 to
    ``theta_*`` with ``k * gap < (k - 2r(d-1)) theta_* - 2m``; ``eta_second`` from
    ``eta_* = (k/l) theta_*`` to ``eta`` with ``l * gap < (l - (3r+5)(d-1) l/k - 2(2m-1)) eta``,
    after checking ``theta_* < d/((d-1)(r+3))``, ``(k - (3r+2)(d-1)) theta_* > 2m`` and
    ``(3(d-1) + k/l) theta_* <= 1``. For the second-step kinds ``start`` is the first-step endpoint.
    """
    r = rank_r(m, d)
    if kind == "eta_first":
        _require(l > 2 * m + r * d, "l_large", f"l = {l} <= 2m + rd = {2 * m + r * d}")
        _require(0 < end <= 1, "eta_range", f"eta_* = {end} outside (0, 1]")
        slack = (l - 2 * (2 * m - 1)) * end - r * d
        _require(slack > 0, "eta_star_admissible", f"(l - 2(2m-1)) eta_* - rd = {slack} <= 0")
        return PruningSchedule(kind, _descend(1.0, end, slack / l), slack / l, "l*(eta_{i-1}-eta_i) < (l-2(2m-1))*eta_* - r*d")
    if kind == "theta_second":
        _require(start is not None, "eta_star_given", "theta_second needs eta_* as start")
        theta_star = (l / k) * start
        _require((2 * m - 1 + l / k) * start <= 1, "eta_theta_fit", f"(2m-1 + l/k) eta_* = {(2 * m - 1 + l / k) * start} > 1")
        coeff = k - 2 * r * (d - 1) - (r + 2) * (2 * m - 1) * (k / l)
        _require(coeff > 0, "minor_arcs_balance", f"2r(d-1)/k + (r+2)(2m-1)/l = {1 - coeff / k} >= 1")
        _require(0 < end <= theta_star, "theta_range", f"theta = {end} outside (0, theta_*]")
        gap = coeff * end / k
        return PruningSchedule(kind, _descend(theta_star, end, gap), gap, "k*(theta_{i-1}-theta_i) < (k-2r(d-1)-(r+2)(2m-1)k/l)*theta")
    if kind == "theta_first":
        _require(k > d * r + 2 * m, "k_large", f"k = {k} <= dr + 2m = {d * r + 2 * m}")
        _require(0 < end <= 1, "theta_range", f"theta_* = {end} outside (0, 1]")
        slack = (k - 2 * r * (d - 1)) * end - 2 * m
        _require(slack > 0, "theta_star_admissible", f"(k - 2r(d-1)) theta_* - 2m = {slack} <= 0")
        return PruningSchedule(kind, _descend(1.0, end, slack / k), slack / k, "k*(theta_{i-1}-theta_i) < (k-2r(d-1))*theta_* - 2m")
    if kind == "eta_second":
        _require(start is not None, "theta_star_given", "eta_second needs theta_* as start")
        _require(0 < start < d / ((d - 1) * (r + 3)), "theta_small", f"theta_* = {start} >= d/((d-1)(r+3))")
        _require((k - (3 * r + 2) * (d - 1)) * start > 2 * m, "theta_star_large",
                 f"(k - (3r+2)(d-1)) theta_* = {(k - (3 * r + 2) * (d - 1)) * start} <= 2m")
        _require((3 * (d - 1) + k / l) * start <= 1, "theta_star_fit",
                 f"(3(d-1) + k/l) theta_* = {(3 * (d - 1) + k / l) * start} > 1")
        eta_star = (k / l) * start
        coeff = l - (3 * r + 5) * (d - 1) * (l / k) - 2 * (2 * m - 1)
        _require(coeff > 0, "pruned_volume", f"(3r+5)(d-1)/k + 2(2m-1)/l = {1 - coeff / l} >= 1")
        _require(0 < end <= eta_star, "eta_range", f"eta = {end} outside (0, eta_*]")
        gap = coeff * end / l
        return PruningSchedule(kind, _descend(eta_star, end, gap), gap, "l*(eta_{i-1}-eta_i) < (l-(3r+5)(d-1)l/k-2(2m-1))*eta")
    raise ValueError(f"unknown pruning kind {kind!r}")


# -- hypothesis arithmetic ------------------------------------------------------------------------


@dataclass(frozen=True)
class InequalityRecord:
    label: str
    formula: str
    lhs: Fraction
    rhs: Fraction
    satisfied: bool

    def as_dict(self) -> dict:
        return {"label": self.label, "formula": self.formula, "lhs": str(self.lhs), "rhs": str(self.rhs),
                "lhs_float": float(self.lhs), "rhs_float": float(self.rhs), "satisfied": self.satisfied}


@dataclass(frozen=True)
class HypothesisReport:
    s: int
    d: int
    m: int
    dim_sing: int
    r: int
    k: Fraction
    l: Fraction
    records: list[InequalityRecord]
    verdicts: dict[str, bool]
    theorem_records: dict[str, list[str]]
    excluded: bool
    notes: list[str]

    def record(self, label: str) -> InequalityRecord:
        return next(rec for rec in self.records if rec.label == label)

    def as_dict(self) -> dict:
        return {
            "inputs": {"s": self.s, "d": self.d, "m": self.m, "dim_sing": self.dim_sing},
            "r": self.r,
            "k": str(self.k),
            "l": str(self.l),
            "excluded_case": self.excluded,
            "records": [rec.as_dict() for rec in self.records],
            "verdicts": self.verdicts,
            "theorem_records": self.theorem_records,
            "notes": self.notes,
        }


def main_threshold(d: int, m: int) -> Fraction:
    """Size of ``s`` beyond which the smooth-form statement applies (``s`` must exceed it)."""
    r = rank_r(m, d)
    if d < 2 * m:
        return Fraction(2 ** (d - 1) * r * d + 2 ** (2 * m - 1) * (2 + r * d) * (2 * m - 1))
    if d > 2 * m:
        return max(
            Fraction(2 ** (d - 1) * (6 * m + 3 * r + 2) * (d - 1) + 2 ** (2 * m) * m),
            2 ** (d - 1) * (d - 1) * (3 * r + 2 + Fraction(2 * m * (r + 3), d)),
        )
    raise ValueError("d = 2m has no threshold")


def hypothesis_check(s: int, d: int, m: int, dim_sing: int = 0, k=None, l=None) -> HypothesisReport:
    """Evaluate every ``s``-dependent inequality exactly at ``k = (s - dim_sing)/2^{d-1}``, ``l = s/2^{2m-1}``.

    The two weight records are the suprema defining ``k`` and ``l``; every
    admissible smaller value satisfies them strictly, so they are reported as
    satisfied at the boundary.
    """
    if min(s, d, m) < 1 or dim_sing < 0:
        raise ValueError("s, d, m must be positive and dim_sing non-negative")
    r = rank_r(m, d)
    sigma = s - dim_sing
    k = Fraction(sigma, 2 ** (d - 1)) if k is None else Fraction(k)
    l = Fraction(s, 2 ** (2 * m - 1)) if l is None else Fraction(l)
    notes: list[str] = []
    excluded = d == 2 * m
    if excluded:
        notes.append("excluded case: d = 2m is not covered")
    recs: list[InequalityRecord] = []

    def add(label, formula, lhs, rhs, strict=True, rel="<"):
        lhs, rhs = Fraction(lhs), Fraction(rhs)
        ok = (lhs < rhs if strict else lhs <= rhs) if rel == "<" else (lhs > rhs if strict else lhs >= rhs)
        recs.append(InequalityRecord(label, formula, lhs, rhs, ok))

    add("l_weight", "s >= 2^(2m-1) * l", s, 2 ** (2 * m - 1) * l, strict=False, rel=">")
    add("k_weight", "s - dim_sing >= 2^(d-1) * k", sigma, 2 ** (d - 1) * k, strict=False, rel=">")
    add("l_large", "l > 2m + rd", l, 2 * m + r * d, rel=">")
    zero_k = k == 0
    inv_k = Fraction(0) if zero_k else 1 / k
    inv_l = 1 / l if l else Fraction(0)
    if zero_k or not l:
        notes.append("k or l is zero; ratio inequalities fail by convention")
    ratio = [
        ("minor_arcs_balance", "2r(d-1)/k + (r+2)(2m-1)/l < 1", 2 * r * (d - 1) * inv_k + (r + 2) * (2 * m - 1) * inv_l),
        ("pruning_compatibility", "rd/k + (2+rd)(2m-1)/l < 1", r * d * inv_k + (2 + r * d) * (2 * m - 1) * inv_l),
        ("series_convergence", "(2m-1)(r+2)/l + (d-1)(r+1)/k < 1", (2 * m - 1) * (r + 2) * inv_l + (d - 1) * (r + 1) * inv_k),
        ("integral_convergence", "(2m-1)(r+1)/l + (d-1)r/k < 1", (2 * m - 1) * (r + 1) * inv_l + (d - 1) * r * inv_k),
        ("pruned_volume", "(3r+5)(d-1)/k + 2(2m-1)/l < 1", (3 * r + 5) * (d - 1) * inv_k + 2 * (2 * m - 1) * inv_l),
        ("eta_compatibility", "2m/l + (6m+3r+2)(d-1)/k < 1", 2 * m * inv_l + (6 * m + 3 * r + 2) * (d - 1) * inv_k),
        ("series_convergence_high_degree", "2(2m-1)/l + (r+6)(d-1)/k < 1", 2 * (2 * m - 1) * inv_l + (r + 6) * (d - 1) * inv_k),
        ("integral_convergence_high_degree", "(2m-1)/l + (r+3)(d-1)/k < 1", (2 * m - 1) * inv_l + (r + 3) * (d - 1) * inv_k),
    ]
    for label, formula, lhs in ratio:
        recs.append(InequalityRecord(label, formula, lhs, Fraction(1), lhs < 1 and not zero_k and bool(l)))
    add("k_large", "k > dr + 2m", k, d * r + 2 * m, rel=">")
    add("theta_compatibility", "k > (3r+2)(d-1) + 2m(d-1)(r+3)/d", k, (3 * r + 2) * (d - 1) + Fraction(2 * m * (d - 1) * (r + 3), d), rel=">")
    if not excluded:
        add("main_threshold", "s > threshold(d, m)", s, main_threshold(d, m), rel=">")
    theorem_records = {
        "main": ["main_threshold"] if not excluded else [],
        "case_2m_gt_d": ["l_weight", "k_weight", "minor_arcs_balance", "pruning_compatibility"],
        "case_d_gt_2m": ["l_weight", "k_weight", "pruned_volume", "eta_compatibility", "theta_compatibility"],
    }
    by_label = {rec.label: rec for rec in recs}
    verdicts = {}
    for name, labels in theorem_records.items():
        ok = all(by_label[lbl].satisfied for lbl in labels)
        if name == "main":
            ok = ok and not excluded and dim_sing == 0
        elif name == "case_2m_gt_d":
            ok = ok and d < 2 * m
        else:
            ok = ok and d > 2 * m
        verdicts[name] = ok
    if dim_sing:
        notes.append("the smooth-form statement needs dim_sing = 0")
    return HypothesisReport(s, d, m, dim_sing, r, k, l, recs, verdicts, theorem_records, excluded, notes)


def smallest_s(d: int, m: int, theorem: str = "main", dim_sing: int = 0, s_max: int = 100_000) -> int:
    """First ``s`` for which ``theorem`` holds (linear scan)."""
    for s in range(dim_sing + 1, s_max + 1):
        if hypothesis_check(s, d, m, dim_sing).verdicts[theorem]:
            return s
    raise ValueError(f"no s <= {s_max} satisfies {theorem}")


# -- Weyl harness and the singular-locus count ------------------------------------------------------


@dataclass(frozen=True)
class WeylRow:
    P: int
    minor_points: int
    max_abs: float
    decay_exponent: float
    ratio: float
    trivial: float


def weyl_harness(
    exp: ParametricExpansion,
    P_list: Sequence[int],
    params: ArcParams,
    grid_points: np.ndarray,
    budget: Budget | None = None,
) -> list[WeylRow]:
    """``max |T_P| / P^{ms - k theta}`` over the grid points that avoid the major arcs."""
    from circlekit.expsum import t_sum

    family = "M_theta_eta" if exp.d < 2 * exp.m else "M_d_gt"
    decay = params.k * params.theta
    rows = []
    for P in P_list:
        major = members(grid_points, P, params, family, exp.m, exp.d)
        minor = np.asarray(grid_points)[~major]
        vals = [abs(t_sum(exp, P, ArcPoint.from_vector(exp.index_set, pt), budget)) for pt in minor]
        mx = max(vals) if vals else 0.0
        rows.append(WeylRow(P, len(vals), mx, decay, mx / float(P) ** (exp.ms - decay), float(2 * P + 1) ** exp.ms))
    return rows


def dn_zero_count(m: int, s: int, H: int, budget: Budget | None = None, chunk: int = 1 << 16) -> int:
    """``#{(h_1..h_{2m-1}) in [-H, H]^{(2m-1)s} : d_n(h) = 0 for every n}``."""
    budget = resolve(budget)
    dim = (2 * m - 1) * s
    budget.require("dn_zero_count", (2 * H + 1) ** dim)
    total = 0
    for pts in iter_grid(dim, -H, 2 * H + 1, chunk):
        hs = pts.reshape(-1, 2 * m - 1, s)
        total += int(np.count_nonzero(np.all(d_forms_batch(hs) == 0, axis=1)))
    return total


def dn_growth_exponent(m: int, s: int, Hs: Sequence[int], budget: Budget | None = None) -> tuple[list[int], float]:
    """Counts for each ``H`` and the least-squares slope of ``log count`` against ``log H``."""
    counts = [dn_zero_count(m, s, H, budget) for H in Hs]
    x = np.log(np.asarray(Hs, dtype=float))
    y = np.log(np.asarray(counts, dtype=float))
    slope = float(np.polyfit(x, y, 1)[0])
    return counts, slope


def sample_inside(family: str, P: float, params: ArcParams, m: int, d: int, n: int, seed: int = 0) -> np.ndarray:
    """Random points of ``M_theta_eta`` or ``Md`` built from random admissible witnesses."""
    if family not in ("M_theta_eta", "Md"):
        raise ValueError("construction available for M_theta_eta and Md only")
    rng = np.random.default_rng(seed)
    r = rank_r(m, d)
    th, et = params.theta, params.eta
    QJ = max(1, _floor_pow(P, (d - 1) * th))
    out = np.zeros((n, r + 1))

    def coprime(q: int, top: int) -> int:
        while True:
            a = int(rng.integers(0, top))
            if math.gcd(a, q) == 1:
                return a

    for i in range(n):
        if family == "Md":
            bound = P ** (-d + (d - 1) * th)
            for c in range(r):
                q = int(rng.integers(1, QJ + 1))
                out[i, c] = (coprime(q, q) + rng.uniform(-1, 1) * bound) / q
            continue
        Q0 = max(1, _floor_pow(P, (2 * m - 1) * et))
        q0 = int(rng.integers(1, Q0 + 1))
        out[i, -1] = (coprime(q0, q0) + rng.uniform(-1, 1) * P ** (-2 * m + (2 * m - 1) * et)) / q0
        bound = P ** (-d + (d - 1) * th + (2 * m - 1) * et)
        for c in range(r):
            q = int(rng.integers(1, QJ + 1))
            out[i, c] = (coprime(q, q0 * q) + rng.uniform(-1, 1) * bound) / (q0 * q)
    return out % 1.0
