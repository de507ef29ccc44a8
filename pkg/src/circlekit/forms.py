"""Exact polynomial and multilinear algebra.

A tuple ``(x_1, ..., x_m)`` of vectors in ``Z^s`` is flattened so that entry
``n`` of column ``i`` (both 1-based) sits at flat position ``(i-1)*s + n - 1``.
Every ``ms``-variable polynomial in this package (the coefficient forms
``Phi_j`` and the Gram discriminant ``D``) uses that layout. An ``s x m``
integer array ``X`` is flattened with ``X.T.reshape(-1)``.
"""

from __future__ import annotations

import itertools
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from circlekit.config import CircleKitError

Exponent = tuple[int, ...]
MultiIndex = tuple[int, ...]

_INT64_SAFE = 2**62


class FormSyntaxError(CircleKitError, ValueError):
    """Raised by :func:`parse_form`; ``position`` is a 0-based offset into the text."""

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        pointer = f"\n  {text}\n  {' ' * position}^" if text else ""
        super().__init__(f"{message} at position {position}{pointer}")


class Form:
    """Sparse multivariate polynomial with integer coefficients.

    ``terms`` maps exponent tuples (length ``num_vars``) to non-zero integers.
    Instances are treated as immutable.
    """

    __slots__ = ("num_vars", "terms", "degree")

    def __init__(self, num_vars: int, terms: Mapping[Exponent, int] | Iterable[tuple[Exponent, int]] = ()):
        if num_vars < 1:
            raise ValueError("num_vars must be positive")
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean: dict[Exponent, int] = {}
        for exp, coeff in items:
            exp = tuple(int(e) for e in exp)
            if len(exp) != num_vars or any(e < 0 for e in exp):
                raise ValueError(f"bad exponent vector {exp} for {num_vars} variables")
            if isinstance(coeff, Fraction):
                if coeff.denominator != 1:
                    raise ValueError(f"non-integer coefficient {coeff}")
                coeff = coeff.numerator
            if int(coeff) != coeff:
                raise ValueError(f"non-integer coefficient {coeff}")
            total = clean.get(exp, 0) + int(coeff)
            if total:
                clean[exp] = total
            else:
                clean.pop(exp, None)
        self.num_vars = num_vars
        self.terms: dict[Exponent, int] = dict(sorted(clean.items(), reverse=True))
        self.degree = max((sum(e) for e in self.terms), default=0)

    # -- construction helpers -------------------------------------------------

    @classmethod
    def variable(cls, num_vars: int, index: int) -> "Form":
        """The linear form ``x_{index+1}`` (``index`` is 0-based)."""
        exp = [0] * num_vars
        exp[index] = 1
        return cls(num_vars, {tuple(exp): 1})

    @classmethod
    def constant(cls, num_vars: int, value: int) -> "Form":
        return cls(num_vars, {(0,) * num_vars: value} if value else {})

    # -- structure --------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def support(self) -> set[int]:
        """0-based indices of the variables that occur."""
        return {k for e in self.terms for k, ek in enumerate(e) if ek}

    def max_abs_coefficient(self) -> int:
        return max((abs(c) for c in self.terms.values()), default=0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Form):
            return NotImplemented
        return self.num_vars == other.num_vars and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.num_vars, tuple(self.terms.items())))

    def __repr__(self) -> str:
        return f"Form({self.num_vars}, {str(self)!r})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for exp, coeff in self.terms.items():
            factors = [f"x{k + 1}" if e == 1 else f"x{k + 1}^{e}" for k, e in enumerate(exp) if e]
            mag = abs(coeff)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = f"{mag}*" + "*".join(factors)
            sign = "-" if coeff < 0 else "+"
            pieces.append((sign, body))
        first_sign, first = pieces[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out

    # -- arithmetic ---------------------------------------------------------------

    def _check(self, other: "Form") -> None:
        if other.num_vars != self.num_vars:
            raise ValueError("forms live in different numbers of variables")

    def __add__(self, other: "Form | int") -> "Form":
        if isinstance(other, int):
            other = Form.constant(self.num_vars, other)
        self._check(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0) + c
        return Form(self.num_vars, terms)

    __radd__ = __add__

    def __neg__(self) -> "Form":
        return Form(self.num_vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "Form | int") -> "Form":
        return self + (-other)

    def __rsub__(self, other: int) -> "Form":
        return (-self) + other

    def __mul__(self, other: "Form | int") -> "Form":
        if isinstance(other, int):
            return Form(self.num_vars, {e: c * other for e, c in self.terms.items()})
        self._check(other)
        terms: dict[Exponent, int] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0) + c1 * c2
        return Form(self.num_vars, terms)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Form":
        if n < 0:
            raise ValueError("negative power")
        result = Form.constant(self.num_vars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def substitute(self, images: Sequence["Form"]) -> "Form":
        """Replace variable ``k`` by ``images[k]`` (all images share one ring)."""
        if len(images) != self.num_vars:
            raise ValueError("need one image per variable")
        nv = images[0].num_vars
        powers: dict[tuple[int, int], Form] = {}
        total = Form(nv)
        for exp, coeff in self.terms.items():
            term = Form.constant(nv, coeff)
            for k, e in enumerate(exp):
                if e:
                    key = (k, e)
                    if key not in powers:
                        powers[key] = images[k] ** e
                    term = term * powers[key]
            total = total + term
        return total

    # -- evaluation -----------------------------------------------------------------

    def __call__(self, point):
        """Evaluate at one point (exact for ints/Fractions) or at a batch.

        A 2-D array of shape ``(N, num_vars)`` is evaluated row-wise and an
        array of length ``N`` is returned; integer batches stay exact (int64
        when provably safe, Python ints otherwise).
        """
        if isinstance(point, np.ndarray) and point.ndim == 2:
            return self.evaluate_batch(point)
        values = list(point)
        if len(values) != self.num_vars:
            raise ValueError(f"expected {self.num_vars} coordinates, got {len(values)}")
        values = [int(v) if isinstance(v, np.integer) else v for v in values]
        total = 0
        for exp, coeff in self.terms.items():
            term = coeff
            for v, e in zip(values, exp):
                if e:
                    term *= v**e
            total += term
        return total

    def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points)
        if pts.ndim != 2 or pts.shape[1] != self.num_vars:
            raise ValueError(f"expected shape (N, {self.num_vars}), got {pts.shape}")
        if pts.dtype.kind in "iu":
            maxabs = int(np.abs(pts).max()) if pts.size else 0
            bound = sum(abs(c) for c in self.terms.values()) * max(1, maxabs) ** self.degree
            work = pts.astype(np.int64) if bound < _INT64_SAFE else pts.astype(object)
        elif pts.dtype == object:
            work = pts
        else:
            work = pts.astype(np.float64)
        out = np.zeros(pts.shape[0], dtype=work.dtype)
        cache: dict[tuple[int, int], np.ndarray] = {}
        for exp, coeff in self.terms.items():
            term = None
            for k, e in enumerate(exp):
                if not e:
                    continue
                key = (k, e)
                if key not in cache:
                    cache[key] = work[:, k] ** e if e > 1 else work[:, k]
                term = cache[key] if term is None else term * cache[key]
            out = out + (coeff if term is None else coeff * term)
        return out

    def evaluate_mod(self, points: np.ndarray, q: int) -> np.ndarray:
        """Values reduced into ``[0, q)`` for an integer batch; never overflows for ``q < 2**31``."""
        pts = np.asarray(points, dtype=np.int64) % q
        out = np.zeros(pts.shape[0], dtype=np.int64)
        cache: dict[tuple[int, int], np.ndarray] = {}
        for exp, coeff in self.terms.items():
            term = np.full(pts.shape[0], coeff % q, dtype=np.int64)
            for k, e in enumerate(exp):
                if not e:
                    continue
                key = (k, e)
                if key not in cache:
                    p = pts[:, k].copy()
                    for _ in range(e - 1):
                        p = (p * pts[:, k]) % q
                    cache[key] = p
                term = (term * cache[key]) % q
            out = (out + term) % q
        return out


# -- grammar --------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][-+]?\d+)?)|(?P<var>x(?P<idx>\d+))|(?P<op>[-+*^])|(?P<bad>\S))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        start = m.start(m.lastgroup)
        if m.group("bad") is not None:
            raise FormSyntaxError(f"unexpected character {m.group('bad')!r}", start, text)
        if m.group("num") is not None:
            tokens.append(("num", m.group("num"), start))
        elif m.group("var") is not None:
            tokens.append(("var", m.group("idx"), start))
        else:
            tokens.append(("op", m.group("op"), start))
        pos = m.end()
    return tokens


def parse_form(text: str, num_vars: int) -> Form:
    """Parse ``3*x1^2*x2 - x3^3``-style text into a :class:`Form`.

    Terms are separated by ``+``/``-``; a term is an optional integer
    coefficient followed by ``*``-separated factors ``x<k>`` or ``x<k>^<e>``.
    """
    tokens = _tokenize(text)
    if not tokens:
        raise FormSyntaxError("empty polynomial", 0, text)
    terms: dict[Exponent, int] = {}
    i = 0

    def peek():
        return tokens[i] if i < len(tokens) else ("end", "", len(text))

    def integer(tok) -> int:
        kind, val, pos = tok
        if kind != "num":
            raise FormSyntaxError("expected an integer", pos, text)
        if not val.isdigit():
            raise FormSyntaxError(f"non-integer coefficient {val!r}", pos, text)
        return int(val)

    sign = 1
    if peek()[0] == "op" and peek()[1] in "+-":
        sign = -1 if peek()[1] == "-" else 1
        i += 1
    while True:
        coeff = 1
        exp = [0] * num_vars
        saw_factor = False
        tok = peek()
        if tok[0] == "num":
            coeff = integer(tok)
            i += 1
            saw_factor = True
            if peek()[0] == "op" and peek()[1] == "*":
                i += 1
                tok = peek()
                if tok[0] != "var":
                    raise FormSyntaxError("expected a variable after '*'", tok[2], text)
            else:
                tok = None
        while tok is not None:
            kind, val, pos = tok
            if kind != "var":
                raise FormSyntaxError("expected a term", pos, text)
            k = int(val)
            if k < 1 or k > num_vars:
                raise FormSyntaxError(f"variable x{k} outside x1..x{num_vars}", pos, text)
            i += 1
            power = 1
            if peek()[0] == "op" and peek()[1] == "^":
                i += 1
                power = integer(peek())
                i += 1
            exp[k - 1] += power
            saw_factor = True
            if peek()[0] == "op" and peek()[1] == "*":
                i += 1
                tok = peek()
                if tok[0] != "var":
                    raise FormSyntaxError("expected a variable after '*'", tok[2], text)
            else:
                tok = None
        if not saw_factor:
            raise FormSyntaxError("expected a term", peek()[2], text)
        key = tuple(exp)
        terms[key] = terms.get(key, 0) + sign * coeff
        kind, val, pos = peek()
        if kind == "end":
            break
        if kind == "op" and val in "+-":
            sign = -1 if val == "-" else 1
            i += 1
            continue
        raise FormSyntaxError(f"unexpected {val!r}", pos, text)
    return Form(num_vars, terms)


# -- combinatorics ----------------------------------------------------------------


def rank_r(m: int, d: int) -> int:
    """Number of degree-``d`` monomials in ``m`` parameters, ``binom(m+d-1, d)``.

    Python integers do not overflow, but the result sizes arrays downstream,
    so values beyond the int64 range are refused.
    """
    if m < 1 or d < 1:
        raise ValueError("need m >= 1 and d >= 1")
    r = math.comb(m + d - 1, d)
    if r > np.iinfo(np.int64).max:
        raise OverflowError(f"r = binom({m + d - 1}, {d}) exceeds the int64 range")
    return r


def multi_indices(m: int, d: int) -> list[MultiIndex]:
    """Non-decreasing ``d``-tuples over ``1..m`` in lexicographic order."""
    return list(itertools.combinations_with_replacement(range(1, m + 1), d))


def multiplicities(j: MultiIndex) -> dict[int, int]:
    return dict(Counter(j))


def multinomial(j: MultiIndex) -> int:
    out = math.factorial(len(j))
    for c in Counter(j).values():
        out //= math.factorial(c)
    return out


# -- determinants -------------------------------------------------------------------


def int_det(matrix: Sequence[Sequence[int]]) -> int:
    """Exact determinant: cofactor expansion up to 4x4, Bareiss elimination above."""
    a = [[int(v) for v in row] for row in matrix]
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        return 1
    if n <= 4:
        return _cofactor(a)
    return _bareiss(a)


def _cofactor(a: list[list[int]]) -> int:
    n = len(a)
    if n == 1:
        return a[0][0]
    if n == 2:
        return a[0][0] * a[1][1] - a[0][1] * a[1][0]
    total = 0
    for col in range(n):
        if a[0][col]:
            minor = [row[:col] + row[col + 1:] for row in a[1:]]
            total += (-1) ** col * a[0][col] * _cofactor(minor)
    return total


def _bareiss(a: list[list[int]]) -> int:
    a = [row[:] for row in a]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _columns(x) -> list[list[int]]:
    arr = np.asarray(x, dtype=object)
    if arr.ndim != 2:
        raise ValueError("expected an s x m matrix")
    s, m = arr.shape
    return [[int(arr[n, i]) for n in range(s)] for i in range(m)]


def _dot(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(u, v))


def gram_disc(x) -> int:
    """``det(X^t X)`` for an ``s x m`` integer matrix ``X`` (columns are the vectors)."""
    cols = _columns(x)
    s = len(cols[0]) if cols else 0
    if s < len(cols):
        raise ValueError(f"need s >= m, got s={s}, m={len(cols)}")
    return int_det([[_dot(u, v) for v in cols] for u in cols])


def _vectors(hs: Sequence[Sequence[int]]) -> list[list[int]]:
    vecs = [[int(v) for v in h] for h in hs]
    if len({len(v) for v in vecs}) > 1:
        raise ValueError("vectors of different lengths")
    return vecs


def det_T(hs: Sequence[Sequence[int]]) -> int:
    """Symmetrised determinant over the group generated by the swaps ``(k, m+k)``.

    Sums ``det((h_t(1)..h_t(m))^t (h_t(m+1)..h_t(2m)))`` over the ``2^m``
    permutations ``t`` that exchange any subset of the pairs ``(k, m+k)``.
    """
    vecs = _vectors(hs)
    if len(vecs) % 2 or not vecs:
        raise ValueError("det_T needs an even, positive number of vectors")
    m = len(vecs) // 2
    s = len(vecs[0])
    if s < m:
        raise ValueError(f"need s >= m, got s={s}, m={m}")
    total = 0
    for swaps in itertools.product((False, True), repeat=m):
        left = [vecs[m + k] if sw else vecs[k] for k, sw in enumerate(swaps)]
        right = [vecs[k] if sw else vecs[m + k] for k, sw in enumerate(swaps)]
        total += int_det([[_dot(u, v) for v in right] for u in left])
    return total


def d_form(hs: Sequence[Sequence[int]], n: int) -> int:
    """The ``(2m-1)``-linear form ``d_n``: ``det_T`` with the unit vector ``e_n`` in the last slot."""
    vecs = _vectors(hs)
    s = len(vecs[0])
    if not 1 <= n <= s:
        raise ValueError(f"n must lie in 1..{s}")
    e = [0] * s
    e[n - 1] = 1
    return det_T(vecs + [e])


def d_forms_batch(hs: np.ndarray) -> np.ndarray:
    """All ``d_n`` at once for a batch: ``hs`` has shape ``(N, 2m-1, s)``, result ``(N, s)``.

    Exact in int64 while the entries stay small (callers bound them).
    """
    hs = np.asarray(hs, dtype=np.int64)
    N, k, s = hs.shape
    m = (k + 1) // 2
    out = np.zeros((N, s), dtype=np.int64)
    eye = np.broadcast_to(np.eye(s, dtype=np.int64), (N, s, s))
    for n in range(s):
        full = np.concatenate([hs, eye[:, n:n + 1, :]], axis=1)
        for swaps in itertools.product((False, True), repeat=m):
            li = [m + t if sw else t for t, sw in enumerate(swaps)]
            ri = [t if sw else m + t for t, sw in enumerate(swaps)]
            gram = np.einsum("nas,nbs->nab", full[:, li, :], full[:, ri, :])
            out[:, n] += _batch_det(gram)
    return out


def _batch_det(g: np.ndarray) -> np.ndarray:
    m = g.shape[1]
    total = np.zeros(g.shape[0], dtype=g.dtype)
    for perm in itertools.permutations(range(m)):
        inv = sum(1 for a in range(m) for b in range(a + 1, m) if perm[a] > perm[b])
        term = np.ones(g.shape[0], dtype=g.dtype)
        for row, col in enumerate(perm):
            term = term * g[:, row, col]
        total = total + (-term if inv % 2 else term)
    return total


# -- the parametric expansion -------------------------------------------------------------


@dataclass(frozen=True)
class SymmetricForm:
    """The symmetric ``d``-linear form with ``Phi(x, ..., x) = F(x)``, evaluated by polarization."""

    base: Form

    @property
    def arity(self) -> int:
        return self.base.degree

    def __call__(self, *vectors: Sequence[int]) -> Fraction:
        d = self.arity
        if len(vectors) != d:
            raise ValueError(f"expected {d} vectors")
        vecs = _vectors(vectors)
        s = self.base.num_vars
        if len(vecs[0]) != s:
            raise ValueError(f"vectors must have length {s}")
        total = 0
        for size in range(1, d + 1):
            sign = (-1) ** (d - size)
            for subset in itertools.combinations(range(d), size):
                point = [sum(vecs[k][n] for k in subset) for n in range(s)]
                total += sign * self.base(point)
        return Fraction(total, math.factorial(d))

    def b_form(self, vectors: Sequence[Sequence[int]], n: int) -> Fraction:
        """``B_n(v_1..v_{d-1}) = Phi(v_1, ..., v_{d-1}, e_n)``."""
        s = self.base.num_vars
        if not 1 <= n <= s:
            raise ValueError(f"n must lie in 1..{s}")
        e = [0] * s
        e[n - 1] = 1
        return self(*vectors, e)


def eval_phi(F: Form, vectors: Sequence[Sequence[int]]) -> Fraction:
    return SymmetricForm(F)(*vectors)


def b_form(F: Form, vectors: Sequence[Sequence[int]], n: int) -> Fraction:
    return SymmetricForm(F).b_form(vectors, n)


@dataclass(frozen=True)
class ParametricExpansion:
    """``F(t_1 x_1 + ... + t_m x_m) = sum_j Phi_j(x) t^j`` together with ``D``."""

    form: Form
    s: int
    m: int
    d: int
    r: int
    index_set: tuple[MultiIndex, ...]
    phi_map: Mapping[MultiIndex, Form]
    disc: Form
    a_factors: Mapping[MultiIndex, Fraction] = field(repr=False)

    @property
    def ms(self) -> int:
        return self.m * self.s

    @property
    def system(self) -> list[Form]:
        """``[Phi_j for j in index_set] + [D]``; column ``r`` of every value array is ``D``."""
        return [self.phi_map[j] for j in self.index_set] + [self.disc]

    def values(self, points: np.ndarray) -> np.ndarray:
        """Exact ``(N, r+1)`` integer array of ``(Phi_j, D)`` at each row of ``points``."""
        cols = [f.evaluate_batch(points) for f in self.system]
        dtype = object if any(c.dtype == object for c in cols) else np.int64
        return np.stack([c.astype(dtype) for c in cols], axis=1)

    def values_mod(self, points: np.ndarray, q: int) -> np.ndarray:
        return np.stack([f.evaluate_mod(points, q) for f in self.system], axis=1)

    def max_abs_on_box(self, P: int) -> list[int]:
        """Crude upper bounds ``sum |c| * P^deg`` for ``|Phi_j|`` and ``|D|`` on ``[-P, P]^{ms}``."""
        return [sum(abs(c) for c in f.terms.values()) * P**f.degree for f in self.system]


def expand_parametric(F: Form, m: int) -> ParametricExpansion:
    """Collect ``F(sum_i t_i x_i)`` by monomials in ``t`` and build ``D = det(X^t X)``."""
    if m < 1:
        raise ValueError("m must be positive")
    if F.is_zero() or not F.is_homogeneous():
        raise ValueError("F must be a non-zero homogeneous form")
    d = F.degree
    if d < 1:
        raise ValueError("F must have positive degree")
    s = F.num_vars
    ms = m * s
    nv = ms + m
    images = []
    for n in range(s):
        lin = Form(nv)
        for i in range(m):
            exp = [0] * nv
            exp[i * s + n] = 1
            exp[ms + i] = 1
            lin = lin + Form(nv, {tuple(exp): 1})
        images.append(lin)
    expanded = F.substitute(images)
    buckets: dict[MultiIndex, dict[Exponent, int]] = {}
    for exp, coeff in expanded.terms.items():
        t_exp = exp[ms:]
        j = tuple(i + 1 for i, e in enumerate(t_exp) for _ in range(e))
        buckets.setdefault(j, {})[exp[:ms]] = coeff
    index_set = tuple(multi_indices(m, d))
    phi_map = {j: Form(ms, buckets.get(j, {})) for j in index_set}
    a_factors = {j: Fraction(multinomial(j)) for j in index_set}
    return ParametricExpansion(
        form=F,
        s=s,
        m=m,
        d=d,
        r=rank_r(m, d),
        index_set=index_set,
        phi_map=phi_map,
        disc=disc_polynomial(s, m),
        a_factors=a_factors,
    )


def disc_polynomial(s: int, m: int) -> Form:
    """``D(x_1..x_m) = det(X^t X)`` as a polynomial in ``ms`` variables (Leibniz expansion)."""
    ms = m * s
    xs = [Form.variable(ms, k) for k in range(ms)]
    gram = [[sum((xs[i * s + n] * xs[k * s + n] for n in range(s)), Form(ms)) for k in range(m)] for i in range(m)]
    total = Form(ms)
    for perm in itertools.permutations(range(m)):
        inv = sum(1 for a in range(m) for b in range(a + 1, m) if perm[a] > perm[b])
        term = Form.constant(ms, -1 if inv % 2 else 1)
        for row, col in enumerate(perm):
            term = term * gram[row][col]
        total = total + term
    return total


def flatten(x) -> np.ndarray:
    """``s x m`` matrix to the flat ``ms`` layout."""
    return np.asarray(x).T.reshape(-1)


def unflatten(flat, s: int) -> np.ndarray:
    flat = np.asarray(flat)
    return flat.reshape(-1, s).T


def delta_diff(G: Callable, i: int, h: Sequence[int]) -> Callable:
    """``x -> G(x_1, .., x_i + h, .., x_m) - G(x)`` on flat points (single or batched)."""
    if i < 1:
        raise ValueError("slot index is 1-based")
    h = np.asarray(h, dtype=np.int64)
    s = h.shape[0]
    lo, hi = (i - 1) * s, i * s

    def diff(x):
        x = np.asarray(x)
        shifted = x.copy()
        shifted[..., lo:hi] = shifted[..., lo:hi] + h
        return G(shifted) - G(x)

    return diff
