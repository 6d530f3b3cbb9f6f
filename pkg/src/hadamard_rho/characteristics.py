"""Prefix-sum characteristics of sign matrices.

For a square matrix ``H`` with rows ``a_1..a_N`` and a norm on R^N,

    rho(m) = || a_1 + ... + a_m ||,   m = 1..N,

and ``rho_max`` is the largest of these.  For the Sylvester matrix ``S^(n)``
the column prefix sums ``alpha_i(m)`` have a closed description (the largest
``|alpha_i(m)|`` over ``m`` is ``2**f(i)``), and in l1 the maximum of ``rho``
has the closed form ``((3n+7) 2**n + 2 (-1)**n) / 9``.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from . import report
from .errors import DomainError, FormatError, PreconditionError, ResourceError
from .matrices import MAX_ENTRIES, SignMatrix, parity_signs, sylvester_rows
from .norms import (
    FLOAT_RTOL,
    NormSpec,
    is_exact,
    norm_eval,
    norm_floats,
    norm_many,
    normalize,
    parse_norm,
)

# rows of prefix vectors handled per vectorized step
_BLOCK_ENTRIES = 2**22


@dataclass(frozen=True, eq=False)
class AlphaTable:
    """``values[i-1, m-1] = alpha_i(m)``, the sum of the first ``m`` entries of column ``i``."""

    n: int
    values: np.ndarray

    def at(self, i: int, m: int) -> int:
        return int(self.values[i - 1, m - 1])

    def column(self, i: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self.values[i - 1])


@dataclass(frozen=True)
class RhoProfile:
    """The sequence ``rho(1..N)`` together with its maximum and the set of maximizers."""

    values: tuple
    norm: NormSpec
    source: str
    rho_max: object
    argmax: tuple[int, ...]

    @classmethod
    def from_values(cls, values, norm: NormSpec, source: str = "") -> "RhoProfile":
        values = tuple(normalize(v) for v in values)
        if not values:
            raise DomainError("empty profile")
        if all(is_exact(v) for v in values):
            best = max(values)
            argmax = tuple(m for m, v in enumerate(values, start=1) if v == best)
        else:
            best = max(float(v) for v in values)
            cut = best - FLOAT_RTOL * max(1.0, abs(best))
            argmax = tuple(m for m, v in enumerate(values, start=1) if float(v) >= cut)
            best = max(values[m - 1] for m in argmax)
        return cls(values, norm, source, best, argmax)

    @property
    def order(self) -> int:
        return len(self.values)

    def to_json(self) -> dict:
        return {
            "source": self.source,
            "norm": self.norm.label,
            "values": [report.encode_number(v) for v in self.values],
            "rho_max": report.encode_number(self.rho_max),
            "argmax": list(self.argmax),
            "tolerance": self.norm.tolerance,
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "RhoProfile":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            values = [report.decode_number(v) for v in data["values"]]
            prof = cls.from_values(values, parse_norm(data["norm"]), data.get("source", ""))
        except KeyError as exc:
            raise FormatError(f"profile JSON lacks field {exc.args[0]!r}") from None
        return prof

    def to_csv(self) -> str:
        return report.write_csv(["m", "rho"], [[m, v] for m, v in enumerate(self.values, start=1)])

    @classmethod
    def from_csv(cls, text: str, norm: NormSpec, source: str = "") -> "RhoProfile":
        header, rows = report.read_csv(text)
        if header != ["m", "rho"]:
            raise FormatError(f"expected header m,rho, got {header}")
        values = []
        for expect, (m, v) in enumerate(rows, start=1):
            if int(m) != expect:
                raise FormatError(f"row for m={m} out of sequence")
            values.append(report.decode_number(v))
        return cls.from_values(values, norm, source)


class ClosedForm(NamedTuple):
    value: int
    m: int
    m_prime: int


# -- alpha tables --------------------------------------------------------------


def _check_exponent(n: int) -> None:
    if n < 1:
        raise DomainError(f"Sylvester exponent must be >= 1, got {n}")


def _row_block(order: int) -> int:
    return max(1, min(order, _BLOCK_ENTRIES // max(order, 1)))


def _sylvester_prefix_blocks(n: int) -> Iterator[np.ndarray]:
    """Consecutive blocks of prefix vectors ``alpha(m)`` of ``S^(n)`` (rows indexed by m).

    Row ``q*B + r`` of ``S^(n)`` is the Kronecker product of row ``q`` of
    ``S^(n-b)`` with row ``r`` of ``S^(b)``, so the prefix sums inside a block
    are the small prefix table of ``S^(b)`` scaled by the signs of row ``q``.
    """
    order = 2**n
    b = min(n, 8)
    while b > 0 and 2**b * order > _BLOCK_ENTRIES:
        b -= 1
    width = 2**b
    groups = order // width
    dtype = np.int16 if n < 15 else np.int32
    small = np.cumsum(sylvester_rows(b, 0, width), axis=0).astype(dtype)
    outer = parity_signs(n - b).astype(dtype)
    g = np.arange(groups, dtype=np.int64)
    carry = np.zeros((groups, width), dtype=dtype)
    for q in range(groups):
        block = small[:, None, :] * outer[q & g][None, :, None]
        block += carry
        carry = block[-1].copy()
        yield block.reshape(width, order)


def _matrix_prefix_blocks(entries: np.ndarray) -> Iterator[np.ndarray]:
    order = entries.shape[0]
    step = _row_block(order)
    carry = np.zeros(entries.shape[1], dtype=entries.dtype if entries.dtype == object else np.int64)
    for start in range(0, order, step):
        block = np.cumsum(entries[start:start + step], axis=0)
        if block.dtype != object:
            block = block.astype(np.int64)
        block = block + carry
        carry = block[-1].copy()
        yield block


def alpha_table(n: int, budget: int | None = None) -> AlphaTable:
    """All prefix column sums of ``S^(n)`` as exact integers."""
    _check_exponent(n)
    order = 2**n
    budget = MAX_ENTRIES if budget is None else budget
    if order * order > budget:
        raise ResourceError(f"alpha table for n={n} needs {order * order} entries, budget is {budget}")
    prefixes = np.concatenate(list(_sylvester_prefix_blocks(n)), axis=0)
    dtype = np.int16 if n < 15 else np.int32
    values = np.ascontiguousarray(prefixes.T.astype(dtype))
    values.flags.writeable = False
    return AlphaTable(n, values)


def column_max_abs_alpha(n: int) -> np.ndarray:
    """Brute-force ``max_m |alpha_i(m)|`` for every column, streamed over row blocks."""
    _check_exponent(n)
    best = np.zeros(2**n, dtype=np.int64)
    for block in _sylvester_prefix_blocks(n):
        np.maximum(best, np.abs(block).max(axis=0), out=best)
    return best


def f_exponent(n: int, i: int) -> int:
    """Exponent ``f(i)`` with ``max_m |alpha_i(m)| = 2**f(i)``.

    ``f(1) = n``, ``f(i) = 0`` for even ``i``, and for odd ``i > 1`` it is the
    position of the lowest set bit of ``i`` above bit 0.
    """
    _check_exponent(n)
    if not 1 <= i <= 2**n:
        raise DomainError(f"column index {i} out of range 1..{2**n}")
    c = i - 1
    if c == 0:
        return n
    return (c & -c).bit_length() - 1


def max_abs_alpha(n: int, i: int) -> int:
    return 2 ** f_exponent(n, i)


def f_distribution(n: int) -> dict[int, int]:
    """How many columns ``i`` have ``max_m |alpha_i(m)| = 2**j``, keyed by ``j``."""
    _check_exponent(n)
    counts = Counter(f_exponent(n, i) for i in range(1, 2**n + 1))
    return dict(sorted(counts.items()))


def f_distribution_closed(n: int) -> dict[int, int]:
    _check_exponent(n)
    out = {j: 2 ** (n - j - 1) for j in range(n)}
    out[n] = 1
    return out


# -- rho profiles ----------------------------------------------------------------


def _profile_from_blocks(
    blocks: Iterable[np.ndarray], norm: NormSpec, source: str, prefix_at
) -> RhoProfile:
    values: list = []
    for block in blocks:
        values.extend(norm_many(norm, block))
    if norm.kind == "lp" and norm.p != 1 and float(norm.p).is_integer():
        # float pass found the maximizers; recompute those exactly so perfect powers come out integral
        best = max(values)
        cut = best - 1e-9 * max(1.0, best)
        for m, v in enumerate(values, start=1):
            if v >= cut:
                values[m - 1] = norm_eval(norm, prefix_at(m))
    return RhoProfile.from_values(values, norm, source)


def rho_profile(m: SignMatrix | np.ndarray, norm: NormSpec, source: str | None = None) -> RhoProfile:
    """``rho(k) = ||sum of the first k rows||`` for every ``k``.

    Accepts a :class:`SignMatrix` or any square integer/rational array; the
    latter is the matrix norm ``rho(T)`` on all square matrices.
    """
    if isinstance(m, SignMatrix):
        entries = m.entries
        src = m.source if source is None else source
    else:
        entries = np.asarray(m)
        src = source or "matrix"
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] == 0:
            raise DomainError(f"expected a non-empty square matrix, got shape {entries.shape}")
    if norm.kind == "marcinkiewicz" and norm.lam.limit is not None and entries.shape[1] > norm.lam.limit:
        raise DomainError(
            f"matrix order {entries.shape[1]} exceeds the lambda sequence length N={norm.lam.limit}"
        )
    if entries.dtype != object:
        entries = entries.astype(np.int64) if entries.dtype.kind in "iub" else entries

    def prefix_at(k):
        return entries[:k].sum(axis=0)

    return _profile_from_blocks(_matrix_prefix_blocks(entries), norm, src, prefix_at)


def sylvester_profile(n: int, norm: NormSpec) -> RhoProfile:
    """``rho^(n)`` profile computed from streamed rows of ``S^(n)``; never materializes the matrix."""
    _check_exponent(n)
    order = 2**n
    if norm.kind == "marcinkiewicz" and norm.lam.limit is not None and order > norm.lam.limit:
        raise DomainError(f"order {order} exceeds the lambda sequence length N={norm.lam.limit}")

    def prefix_at(k):
        seen = 0
        for block in _sylvester_prefix_blocks(n):
            if k <= seen + len(block):
                return block[k - seen - 1].astype(np.int64)
            seen += len(block)
        raise DomainError(f"prefix length {k} exceeds order {order}")

    return _profile_from_blocks(_sylvester_prefix_blocks(n), norm, f"sylvester:{n}", prefix_at)


def rho_l1_closed_form(n: int) -> ClosedForm:
    """Closed-form l1 maximum of ``rho^(n)`` and its two maximizing prefix lengths."""
    _check_exponent(n)
    sign = -1 if n % 2 else 1
    value, r1 = divmod((3 * n + 7) * 2**n + 2 * sign, 9)
    m, r2 = divmod(2 ** (n + 1) + sign, 3)
    m_prime, r3 = divmod(5 * 2 ** (n - 1) - sign, 3)
    if r1 or r2 or r3:
        raise ArithmeticError(f"closed form not integral at n={n}")
    return ClosedForm(value, m, m_prime)


def hat_rho(vectors, m: SignMatrix, norm: NormSpec, tol: float = FLOAT_RTOL) -> RhoProfile:
    """Profile of ``||sum_i alpha_i(k) x_i||`` for caller-supplied unit-ball vectors ``x_i``."""
    rows = [list(v) for v in vectors]
    if len(rows) != m.order:
        raise PreconditionError(f"need {m.order} vectors, got {len(rows)}")
    dims = {len(r) for r in rows}
    if len(dims) != 1 or 0 in dims:
        raise PreconditionError("vectors must share one positive dimension")
    for idx, r in enumerate(rows, start=1):
        v = norm_eval(norm, r)
        if (v > 1) if is_exact(v) else (float(v) > 1 + tol):
            raise PreconditionError(f"vector {idx} has norm {v}, outside the unit ball")
    exact = all(is_exact(c) for r in rows for c in r)
    if exact:
        x = np.array([[Fraction(c) for c in r] for r in rows], dtype=object)
        prefixes = np.cumsum(m.entries.astype(object), axis=0)
    else:
        x = np.array(rows, dtype=np.float64)
        prefixes = np.cumsum(m.entries.astype(np.float64), axis=0)
    images = prefixes.dot(x)
    if exact:
        images = np.array([[normalize(c) for c in r] for r in images], dtype=object)
    values = norm_many(norm, images)
    return RhoProfile.from_values(values, norm, f"hat:{m.source or m.order}")


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    n: int
    rho: object
    ratio: object
    note: str = ""


def ratio_diagnostics(n: int, norm: NormSpec, kind: str = "sylvester") -> Diagnostic:
    """``rho^(n) / (n 2**n)`` for Sylvester exponents or ``rho_n / (n sqrt n)`` for Hadamard orders.

    Only the ratios are reported; no conclusion is drawn from them.
    """
    if kind == "sylvester":
        rho = sylvester_profile(n, norm).rho_max
        denom = n * 2**n
        ratio = normalize(Fraction(rho) / denom) if is_exact(rho) else float(rho) / denom
        return Diagnostic(kind, n, rho, ratio)
    if kind == "hadamard":
        from .search import rho_n

        res = rho_n(n, norm)
        ratio = float(res.objective) / (n * n**0.5)
        note = "" if res.exact_over_all else "class-restricted lower bound on rho_n"
        return Diagnostic(kind, n, res.objective, ratio, note)
    raise DomainError(f"unknown diagnostic kind {kind!r}")


def random_unit_ball(rng: np.random.Generator, count: int, dim: int, norm: NormSpec) -> np.ndarray:
    """``count`` random float vectors of length ``dim`` with norm at most 1.

    Directions are Gaussian; radii are uniform on ``[0, 1]`` with a share of
    exact unit vectors so the ceiling is probed at the boundary.
    """
    x = rng.standard_normal((count, dim))
    scale = norm_floats(norm, x)
    radii = rng.uniform(0.0, 1.0, size=count)
    radii[rng.uniform(size=count) < 0.5] = 1.0
    out = x / scale[:, None] * radii[:, None]
    # guard against the last ulp pushing a unit vector outside the ball
    over = norm_floats(norm, out) > 1.0
    out[over] /= norm_floats(norm, out[over])[:, None] * (1 + 1e-15)
    return out
