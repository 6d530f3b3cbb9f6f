"""Square +-1 matrices: Sylvester recursion, Hadamard checks, enumeration, catalog.

Entries are addressed 1-based in every public function (row ``k``, column
``i``), matching the usual notation ``h_{ki}``.  Internally rows are kept both
as an ``int8`` array and as packed bit words, where bit ``order-1-j`` of a row
word is set iff column ``j`` (0-based) holds ``-1``.  With that encoding the
inner product of two rows is ``order - 2 * popcount(a ^ b)`` and integer order
on the words is lexicographic order on the rows with ``+1 < -1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import DomainError, FormatError, ResourceError, ValidationError

#: Default cap on the number of entries a materialized matrix may hold.
MAX_ENTRIES = 2**20

#: Orders handled by brute force over all ``2**(order**2)`` sign patterns.
EXHAUSTIVE_ORDERS = (1, 2, 4)

#: Largest order accepted by the backtracking enumerator.
MAX_BACKTRACK_ORDER = 16


@dataclass(frozen=True, eq=False)
class SignMatrix:
    """Immutable square matrix with entries in {+1, -1}."""

    entries: np.ndarray
    source: str = field(default="", compare=False)

    def __post_init__(self):
        raw = np.asarray(self.entries)
        if raw.ndim != 2 or raw.shape[0] != raw.shape[1] or raw.shape[0] < 1:
            raise DomainError(f"sign matrix must be square with order >= 1, got shape {raw.shape}")
        bad = (raw != 1) & (raw != -1)
        if bad.any():
            k, i = np.argwhere(bad)[0]
            raise DomainError(f"entry ({k + 1},{i + 1}) is {raw[k, i]!r}, expected +1 or -1")
        arr = raw.astype(np.int8, copy=True)
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    @property
    def order(self) -> int:
        return self.entries.shape[0]

    def entry(self, k: int, i: int) -> int:
        _check_index("row", k, self.order)
        _check_index("column", i, self.order)
        return int(self.entries[k - 1, i - 1])

    @cached_property
    def row_bits(self) -> tuple[int, ...]:
        return tuple(_pack(row) for row in self.entries)

    @cached_property
    def col_bits(self) -> tuple[int, ...]:
        return tuple(_pack(col) for col in self.entries.T)

    def tolist(self) -> list[list[int]]:
        return self.entries.astype(int).tolist()

    def __eq__(self, other):
        if not isinstance(other, SignMatrix):
            return NotImplemented
        return self.order == other.order and bool(np.array_equal(self.entries, other.entries))

    def __hash__(self):
        return hash((self.order, self.entries.tobytes()))

    def __repr__(self):
        tag = f", source={self.source!r}" if self.source else ""
        return f"SignMatrix(order={self.order}{tag})"


@dataclass(frozen=True)
class HadamardWitness:
    """A sign matrix together with the outcome of its orthogonality check."""

    matrix: SignMatrix
    verified: bool

    @property
    def order(self) -> int:
        return self.matrix.order


def _pack(row) -> int:
    word = 0
    for v in row:
        word = (word << 1) | (1 if v < 0 else 0)
    return word


def _unpack(word: int, order: int) -> list[int]:
    return [-1 if (word >> (order - 1 - j)) & 1 else 1 for j in range(order)]


def _check_index(what: str, idx: int, order: int) -> None:
    if not 1 <= idx <= order:
        raise DomainError(f"{what} index {idx} out of range 1..{order}")


def _check_budget(order: int, budget: int | None) -> None:
    budget = MAX_ENTRIES if budget is None else budget
    if order * order > budget:
        raise ResourceError(
            f"order {order} needs {order * order} entries, budget is {budget}; "
            "raise the budget or use a streaming routine"
        )


# -- Sylvester matrices -----------------------------------------------------


def sylvester_entry(n: int, k: int, i: int) -> int:
    """Entry ``(k, i)`` of the Sylvester matrix of order ``2**n``.

    Uses ``(-1) ** popcount((k-1) & (i-1))`` rather than the block recursion.
    """
    if n < 0:
        raise DomainError(f"Sylvester exponent must be >= 0, got {n}")
    _check_index("row", k, 2**n)
    _check_index("column", i, 2**n)
    return -1 if ((k - 1) & (i - 1)).bit_count() & 1 else 1


def sylvester_matrix(n: int, budget: int | None = None) -> SignMatrix:
    """Build ``S^(n)`` by repeated block doubling of ``[[1]]``."""
    if n < 0:
        raise DomainError(f"Sylvester exponent must be >= 0, got {n}")
    _check_budget(2**n, budget)
    s = np.ones((1, 1), dtype=np.int8)
    for _ in range(n):
        s = np.block([[s, s], [s, -s]])
    return SignMatrix(s, source=f"sylvester:{n}")


def parity_signs(n: int) -> np.ndarray:
    """``(-1) ** popcount(x)`` for ``x`` in ``0 .. 2**n - 1`` as int8."""
    signs = np.ones(1, dtype=np.int8)
    for _ in range(n):
        signs = np.concatenate([signs, -signs])
    return signs


def sylvester_rows(n: int, start: int, stop: int, signs: np.ndarray | None = None) -> np.ndarray:
    """Rows ``start+1 .. stop`` of ``S^(n)`` (0-based half-open range) without building the matrix."""
    if signs is None:
        signs = parity_signs(n)
    ks = np.arange(start, stop, dtype=np.int64)
    cols = np.arange(2**n, dtype=np.int64)
    return signs[np.bitwise_and.outer(ks, cols)]


# -- validation --------------------------------------------------------------


def _first_nonorthogonal(words: Sequence[int], order: int) -> tuple[int, int, int] | None:
    for a in range(order):
        wa = words[a]
        for b in range(a + 1, order):
            ip = order - 2 * (wa ^ words[b]).bit_count()
            if ip:
                return a + 1, b + 1, ip
    return None


def _gram_offender(arr: np.ndarray) -> tuple[int, int, int] | None:
    # float64 products are exact here: |entries of the Gram matrix| <= order <= 2**26
    a = arr.astype(np.float64)
    gram = a @ a.T
    np.fill_diagonal(gram, 0.0)
    bad = np.argwhere(np.triu(gram) != 0)
    if len(bad) == 0:
        return None
    k, l = bad[0]
    return int(k) + 1, int(l) + 1, int(gram[k, l])


def validate_hadamard(m: SignMatrix) -> HadamardWitness:
    """Check pairwise orthogonality of rows and of columns.

    Raises :class:`ValidationError` naming the first offending pair.  A
    Parseval-type identity on the test vector ``beta_i = i`` is checked as a
    redundant second route.
    """
    n = m.order
    if n <= 64:
        rows = _first_nonorthogonal(m.row_bits, n)
        cols = _first_nonorthogonal(m.col_bits, n) if rows is None else None
    else:
        rows = _gram_offender(m.entries)
        cols = _gram_offender(m.entries.T) if rows is None else None
    if rows is not None:
        a, b, ip = rows
        raise ValidationError(f"rows {a},{b} have inner product {ip}")
    if cols is not None:
        a, b, ip = cols
        raise ValidationError(f"columns {a},{b} have inner product {ip}")

    beta = np.arange(1, n + 1, dtype=np.int64)
    image = m.entries.astype(np.int64) @ beta
    lhs = sum(int(v) * int(v) for v in image)
    rhs = n * sum(b * b for b in range(1, n + 1))
    if lhs != rhs:
        raise ValidationError(f"Parseval identity failed: {lhs} != {rhs}")
    return HadamardWitness(m, True)


def is_hadamard(m: SignMatrix) -> bool:
    try:
        validate_hadamard(m)
    except ValidationError:
        return False
    return True


# -- enumeration -------------------------------------------------------------


def could_be_hadamard_order(order: int) -> bool:
    return order in (1, 2) or (order > 0 and order % 4 == 0)


def enumerate_hadamard(order: int, mode: str = "auto") -> Iterator[SignMatrix]:
    """Yield every ``order x order`` sign matrix with pairwise orthogonal rows.

    Matrices come in lexicographic order of their row sequences (``+1 < -1``),
    each exactly once.  ``mode="exhaustive"`` scans all ``2**(order**2)``
    patterns and only accepts orders 1, 2, 4; ``mode="backtrack"`` extends
    row by row, keeping only candidates orthogonal to every chosen row, and
    accepts orders up to 16.  ``"auto"`` picks exhaustive when allowed.
    """
    if mode == "auto":
        mode = "exhaustive" if order in EXHAUSTIVE_ORDERS else "backtrack"
    if mode == "exhaustive":
        if order not in EXHAUSTIVE_ORDERS:
            raise DomainError(f"exhaustive enumeration supports orders {EXHAUSTIVE_ORDERS}, got {order}")
        return _enumerate_exhaustive(order)
    if mode == "backtrack":
        if not 1 <= order <= MAX_BACKTRACK_ORDER:
            raise DomainError(f"backtracking enumeration supports orders 1..{MAX_BACKTRACK_ORDER}, got {order}")
        return _enumerate_backtrack(order)
    raise DomainError(f"unknown enumeration mode {mode!r}")


def _from_words(words: Sequence[int], order: int) -> SignMatrix:
    return SignMatrix(np.array([_unpack(w, order) for w in words], dtype=np.int8), source=f"enumerated:{order}")


def _enumerate_exhaustive(order: int) -> Iterator[SignMatrix]:
    mask = (1 << order) - 1
    half = order // 2
    shifts = [order * (order - 1 - k) for k in range(order)]
    for x in range(1 << (order * order)):
        words = [(x >> s) & mask for s in shifts]
        if order == 1 or all(
            (words[a] ^ words[b]).bit_count() == half
            for a in range(order)
            for b in range(a + 1, order)
        ):
            yield _from_words(words, order)


def _enumerate_backtrack(order: int) -> Iterator[SignMatrix]:
    if not could_be_hadamard_order(order):
        return
    half = order // 2
    chosen: list[int] = []

    def extend(candidates: list[int]) -> Iterator[SignMatrix]:
        if len(chosen) == order:
            yield _from_words(chosen, order)
            return
        for w in candidates:
            chosen.append(w)
            if len(chosen) == order:
                yield _from_words(chosen, order)
            else:
                yield from extend([c for c in candidates if (c ^ w).bit_count() == half])
            chosen.pop()

    yield from extend(list(range(1 << order)))


# -- catalog -----------------------------------------------------------------


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    return all(q % d for d in range(2, math.isqrt(q) + 1))


def paley_matrix(q: int) -> SignMatrix:
    """Paley type I Hadamard matrix of order ``q + 1`` for a prime ``q = 3 mod 4``."""
    if not (_is_prime(q) and q % 4 == 3):
        raise DomainError(f"Paley I construction needs a prime q = 3 mod 4, got {q}")
    residues = {(x * x) % q for x in range(1, q)}
    chi = [0] + [1 if x in residues else -1 for x in range(1, q)]
    n = q + 1
    s = np.zeros((n, n), dtype=np.int64)
    s[0, 1:] = 1
    s[1:, 0] = -1
    for a in range(q):
        for b in range(q):
            s[a + 1, b + 1] = chi[(b - a) % q]
    return SignMatrix(np.eye(n, dtype=np.int64) + s, source=f"paley:{q}")


def double(m: SignMatrix) -> SignMatrix:
    """The block matrix ``[[H, H], [H, -H]]`` of twice the order."""
    h = m.entries
    return SignMatrix(np.block([[h, h], [h, -h]]), source=f"double({m.source or m.order})")


def _construction(order: int) -> tuple | None:
    if order < 1:
        return None
    if order & (order - 1) == 0:
        return ("sylvester", order.bit_length() - 1)
    if order == 12:
        return ("paley", 11)
    if order % 2 == 0 and _construction(order // 2) is not None:
        return ("double", order // 2)
    if _is_prime(order - 1) and (order - 1) % 4 == 3:
        return ("paley", order - 1)
    return None


def implemented_orders(limit: int = 256) -> list[int]:
    return [n for n in range(1, limit + 1) if _construction(n) is not None]


def catalog_representative(order: int, budget: int | None = None) -> SignMatrix:
    """One validated Hadamard matrix of the given order.

    Powers of two come from the Sylvester recursion, 12 from Paley I over
    GF(11), ``2m`` from doubling a cataloged ``m``, and remaining ``q + 1``
    with prime ``q = 3 mod 4`` from Paley I.
    """
    plan = _construction(order)
    if plan is None:
        raise DomainError(
            f"no construction for order {order}; implemented orders up to 256: {implemented_orders()}"
        )
    _check_budget(order, budget)
    kind, arg = plan
    if kind == "sylvester":
        m = sylvester_matrix(arg, budget)
    elif kind == "paley":
        m = paley_matrix(arg)
    else:
        m = double(catalog_representative(arg, budget))
    validate_hadamard(m)
    return m


# -- equivalence operations --------------------------------------------------

TRANSFORMS = ("negate_row", "negate_col", "permute_rows", "permute_cols", "transpose")


def _perm_indices(perm: Sequence[int], order: int) -> np.ndarray:
    p = list(perm)
    if len(p) != order or sorted(p) != list(range(1, order + 1)):
        raise DomainError(f"{p} is not a permutation of 1..{order}")
    return np.array(p, dtype=np.int64) - 1


def transform(m: SignMatrix, op: str, arg=None) -> SignMatrix:
    """Apply one equivalence operation.

    ``negate_row``/``negate_col`` take a 1-based index.  ``permute_rows`` and
    ``permute_cols`` take a sequence ``p`` of 1-based indices; row ``k`` of the
    result is row ``p[k]`` of the input.
    """
    h = np.array(m.entries)
    if op == "negate_row":
        _check_index("row", arg, m.order)
        h[arg - 1] *= -1
    elif op == "negate_col":
        _check_index("column", arg, m.order)
        h[:, arg - 1] *= -1
    elif op == "permute_rows":
        h = h[_perm_indices(arg, m.order)]
    elif op == "permute_cols":
        h = h[:, _perm_indices(arg, m.order)]
    elif op == "transpose":
        h = h.T
    else:
        raise DomainError(f"unknown transform {op!r}; expected one of {TRANSFORMS}")
    return SignMatrix(h, source=m.source)


# -- text format -------------------------------------------------------------

_TOKENS = {"+1": 1, "1": 1, "-1": -1}


def format_matrix(m: SignMatrix) -> str:
    lines = [f"order {m.order}"]
    for row in m.entries:
        lines.append(" ".join("+1" if v > 0 else "-1" for v in row))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str, source: str = "") -> SignMatrix:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty matrix text")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "order" or not head[1].isdigit() or int(head[1]) < 1:
        raise FormatError(f"first line must be 'order <n>', got {lines[0]!r}")
    n = int(head[1])
    body = lines[1:]
    if len(body) != n:
        raise FormatError(f"expected {n} rows, found {len(body)}")
    rows = []
    for r, line in enumerate(body, start=1):
        toks = line.split()
        if len(toks) != n:
            raise FormatError(f"row {r} has {len(toks)} entries, expected {n}")
        try:
            rows.append([_TOKENS[t] for t in toks])
        except KeyError as exc:
            raise FormatError(f"row {r}: bad token {exc.args[0]!r}") from None
    return SignMatrix(np.array(rows, dtype=np.int8), source=source)


def read_matrix(path: str | Path) -> SignMatrix:
    path = Path(path)
    return parse_matrix(path.read_text(), source=str(path))


def write_matrix(m: SignMatrix, path: str | Path) -> None:
    Path(path).write_text(format_matrix(m))
