"""Symmetric sequence norms and their lambda-functions.

Four kinds are supported: ``lp`` (``1 <= p < inf``), ``sup`` (the c0 norm of
finitely supported vectors), ``marcinkiewicz`` generated by a concave
non-decreasing sequence ``lam`` via

    ||x|| = max_k  lam_k / k * (sum of the k largest |x_i|),

and ``example39``, the Marcinkiewicz norm whose sequence is
``f(t) = sqrt(log2 5)/5 * (t + 4) / sqrt(log2(t + 4))``.

Values are exact (``int`` or :class:`~fractions.Fraction`) for ``l1``, ``sup``
and Marcinkiewicz norms with rational sequences when the input is integer or
rational; everything else is ``float`` with relative tolerance
:data:`FLOAT_RTOL`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, FormatError

FLOAT_RTOL = 1e-12

# screening window used before exact re-evaluation of near-maximal candidates
_SCREEN_RTOL = 1e-9


def normalize(q):
    """Collapse integral Fractions to ``int``; leave everything else alone."""
    if isinstance(q, Fraction) and q.denominator == 1:
        return int(q.numerator)
    if isinstance(q, np.integer):
        return int(q)
    if isinstance(q, np.floating):
        return float(q)
    return q


def is_exact(v) -> bool:
    return isinstance(v, (int, Rational)) and not isinstance(v, bool)


def example39_lambda(n: int) -> float:
    """``f(n)`` for the concave sequence with ``f(1) = 1``."""
    if n < 1:
        raise DomainError(f"example39 lambda needs n >= 1, got {n}")
    return (n + 4) / 5 * math.sqrt(math.log2(5) / math.log2(n + 4))


@dataclass(frozen=True, eq=False)
class LambdaSeq:
    """A finite prefix ``lam_1..lam_N`` or a closed-form generator ``k -> lam_k``."""

    values: tuple = ()
    generator: Callable[[int], float] | None = None
    name: str = ""
    exact: bool = False
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if self.generator is None:
            if not self.values:
                raise DomainError("lambda sequence needs values or a generator")
            vals = tuple(normalize(Fraction(v)) if is_exact(v) else float(v) for v in self.values)
            object.__setattr__(self, "values", vals)
            object.__setattr__(self, "exact", all(is_exact(v) for v in vals))

    @classmethod
    def from_values(cls, values: Sequence, name: str = "") -> "LambdaSeq":
        return cls(values=tuple(values), name=name)

    @classmethod
    def from_function(cls, fn: Callable[[int], float], name: str = "", exact: bool = False) -> "LambdaSeq":
        return cls(generator=fn, name=name or getattr(fn, "__name__", "lambda"), exact=exact)

    @classmethod
    def from_file(cls, path: str | Path) -> "LambdaSeq":
        path = Path(path)
        return cls(values=tuple(parse_lambda_text(path.read_text())), name=str(path))

    @property
    def limit(self) -> int | None:
        """Largest index available, or ``None`` for a generator."""
        return None if self.generator is not None else len(self.values)

    def value(self, k: int):
        if k < 1:
            raise DomainError(f"lambda index must be >= 1, got {k}")
        if self.generator is not None:
            v = self.generator(k)
            return normalize(Fraction(v)) if self.exact else float(v)
        if k > len(self.values):
            raise DomainError(f"lambda index {k} exceeds the sequence length N={len(self.values)}")
        return self.values[k - 1]

    def floats(self, d: int) -> np.ndarray:
        """``lam_1..lam_d`` as a float array (cached)."""
        arr = self._cache.get(d)
        if arr is None:
            if self.limit is not None and d > self.limit:
                raise DomainError(f"dimension {d} exceeds the lambda sequence length N={self.limit}")
            arr = np.array([float(self.value(k)) for k in range(1, d + 1)])
            arr.flags.writeable = False
            self._cache[d] = arr
        return arr

    def __eq__(self, other):
        if not isinstance(other, LambdaSeq):
            return NotImplemented
        if self.generator is not None or other.generator is not None:
            return self.generator is other.generator and self.exact == other.exact
        return self.values == other.values

    def __hash__(self):
        return hash((self.generator, self.values))


def parse_lambda_text(text: str) -> list:
    vals = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            vals.append(normalize(Fraction(line)))
        except (ValueError, ZeroDivisionError):
            raise FormatError(f"lambda file line {lineno}: cannot parse {line!r}") from None
    if not vals:
        raise FormatError("lambda file holds no values")
    return vals


def _sqrt_lambda(k: int) -> float:
    return math.sqrt(k)


def _linear_lambda(k: int) -> int:
    return k


#: Named sequences accepted after ``marcinkiewicz:`` in the norm grammar.
BUILTIN_LAMBDAS = {
    "sqrt": LambdaSeq.from_function(_sqrt_lambda, name="sqrt"),
    "linear": LambdaSeq.from_function(_linear_lambda, name="linear", exact=True),
    "example39": LambdaSeq.from_function(example39_lambda, name="example39"),
}


@dataclass(frozen=True)
class LambdaVerdict:
    valid: bool
    violations: list = field(default_factory=list)  # (invariant, first offending index)


def check_lambda_seq(seq: LambdaSeq, upto: int | None = None) -> LambdaVerdict:
    """Check normalization, monotonicity and integer concavity of a sequence.

    Generators are checked on ``1..upto`` (default 1000).  Float sequences
    get a slack of ``FLOAT_RTOL`` relative to the values involved.
    """
    n = upto if upto is not None else (seq.limit or 1000)
    if seq.limit is not None:
        n = min(n, seq.limit)
    lam = [seq.value(k) for k in range(1, n + 1)]
    exact = all(is_exact(v) for v in lam)

    def slack(*vs):
        return 0 if exact else FLOAT_RTOL * max(1.0, *(abs(float(v)) for v in vs))

    violations = []
    if abs(lam[0] - 1) > slack(lam[0]):
        violations.append(("normalized", 1))
    for k in range(1, n):
        if lam[k] < lam[k - 1] - slack(lam[k], lam[k - 1]):
            violations.append(("non-decreasing", k))
            break
    for k in range(1, n - 1):
        if (lam[k + 1] - lam[k]) - (lam[k] - lam[k - 1]) > slack(lam[k + 1], lam[k], lam[k - 1]):
            violations.append(("concave", k))
            break
    return LambdaVerdict(not violations, violations)


@dataclass(frozen=True)
class NormSpec:
    """Descriptor of a symmetric sequence norm."""

    kind: str
    p: float | None = None
    lam: LambdaSeq | None = None

    def __post_init__(self):
        if self.kind == "lp":
            if self.p is None or not self.p >= 1:
                raise DomainError(f"lp norm needs p >= 1, got {self.p}")
            if math.isinf(self.p):
                object.__setattr__(self, "kind", "sup")
                object.__setattr__(self, "p", None)
        elif self.kind == "marcinkiewicz":
            if not isinstance(self.lam, LambdaSeq):
                raise DomainError("marcinkiewicz norm needs a LambdaSeq")
        elif self.kind == "example39":
            object.__setattr__(self, "lam", BUILTIN_LAMBDAS["example39"])
        elif self.kind != "sup":
            raise DomainError(f"unknown norm kind {self.kind!r}")

    @classmethod
    def l1(cls) -> "NormSpec":
        return cls("lp", 1)

    @classmethod
    def lp(cls, p: float) -> "NormSpec":
        return cls("lp", p)

    @classmethod
    def sup(cls) -> "NormSpec":
        return cls("sup")

    @classmethod
    def marcinkiewicz(cls, lam: LambdaSeq) -> "NormSpec":
        return cls("marcinkiewicz", lam=lam)

    @classmethod
    def example39(cls) -> "NormSpec":
        return cls("example39")

    @property
    def symmetry_class(self) -> str:
        return "symmetric"

    @property
    def is_l1(self) -> bool:
        return self.kind == "lp" and self.p == 1

    @property
    def lambda_seq(self) -> LambdaSeq | None:
        return self.lam

    @property
    def exact(self) -> bool:
        """True when values on rational input are returned exactly."""
        if self.kind == "sup" or self.is_l1:
            return True
        if self.kind == "marcinkiewicz":
            return self.lam.exact
        return False

    @property
    def tolerance(self) -> float | None:
        return None if self.exact else FLOAT_RTOL

    @property
    def label(self) -> str:
        if self.is_l1:
            return "l1"
        if self.kind == "lp":
            p = self.p
            return f"lp:{int(p) if float(p).is_integer() else p}"
        if self.kind == "marcinkiewicz":
            return f"marcinkiewicz:{self.lam.name}"
        return self.kind

    def __str__(self):
        return self.label


def parse_norm(text: str) -> NormSpec:
    """Parse ``l1``, ``lp:<p>``, ``sup``, ``example39`` or ``marcinkiewicz:<file|name>``."""
    text = text.strip()
    if text == "l1":
        return NormSpec.l1()
    if text == "sup":
        return NormSpec.sup()
    if text == "example39":
        return NormSpec.example39()
    if text.startswith("lp:"):
        try:
            p = float(text[3:])
        except ValueError:
            raise FormatError(f"bad exponent in norm {text!r}") from None
        return NormSpec.lp(p)
    if text.startswith("marcinkiewicz:"):
        arg = text[len("marcinkiewicz:"):]
        if Path(arg).is_file():
            return NormSpec.marcinkiewicz(LambdaSeq.from_file(arg))
        if arg in BUILTIN_LAMBDAS:
            return NormSpec.marcinkiewicz(BUILTIN_LAMBDAS[arg])
        raise FormatError(f"no lambda file or builtin sequence named {arg!r}")
    raise FormatError(
        f"unknown norm {text!r}; expected l1, lp:<p>, sup, example39 or marcinkiewicz:<file>"
    )


# -- evaluation --------------------------------------------------------------


def _as_vector(x) -> np.ndarray:
    if isinstance(x, np.ndarray):
        arr = x
    else:
        items = list(x)
        if any(isinstance(v, Fraction) for v in items):
            arr = np.array(items, dtype=object)
        else:
            arr = np.array(items)
    if arr.ndim != 1:
        raise DomainError(f"expected a vector, got shape {arr.shape}")
    if arr.size == 0:
        raise DomainError("norm of an empty vector is undefined")
    if arr.dtype == object:
        if all(isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in arr):
            return arr
        return arr.astype(np.float64)
    if arr.dtype.kind in "iu":
        return arr.astype(np.int64, copy=False)
    if arr.dtype.kind in "fb":
        return arr.astype(np.float64, copy=False)
    raise DomainError(f"unsupported vector dtype {arr.dtype}")


def _int_root(total: int, p: int):
    """``total ** (1/p)``, exact when ``total`` is a perfect p-th power."""
    r = round(total ** (1.0 / p)) if total < 2**1000 else None
    if r is not None:
        for c in (r - 1, r, r + 1):
            if c >= 0 and c**p == total:
                return c
    return float(total) ** (1.0 / p)


def _lp(arr: np.ndarray, p: float):
    if arr.dtype != np.float64 and float(p).is_integer():
        ip = int(p)
        total = sum(abs(int(v)) ** ip for v in arr) if arr.dtype != object else sum(abs(v) ** ip for v in arr)
        if isinstance(total, Fraction):
            num = _int_root(total.numerator, ip)
            den = _int_root(total.denominator, ip)
            if isinstance(num, int) and isinstance(den, int):
                return normalize(Fraction(num, den))
            return float(total) ** (1.0 / ip)
        return _int_root(int(total), ip)
    a = np.abs(arr.astype(np.float64))
    top = a.max()
    if top == 0:
        return 0.0
    return float(top * np.sum((a / top) ** p) ** (1.0 / p))


def _marcinkiewicz(arr: np.ndarray, lam: LambdaSeq):
    d = arr.size
    weights = lam.floats(d) / np.arange(1, d + 1)
    mags = np.abs(arr.astype(np.float64))
    ordered = -np.sort(-mags)
    vals = weights * np.cumsum(ordered)
    best = float(vals.max())
    if not (lam.exact and arr.dtype != np.float64):
        return best
    # exact re-evaluation of the screened candidates
    cands = np.flatnonzero(vals >= best * (1 - _SCREEN_RTOL))
    exact_mags = sorted((abs(v) for v in arr.tolist()), reverse=True)
    prefix = [0]
    for v in exact_mags[: int(cands.max()) + 1]:
        prefix.append(prefix[-1] + v)
    return normalize(max(Fraction(lam.value(k + 1)) / (k + 1) * prefix[k + 1] for k in cands))


def norm_eval(spec: NormSpec, x):
    """Norm of a finite vector under ``spec``.

    Marcinkiewicz sequences given as a finite prefix must cover ``len(x)``.
    """
    arr = _as_vector(x)
    if spec.kind == "sup":
        v = max(abs(v) for v in arr) if arr.dtype == object else np.abs(arr).max()
        return normalize(v)
    if spec.kind == "lp":
        if spec.p == 1:
            v = sum(abs(v) for v in arr) if arr.dtype == object else np.abs(arr).sum()
            return normalize(v)
        return _lp(arr, spec.p)
    return _marcinkiewicz(arr, spec.lam)


def norm_floats(spec: NormSpec, rows: np.ndarray) -> np.ndarray:
    """Float norms of every row of a 2-D array; the fast screening path."""
    a = np.abs(np.asarray(rows, dtype=np.float64))
    if a.ndim != 2 or a.shape[1] == 0:
        raise DomainError(f"expected a non-empty 2-D array, got shape {a.shape}")
    if spec.kind == "sup":
        return a.max(axis=1)
    if spec.kind == "lp":
        if spec.p == 1:
            return a.sum(axis=1)
        top = a.max(axis=1)
        safe = np.where(top > 0, top, 1.0)
        return top * np.sum((a / safe[:, None]) ** spec.p, axis=1) ** (1.0 / spec.p)
    d = a.shape[1]
    weights = spec.lam.floats(d) / np.arange(1, d + 1)
    ordered = -np.sort(-a, axis=1)
    return (np.cumsum(ordered, axis=1) * weights).max(axis=1)


def norm_many(spec: NormSpec, rows: np.ndarray) -> list:
    """Norms of every row, exact where the kind permits."""
    rows = np.asarray(rows)
    if rows.dtype.kind in "iu" and (spec.kind == "sup" or spec.is_l1):
        a = np.abs(rows)
        out = a.max(axis=1) if spec.kind == "sup" else a.sum(axis=1, dtype=np.int64)
        return [int(v) for v in out]
    if spec.exact and rows.dtype.kind in "iuO":
        return [norm_eval(spec, r) for r in rows]
    return [float(v) for v in norm_floats(spec, rows)]


def lambda_of(spec: NormSpec, n: int):
    """``lambda(n)``: the norm of the sum of the first ``n`` unit vectors."""
    if n < 1:
        raise DomainError(f"lambda needs n >= 1, got {n}")
    if spec.kind == "sup":
        return 1
    if spec.kind == "lp":
        if spec.p == 1:
            return n
        if float(spec.p).is_integer():
            return _int_root(n, int(spec.p))
        return float(n) ** (1.0 / spec.p)
    return spec.lam.value(n)


def values_close(a, b, rtol: float = FLOAT_RTOL) -> bool:
    """Exact equality when both values are exact, relative tolerance otherwise."""
    if is_exact(a) and is_exact(b):
        return a == b
    a, b = float(a), float(b)
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))
