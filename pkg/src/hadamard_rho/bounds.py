"""Closed-form estimates for the Sylvester and Hadamard characteristics.

Every estimate is a total function of ``(n, norm)``; nothing here checks that
an order actually carries a Hadamard matrix.  :func:`sylvester_report` and
:func:`hadamard_report` collect the estimates that apply to a norm and, when a
computed value is supplied, attach a pass/fail verdict with slack to each.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from . import report
from .errors import DomainError, FormatError
from .norms import NormSpec, is_exact, lambda_of, normalize, parse_norm

#: Relative slack for verdicts that involve a float.
VERDICT_RTOL = 1e-9

_INV_SQRT2 = 1 / math.sqrt(2)


class Pair(NamedTuple):
    term_a: object
    term_b: object
    value: object


def _mul(a, b):
    if is_exact(a) and is_exact(b):
        return normalize(Fraction(a) * Fraction(b))
    return float(a) * float(b)


def _lt(a, b) -> bool:
    if is_exact(a) and is_exact(b):
        return a < b
    return float(a) < float(b)


def _power_of_n(n: int, num: int, den: int):
    """``n ** (num/den)``, exact when it is an integer."""
    big = n**num
    r = round(big ** (1.0 / den))
    for c in (r - 1, r, r + 1):
        if c >= 0 and c**den == big:
            return c
    return float(n) ** (num / den)


def sylvester_upper(n: int, norm: NormSpec) -> Pair:
    """``min{(1 + sum_j 2**-j lam(2**(j-1))) 2**n, lam(n) 2**n}``."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    lams = [lambda_of(norm, 2 ** (j - 1)) for j in range(1, n + 1)]
    if all(is_exact(v) for v in lams):
        dyadic = 1 + sum(Fraction(v, 2**j) for j, v in enumerate(lams, start=1))
    else:
        dyadic = 1 + sum(float(v) / 2**j for j, v in enumerate(lams, start=1))
    term_a = _mul(dyadic, 2**n)
    term_b = _mul(lambda_of(norm, n), 2**n)
    return Pair(term_a, term_b, term_a if _lt(term_a, term_b) else term_b)


def sylvester_lower(n: int, norm: NormSpec, basis_class: str = "symmetric") -> Pair:
    """``max{(n+2)/c * lam(2**n), 2**n}`` with ``c = 3`` (symmetric) or ``6`` (subsymmetric)."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if basis_class == "symmetric":
        factor = Fraction(n + 2, 3)
    elif basis_class == "subsymmetric":
        factor = Fraction(n + 2, 6)
    else:
        raise DomainError(f"basis class must be 'symmetric' or 'subsymmetric', got {basis_class!r}")
    term_a = _mul(factor, lambda_of(norm, 2**n))
    term_b = 2**n
    return Pair(term_a, term_b, term_b if _lt(term_a, term_b) else term_a)


def type_p_constant(p: float, t_p: float) -> float:
    if not 1 < p <= 2:
        raise DomainError(f"type p must lie in (1, 2], got {p}")
    if not t_p > 0:
        raise DomainError(f"type constant must be positive, got {t_p}")
    return 1 + t_p / (2 - 2 ** (1 / p))


def type_p_upper(n: int, p: float, t_p: float) -> float:
    """``c * 2**n`` with ``c = 1 + T_p / (2 - 2**(1/p))``; ``T_p`` comes from the caller."""
    return type_p_constant(p, t_p) * 2**n


def hadamard_lower(order: int, norm: NormSpec) -> Pair:
    """``max{lam(n) sqrt(n) / sqrt(2), n}``."""
    if order < 1:
        raise DomainError(f"order must be >= 1, got {order}")
    term_a = float(lambda_of(norm, order)) * math.sqrt(order) * _INV_SQRT2
    term_b = order
    return Pair(term_a, term_b, term_b if term_a < term_b else term_a)


def hadamard_upper_subsym(order: int, norm: NormSpec):
    """``lam(isqrt(n) + 1) * n``."""
    if order < 1:
        raise DomainError(f"order must be >= 1, got {order}")
    return _mul(lambda_of(norm, math.isqrt(order) + 1), order)


class LpBounds(NamedTuple):
    lower: object
    upper: object


def lp_rho_n_bounds(order: int, p: float) -> LpBounds:
    """Two-sided bounds on ``rho_n`` in l_p; collapses to ``(n, n)`` once ``p >= 2``."""
    if order < 1:
        raise DomainError(f"order must be >= 1, got {order}")
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if p >= 2:
        return LpBounds(order, order)
    if p == 1:
        power = _power_of_n(order, 3, 2)
    else:
        power = float(order) ** ((p + 2) / (2 * p))
    return LpBounds(float(power) * _INV_SQRT2, power)


def lp_upper(order: int, p: float):
    """``max{n**((p+2)/(2p)), n}``, valid for every l_p."""
    return lp_rho_n_bounds(order, p).upper


def hat_rho_bounds(kind: str, n: int):
    """Ceiling on the unit-ball variant: ``n 2**n`` (Sylvester exponent) or ``n sqrt(n)`` (order)."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if kind == "sylvester":
        return n * 2**n
    if kind == "hadamard":
        return _power_of_n(n, 3, 2)
    raise DomainError(f"kind must be 'sylvester' or 'hadamard', got {kind!r}")


class Comparison(NamedTuple):
    n: int
    term_a: object
    term_b: object
    smaller: str


def upper_terms_comparison(n: int, norm: NormSpec) -> Comparison:
    """Which of the two Sylvester upper-bound terms is smaller at this ``n``."""
    a, b, _ = sylvester_upper(n, norm)
    if _lt(a, b):
        smaller = "term_a"
    elif _lt(b, a):
        smaller = "term_b"
    else:
        smaller = "equal"
    return Comparison(n, a, b, smaller)


def crossover_table(norm: NormSpec, n_max: int) -> list[Comparison]:
    return [upper_terms_comparison(n, norm) for n in range(1, n_max + 1)]


# -- reports -----------------------------------------------------------------


@dataclass(frozen=True)
class Bound:
    name: str
    side: str  # "lower" | "upper"
    value: object


@dataclass(frozen=True)
class Verdict:
    name: str
    ok: bool | None
    slack: object


def _verdict(b: Bound, rho, applies: bool) -> Verdict:
    if not applies:
        return Verdict(b.name, None, None)
    diff_exact = is_exact(rho) and is_exact(b.value)
    if diff_exact:
        slack = normalize(Fraction(rho) - Fraction(b.value)) if b.side == "lower" else normalize(
            Fraction(b.value) - Fraction(rho)
        )
        return Verdict(b.name, slack >= 0, slack)
    r, v = float(rho), float(b.value)
    slack = r - v if b.side == "lower" else v - r
    return Verdict(b.name, slack >= -VERDICT_RTOL * max(1.0, abs(r), abs(v)), slack)


@dataclass
class BoundReport:
    n: int
    norm: NormSpec
    kind: str
    bounds: list[Bound]
    rho: object = None
    rho_is_lower_bound: bool = False
    verdicts: list[Verdict] = field(default_factory=list)

    def __post_init__(self):
        if self.rho is not None and not self.verdicts:
            self.verdicts = [
                _verdict(b, self.rho, applies=not (self.rho_is_lower_bound and b.side == "lower"))
                for b in self.bounds
            ]

    @property
    def lower(self) -> list[tuple[str, object]]:
        return [(b.name, b.value) for b in self.bounds if b.side == "lower"]

    @property
    def upper(self) -> list[tuple[str, object]]:
        return [(b.name, b.value) for b in self.bounds if b.side == "upper"]

    @property
    def ok(self) -> bool:
        return all(v.ok is not False for v in self.verdicts)

    @property
    def broken(self) -> list[str]:
        return [v.name for v in self.verdicts if v.ok is False]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "kind": self.kind,
            "norm": self.norm.label,
            "bounds": [{"name": b.name, "side": b.side, "value": report.encode_number(b.value)} for b in self.bounds],
            "rho": None if self.rho is None else report.encode_number(self.rho),
            "rho_is_lower_bound": self.rho_is_lower_bound,
            "verdicts": [
                {"name": v.name, "ok": v.ok, "slack": None if v.slack is None else report.encode_number(v.slack)}
                for v in self.verdicts
            ],
            "tolerance": VERDICT_RTOL,
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "BoundReport":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            bounds = [Bound(b["name"], b["side"], report.decode_number(b["value"])) for b in data["bounds"]]
            verdicts = [
                Verdict(v["name"], v["ok"], None if v["slack"] is None else report.decode_number(v["slack"]))
                for v in data["verdicts"]
            ]
            rho = None if data["rho"] is None else report.decode_number(data["rho"])
            return cls(
                data["n"], parse_norm(data["norm"]), data.get("kind", "sylvester"), bounds, rho,
                data.get("rho_is_lower_bound", False), verdicts,
            )
        except KeyError as exc:
            raise FormatError(f"bound report lacks field {exc.args[0]!r}") from None

    def __eq__(self, other):
        if not isinstance(other, BoundReport):
            return NotImplemented
        return self.to_json() == other.to_json()


def _lp_exponent(norm: NormSpec) -> float | None:
    if norm.kind == "sup":
        return math.inf
    if norm.kind == "lp":
        return norm.p
    return None


def sylvester_report(
    n: int,
    norm: NormSpec,
    rho=None,
    basis_class: str = "symmetric",
    type_p: tuple[float, float] | None = None,
) -> BoundReport:
    """All estimates on ``rho^(n)`` for ``norm``; ``type_p = (p, T_p)`` adds the type-p ceiling."""
    up = sylvester_upper(n, norm)
    lo = sylvester_lower(n, norm, basis_class)
    scale = "(n+2)/3" if basis_class == "symmetric" else "(n+2)/6"
    bounds = [
        Bound(f"{scale}*lambda(2^n)", "lower", lo.term_a),
        Bound("2^n", "lower", lo.term_b),
        Bound("dyadic lambda sum*2^n", "upper", up.term_a),
        Bound("lambda(n)*2^n", "upper", up.term_b),
    ]
    p = _lp_exponent(norm)
    if p is not None:
        bounds.append(Bound("lp power of order", "upper", lp_upper(2**n, p)))
    if type_p is not None:
        bounds.append(Bound("type p", "upper", type_p_upper(n, *type_p)))
    return BoundReport(n, norm, "sylvester", bounds, rho)


def hadamard_report(order: int, norm: NormSpec, rho=None, rho_is_lower_bound: bool = False) -> BoundReport:
    """All estimates on ``rho_n``; lower-side verdicts are skipped when ``rho`` is only a lower bound."""
    lo = hadamard_lower(order, norm)
    bounds = [
        Bound("lambda(n)*sqrt(n/2)", "lower", lo.term_a),
        Bound("n", "lower", lo.term_b),
        Bound("lambda(isqrt(n)+1)*n", "upper", hadamard_upper_subsym(order, norm)),
    ]
    p = _lp_exponent(norm)
    if p is not None:
        lp = lp_rho_n_bounds(order, p)
        bounds.append(Bound("lp power of order", "upper", lp.upper))
        if p < 2:
            bounds.append(Bound("lp power of order/sqrt(2)", "lower", lp.lower))
    return BoundReport(order, norm, "hadamard", bounds, rho, rho_is_lower_bound)
