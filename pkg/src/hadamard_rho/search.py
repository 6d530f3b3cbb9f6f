"""Searches over combinatorial families of sign matrices.

Two problems live here.

``rho_n``: the largest prefix characteristic over all Hadamard matrices of an
order.  Orders 1, 2 and 4 are enumerated outright.  Larger orders scan the
row-operation orbit of a cataloged representative: for a symmetric norm the
prefix value at length ``m`` only depends on which rows are used and with
which sign, so the orbit maximum is the largest norm of ``sum_k c_k a_k`` over
``c`` in ``{0, +1, -1}**n``, i.e. ``3**n`` vectors.

``conjecture_min``: the smallest l1 norm of a sum of ``m_n`` distinct rows of
``S^(n)``, compared with the maximal Sylvester characteristic.  With ``C``
the complement of the chosen rows and ``t`` their number, the first column
contributes ``t`` and the objective is ``t + sum_{i>=2} |sum_{k in C} s_ki|``.
"""

from __future__ import annotations

import fcntl
import itertools
import json
import math
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import report
from .characteristics import rho_l1_closed_form, rho_profile
from .errors import BoundViolation, CheckpointError, DomainError, FormatError, ResourceError, WitnessMismatch
from .matrices import EXHAUSTIVE_ORDERS, SignMatrix, catalog_representative, enumerate_hadamard, sylvester_matrix
from .norms import NormSpec, is_exact, lambda_of, norm_eval, norm_floats, normalize, values_close

#: Default cap on ``3**order`` for the orbit search.
DEFAULT_ORBIT_BUDGET = 3**20

#: Default cap on the number of subsets scanned by the exhaustive conjecture mode.
DEFAULT_SUBSET_BUDGET = 2 * 10**8

#: Default number of annealing steps.
DEFAULT_ANNEAL_STEPS = 20_000

#: Largest order whose Hadamard matrices form a single equivalence class.
SINGLE_CLASS_MAX_ORDER = 12

_SCREEN_RTOL = 1e-9
_CHUNK = 1 << 16

CONJECTURE_MODES = ("exhaustive-subsets", "branch-and-bound", "anneal")


@dataclass
class SearchResult:
    objective: object
    witness: dict
    mode: str
    exact: bool
    exact_over_all: bool = False
    rhs: object = None
    verdict: str | None = None
    label: str = ""
    stats: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "objective": report.encode_number(self.objective),
            "witness": self.witness,
            "mode": self.mode,
            "exact": self.exact,
            "exact_over_all": self.exact_over_all,
            "label": self.label,
            "stats": self.stats,
        }
        if self.rhs is not None:
            out["min"] = out["objective"]
            out["rhs"] = report.encode_number(self.rhs)
            out["verdict"] = self.verdict
        return out

    @classmethod
    def from_json(cls, data: dict | str) -> "SearchResult":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            return cls(
                objective=report.decode_number(data["objective"]),
                witness=data["witness"],
                mode=data["mode"],
                exact=data["exact"],
                exact_over_all=data.get("exact_over_all", False),
                rhs=None if data.get("rhs") is None else report.decode_number(data["rhs"]),
                verdict=data.get("verdict"),
                label=data.get("label", ""),
                stats=data.get("stats", {}),
            )
        except KeyError as exc:
            raise FormatError(f"search result lacks field {exc.args[0]!r}") from None


# -- rho_n over all matrices of small order ------------------------------------------


def rho_n_exhaustive(order: int, norm: NormSpec) -> SearchResult:
    """Maximum of the prefix characteristic over every Hadamard matrix of order 1, 2 or 4."""
    if order not in EXHAUSTIVE_ORDERS:
        raise DomainError(f"exhaustive rho_n supports orders {EXHAUSTIVE_ORDERS}, got {order}")
    start = time.perf_counter()
    best = None
    count = 0
    for m in enumerate_hadamard(order, mode="exhaustive"):
        count += 1
        prof = rho_profile(m, norm)
        if best is None or _greater(prof.rho_max, best[0].rho_max):
            best = (prof, m)
    prof, m = best
    result = SearchResult(
        objective=prof.rho_max,
        witness={"matrix": m.tolist(), "m": prof.argmax[0]},
        mode="exhaustive",
        exact=True,
        exact_over_all=True,
        label="rho_n",
        stats={"matrices": count, "seconds": time.perf_counter() - start},
    )
    _recheck_matrix_witness(result, norm)
    return result


def _greater(a, b) -> bool:
    if is_exact(a) and is_exact(b):
        return a > b
    return float(a) > float(b)


def _recheck_matrix_witness(result: SearchResult, norm: NormSpec) -> None:
    prof = rho_profile(SignMatrix(np.array(result.witness["matrix"])), norm)
    if not values_close(prof.rho_max, result.objective, _SCREEN_RTOL):
        raise WitnessMismatch(f"witness gives {prof.rho_max}, search reported {result.objective}")


# -- orbit search ----------------------------------------------------------------------


def _coefficients(lo: int, hi: int, order: int) -> np.ndarray:
    """Rows of ``{0, 1, -1}`` coefficients for indices ``lo..hi-1`` (base-3 digits, least significant first)."""
    idx = np.arange(lo, hi, dtype=np.int64)
    out = np.empty((hi - lo, order), dtype=np.int64)
    for k in range(order):
        d = idx % 3
        idx //= 3
        out[:, k] = np.where(d == 2, -1, d)
    return out


def _key_kind(norm: NormSpec, order: int) -> str:
    if norm.kind == "sup" or norm.is_l1:
        return "int"
    if norm.kind == "lp" and float(norm.p).is_integer():
        p = int(norm.p)
        # sum |x|**p over `order` entries of size <= order must fit in int64
        if (p + 1) * math.log2(max(order, 2)) < 62:
            return "power"
    return "float"


def _keys(vectors: np.ndarray, norm: NormSpec, kind: str) -> np.ndarray:
    a = np.abs(vectors)
    if kind == "int":
        return a.max(axis=1) if norm.kind == "sup" else a.sum(axis=1)
    if kind == "power":
        return (a ** int(norm.p)).sum(axis=1)
    return norm_floats(norm, vectors)


def _orbit_part(h: np.ndarray, norm: NormSpec, lo: int, hi: int) -> tuple:
    """Best key and screened candidates over indices ``lo..hi-1``."""
    order = h.shape[0]
    kind = _key_kind(norm, order)
    best = None
    cands: list[int] = []
    for a in range(lo, hi, _CHUNK):
        b = min(hi, a + _CHUNK)
        vecs = _coefficients(a, b, order) @ h
        keys = _keys(vecs, norm, kind)
        top = keys.max()
        if kind == "float" and not norm.exact:
            top = float(top)
            if best is None or top > best:
                best = top
                cands = [(best, a + int(np.argmax(keys)))]
        elif kind == "float":
            top = float(top)
            if best is None or top > best:
                best = top
            cut = best * (1 - _SCREEN_RTOL)
            cands = [c for c in cands if c[0] >= cut]
            cands.extend((float(keys[j]), a + int(j)) for j in np.flatnonzero(keys >= cut))
        elif best is None or top > best:
            best = int(top)
            cands = [(best, a + int(np.argmax(keys)))]
    return best, cands


def _orbit_best(h: np.ndarray, norm: NormSpec, workers: int) -> tuple:
    """Exact best value and its smallest index over all ``3**order`` coefficient vectors."""
    order = h.shape[0]
    total = 3**order
    if workers > 1 and total > _CHUNK:
        step = -(-total // workers)
        bounds = [(lo, min(total, lo + step)) for lo in range(0, total, step)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_orbit_part, *zip(*[(h, norm, lo, hi) for lo, hi in bounds])))
    else:
        parts = [_orbit_part(h, norm, 0, total)]
    kind = _key_kind(norm, order)
    if kind != "float":
        best = max(p[0] for p in parts)
        idx = min(c[1] for p in parts for c in p[1] if c[0] == best)
        vec = (_coefficients(idx, idx + 1, order) @ h)[0]
        return norm_eval(norm, vec), idx
    top = max(p[0] for p in parts)
    cut = top * (1 - _SCREEN_RTOL)
    cands = sorted(c for p in parts for c in p[1] if c[0] >= cut)
    cands = sorted(cands, key=lambda c: c[1])
    if norm.exact:
        vecs = _coefficients_at([c[1] for c in cands], order) @ h
        best_val, best_idx = None, None
        for (_, idx), vec in zip(cands, vecs):
            v = norm_eval(norm, vec)
            if best_val is None or v > best_val:
                best_val, best_idx = v, idx
        return best_val, best_idx
    # float norm: strict float maximum, smallest index among exact float ties
    best_key = max(c[0] for c in cands)
    idx = min(c[1] for c in cands if c[0] == best_key)
    return best_key, idx


def _coefficients_at(indices, order: int) -> np.ndarray:
    if not indices:
        return np.empty((0, order), dtype=np.int64)
    return np.vstack([_coefficients(i, i + 1, order) for i in indices])


def _orbit_witness(h: np.ndarray, idx: int) -> tuple[np.ndarray, dict]:
    order = h.shape[0]
    coeffs = _coefficients(idx, idx + 1, order)[0]
    used = [k for k in range(order) if coeffs[k] != 0]
    rest = [k for k in range(order) if coeffs[k] == 0]
    rows = [coeffs[k] * h[k] for k in used] + [h[k] for k in rest]
    info = {
        "rows": [k + 1 for k in used],
        "signs": [int(coeffs[k]) for k in used],
        "m": len(used),
    }
    return np.array(rows, dtype=np.int64), info


def rho_n_subset_sign(
    representative: SignMatrix,
    norm: NormSpec,
    budget: int | None = None,
    workers: int = 1,
) -> SearchResult:
    """Maximum of the prefix characteristic over the row-operation orbit of a matrix and its transpose.

    Each of the ``3**order`` coefficient vectors is scored in bulk; exact
    norms get a float screen followed by an exact re-evaluation of the near
    winners.  Ties go to the smallest base-3 index.
    """
    m = representative.matrix if hasattr(representative, "matrix") else representative
    order = m.order
    budget = DEFAULT_ORBIT_BUDGET if budget is None else budget
    if 3**order > budget:
        raise ResourceError(
            f"orbit search at order {order} needs 3**{order} = {3**order} evaluations, budget is {budget}; "
            "use rho_n_anneal for a heuristic lower bound"
        )
    start = time.perf_counter()
    h = m.entries.astype(np.int64)
    seeds = [("matrix", h)]
    if not np.array_equal(h, h.T):
        seeds.append(("transpose", np.ascontiguousarray(h.T)))
    best = None
    for name, seed in seeds:
        val, idx = _orbit_best(seed, norm, workers)
        if best is None or _greater(val, best[0]):
            best = (val, idx, name, seed)
    val, idx, name, seed = best
    rows, info = _orbit_witness(seed, idx)
    info["transposed"] = name == "transpose"
    info["matrix"] = rows.tolist()
    result = SearchResult(
        objective=val,
        witness=info,
        mode="subset-sign",
        exact=True,
        exact_over_all=order <= SINGLE_CLASS_MAX_ORDER,
        label=_rho_n_label(order),
        stats={"evaluations": 3**order * len(seeds), "seconds": time.perf_counter() - start, "workers": workers},
    )
    _recheck_matrix_witness(result, norm)
    return result


def _rho_n_label(order: int) -> str:
    return "rho_n" if order <= SINGLE_CLASS_MAX_ORDER else "class-restricted lower bound on rho_n"


def rho_n_anneal(
    representative: SignMatrix,
    norm: NormSpec,
    seed: int = 0,
    steps: int = DEFAULT_ANNEAL_STEPS,
) -> SearchResult:
    """Seeded local search over coefficient vectors; a lower bound on the orbit maximum."""
    m = representative.matrix if hasattr(representative, "matrix") else representative
    h = m.entries.astype(np.int64)
    order = m.order
    rng = random.Random(seed)
    coeffs = np.array([rng.choice((-1, 0, 1)) for _ in range(order)], dtype=np.int64)
    coeffs[rng.randrange(order)] = 1
    vec = coeffs @ h
    cur = float(norm_floats(norm, vec[None, :])[0])
    best = (cur, coeffs.copy())
    for step in range(steps):
        temp = 2.0 * (0.01 ** (step / max(1, steps)))
        k = rng.randrange(order)
        new = rng.choice([c for c in (-1, 0, 1) if c != coeffs[k]])
        cand = vec + (new - coeffs[k]) * h[k]
        if not cand.any():
            continue
        val = float(norm_floats(norm, cand[None, :])[0])
        if val >= cur or rng.random() < math.exp((val - cur) / (temp * max(1.0, cur) * 0.05)):
            coeffs[k] = new
            vec, cur = cand, val
            if cur > best[0]:
                best = (cur, coeffs.copy())
    coeffs = best[1]
    idx = sum(int(c % 3) * 3**k for k, c in enumerate(coeffs))
    rows, info = _orbit_witness(h, idx)
    info["matrix"] = rows.tolist()
    info["transposed"] = False
    objective = norm_eval(norm, coeffs @ h) if norm.exact else best[0]
    result = SearchResult(
        objective=objective,
        witness=info,
        mode="anneal",
        exact=False,
        label="heuristic lower bound on rho_n",
        stats={"steps": steps, "seed": seed},
    )
    _recheck_matrix_witness(result, norm)
    return result


def rho_n(order: int, norm: NormSpec, budget: int | None = None, workers: int = 1) -> SearchResult:
    """Exhaustive for orders 1, 2, 4; orbit search on the catalog representative otherwise."""
    if order in EXHAUSTIVE_ORDERS:
        return rho_n_exhaustive(order, norm)
    return rho_n_subset_sign(catalog_representative(order), norm, budget, workers)


def signed_prefix_max(m: SignMatrix, norm: NormSpec, signs) -> object:
    """``max_k ||sum_{j<=k} theta_j a_j||`` for one sign pattern ``theta``.

    Every call also checks the ceiling ``lambda(isqrt(n)+1) * n`` and raises
    :class:`BoundViolation` if the value exceeds it.
    """
    m = m.matrix if hasattr(m, "matrix") else m
    theta = np.asarray(list(signs), dtype=np.int64)
    if theta.shape != (m.order,):
        raise DomainError(f"need {m.order} signs, got {theta.size}")
    if not np.all(np.abs(theta) == 1):
        raise DomainError("signs must be +1 or -1")
    rows = m.entries.astype(np.int64) * theta[:, None]
    value = rho_profile(rows, norm).rho_max
    ceiling = lambda_of(norm, math.isqrt(m.order) + 1)
    ceiling = normalize(Fraction(ceiling) * m.order) if is_exact(ceiling) else float(ceiling) * m.order
    if is_exact(value) and is_exact(ceiling):
        broken = value > ceiling
    else:
        broken = float(value) > float(ceiling) * (1 + _SCREEN_RTOL)
    if broken:
        raise BoundViolation(f"signed prefix max {value} exceeds lambda(isqrt(n)+1)*n = {ceiling}")
    return value


# -- conjecture ------------------------------------------------------------------------


def prefix_length(n: int, prefix: str = "m") -> int:
    cf = rho_l1_closed_form(n)
    if prefix == "m":
        return cf.m
    if prefix == "m_prime":
        return cf.m_prime
    raise DomainError(f"prefix must be 'm' or 'm_prime', got {prefix!r}")


def subset_objective(n: int, subset) -> int:
    """``||sum_{k in subset} a_k||_1`` for 1-based rows of ``S^(n)``, by direct summation."""
    rows = sorted(set(subset))
    if len(rows) != len(list(subset)):
        raise DomainError("subset has repeated rows")
    if any(not 1 <= k <= 2**n for k in rows):
        raise DomainError(f"rows must lie in 1..{2**n}")
    cols = np.arange(2**n, dtype=np.int64)
    total = np.zeros(2**n, dtype=np.int64)
    for k in rows:
        parity = np.array([((k - 1) & i).bit_count() & 1 for i in cols])
        total += 1 - 2 * parity
    return int(np.abs(total).sum())


def permutation_objective(n: int, sigma, prefix: str = "m") -> int:
    """``||sum_{k <= t} a_{sigma(k)}||_1`` for a 1-based permutation ``sigma``."""
    sigma = list(sigma)
    if sorted(sigma) != list(range(1, 2**n + 1)):
        raise DomainError(f"sigma must be a permutation of 1..{2**n}")
    rows = sylvester_matrix(n).entries.astype(np.int64)
    t = prefix_length(n, prefix)
    total = rows[[s - 1 for s in sigma[:t]]].sum(axis=0)
    return int(np.abs(total).sum())


def _conjecture_setup(n: int, prefix: str):
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    t = prefix_length(n, prefix)
    rows = sylvester_matrix(n, budget=max(2**20, 4**n)).entries.astype(np.int64)
    return rows, t, rho_l1_closed_form(n).value


def _verdict(value, rhs, exact: bool, complete: bool = True) -> str:
    if value < rhs:
        return "counterexample"
    if exact:
        return "holds"
    return "not-refuted" if complete else "incomplete"


def _conjecture_result(n, t, rhs, value, complement, mode, exact, stats, prefix, complete=True) -> SearchResult:
    order = 2**n
    comp = sorted(complement)
    subset = [k + 1 for k in range(order) if k not in set(comp)]
    check = subset_objective(n, subset)
    if check != value:
        raise WitnessMismatch(f"subset re-evaluates to {check}, search reported {value}")
    return SearchResult(
        objective=value,
        witness={"subset": subset, "prefix_length": t, "prefix": prefix},
        mode=mode,
        exact=exact,
        exact_over_all=exact,
        rhs=rhs,
        verdict=_verdict(value, rhs, exact, complete),
        label=f"min over {t}-row subsets of S^({n})",
        stats=stats,
    )


def conjecture_min(
    n: int,
    mode: str = "branch-and-bound",
    seed: int | None = None,
    budget: int | None = None,
    prefix: str = "m",
    symmetry: bool = True,
    checkpoint: str | Path | None = None,
    stop_after: int | None = None,
    workers: int = 1,
) -> SearchResult:
    """Smallest l1 norm of a sum of ``t`` distinct rows of ``S^(n)``, compared with the closed form.

    ``t`` is ``m_n`` (``prefix="m"``) or ``m_n'`` (``prefix="m_prime"``).  The
    verdict is ``"holds"`` for a complete run whose minimum reaches the
    closed form, ``"counterexample"`` whenever a subset falls below it, and
    ``"not-refuted"``/``"incomplete"`` for heuristic or interrupted runs.

    ``budget`` caps subsets (exhaustive), nodes (branch-and-bound) or steps
    (anneal).  ``stop_after`` interrupts after that many nodes or steps in
    this call and, with ``checkpoint``, saves the state for a later resume.
    """
    if mode == "exhaustive-subsets":
        return _conjecture_exhaustive(n, budget, prefix, workers)
    if mode == "branch-and-bound":
        return _conjecture_bnb(n, budget, prefix, symmetry, checkpoint, stop_after)
    if mode == "anneal":
        return _conjecture_anneal(n, 0 if seed is None else seed, budget, prefix, checkpoint, stop_after)
    raise DomainError(f"unknown mode {mode!r}; expected one of {CONJECTURE_MODES}")


# exhaustive --------------------------------------------------------------------------


def _suffix_size(order: int, c: int) -> int:
    k = 1
    while k < c and math.comb(order, k + 1) <= 2**18:
        k += 1
    return min(k, c)


def _exhaustive_part(cols: np.ndarray, c: int, k: int, firsts: list[int]) -> tuple:
    """Scan complements of size ``c`` whose first element is in ``firsts`` (all of them if ``c == k``)."""
    order = cols.shape[0]
    table = np.array(list(itertools.combinations(range(order), k)), dtype=np.int64)
    sums = cols[table].sum(axis=1)
    starts = np.searchsorted(table[:, 0], np.arange(order + 1), side="left")
    best, best_c, scanned = None, None, 0

    def scan(pref: tuple, pref_sum, lo: int):
        nonlocal best, best_c, scanned
        s = starts[lo]
        vals = np.abs(sums[s:] + pref_sum).sum(axis=1)
        scanned += len(vals)
        j = len(vals) - 1 - int(np.argmin(vals[::-1]))
        v = int(vals[j])
        if best is None or v <= best:
            best, best_c = v, pref + tuple(int(x) for x in table[s + j])

    if c == k:
        scan((), 0, 0)
        return best, best_c, scanned
    for a in firsts:
        for rest in itertools.combinations(range(a + 1, order - k), c - k - 1):
            pref = (a,) + rest
            scan(pref, cols[list(pref)].sum(axis=0), pref[-1] + 1)
    return best, best_c, scanned


def _conjecture_exhaustive(n: int, budget: int | None, prefix: str, workers: int) -> SearchResult:
    rows, t, rhs = _conjecture_setup(n, prefix)
    order = rows.shape[0]
    c = order - t
    total = math.comb(order, t)
    budget = DEFAULT_SUBSET_BUDGET if budget is None else budget
    if total > budget:
        raise ResourceError(f"C({order},{t}) = {total} subsets exceeds the budget {budget}; use branch-and-bound")
    start = time.perf_counter()
    cols = rows[:, 1:]
    if c == 0:
        best, best_c, scanned = t + int(np.abs(cols.sum(axis=0)).sum()), (), 1
    else:
        k = _suffix_size(order, c)
        firsts = list(range(order - k - (c - k) + 1)) if c > k else []
        if workers > 1 and len(firsts) > 1:
            groups = [firsts[w::workers] for w in range(workers)]
            with ProcessPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(_exhaustive_part, *zip(*[(cols, c, k, g) for g in groups if g])))
        else:
            parts = [_exhaustive_part(cols, c, k, firsts)]
        parts = [p for p in parts if p[0] is not None]
        low = min(p[0] for p in parts)
        best_c = max(p[1] for p in parts if p[0] == low)  # lexicographically largest complement
        best = low + t
        scanned = sum(p[2] for p in parts)
    stats = {"subsets": scanned, "seconds": time.perf_counter() - start}
    return _conjecture_result(n, t, rhs, best, best_c, "exhaustive-subsets", True, stats, prefix)


# branch and bound -------------------------------------------------------------------


def forced_complement(n: int, c: int) -> list[int]:
    """Rows (0-based) that may be assumed to lie in the complement, up to affine symmetry.

    The objective is invariant under ``u -> A u + v`` on row indices viewed as
    vectors of ``GF(2)**n``.  Translating puts ``0`` in the complement; its
    span then has dimension ``d >= ceil(log2 c)`` and a basis inside the
    complement can be moved onto unit vectors.
    """
    if c <= 0:
        return []
    d = min(n, (c - 1).bit_length())
    return [0] + [1 << j for j in range(d)]


class _Checkpoint:
    """JSON state file guarded by an advisory lock on ``<path>.lock``."""

    def __init__(self, path: str | Path | None):
        self.path = None if path is None else Path(path)
        self._lock = None

    def __enter__(self):
        if self.path is not None:
            self._lock = open(str(self.path) + ".lock", "w")
            try:
                fcntl.flock(self._lock, fcntl.LOCK_EX | fcntl.LOCK_NB)
            except BlockingIOError:
                self._lock.close()
                raise CheckpointError(f"checkpoint {self.path} is locked by another process") from None
        return self

    def __exit__(self, *exc):
        if self._lock is not None:
            fcntl.flock(self._lock, fcntl.LOCK_UN)
            self._lock.close()
        return False

    def load(self, config: dict) -> dict | None:
        if self.path is None or not self.path.exists():
            return None
        text = self.path.read_text()
        if not text.strip():
            return None
        try:
            state = json.loads(text)
            saved = state["config"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise CheckpointError(f"corrupt checkpoint {self.path}: {exc}") from None
        if saved != config:
            raise CheckpointError(f"checkpoint config mismatch: file has {saved}, run has {config}")
        return state

    def save(self, state: dict) -> None:
        if self.path is None:
            return
        tmp = self.path.with_name(self.path.name + ".tmp")
        tmp.write_text(json.dumps(state))
        os.replace(tmp, self.path)


def load_checkpoint(path: str | Path) -> dict:
    """Read a checkpoint without a config check (for inspection)."""
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"corrupt checkpoint {path}: {exc}") from None


def _column_floor(partial: np.ndarray, rem: int, pos: np.ndarray, neg: np.ndarray) -> int:
    """Smallest possible ``sum_i |partial_i + (picked column sum)_i|`` when ``rem`` more rows are picked.

    Columns are relaxed independently: ``x`` of the picks carry ``-1`` in a
    column, with ``x`` limited by how many ``+1``/``-1`` remain there.
    """
    target = partial + rem
    lo = np.maximum(0, rem - pos)
    hi = np.minimum(rem, neg)
    x1 = np.clip(target // 2, lo, hi)
    x2 = np.clip(target // 2 + 1, lo, hi)
    return int(np.minimum(np.abs(target - 2 * x1), np.abs(target - 2 * x2)).sum())


def _conjecture_bnb(n, budget, prefix, symmetry, checkpoint, stop_after) -> SearchResult:
    rows, t, rhs = _conjecture_setup(n, prefix)
    order = rows.shape[0]
    c = order - t
    cols = rows[:, 1:]
    forced = forced_complement(n, c) if symmetry else []
    cands = [k for k in range(order) if k not in set(forced)]
    r = c - len(forced)
    big_l = len(cands)
    cand_cols = cols[cands] if cands else np.zeros((0, cols.shape[1]), dtype=np.int64)
    neg_suffix = np.zeros((big_l + 1, cols.shape[1]), dtype=np.int64)
    for j in range(big_l - 1, -1, -1):
        neg_suffix[j] = neg_suffix[j + 1] + (cand_cols[j] < 0)
    base = cols[forced].sum(axis=0) if forced else np.zeros(cols.shape[1], dtype=np.int64)

    def bound(partial, nxt, rem):
        size = big_l - nxt
        if size < rem:
            return None
        neg = neg_suffix[nxt]
        return t + _column_floor(partial, rem, size - neg, neg)

    config = {"mode": "branch-and-bound", "n": n, "prefix": prefix, "symmetry": symmetry}
    start = time.perf_counter()
    with _Checkpoint(checkpoint) as ck:
        state = ck.load(config)
        if state is None:
            ident = list(range(t, order))  # complement of the first t rows
            path, nxt = [], 0
            best = t + int(np.abs(cols[ident].sum(axis=0)).sum())
            best_c = ident
            nodes = pruned = leaves = 0
            done = False
        else:
            path, nxt = state["path"], state["nxt"]
            best, best_c = state["best"], state["best_complement"]
            nodes, pruned, leaves = state["nodes"], state["pruned"], state["leaves"]
            done = state["done"]
        partial = base + (cand_cols[path].sum(axis=0) if path else 0)
        this_call = 0
        interrupted = False

        while not done:
            if (budget is not None and nodes >= budget) or (stop_after is not None and this_call >= stop_after):
                interrupted = True
                break
            nodes += 1
            this_call += 1
            rem = r - len(path)
            lb = bound(partial, nxt, rem) if rem > 0 else None
            if rem == 0:
                v = t + int(np.abs(partial).sum())
                leaves += 1
                if v < best:
                    best, best_c = v, forced + [cands[p] for p in path]
                exhausted = True
            elif lb is None or lb >= best:
                pruned += 1
                exhausted = True
            elif rem == 1:
                vals = t + np.abs(cand_cols[nxt:] + partial).sum(axis=1)
                leaves += len(vals)
                j = int(np.argmin(vals))
                if int(vals[j]) < best:
                    best, best_c = int(vals[j]), forced + [cands[p] for p in path] + [cands[nxt + j]]
                exhausted = True
            else:
                path.append(nxt)
                partial = partial + cand_cols[nxt]
                nxt += 1
                exhausted = False
            if exhausted:
                if not path:
                    done = True
                    break
                last = path.pop()
                partial = partial - cand_cols[last]
                nxt = last + 1

        lower = best
        if not done:
            # unvisited completions: later siblings at every depth of the current path
            frames, p = [], base.copy()
            for d, pos in enumerate(path):
                frames.append((p.copy(), pos + 1, r - d))
                p = p + cand_cols[pos]
            frames.append((partial, nxt, r - len(path)))
            for fp, fnxt, frem in frames:
                lb = bound(fp, fnxt, frem) if frem > 0 else t + int(np.abs(fp).sum())
                if lb is not None:
                    lower = min(lower, lb)
        ck.save({
            "config": config,
            "path": path,
            "nxt": nxt,
            "best": best,
            "best_complement": sorted(int(x) for x in best_c),
            "nodes": nodes,
            "pruned": pruned,
            "leaves": leaves,
            "done": done,
        })
    stats = {
        "nodes": nodes,
        "pruned": pruned,
        "leaves": leaves,
        "forced": forced,
        "seconds": time.perf_counter() - start,
        "complete": done,
        "lower_bound": lower,
    }
    if interrupted:
        stats["interrupted"] = True
    return _conjecture_result(n, t, rhs, best, best_c, "branch-and-bound", done, stats, prefix, complete=done)


# annealing ---------------------------------------------------------------------------


def _rng_state_to_json(state) -> list:
    version, internal, gauss = state
    return [version, list(internal), gauss]


def _rng_state_from_json(data) -> tuple:
    version, internal, gauss = data
    return (version, tuple(internal), gauss)


def _conjecture_anneal(n, seed, budget, prefix, checkpoint, stop_after) -> SearchResult:
    rows, t, rhs = _conjecture_setup(n, prefix)
    order = rows.shape[0]
    c = order - t
    cols = rows[:, 1:]
    steps = DEFAULT_ANNEAL_STEPS if budget is None else budget
    config = {"mode": "anneal", "n": n, "prefix": prefix, "seed": seed, "steps": steps}
    start = time.perf_counter()
    with _Checkpoint(checkpoint) as ck:
        state = ck.load(config)
        rng = random.Random(seed)
        if state is None:
            comp = sorted(rng.sample(range(order), c))
            step = 0
            total = cols[comp].sum(axis=0) if comp else np.zeros(cols.shape[1], dtype=np.int64)
            cur = t + int(np.abs(total).sum())
            best, best_c = cur, list(comp)
            accepted = 0
        else:
            rng.setstate(_rng_state_from_json(state["rng"]))
            comp, step = state["current"], state["step"]
            best, best_c = state["best"], state["best_complement"]
            accepted = state["accepted"]
            total = cols[comp].sum(axis=0) if comp else np.zeros(cols.shape[1], dtype=np.int64)
            cur = t + int(np.abs(total).sum())
        in_c = set(comp)
        this_call = 0
        while step < steps and 0 < c < order:
            if stop_after is not None and this_call >= stop_after:
                break
            temp = 3.0 * (0.02 ** (step / steps))
            out_k = comp[rng.randrange(c)]
            in_k = rng.randrange(order - c)
            in_k = sorted(set(range(order)) - in_c)[in_k]
            new_total = total - cols[out_k] + cols[in_k]
            val = t + int(np.abs(new_total).sum())
            if val <= cur or rng.random() < math.exp((cur - val) / temp):
                comp[comp.index(out_k)] = in_k
                in_c.discard(out_k)
                in_c.add(in_k)
                total, cur = new_total, val
                accepted += 1
                if cur < best or (cur == best and sorted(comp) > sorted(best_c)):
                    best, best_c = cur, sorted(comp)
            step += 1
            this_call += 1
        ck.save({
            "config": config,
            "rng": _rng_state_to_json(rng.getstate()),
            "current": comp,
            "step": step,
            "best": best,
            "best_complement": sorted(best_c),
            "accepted": accepted,
        })
    stats = {"steps": step, "accepted": accepted, "seed": seed, "seconds": time.perf_counter() - start}
    complete = step >= steps or not 0 < c < order
    return _conjecture_result(n, t, rhs, best, best_c, "anneal", False, stats, prefix, complete=complete)
