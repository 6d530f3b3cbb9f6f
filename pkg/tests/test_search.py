import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hadamard_rho.characteristics import rho_l1_closed_form, rho_profile
from hadamard_rho.errors import BoundViolation, CheckpointError, DomainError, ResourceError
from hadamard_rho.matrices import catalog_representative, implemented_orders, sylvester_matrix, transform
from hadamard_rho.norms import BUILTIN_LAMBDAS, NormSpec, norm_eval, values_close
from hadamard_rho.search import (
    SearchResult,
    conjecture_min,
    forced_complement,
    load_checkpoint,
    permutation_objective,
    prefix_length,
    rho_n,
    rho_n_anneal,
    rho_n_exhaustive,
    rho_n_subset_sign,
    signed_prefix_max,
    subset_objective,
)

NORMS = [
    NormSpec.l1(),
    NormSpec.lp(1.5),
    NormSpec.lp(2),
    NormSpec.lp(3),
    NormSpec.sup(),
    NormSpec.marcinkiewicz(BUILTIN_LAMBDAS["sqrt"]),
    NormSpec.example39(),
]
IDS = [n.label for n in NORMS]


def brute_min(n, t):
    """Minimum over every t-subset, scored with plain Python sums."""
    s = sylvester_matrix(n).tolist()
    best = None
    for rows in itertools.combinations(range(len(s)), t):
        v = sum(abs(sum(s[k][i] for k in rows)) for i in range(len(s)))
        best = v if best is None else min(best, v)
    return best


class TestRhoN:
    @pytest.mark.parametrize("norm", NORMS, ids=IDS)
    def test_orbit_matches_exhaustive_at_four(self, norm):
        ex = rho_n_exhaustive(4, norm)
        orb = rho_n_subset_sign(sylvester_matrix(2), norm)
        assert values_close(ex.objective, orb.objective, 1e-12)
        assert ex.exact_over_all and orb.exact_over_all

    def test_known_order_four(self):
        assert rho_n(4, NormSpec.l1()).objective == 8
        assert rho_n(4, NormSpec.lp(2)).objective == 4
        assert rho_n(4, NormSpec.sup()).objective == 4
        assert rho_n(2, NormSpec.l1()).objective == 2
        assert rho_n(1, NormSpec.l1()).objective == 1

    @pytest.mark.parametrize("norm", NORMS, ids=IDS)
    def test_witness_reevaluates(self, norm):
        res = rho_n(8, norm)
        prof = rho_profile(np.array(res.witness["matrix"]), norm)
        assert values_close(prof.rho_max, res.objective, 1e-12)
        m = res.witness["m"]
        assert values_close(prof.values[m - 1], res.objective, 1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.permutations(range(1, 9)), st.lists(st.integers(1, 8), max_size=8))
    def test_orbit_dominates_random_members(self, perm, flips):
        base = catalog_representative(8)
        best = rho_n(8, NormSpec.l1()).objective
        m = transform(base, "permute_rows", perm)
        for k in flips:
            m = transform(m, "negate_row", k)
        assert rho_profile(m, NormSpec.l1()).rho_max <= best

    def test_budget_error_points_to_anneal(self):
        with pytest.raises(ResourceError, match="rho_n_anneal"):
            rho_n_subset_sign(catalog_representative(24), NormSpec.l1())
        with pytest.raises(ResourceError):
            rho_n(8, NormSpec.l1(), budget=100)

    def test_label_for_large_orders(self):
        res = rho_n_anneal(catalog_representative(16), NormSpec.l1(), seed=1, steps=500)
        assert not res.exact and "lower bound" in res.label

    def test_anneal_below_orbit(self):
        rep = catalog_representative(8)
        exact = rho_n_subset_sign(rep, NormSpec.l1()).objective
        for seed in range(3):
            got = rho_n_anneal(rep, NormSpec.l1(), seed=seed, steps=2000)
            assert got.objective <= exact and got.mode == "anneal"

    def test_anneal_deterministic(self):
        rep = catalog_representative(12)
        a = rho_n_anneal(rep, NormSpec.lp(1.5), seed=7, steps=300)
        b = rho_n_anneal(rep, NormSpec.lp(1.5), seed=7, steps=300)
        assert a.objective == b.objective and a.witness == b.witness

    def test_workers_agree(self):
        a = rho_n_subset_sign(catalog_representative(8), NormSpec.lp(1.5), workers=1)
        b = rho_n_subset_sign(catalog_representative(8), NormSpec.lp(1.5), workers=2)
        assert a.objective == b.objective and a.witness == b.witness

    def test_exhaustive_rejects_order(self):
        with pytest.raises(DomainError):
            rho_n_exhaustive(8, NormSpec.l1())

    def test_result_json_roundtrip(self):
        res = rho_n(4, NormSpec.l1())
        back = SearchResult.from_json(json.dumps(res.to_json()))
        assert back.objective == res.objective and back.witness == res.witness


class TestSignedPrefix:
    def test_example(self):
        assert signed_prefix_max(sylvester_matrix(2), NormSpec.l1(), (1, -1, 1, -1)) == 6

    @pytest.mark.parametrize("order", [o for o in implemented_orders(16)])
    @pytest.mark.parametrize("norm", [NormSpec.l1(), NormSpec.lp(2), NormSpec.sup()], ids=["l1", "lp2", "sup"])
    def test_ceiling_holds(self, order, norm):
        rng = np.random.default_rng(order)
        m = catalog_representative(order)
        for _ in range(20):
            signs = rng.choice((-1, 1), size=order)
            value = signed_prefix_max(m, norm, signs)
            assert float(value) <= float(norm_eval(norm, [1] * (math.isqrt(order) + 1))) * order * (1 + 1e-9)

    def test_bad_signs(self):
        with pytest.raises(DomainError):
            signed_prefix_max(sylvester_matrix(2), NormSpec.l1(), (1, 0, 1, 1))
        with pytest.raises(DomainError):
            signed_prefix_max(sylvester_matrix(2), NormSpec.l1(), (1, 1))

    def test_ceiling_violation_raised(self):
        # the all-ones matrix is not Hadamard; its prefix reaches n * n
        from hadamard_rho.matrices import SignMatrix

        with pytest.raises(BoundViolation):
            signed_prefix_max(SignMatrix(np.ones((4, 4), dtype=int)), NormSpec.l1(), [1] * 4)


class TestConjectureHelpers:
    def test_prefix_lengths(self):
        assert [prefix_length(n) for n in (1, 2, 3, 4)] == [1, 3, 5, 11]
        assert [prefix_length(n, "m_prime") for n in (1, 2, 4)] == [2, 3, 13]
        with pytest.raises(DomainError):
            prefix_length(3, "m_second")

    def test_subset_objective(self):
        assert subset_objective(2, [1, 2, 3]) == 6
        assert subset_objective(2, [1, 2, 3, 4]) == 4
        with pytest.raises(DomainError):
            subset_objective(2, [1, 1])
        with pytest.raises(DomainError):
            subset_objective(2, [5])

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.just(n), st.permutations(range(1, 2**n + 1)))))
    def test_permutation_reduces_to_subset(self, case):
        n, sigma = case
        t = prefix_length(n)
        assert permutation_objective(n, sigma) == subset_objective(n, sigma[:t])
        assert permutation_objective(n, sigma) >= rho_l1_closed_form(n).value

    def test_forced_complement(self):
        assert forced_complement(4, 5) == [0, 1, 2, 4]
        assert forced_complement(2, 1) == [0]
        assert forced_complement(3, 0) == []


class TestConjectureSearch:
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_exhaustive_matches_brute_force(self, n):
        res = conjecture_min(n, mode="exhaustive-subsets")
        assert res.objective == brute_min(n, prefix_length(n))
        assert res.objective == res.rhs and res.verdict == "holds"
        assert subset_objective(n, res.witness["subset"]) == res.objective

    def test_exhaustive_tie_break_is_lexicographic(self):
        res = conjecture_min(2, mode="exhaustive-subsets")
        s = sylvester_matrix(2).tolist()
        first = next(
            c for c in itertools.combinations(range(1, 5), 3)
            if sum(abs(sum(s[k - 1][i] for k in c)) for i in range(4)) == res.objective
        )
        assert tuple(res.witness["subset"]) == first

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    @pytest.mark.parametrize("symmetry", [True, False])
    def test_branch_and_bound_matches(self, n, symmetry):
        res = conjecture_min(n, mode="branch-and-bound", symmetry=symmetry)
        assert res.objective == rho_l1_closed_form(n).value
        assert res.verdict == "holds" and res.stats["complete"]

    def test_m_prime_prefix(self):
        for n in (2, 3, 4):
            a = conjecture_min(n, mode="exhaustive-subsets", prefix="m_prime")
            b = conjecture_min(n, mode="branch-and-bound", prefix="m_prime")
            assert a.objective == b.objective == brute_min(n, prefix_length(n, "m_prime"))

    def test_anneal_is_heuristic(self):
        for n in (2, 3, 4):
            res = conjecture_min(n, mode="anneal", seed=3, budget=3000)
            assert res.objective >= rho_l1_closed_form(n).value
            assert not res.exact and res.verdict == "not-refuted"

    def test_exhaustive_budget(self):
        with pytest.raises(ResourceError):
            conjecture_min(4, mode="exhaustive-subsets", budget=10)

    def test_unknown_mode(self):
        with pytest.raises(DomainError):
            conjecture_min(3, mode="genetic")

    def test_json_fields(self):
        out = conjecture_min(2, mode="exhaustive-subsets").to_json()
        assert out["min"] == 6 and out["rhs"] == 6 and out["verdict"] == "holds"
        assert SearchResult.from_json(json.dumps(out)).rhs == 6


class TestCheckpoint:
    def test_branch_and_bound_resume(self, tmp_path):
        path = tmp_path / "bnb.json"
        full = conjecture_min(4, symmetry=False)
        part = conjecture_min(4, symmetry=False, checkpoint=path, stop_after=200)
        assert part.verdict == "incomplete" and part.stats["interrupted"]
        assert part.stats["lower_bound"] <= full.objective <= part.objective
        assert load_checkpoint(path)["config"]["n"] == 4
        rounds = 0
        while part.verdict == "incomplete":
            part = conjecture_min(4, symmetry=False, checkpoint=path, stop_after=200)
            rounds += 1
            assert rounds < 100
        assert part.objective == full.objective and part.verdict == "holds"

    @pytest.mark.parametrize("mode,kw", [("branch-and-bound", {"symmetry": False}), ("anneal", {"seed": 2, "budget": 600})])
    def test_roundtrip_at_three(self, tmp_path, mode, kw):
        path = tmp_path / "ck3.json"
        whole = conjecture_min(3, mode=mode, **kw)
        half = conjecture_min(3, mode=mode, checkpoint=path, stop_after=10, **kw)
        assert half.verdict == "incomplete"
        state = load_checkpoint(path)
        assert state["config"]["n"] == 3
        done = conjecture_min(3, mode=mode, checkpoint=path, **kw)
        assert done.objective == whole.objective and done.exact == whole.exact
        assert done.verdict == whole.verdict

    def test_anneal_resume_equals_single_run(self, tmp_path):
        path = tmp_path / "anneal.json"
        single = conjecture_min(4, mode="anneal", seed=5, budget=1000)
        first = conjecture_min(4, mode="anneal", seed=5, budget=1000, checkpoint=path, stop_after=400)
        assert first.verdict == "incomplete"
        second = conjecture_min(4, mode="anneal", seed=5, budget=1000, checkpoint=path, stop_after=400)
        third = conjecture_min(4, mode="anneal", seed=5, budget=1000, checkpoint=path)
        assert second.verdict == "incomplete"
        assert third.objective == single.objective and third.witness == single.witness

    def test_empty_file_starts_fresh(self, tmp_path):
        path = tmp_path / "empty.json"
        path.write_text("")
        assert conjecture_min(3, checkpoint=path).verdict == "holds"

    def test_corrupt_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(CheckpointError):
            conjecture_min(3, checkpoint=path)

    def test_config_mismatch(self, tmp_path):
        path = tmp_path / "ck.json"
        conjecture_min(4, symmetry=False, checkpoint=path, stop_after=50)
        with pytest.raises(CheckpointError, match="mismatch"):
            conjecture_min(3, symmetry=False, checkpoint=path)
