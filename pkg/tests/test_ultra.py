import random

import pytest

from so_lab import formulas as fm
from so_lab import gen
from so_lab.errors import ArityBoundError, BudgetExceededError, ValidationError
from so_lab.structures import (
    EMPTY_SIGNATURE,
    FiniteStructure,
    Signature,
    all_relations,
    eval_so_full,
    find_isomorphism,
    relation_mask,
)
from so_lab.ultra import (
    DecomposableHenkinModel,
    Ultrafilter,
    build_ultrachain,
    check_fubini,
    check_los,
    full_henkin_model,
    henkin_eval,
    henkin_model,
    is_decomposable,
    product_member_definitional,
    product_ultrafilter,
    recompose,
    ultraproduct,
)
from so_lab.workbench import builtin

SIG = Signature.of({"p": 1, "edge": 2})


def subsets(universe):
    for mask in range(2 ** len(universe)):
        yield {universe[i] for i in range(len(universe)) if mask >> i & 1}


class TestUltrafilter:
    def test_membership_is_principality(self):
        U = Ultrafilter(5, 2)
        assert U.member({2, 4}) and not U.member({0, 1, 3, 4})

    def test_axioms_exhaustively(self):
        # Complement dichotomy and single-step upward closure over every
        # subset, for every index set size up to 12.
        for m in range(1, 13):
            U = Ultrafilter(m, m // 2)
            for mask in range(2 ** m):
                members = {i for i in range(m) if mask >> i & 1}
                complement = set(range(m)) - members
                assert U.member(members) != U.member(complement)
                if U.member(members):
                    for extra in range(m):
                        assert U.member(members | {extra})

    def test_intersection_closure_small(self):
        for m in range(1, 7):
            U = Ultrafilter(m, m - 1)
            universe = list(range(m))
            big = [s for s in subsets(universe) if U.member(s)]
            for X in big:
                for Y in big:
                    assert U.member(X & Y)

    def test_literal_round_trip(self):
        U = Ultrafilter(4, 3)
        assert Ultrafilter.parse(U.literal(), 4) == U

    def test_bad_principal(self):
        with pytest.raises(ValidationError):
            Ultrafilter(3, 3)


class TestProductUltrafilter:
    def test_principal_pairing(self):
        P = product_ultrafilter(Ultrafilter(2, 0), Ultrafilter(3, 1))
        assert P.size == 6 and P.principal == 0 * 3 + 1

    def test_single_pair_membership(self):
        F, G = Ultrafilter(2, 0), Ultrafilter(2, 1)
        X = {(0, 1)}
        assert product_member_definitional(F, G, X) is True
        P = product_ultrafilter(F, G)
        assert P.member({i * 2 + j for i, j in X})

    def test_exhaustive_agreement_3x3(self):
        F, G = Ultrafilter(3, 1), Ultrafilter(3, 2)
        P = product_ultrafilter(F, G)
        pairs = [(i, j) for i in range(3) for j in range(3)]
        for X in subsets(pairs):
            encoded = {i * 3 + j for i, j in X}
            assert P.member(encoded) == product_member_definitional(F, G, X)

    def test_exhaustive_agreement_all_small_sizes(self):
        for isize in (1, 2, 3):
            for jsize in (1, 2, 3):
                pairs = [(i, j) for i in range(isize) for j in range(jsize)]
                for fi in range(isize):
                    for gj in range(jsize):
                        F, G = Ultrafilter(isize, fi), Ultrafilter(jsize, gj)
                        P = product_ultrafilter(F, G)
                        for X in subsets(pairs):
                            encoded = {i * jsize + j for i, j in X}
                            assert P.member(encoded) == \
                                product_member_definitional(F, G, X)

    def test_product_literal_parse(self):
        P = Ultrafilter.parse("principal:1 x principal:2", 6, cols=3)
        assert P == product_ultrafilter(Ultrafilter(2, 1), Ultrafilter(3, 2))
        with pytest.raises(ValidationError, match="column count"):
            Ultrafilter.parse("principal:0 x principal:0", 6)
        with pytest.raises(ValidationError, match="rows"):
            Ultrafilter.parse("principal:0 x principal:0", 7, cols=3)


class TestUltraproduct:
    def test_principal_quotient_is_that_factor(self):
        rng = random.Random(0)
        A1 = gen.random_structure(rng, SIG, 2)
        A2 = gen.random_structure(rng, SIG, 3)
        result = ultraproduct([A1, A2], Ultrafilter(2, 1))
        assert result.quotient == A2

    def test_quotient_size(self):
        rng = random.Random(1)
        for _ in range(20):
            m = rng.randint(1, 3)
            family = gen.random_family(rng, SIG, m, 3)
            U = Ultrafilter(m, rng.randrange(m))
            result = ultraproduct(family, U)
            assert result.quotient.size == family[U.principal].size

    def test_explicit_matches_fast_path(self):
        rng = random.Random(2)
        for _ in range(30):
            m = rng.randint(1, 3)
            family = gen.random_family(rng, SIG, m, 3)
            U = Ultrafilter(m, rng.randrange(m))
            explicit = ultraproduct(family, U, path="explicit")
            fast = ultraproduct(family, U, path="fast")
            assert explicit.explicit and not fast.explicit
            assert find_isomorphism(explicit.quotient, fast.quotient) is not None

    def test_family_size_mismatch(self):
        with pytest.raises(ValidationError, match="index set"):
            ultraproduct([FiniteStructure(SIG, 1)], Ultrafilter(2, 0))

    def test_explicit_budget(self):
        family = [FiniteStructure(EMPTY_SIGNATURE, 3)] * 4
        with pytest.raises(BudgetExceededError):
            ultraproduct(family, Ultrafilter(4, 0), path="explicit", product_budget=10)
        # The automatic route falls back to the fast path instead.
        assert ultraproduct(family, Ultrafilter(4, 0), product_budget=10).explicit is False


class TestDecomposable:
    def test_pullback_factor_at_principal(self):
        rng = random.Random(3)
        family = gen.random_family(rng, SIG, 3, 3)
        U = Ultrafilter(3, 1)
        result = ultraproduct(family, U)
        rel = frozenset({(0,), (result.quotient.size - 1,)})
        dec = is_decomposable(rel, result, arity=1)
        assert dec is not None
        assert dec.factors[U.principal] == rel  # identity pullback here
        assert all(not dec.factors[i] for i in range(3) if i != U.principal)

    def test_round_trip_all_unary_relations(self):
        rng = random.Random(4)
        for size in (1, 2, 3):
            family = [gen.random_structure(rng, SIG, size),
                      gen.random_structure(rng, SIG, size)]
            result = ultraproduct(family, Ultrafilter(2, 0))
            for rel in all_relations(result.quotient.size, 1):
                dec = is_decomposable(rel, result, arity=1)
                assert dec is not None and recompose(dec, result) == rel

    def test_empty_relation(self):
        rng = random.Random(5)
        result = ultraproduct(gen.random_family(rng, SIG, 2, 2), Ultrafilter(2, 0))
        dec = is_decomposable(frozenset(), result, arity=2)
        assert dec is not None and all(not f for f in dec.factors)

    def test_empty_relation_requires_arity(self):
        rng = random.Random(6)
        result = ultraproduct(gen.random_family(rng, SIG, 2, 2), Ultrafilter(2, 0))
        with pytest.raises(ValidationError):
            is_decomposable(frozenset(), result)


class TestHenkinModel:
    def test_full_powerset_base_two(self):
        A = FiniteStructure(SIG, 2)
        M = henkin_model([A], Ultrafilter(1, 0), 1)
        assert len(M.relations_of_arity(1)) == 4

    def test_upsilon_is_full_powerset_in_principal_cases(self):
        rng = random.Random(7)
        for _ in range(10):
            m = rng.randint(1, 3)
            family = gen.random_family(rng, SIG, m, 2)
            U = Ultrafilter(m, rng.randrange(m))
            M = henkin_model(family, U, 2)
            n = M.base.size
            for k in (1, 2):
                assert set(M.relations_of_arity(k)) == set(all_relations(n, k))

    def test_literal_box_enumeration_matches_shortcut(self):
        # Deduplicated boxes over every factor choice vs the powerset route.
        rng = random.Random(8)
        family = [gen.random_structure(rng, SIG, 2),
                  gen.random_structure(rng, SIG, 3)]
        U = Ultrafilter(2, 0)
        literal = henkin_model(family, U, 1, literal_budget=2 ** 12)
        shortcut = henkin_model(family, U, 1, literal_budget=0)
        assert literal.relations_of_arity(1) == shortcut.relations_of_arity(1)
        assert len(literal.relations_of_arity(1)) == 4

    def test_upsilon_deterministic_order(self):
        A = FiniteStructure(SIG, 2)
        M = full_henkin_model(A, 2)
        rels = M.relations_of_arity(2)
        masks = [relation_mask(2, 2, r) for r in rels]
        assert masks == sorted(masks)


class TestHenkinEval:
    def test_full_upsilon_equals_full_semantics(self):
        rng = random.Random(9)
        for _ in range(60):
            A = gen.random_structure(rng, SIG, rng.randint(1, 3))
            M = full_henkin_model(A, 2)
            f = gen.random_formula(rng, SIG, max_quant_depth=3,
                                   max_so=2, max_binary_so=1)
            assert henkin_eval(M, f) == eval_so_full(A, f)

    def test_empty_witness_universe(self):
        A = FiniteStructure(SIG, 2)
        result = ultraproduct([A], Ultrafilter(1, 0))
        M = DecomposableHenkinModel(result, {1: (frozenset(),)}, 1)
        assert henkin_eval(M, fm.parse("EX2 R:1 EX x R(x)")) is False

    def test_tautology_for_any_relation_universe(self):
        rng = random.Random(10)
        taut = fm.parse("ALL2 R:1 ((EX x R(x)) | (ALL x ~R(x)))")
        for _ in range(10):
            A = gen.random_structure(rng, SIG, rng.randint(1, 3))
            result = ultraproduct([A], Ultrafilter(1, 0))
            pool = list(all_relations(A.size, 1))
            chosen = tuple(rng.sample(pool, rng.randint(1, len(pool))))
            M = DecomposableHenkinModel(result, {1: chosen}, 1)
            assert henkin_eval(M, taut) is True

    def test_free_relation_variable_universally_closed(self):
        A = FiniteStructure(SIG, 2)
        M = full_henkin_model(A, 1)
        # Free X: true iff every unary relation on A is nonempty somewhere.
        assert henkin_eval(M, fm.parse("EX x X(x)")) is False
        assert henkin_eval(M, fm.parse("(EX x X(x)) | (ALL x ~X(x))")) is True

    def test_arity_bound_error(self):
        A = FiniteStructure(SIG, 2)
        M = full_henkin_model(A, 1)
        with pytest.raises(ArityBoundError):
            henkin_eval(M, fm.parse("EX2 R:2 EX x R(x,x)"))

    def test_work_budget(self):
        A = FiniteStructure(SIG, 3)
        M = full_henkin_model(A, 2)
        f = fm.parse("EX2 R:2 EX2 S:2 (EX x (R(x,x) & S(x,x)))")
        with pytest.raises(BudgetExceededError):
            henkin_eval(M, f, budget=1000)

    def test_monotone_in_upsilon_for_homogeneous_prefixes(self):
        # Growing the relation universe can only turn an existential
        # prefix true and a universal prefix false.
        rng = random.Random(11)
        checked = 0
        while checked < 60:
            A = gen.random_structure(rng, SIG, rng.randint(1, 3))
            pool = list(all_relations(A.size, 1))
            small = rng.sample(pool, rng.randint(1, len(pool)))
            large = small + [r for r in pool if r not in small]
            result = ultraproduct([A], Ultrafilter(1, 0))
            M_small = DecomposableHenkinModel(result, {1: tuple(small)}, 1)
            M_large = DecomposableHenkinModel(result, {1: tuple(large)}, 1)
            ext = Signature.of({**dict(SIG.relations), "R0": 1, "R1": 1})
            matrix = gen.random_formula(rng, ext, max_quant_depth=2,
                                        max_connectives=3, max_so=0,
                                        so_probability=0.0)
            exists = rng.random() < 0.5
            f = matrix
            for name in ("R1", "R0"):
                f = (fm.ExistsSO if exists else fm.ForallSO)(name, 1, f)
            before = henkin_eval(M_small, f)
            after = henkin_eval(M_large, f)
            if exists:
                assert before <= after
            else:
                assert after <= before
            checked += 1


class TestCheckLos:
    def test_first_order_principal(self):
        rng = random.Random(12)
        family = gen.random_family(rng, SIG, 3, 3)
        U = Ultrafilter(3, 2)
        f = fm.parse("EX x EX y edge(x,y)")
        report = check_los(family, U, f)
        expected = eval_so_full(family[2], f)
        assert report.ultra_truth == expected == report.large_set_truth
        assert report.agree

    def test_infinity_formula_both_false(self):
        rng = random.Random(13)
        family = gen.random_family(rng, SIG, 4, 3)
        report = check_los(family, Ultrafilter(4, 1), builtin("infinite").formula)
        assert report.ultra_truth is False and report.large_set_truth is False
        assert report.agree

    def test_randomised_agreement(self):
        rng = random.Random(14)
        for _ in range(150):
            m = rng.randint(1, 4)
            family = gen.random_family(rng, SIG, m, 3)
            U = Ultrafilter(m, rng.randrange(m))
            f = gen.random_formula(rng, SIG, max_quant_depth=3,
                                   max_so=2, max_binary_so=1)
            assert check_los(family, U, f).agree


class TestCheckFubini:
    def test_singleton_grid_identity(self):
        A = FiniteStructure(SIG, 3, {"p": [(0,)]})
        report = check_fubini([[A]], Ultrafilter(1, 0), Ultrafilter(1, 0))
        assert report.witness == (0, 1, 2)

    def test_principal_collapse_2x2(self):
        # Four pairwise distinguishable structures; both constructions
        # land on the principal cell.
        cells = [[FiniteStructure(SIG, 2, {"p": [(i,)], "edge": [(j, j)]})
                  for j in range(2)] for i in range(2)]
        F, G = Ultrafilter(2, 1), Ultrafilter(2, 0)
        report = check_fubini(cells, F, G)
        assert report.witness is not None
        flat_product = ultraproduct(
            [cells[i][j] for i in range(2) for j in range(2)],
            product_ultrafilter(F, G))
        assert flat_product.quotient == cells[1][0]

    def test_random_grids(self):
        rng = random.Random(15)
        for _ in range(25):
            rows, cols = rng.randint(1, 3), rng.randint(1, 2)
            grid = [[gen.random_structure(rng, SIG, rng.randint(1, 3))
                     for _ in range(cols)] for _ in range(rows)]
            F = Ultrafilter(rows, rng.randrange(rows))
            G = Ultrafilter(cols, rng.randrange(cols))
            assert check_fubini(grid, F, G).witness is not None

    def test_bad_shape(self):
        with pytest.raises(ValidationError, match="shape"):
            check_fubini([[FiniteStructure(SIG, 1)]], Ultrafilter(2, 0),
                         Ultrafilter(1, 0))


class TestUltrachain:
    def test_empty_chain(self):
        A0 = FiniteStructure(SIG, 2, {"p": [(0,)]})
        chain = build_ultrachain(A0, [])
        assert chain.limit == A0 and chain.composed_embedding() == (0, 1)

    def test_principal_chain_collapses(self):
        rng = random.Random(16)
        A0 = gen.random_structure(rng, SIG, 3)
        filters = [Ultrafilter(2, 1), Ultrafilter(3, 0), Ultrafilter(2, 0)]
        chain = build_ultrachain(A0, filters)
        assert len(chain.stages) == 3
        for _, stage in chain.stages:
            assert find_isomorphism(stage, A0) is not None
        assert chain.limit == A0
        assert chain.composed_embedding() == tuple(range(A0.size))

    def test_limit_agreement_on_sentence_corpus(self):
        # Truth transfers from the base to the Henkin view of the limit.
        rng = random.Random(17)
        A0 = gen.random_structure(rng, SIG, 3)
        chain = build_ultrachain(A0, [Ultrafilter(2, 0), Ultrafilter(2, 1)])
        M = full_henkin_model(chain.limit, 2)
        for _ in range(20):
            f = gen.random_formula(rng, SIG, max_quant_depth=3,
                                   max_so=2, max_binary_so=1)
            assert henkin_eval(M, f) == eval_so_full(A0, f)
