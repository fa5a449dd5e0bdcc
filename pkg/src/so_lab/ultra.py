"""Ultrafilters on finite index sets and the constructions over them:
product ultrafilters, explicit ultraproduct quotients, decomposable
relations, Henkin models whose relation quantifiers range over the
decomposable relations, transfer and iterated-product checks, and
iterated ultrapower chains.

Index sets here are finite, so every ultrafilter is principal; the
representation still drives all constructions through the literal
large-set definitions so that the defining formulas are exercised
rather than shortcut.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import formulas as fm
from .errors import ArityBoundError, BudgetExceededError, SoLabError, ValidationError
from .structures import (
    DEFAULT_PRODUCT_BUDGET,
    DEFAULT_RELATION_BUDGET,
    FiniteStructure,
    all_relations,
    eval_so_full,
    find_isomorphism,
    relation_count,
    relation_mask,
    _eval_generic,
)

DEFAULT_LITERAL_BUDGET = 2 ** 10


@dataclass(frozen=True)
class Ultrafilter:
    """Ultrafilter on {0..size-1}, determined by its principal element:
    a subset is large exactly when it contains that element."""

    size: int
    principal: int

    def __post_init__(self):
        if self.size < 1:
            raise ValidationError("index set must be nonempty")
        if not 0 <= self.principal < self.size:
            raise ValidationError("principal element outside the index set")

    def member(self, subset) -> bool:
        return self.principal in subset

    def literal(self) -> str:
        return f"principal:{self.principal}"

    @staticmethod
    def parse(text: str, size: int, cols: int | None = None) -> "Ultrafilter":
        """Parse "principal:i", or the product literal
        "principal:i x principal:j" given the column count of the
        row-major I x J flattening."""
        text = text.strip()
        if " x " in text:
            left, right = (part.strip() for part in text.split(" x ", 1))
            if cols is None:
                raise ValidationError(
                    "a product ultrafilter literal needs the column count"
                    " of the family grid"
                )
            if size % cols:
                raise ValidationError(
                    f"family of {size} members does not fill rows of {cols}"
                )
            return product_ultrafilter(
                Ultrafilter.parse(left, size // cols),
                Ultrafilter.parse(right, cols),
            )
        if not text.startswith("principal:"):
            raise ValidationError(f"unsupported ultrafilter literal {text!r}")
        return Ultrafilter(size, int(text.split(":", 1)[1]))


def product_ultrafilter(F: Ultrafilter, G: Ultrafilter) -> Ultrafilter:
    """The ultrafilter on I x J with X large iff the set of columns j
    whose row-section {i : (i,j) in X} is F-large is G-large.  Pairs are
    encoded row-major: (i, j) -> i*|J| + j."""
    return Ultrafilter(F.size * G.size, F.principal * G.size + G.principal)


def pair_index(i: int, j: int, G: Ultrafilter) -> int:
    return i * G.size + j


def product_member_definitional(F: Ultrafilter, G: Ultrafilter, pairs) -> bool:
    """Membership by the defining double-large-set formula, evaluated
    literally; used to cross-check product_ultrafilter."""
    pairs = set(pairs)
    large_columns = {j for j in range(G.size)
                     if F.member({i for i in range(F.size) if (i, j) in pairs})}
    return G.member(large_columns)


# ---------------------------------------------------------------------------
# Ultraproducts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Provenance:
    family: tuple[FiniteStructure, ...]
    ultrafilter: Ultrafilter


@dataclass(frozen=True)
class UltraproductResult:
    quotient: FiniteStructure
    class_representatives: tuple[tuple[int, ...], ...]
    provenance: Provenance
    explicit: bool

    def value_at_principal(self, element: int) -> int:
        return self.class_representatives[element][self.provenance.ultrafilter.principal]


def _check_family(family, U):
    family = tuple(family)
    if len(family) != U.size:
        raise ValidationError(
            f"family has {len(family)} members but the ultrafilter index set has {U.size}"
        )
    sig = family[0].sig
    if any(A.sig != sig for A in family):
        raise ValidationError("family members must share one signature")
    return family


def ultraproduct(family, U: Ultrafilter, *, path: str = "auto",
                 product_budget: int = DEFAULT_PRODUCT_BUDGET) -> UltraproductResult:
    """Quotient of the full product by U-almost-everywhere equality, with
    relations induced componentwise.

    The explicit path builds the full product and quotients it through the
    literal large-set tests, then confirms the result isomorphic to the
    principal factor; the fast path returns the principal factor directly.
    """
    family = _check_family(family, U)
    m = U.size
    total = 1
    for A in family:
        total *= A.size
    if path == "fast" or (path == "auto" and total > product_budget):
        n = family[U.principal].size
        reps = []
        for value in range(n):
            rep = [0] * m
            rep[U.principal] = value
            reps.append(tuple(rep))
        return UltraproductResult(
            quotient=family[U.principal],
            class_representatives=tuple(reps),
            provenance=Provenance(family, U),
            explicit=False,
        )
    if total > product_budget:
        raise BudgetExceededError(
            f"full product has {total} tuples, exceeding the budget of {product_budget}",
            required=total, budget=product_budget,
        )

    reps = []
    for point in itertools.product(*[range(A.size) for A in family]):
        for rep in reps:
            if U.member({i for i in range(m) if point[i] == rep[i]}):
                break
        else:
            reps.append(point)
    reps.sort(key=lambda rep: (rep[U.principal], rep))
    sig = family[0].sig
    rels = {}
    for name, arity in sig.relations:
        tuples = set()
        for combo in itertools.product(range(len(reps)), repeat=arity):
            large = {
                i for i in range(m)
                if tuple(reps[q][i] for q in combo) in family[i].rels[name]
            }
            if U.member(large):
                tuples.add(combo)
        rels[name] = frozenset(tuples)
    quotient = FiniteStructure(sig, len(reps), rels)
    result = UltraproductResult(
        quotient=quotient,
        class_representatives=tuple(reps),
        provenance=Provenance(family, U),
        explicit=True,
    )
    if find_isomorphism(quotient, family[U.principal]) is None:
        raise SoLabError("quotient failed to match the principal factor; this is a defect")
    return result


# ---------------------------------------------------------------------------
# Decomposable relations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Decomposition:
    arity: int
    factors: tuple[frozenset, ...]


def is_decomposable(rel, result: UltraproductResult, arity: int | None = None):
    """A decomposition of rel (a relation on the quotient) into factor
    relations whose box recomposes to rel, or None when none exists.

    Under a principal ultrafilter every relation is decomposable: the
    factor at the principal index is the pullback of rel and the other
    factors are chosen empty (any choice is equivalent almost
    everywhere; empty is canonical).
    """
    rel = frozenset(tuple(t) for t in rel)
    if arity is None:
        if not rel:
            raise ValidationError("arity required for the empty relation")
        arity = len(next(iter(rel)))
    if any(len(t) != arity for t in rel):
        raise ValidationError("mixed tuple lengths in relation")
    U = result.provenance.ultrafilter
    pullback = frozenset(
        tuple(result.value_at_principal(x) for x in t) for t in rel
    )
    factors = tuple(
        pullback if i == U.principal else frozenset() for i in range(U.size)
    )
    dec = Decomposition(arity, factors)
    if recompose(dec, result) != rel:  # pragma: no cover - principal always succeeds
        return None
    return dec


def recompose(dec: Decomposition, result: UltraproductResult) -> frozenset:
    """The box of the factor relations: membership of a quotient tuple is
    the largeness of its componentwise membership set."""
    U = result.provenance.ultrafilter
    reps = result.class_representatives
    n = len(reps)
    out = set()
    for combo in itertools.product(range(n), repeat=dec.arity):
        large = {
            i for i in range(U.size)
            if tuple(reps[q][i] for q in combo) in dec.factors[i]
        }
        if U.member(large):
            out.add(combo)
    return frozenset(out)


# ---------------------------------------------------------------------------
# Henkin models
# ---------------------------------------------------------------------------

class DecomposableHenkinModel:
    """An ultraproduct together with, per arity up to a bound, the set of
    relations decomposable with respect to its construction; relation
    quantifiers are evaluated over these sets only."""

    __slots__ = ("base", "upsilon", "provenance", "arity_bound", "result")

    def __init__(self, result: UltraproductResult, upsilon: dict, arity_bound: int):
        self.result = result
        self.base = result.quotient
        self.upsilon = upsilon
        self.provenance = result.provenance
        self.arity_bound = arity_bound

    def relations_of_arity(self, k: int):
        if k not in self.upsilon:
            raise ArityBoundError(
                f"arity {k} exceeds the materialised bound {self.arity_bound}"
            )
        return self.upsilon[k]


def henkin_model(family, U: Ultrafilter, arity_bound: int = 2, *,
                 literal_budget: int = DEFAULT_LITERAL_BUDGET,
                 product_budget: int = DEFAULT_PRODUCT_BUDGET) -> DecomposableHenkinModel:
    """Materialise the decomposable relations of the ultraproduct for
    every arity up to arity_bound.

    When the factor-choice space is small the boxes are enumerated
    literally and deduplicated; otherwise the principal shortcut applies
    (every relation is decomposable, so the set is the full powerset).
    Both routes agree and the tests compare them."""
    result = ultraproduct(family, U, product_budget=product_budget)
    family = result.provenance.family
    n = result.quotient.size
    upsilon = {}
    for k in range(1, arity_bound + 1):
        cost = 1
        for A in family:
            cost *= relation_count(A.size, k)
            if cost > literal_budget:
                break
        if cost <= literal_budget:
            boxes = set()
            for combo in itertools.product(*[all_relations(A.size, k) for A in family]):
                dec = Decomposition(k, combo)
                boxes.add(recompose(dec, result))
            upsilon[k] = tuple(sorted(boxes, key=lambda r: relation_mask(n, k, r)))
        else:
            upsilon[k] = all_relations(n, k)
    return DecomposableHenkinModel(result, upsilon, arity_bound)


def full_henkin_model(A: FiniteStructure, arity_bound: int = 2) -> DecomposableHenkinModel:
    """The trivial-ultrapower Henkin model of A: its relation universe is
    the full powerset at every arity up to the bound."""
    return henkin_model([A], Ultrafilter(1, 0), arity_bound)


def _work_estimate(g, n, domain_sizes):
    if isinstance(g, (fm.Atom, fm.Eq)):
        return 1
    if isinstance(g, fm.Not):
        return _work_estimate(g.sub, n, domain_sizes)
    if isinstance(g, (fm.And, fm.Or, fm.Implies, fm.Iff)):
        return (_work_estimate(g.left, n, domain_sizes)
                + _work_estimate(g.right, n, domain_sizes))
    if isinstance(g, (fm.ExistsFO, fm.ForallFO)):
        return n * _work_estimate(g.body, n, domain_sizes)
    if isinstance(g, (fm.ExistsSO, fm.ForallSO)):
        return domain_sizes(g.arity) * _work_estimate(g.body, n, domain_sizes)
    raise TypeError(f"not a formula node: {g!r}")


def henkin_eval(M: DecomposableHenkinModel, f, *,
                budget: int = DEFAULT_RELATION_BUDGET) -> bool:
    """Truth in a Henkin model: the first-order part is Tarski on the
    base and relation quantifiers range over the materialised relation
    universe only.  Free relation variables are universally closed
    before evaluation.

    The worst-case evaluation work (products of quantifier ranges) is
    estimated up front; exceeding the budget raises rather than hanging.
    """
    for name, k in reversed(fm.free_relation_variables(f, M.base.sig)):
        f = fm.ForallSO(name, k, f)
    for arity in fm.so_quantifier_arities(f):
        if arity > M.arity_bound:
            raise ArityBoundError(
                f"quantifier arity {arity} exceeds the model bound {M.arity_bound}"
            )
    free = fm.free_fo_variables(f)
    if free:
        raise ValidationError(
            f"formula has free first-order variables: {', '.join(free)}"
        )
    estimate = _work_estimate(f, M.base.size,
                              lambda k: len(M.relations_of_arity(k)))
    if estimate > budget:
        raise BudgetExceededError(
            f"evaluation needs about {estimate} steps, exceeding the budget"
            f" of {budget}",
            required=estimate, budget=budget,
        )

    def so_domain(name, k):
        return M.relations_of_arity(k)

    return _eval_generic(M.base, f, {}, {}, so_domain)


# ---------------------------------------------------------------------------
# Transfer and product checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LosReport:
    ultra_truth: bool
    large_set_truth: bool
    agree: bool
    true_indices: tuple[int, ...]

    def to_json_dict(self):
        return {
            "ultra_truth": self.ultra_truth,
            "large_set_truth": self.large_set_truth,
            "agree": self.agree,
            "true_indices": list(self.true_indices),
        }


def check_los(family, U: Ultrafilter, f, *,
              relation_budget: int = DEFAULT_RELATION_BUDGET,
              product_budget: int = DEFAULT_PRODUCT_BUDGET) -> LosReport:
    """Compare truth of the closed sentence f in the Henkin model of the
    ultraproduct against largeness of its truth set across the factors.
    Disagreement is a defect, never a valid outcome."""
    family = _check_family(family, U)
    arities = fm.so_quantifier_arities(f)
    bound = max(arities) if arities else 1
    M = henkin_model(family, U, bound, product_budget=product_budget)
    ultra_truth = henkin_eval(M, f)
    true_indices = tuple(
        i for i in range(U.size)
        if eval_so_full(family[i], f, budget=relation_budget)
    )
    large = U.member(set(true_indices))
    return LosReport(ultra_truth, large, ultra_truth == large, true_indices)


@dataclass(frozen=True)
class FubiniReport:
    grid_shape: tuple[int, int]
    witness: tuple[int, ...]
    flat_size: int

    def to_json_dict(self):
        return {
            "grid_shape": list(self.grid_shape),
            "witness": list(self.witness),
            "flat_size": self.flat_size,
        }


def check_fubini(grid, F: Ultrafilter, G: Ultrafilter, *,
                 product_budget: int = DEFAULT_PRODUCT_BUDGET) -> FubiniReport:
    """Build the one-step product over the product ultrafilter and the
    iterated column-then-row construction, and exhibit an isomorphism
    between them (one must exist)."""
    grid = [list(row) for row in grid]
    if len(grid) != F.size or any(len(row) != G.size for row in grid):
        raise ValidationError("grid shape must be |I| x |J|")
    flat = [grid[i][j] for i in range(F.size) for j in range(G.size)]
    lhs = ultraproduct(flat, product_ultrafilter(F, G), product_budget=product_budget)
    inner = [
        ultraproduct([grid[i][j] for i in range(F.size)], F,
                     product_budget=product_budget).quotient
        for j in range(G.size)
    ]
    rhs = ultraproduct(inner, G, product_budget=product_budget)
    witness = find_isomorphism(lhs.quotient, rhs.quotient)
    if witness is None:
        raise SoLabError("no isomorphism between the two constructions; this is a defect")
    return FubiniReport((F.size, G.size), witness, len(flat))


# ---------------------------------------------------------------------------
# Ultrachains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Ultrachain:
    base: FiniteStructure
    stages: tuple[tuple[Ultrafilter, FiniteStructure], ...]
    embeddings: tuple[tuple[int, ...], ...]

    @property
    def limit(self) -> FiniteStructure:
        return self.stages[-1][1] if self.stages else self.base

    def composed_embedding(self) -> tuple[int, ...]:
        out = tuple(range(self.base.size))
        for emb in self.embeddings:
            out = tuple(emb[x] for x in out)
        return out


def build_ultrachain(A0: FiniteStructure, filters, *,
                     product_budget: int = DEFAULT_PRODUCT_BUDGET) -> Ultrachain:
    """Iterated ultrapowers: stage k+1 is the ultrapower of stage k by
    filters[k]; each embedding sends an element to the class of its
    constant sequence."""
    stages = []
    embeddings = []
    current = A0
    for U in filters:
        result = ultraproduct([current] * U.size, U, product_budget=product_budget)
        emb = []
        for a in range(current.size):
            target = None
            for q, rep in enumerate(result.class_representatives):
                if U.member({i for i in range(U.size) if rep[i] == a}):
                    target = q
                    break
            if target is None:  # pragma: no cover
                raise SoLabError("constant sequence lost its class; this is a defect")
            emb.append(target)
        stages.append((U, result.quotient))
        embeddings.append(tuple(emb))
        current = result.quotient
    return Ultrachain(A0, tuple(stages), tuple(embeddings))
