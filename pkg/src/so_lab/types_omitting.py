"""Complete types in designated free relation variables, realization
tables, omission checks, and finite-pool checkers for axiomatization by
type omission.

The full type space is never materialised: every computation is
relative to an explicit finite pool of candidate structures, and the
reports say so.  "Has isomorphic ultrapowers" is replaced by equality
of realized-type vectors, which is what the principal scale makes
checkable (ultrapowers collapse to their base there).
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

from . import formulas as fm
from .errors import BudgetExceededError, ValidationError
from .structures import (
    DEFAULT_RELATION_BUDGET,
    FiniteStructure,
    Signature,
    all_relations,
    compile_evaluator,
    relation_count,
)

POOL_RELATIVE_NOTE = (
    "relative to the supplied pool: types realized only outside the pool are invisible;"
    " shared realized-type vectors stand in for isomorphic ultrapowers"
)


@dataclass(frozen=True)
class TypeContext:
    """Arities for the designated free relation variables X0..X{m-1} and
    an ordered fragment of closed formulas over the signature expanded
    by them."""

    arities: tuple[int, ...]
    fragment: tuple[fm.Formula, ...]

    def __post_init__(self):
        if any(k < 1 for k in self.arities):
            raise ValidationError("relation-variable arities must be at least 1")
        if len(set(self.fragment)) != len(self.fragment):
            raise ValidationError("duplicate formula in type fragment")

    @property
    def relvar_names(self):
        return tuple(f"X{i}" for i in range(len(self.arities)))

    def check_against(self, sig: Signature):
        declared = dict(zip(self.relvar_names, self.arities))
        for f in self.fragment:
            report = fm.validate(f, sig, allow_free_relvars=True).raise_on_error()
            if report.free_variables:
                raise ValidationError(
                    f"type fragment formula {f} has free first-order variables"
                )
            for name, k in report.free_relation_variables:
                if name not in declared:
                    raise ValidationError(
                        f"formula {f} uses undeclared relation variable {name!r}"
                    )
                if declared[name] != k:
                    raise ValidationError(
                        f"relation variable {name!r} declared with arity {declared[name]}"
                        f" but used with arity {k}"
                    )

    @staticmethod
    def from_json_dict(data) -> "TypeContext":
        return TypeContext(
            tuple(data["arities"]),
            tuple(fm.parse(s) for s in data["fragment"]),
        )

    @staticmethod
    def from_json(text) -> "TypeContext":
        return TypeContext.from_json_dict(json.loads(text))

    def to_json_dict(self):
        return {
            "arities": list(self.arities),
            "fragment": [fm.print_formula(f) for f in self.fragment],
        }


@dataclass(frozen=True)
class TwoType:
    """A complete bit vector over the context fragment: bit j decides the
    j-th formula.  Satisfiability is certified only by exhibiting a
    witness, never assumed."""

    bits: tuple[int, ...]

    def as_string(self) -> str:
        return "".join(str(b) for b in self.bits)


def realized_types(A: FiniteStructure, ctx: TypeContext, *,
                   budget: int = DEFAULT_RELATION_BUDGET):
    """Every type realized on A by some choice of relations of the
    declared kinds, mapped to the first witnessing relation tuple in
    lexicographic enumeration order."""
    ctx.check_against(A.sig)
    n = A.size
    total = 1
    for k in ctx.arities:
        total *= relation_count(n, k)
        if total > budget:
            raise BudgetExceededError(
                f"type realization needs {total} relation assignments,"
                f" exceeding the budget of {budget}",
                required=total, budget=budget,
            )
    names = ctx.relvar_names
    fo_env: dict = {}
    so_env: dict = {}

    def so_domain(name, k):
        count = relation_count(n, k)
        if count > budget:
            raise BudgetExceededError(
                f"quantifier {name!r} needs {count} candidate relations,"
                f" exceeding the budget of {budget}",
                required=count, budget=budget,
            )
        return all_relations(n, k)

    compiled = [
        compile_evaluator(A, f, fo_env, so_env, set(names), so_domain)
        for f in ctx.fragment
    ]
    out: dict[TwoType, tuple] = {}
    for combo in itertools.product(*[all_relations(n, k) for k in ctx.arities]):
        so_env.clear()
        so_env.update(zip(names, combo))
        bits = tuple(int(fn()) for fn in compiled)
        out.setdefault(TwoType(bits), combo)
    return out


_realized_sets: dict = {}


def _realized_set(A, ctx, budget) -> frozenset:
    # Realization tables are pure in (A, ctx); structures and contexts
    # hash by value, so pool-wide scans can share them.
    key = (A, ctx)
    cached = _realized_sets.get(key)
    if cached is None:
        cached = frozenset(realized_types(A, ctx, budget=budget))
        _realized_sets[key] = cached
    return cached


def omits(A: FiniteStructure, p: TwoType, ctx: TypeContext, *,
          budget: int = DEFAULT_RELATION_BUDGET) -> bool:
    """True when no choice of relations on A realizes p."""
    return p not in realized_types(A, ctx, budget=budget)


def omitted_by_all(K, pool, ctx: TypeContext, *,
                   budget: int = DEFAULT_RELATION_BUDGET) -> frozenset:
    """The pool-realized types that every member of K omits: the
    computable fragment of the omission set of K."""
    pool_realized = set()
    for P in pool:
        pool_realized.update(_realized_set(P, ctx, budget))
    k_realized = set()
    for A in K:
        k_realized.update(_realized_set(A, ctx, budget))
    return frozenset(pool_realized - k_realized)


@dataclass(frozen=True)
class OmissionReport:
    ok: bool
    realized_in_k: tuple[TwoType, ...]
    not_pool_realized: tuple[TwoType, ...]
    unexplained: tuple[FiniteStructure, ...]
    note: str

    def to_json_dict(self):
        return {
            "ok": self.ok,
            "realized_in_k": [p.as_string() for p in self.realized_in_k],
            "not_pool_realized": [p.as_string() for p in self.not_pool_realized],
            "unexplained": [A.to_json_dict() for A in self.unexplained],
            "note": self.note,
        }


def check_omission_axiomatization(K, Pi, pool, ctx: TypeContext, *,
                                  budget: int = DEFAULT_RELATION_BUDGET) -> OmissionReport:
    """Verify that Pi lies inside the pool-relative omission set of K and
    that every pool member outside K realizes some member of Pi; the
    report lists each violation."""
    Pi = set(Pi)
    omitted = omitted_by_all(K, pool, ctx, budget=budget)
    pool_realized = set()
    for P in pool:
        pool_realized.update(_realized_set(P, ctx, budget))
    realized_in_k = tuple(
        sorted((p for p in Pi - omitted if p in pool_realized), key=lambda p: p.bits)
    )
    not_pool_realized = tuple(
        sorted((p for p in Pi - pool_realized), key=lambda p: p.bits)
    )
    k_set = set(K)
    unexplained = []
    for B in pool:
        if B in k_set:
            continue
        if not (_realized_set(B, ctx, budget) & Pi):
            unexplained.append(B)
    ok = not realized_in_k and not not_pool_realized and not unexplained
    return OmissionReport(
        ok=ok,
        realized_in_k=realized_in_k,
        not_pool_realized=not_pool_realized,
        unexplained=tuple(unexplained),
        note=POOL_RELATIVE_NOTE,
    )


@dataclass(frozen=True)
class PropertyAReport:
    ok: bool
    counterexamples: tuple[FiniteStructure, ...]
    note: str

    def to_json_dict(self):
        return {
            "ok": self.ok,
            "counterexamples": [A.to_json_dict() for A in self.counterexamples],
            "note": self.note,
        }


def property_A_check(K, pool, ctx: TypeContext, *,
                     budget: int = DEFAULT_RELATION_BUDGET) -> PropertyAReport:
    """Pool-scale closure test: every pool member all of whose realized
    types are realized somewhere in K must itself lie in K; the report
    lists the counterexamples."""
    k_set = set(K)
    k_realized = set()
    for A in K:
        k_realized.update(_realized_set(A, ctx, budget))
    counterexamples = []
    for A in pool:
        if A in k_set:
            continue
        if _realized_set(A, ctx, budget) <= k_realized:
            counterexamples.append(A)
    return PropertyAReport(
        ok=not counterexamples,
        counterexamples=tuple(counterexamples),
        note=POOL_RELATIVE_NOTE,
    )
