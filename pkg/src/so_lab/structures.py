"""Finite relational structures and their evaluation machinery.

Structures live on universes {0..n-1} with relations stored as tuple
sets.  Evaluation is Tarski-style for the first-order part; relation
quantifiers range over all relations of the matching arity, either by
exhaustive enumeration in a fixed lexicographic order (subject to a
candidate budget) or, for closed formulas whose relation quantifiers
form a homogeneous prefix over a first-order matrix, by a backtracking
witness search that decides the same question without materialising
the candidate space.

Everything here is immutable after construction and all operations are
pure functions.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache

from . import formulas as fm
from .errors import BudgetExceededError, ValidationError

DEFAULT_RELATION_BUDGET = 2 ** 24
DEFAULT_PRODUCT_BUDGET = 200_000


@dataclass(frozen=True)
class Signature:
    relations: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [name for name, _ in self.relations]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate relation name in signature")
        for name, arity in self.relations:
            if arity < 1:
                raise ValidationError(f"relation {name!r} has arity {arity} < 1")

    @staticmethod
    def of(mapping) -> "Signature":
        return Signature(tuple(mapping.items()))

    def arity(self, name):
        for n, k in self.relations:
            if n == name:
                return k
        return None

    @property
    def names(self):
        return tuple(name for name, _ in self.relations)

    def to_json_dict(self):
        return dict(self.relations)


EMPTY_SIGNATURE = Signature(())
GRAPH_SIGNATURE = Signature((("edge", 2),))


class FiniteStructure:
    """A structure on universe {0..size-1}; relations are frozensets of
    int tuples and every signature symbol is interpreted (possibly empty).
    """

    __slots__ = ("sig", "size", "rels", "_key", "_hash")

    def __init__(self, sig: Signature, size: int, relations=None):
        if size < 1:
            raise ValidationError("universe must be nonempty")
        relations = dict(relations or {})
        extra = set(relations) - set(sig.names)
        if extra:
            raise ValidationError(f"relations not in signature: {sorted(extra)}")
        rels = {}
        for name, arity in sig.relations:
            tuples = frozenset(tuple(t) for t in relations.get(name, ()))
            for t in tuples:
                if len(t) != arity:
                    raise ValidationError(
                        f"tuple {t} has length {len(t)}, expected arity {arity} for {name!r}"
                    )
                if not all(isinstance(x, int) and 0 <= x < size for x in t):
                    raise ValidationError(f"tuple {t} out of universe range for {name!r}")
            rels[name] = tuples
        self.sig = sig
        self.size = size
        self.rels = rels
        key = (sig, size, tuple(rels[name] for name in sig.names))
        self._key = key
        self._hash = hash(key)

    def rel(self, name):
        return self.rels[name]

    def __eq__(self, other):
        return isinstance(other, FiniteStructure) and self._key == other._key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        rels = {name: sorted(self.rels[name]) for name in self.sig.names}
        return f"FiniteStructure(size={self.size}, rels={rels})"

    def to_json_dict(self):
        return {
            "universe": self.size,
            "signature": self.sig.to_json_dict(),
            "relations": {name: sorted(list(t) for t in self.rels[name]) for name in self.sig.names},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @staticmethod
    def from_json_dict(data) -> "FiniteStructure":
        sig = Signature.of(data["signature"])
        return FiniteStructure(sig, data["universe"], data.get("relations", {}))

    @staticmethod
    def from_json(text) -> "FiniteStructure":
        return FiniteStructure.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class Assignment:
    """Values for free variables: elements for individual variables and
    relations (tuple frozensets) for relation variables."""

    fo: dict
    so: dict

    @staticmethod
    def empty():
        return Assignment({}, {})


# ---------------------------------------------------------------------------
# Relation enumeration
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def tuple_space(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    """All k-tuples over {0..n-1} in lexicographic order."""
    return tuple(itertools.product(range(n), repeat=k))


@lru_cache(maxsize=None)
def tuple_index(n: int, k: int):
    return {t: i for i, t in enumerate(tuple_space(n, k))}


def relation_count(n: int, k: int) -> int:
    return 2 ** (n ** k)


def relation_from_mask(n: int, k: int, mask: int) -> frozenset:
    space = tuple_space(n, k)
    return frozenset(t for i, t in enumerate(space) if mask >> i & 1)


def relation_mask(n: int, k: int, rel) -> int:
    index = tuple_index(n, k)
    mask = 0
    for t in rel:
        mask |= 1 << index[t]
    return mask


_ALL_RELATIONS_CACHE_LIMIT = 2 ** 12


@lru_cache(maxsize=None)
def _all_relations_cached(n, k):
    return tuple(relation_from_mask(n, k, m) for m in range(relation_count(n, k)))


def all_relations(n: int, k: int):
    """All k-ary relations on {0..n-1} in mask (lexicographic) order."""
    count = relation_count(n, k)
    if count <= _ALL_RELATIONS_CACHE_LIMIT:
        return _all_relations_cached(n, k)
    return tuple(relation_from_mask(n, k, m) for m in range(count))


def iter_relations(n: int, k: int):
    count = relation_count(n, k)
    if count <= _ALL_RELATIONS_CACHE_LIMIT:
        return iter(_all_relations_cached(n, k))
    return (relation_from_mask(n, k, m) for m in range(count))


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

_MISSING = object()


def _flatten(g, node_type):
    if isinstance(g, node_type):
        yield from _flatten(g.left, node_type)
        yield from _flatten(g.right, node_type)
    else:
        yield g


def compile_evaluator(A, f, fo_env, so_env, so_names, so_domain):
    """Compile f to a zero-argument closure over the two environment
    dicts; the caller may mutate them between calls.  so_names must hold
    every relation-variable name the environments will carry, so atoms
    bind to the structure's relations statically and to the environment
    dynamically.  Left-to-right short-circuit order is preserved."""

    def build(g, bound):
        if isinstance(g, fm.Atom):
            rel_name, args = g.rel, g.args
            if rel_name in bound:
                if len(args) == 1:
                    a0 = args[0]

                    def ev():
                        try:
                            return (fo_env[a0],) in so_env[rel_name]
                        except KeyError as exc:
                            raise ValidationError(
                                f"unassigned free variable {exc.args[0]!r}") from None
                elif len(args) == 2:
                    a0, a1 = args

                    def ev():
                        try:
                            return (fo_env[a0], fo_env[a1]) in so_env[rel_name]
                        except KeyError as exc:
                            raise ValidationError(
                                f"unassigned free variable {exc.args[0]!r}") from None
                else:

                    def ev():
                        try:
                            return tuple(fo_env[a] for a in args) in so_env[rel_name]
                        except KeyError as exc:
                            raise ValidationError(
                                f"unassigned free variable {exc.args[0]!r}") from None
                return ev
            rel = A.rels.get(rel_name)
            if rel is None:
                raise ValidationError(f"unknown symbol {rel_name!r}")
            if len(args) == 1:
                a0 = args[0]

                def ev():
                    try:
                        return (fo_env[a0],) in rel
                    except KeyError as exc:
                        raise ValidationError(
                            f"unassigned free variable {exc.args[0]!r}") from None
            elif len(args) == 2:
                a0, a1 = args

                def ev():
                    try:
                        return (fo_env[a0], fo_env[a1]) in rel
                    except KeyError as exc:
                        raise ValidationError(
                            f"unassigned free variable {exc.args[0]!r}") from None
            else:

                def ev():
                    try:
                        return tuple(fo_env[a] for a in args) in rel
                    except KeyError as exc:
                        raise ValidationError(
                            f"unassigned free variable {exc.args[0]!r}") from None
            return ev
        if isinstance(g, fm.Eq):
            left, right = g.left, g.right

            def ev():
                try:
                    return fo_env[left] == fo_env[right]
                except KeyError as exc:
                    raise ValidationError(
                        f"unassigned free variable {exc.args[0]!r}") from None
            return ev
        if isinstance(g, fm.Not):
            sub = build(g.sub, bound)
            return lambda: not sub()
        if isinstance(g, (fm.And, fm.Or)):
            # Flatten connective spines into one loop: same evaluation
            # order, far fewer frames on long chains.
            parts = [build(p, bound) for p in _flatten(g, type(g))]
            if isinstance(g, fm.And):

                def ev():
                    for p in parts:
                        if not p():
                            return False
                    return True
            else:

                def ev():
                    for p in parts:
                        if p():
                            return True
                    return False
            return ev
        if isinstance(g, fm.Implies):
            left = build(g.left, bound)
            right = build(g.right, bound)
            return lambda: (not left()) or right()
        if isinstance(g, fm.Iff):
            left = build(g.left, bound)
            right = build(g.right, bound)
            return lambda: left() == right()
        if isinstance(g, (fm.ExistsFO, fm.ForallFO)):
            var = g.var
            body = build(g.body, bound)
            universe = range(A.size)
            if isinstance(g, fm.ExistsFO):

                def ev():
                    old = fo_env.get(var, _MISSING)
                    result = False
                    for e in universe:
                        fo_env[var] = e
                        if body():
                            result = True
                            break
                    if old is _MISSING:
                        del fo_env[var]
                    else:
                        fo_env[var] = old
                    return result
            else:

                def ev():
                    old = fo_env.get(var, _MISSING)
                    result = True
                    for e in universe:
                        fo_env[var] = e
                        if not body():
                            result = False
                            break
                    if old is _MISSING:
                        del fo_env[var]
                    else:
                        fo_env[var] = old
                    return result
            return ev
        if isinstance(g, (fm.ExistsSO, fm.ForallSO)):
            name, arity = g.relvar, g.arity
            body = build(g.body, bound | {name})
            if isinstance(g, fm.ExistsSO):

                def ev():
                    old = so_env.get(name, _MISSING)
                    result = False
                    for rel in so_domain(name, arity):
                        so_env[name] = rel
                        if body():
                            result = True
                            break
                    if old is _MISSING:
                        so_env.pop(name, None)
                    else:
                        so_env[name] = old
                    return result
            else:

                def ev():
                    old = so_env.get(name, _MISSING)
                    result = True
                    for rel in so_domain(name, arity):
                        so_env[name] = rel
                        if not body():
                            result = False
                            break
                    if old is _MISSING:
                        so_env.pop(name, None)
                    else:
                        so_env[name] = old
                    return result
            return ev
        raise TypeError(f"not a formula node: {g!r}")

    return build(f, frozenset(so_names))


def _eval_generic(A, f, fo_env, so_env, so_domain):
    """Shared truth recursion over compiled closures.  so_domain(name,
    arity) yields the relations a quantifier ranges over; it raises if
    quantification is not available (first-order evaluation) or too
    large (budget)."""
    return compile_evaluator(A, f, fo_env, so_env, set(so_env), so_domain)()


def _no_so_domain(name, arity):
    raise ValidationError(
        f"relation quantifier {name!r} not allowed in first-order evaluation"
    )


def eval_fo(A: FiniteStructure, f, asg: Assignment | None = None) -> bool:
    """Tarski satisfaction for formulas without relation quantifiers."""
    if fm.contains_so(f):
        raise ValidationError("eval_fo requires a formula without relation quantifiers")
    fo_env = dict(asg.fo) if asg else {}
    so_env = dict(asg.so) if asg else {}
    return _eval_generic(A, f, fo_env, so_env, _no_so_domain)


def _homogeneous_prefix(f):
    prefix, matrix = fm.so_prefix(f)
    if not prefix or fm.contains_so(matrix):
        return None
    first = prefix[0][0]
    if any(existential != first for existential, _, _ in prefix):
        return None
    return prefix, matrix


def eval_so_full(A: FiniteStructure, f, asg: Assignment | None = None, *,
                 budget: int = DEFAULT_RELATION_BUDGET) -> bool:
    """Truth under full semantics: relation quantifiers range over all
    relations of their arity on the universe.

    Enumeration is lexicographic in the relation mask and short-circuits;
    a quantifier whose candidate count 2^(n^k) exceeds the budget raises
    BudgetExceededError, except that closed homogeneous-prefix formulas
    over a first-order matrix are decided by witness search instead.
    """
    fo_env = dict(asg.fo) if asg else {}
    so_env = dict(asg.so) if asg else {}
    if fm.contains_so(f):
        hom = _homogeneous_prefix(f)
        if hom is not None:
            from . import sat

            prefix, matrix = hom
            return sat.eval_homogeneous(A, prefix, matrix, fo_env, so_env)

    def so_domain(name, k):
        count = relation_count(A.size, k)
        if count > budget:
            raise BudgetExceededError(
                f"quantifier {name!r} needs 2^({A.size}^{k}) = {count} candidate"
                f" relations, exceeding the budget of {budget}",
                required=count,
                budget=budget,
            )
        return iter_relations(A.size, k)

    return _eval_generic(A, f, fo_env, so_env, so_domain)


# ---------------------------------------------------------------------------
# Isomorphism
# ---------------------------------------------------------------------------

def _element_profile(A):
    """Per-element invariant: occurrence counts per relation and position."""
    profiles = [[] for _ in range(A.size)]
    for name, arity in A.sig.relations:
        counts = [[0] * arity for _ in range(A.size)]
        for t in A.rels[name]:
            for pos, x in enumerate(t):
                counts[x][pos] += 1
        for e in range(A.size):
            profiles[e].extend(counts[e])
    return [tuple(p) for p in profiles]


def find_isomorphism(A: FiniteStructure, B: FiniteStructure):
    """The lexicographically least isomorphism A -> B as an image tuple,
    or None when the structures are not isomorphic."""
    if A.sig != B.sig:
        raise ValidationError("signature mismatch")
    if A.size != B.size:
        return None
    pa = _element_profile(A)
    pb = _element_profile(B)
    if sorted(pa) != sorted(pb):
        return None
    n = A.size
    image = [-1] * n
    used = [False] * n

    def consistent(v):
        # Check all tuples lying inside the assigned prefix {0..v}.
        w = image[v]
        for name in A.sig.names:
            ra, rb = A.rels[name], B.rels[name]
            for t in ra:
                if v in t and all(x <= v for x in t):
                    if tuple(image[x] for x in t) not in rb:
                        return False
            for t in rb:
                if w in t and all(used[x] for x in t):
                    back = tuple(image.index(x) for x in t)
                    if back not in ra:
                        return False
        return True

    def search(v):
        if v == n:
            return True
        for w in range(n):
            if used[w] or pa[v] != pb[w]:
                continue
            image[v] = w
            used[w] = True
            if consistent(v) and search(v + 1):
                return True
            used[w] = False
            image[v] = -1
        return False

    return tuple(image) if search(0) else None


def is_isomorphism(A, B, image) -> bool:
    if A.sig != B.sig or A.size != B.size or sorted(image) != list(range(A.size)):
        return False
    for name in A.sig.names:
        mapped = frozenset(tuple(image[x] for x in t) for t in A.rels[name])
        if mapped != B.rels[name]:
            return False
    return True


def canonical_key(A: FiniteStructure):
    """Permutation-minimal encoding: equal keys iff isomorphic."""
    n = A.size
    best = None
    for perm in itertools.permutations(range(n)):
        key = []
        for name, arity in A.sig.relations:
            index = tuple_index(n, arity)
            mask = 0
            for t in A.rels[name]:
                mask |= 1 << index[tuple(perm[x] for x in t)]
            key.append(mask)
        key = tuple(key)
        if best is None or key < best:
            best = key
    return (n, best)


# ---------------------------------------------------------------------------
# Model enumeration
# ---------------------------------------------------------------------------

def iter_structures(sig: Signature, n: int, *, budget: int = DEFAULT_RELATION_BUDGET):
    """All labeled structures of universe size n, lexicographic in the
    per-relation masks."""
    total = 1
    for _, arity in sig.relations:
        total *= relation_count(n, arity)
        if total > budget:
            raise BudgetExceededError(
                f"enumerating size-{n} structures needs {total} candidates,"
                f" exceeding the budget of {budget}",
                required=total,
                budget=budget,
            )
    spaces = [tuple_space(n, arity) for _, arity in sig.relations]
    for masks in itertools.product(*[range(relation_count(n, arity))
                                     for _, arity in sig.relations]):
        rels = {}
        for (name, _), space, mask in zip(sig.relations, spaces, masks):
            rels[name] = frozenset(t for i, t in enumerate(space) if mask >> i & 1)
        yield FiniteStructure(sig, n, rels)


def models_up_to(f, sig: Signature, nmax: int, *,
                 budget: int = DEFAULT_RELATION_BUDGET) -> list[FiniteStructure]:
    """All models of the closed formula f with universe size <= nmax, one
    representative per isomorphism class, in deterministic order."""
    fm.validate_closed(f, sig)
    out = []
    for n in range(1, nmax + 1):
        seen = set()
        for A in iter_structures(sig, n, budget=budget):
            key = canonical_key(A)
            if key in seen:
                continue
            seen.add(key)
            if eval_so_full(A, f, budget=budget):
                out.append(A)
    return out
