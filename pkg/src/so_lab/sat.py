"""Witness search for homogeneous relation-quantifier prefixes.

A closed sentence EX2 X1 .. EX2 Xm M with first-order matrix M holds on
a finite structure iff the propositional formula obtained by grounding
M over the universe (one Boolean per candidate tuple of each Xi) is
satisfiable.  Universal prefixes are decided through the dual.  The
grounded formula goes through a Tseitin transform and a small DPLL with
counting-based unit propagation; branching is restricted to the tuple
variables, which keeps the procedure complete."""
from __future__ import annotations

from . import formulas as fm
from .errors import SoLabError, ValidationError

TRUE = ("true",)
FALSE = ("false",)


def eval_homogeneous(A, prefix, matrix, fo_env, so_env) -> bool:
    existential = prefix[0][0]
    if existential:
        return _satisfiable(A, prefix, matrix, fo_env, so_env, negate=False)
    return not _satisfiable(A, prefix, matrix, fo_env, so_env, negate=True)


def _satisfiable(A, prefix, matrix, fo_env, so_env, negate):
    from .structures import tuple_index

    n = A.size
    offsets = {}
    spaces = {}
    base = 0
    for _, name, arity in prefix:
        offsets[name] = base
        spaces[name] = tuple_index(n, arity)
        base += n ** arity
    nbase = base

    tree = _ground(matrix, A, dict(fo_env), dict(so_env), offsets, spaces, negate)
    if tree is TRUE:
        return True
    if tree is FALSE:
        return False
    clauses, nvars = _tseitin(tree, nbase)
    return _dpll(clauses, nvars, nbase)


# ---------------------------------------------------------------------------
# Grounding to negation normal form over tuple variables
# ---------------------------------------------------------------------------

def _mk_and(children):
    flat = []
    for c in children:
        if c is FALSE:
            return FALSE
        if c is TRUE:
            continue
        if isinstance(c, tuple) and c[0] == "and":
            flat.extend(c[1])
        else:
            flat.append(c)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return ("and", tuple(flat))


def _mk_or(children):
    flat = []
    for c in children:
        if c is TRUE:
            return TRUE
        if c is FALSE:
            continue
        if isinstance(c, tuple) and c[0] == "or":
            flat.extend(c[1])
        else:
            flat.append(c)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return ("or", tuple(flat))


def _ground(g, A, fo_env, so_env, offsets, spaces, neg):
    if isinstance(g, fm.Atom):
        if g.rel in offsets:
            try:
                point = tuple(fo_env[a] for a in g.args)
            except KeyError as exc:
                raise ValidationError(f"unassigned free variable {exc.args[0]!r}") from None
            lit = offsets[g.rel] + spaces[g.rel][point] + 1
            return -lit if neg else lit
        rel = so_env.get(g.rel)
        if rel is None:
            rel = A.rels.get(g.rel)
            if rel is None:
                raise ValidationError(f"unknown symbol {g.rel!r}")
        try:
            point = tuple(fo_env[a] for a in g.args)
        except KeyError as exc:
            raise ValidationError(f"unassigned free variable {exc.args[0]!r}") from None
        return TRUE if (point in rel) != neg else FALSE
    if isinstance(g, fm.Eq):
        try:
            value = fo_env[g.left] == fo_env[g.right]
        except KeyError as exc:
            raise ValidationError(f"unassigned free variable {exc.args[0]!r}") from None
        return TRUE if value != neg else FALSE
    if isinstance(g, fm.Not):
        return _ground(g.sub, A, fo_env, so_env, offsets, spaces, not neg)
    if isinstance(g, fm.And):
        mk = _mk_or if neg else _mk_and
        return mk([_ground(g.left, A, fo_env, so_env, offsets, spaces, neg),
                   _ground(g.right, A, fo_env, so_env, offsets, spaces, neg)])
    if isinstance(g, fm.Or):
        mk = _mk_and if neg else _mk_or
        return mk([_ground(g.left, A, fo_env, so_env, offsets, spaces, neg),
                   _ground(g.right, A, fo_env, so_env, offsets, spaces, neg)])
    if isinstance(g, fm.Implies):
        if neg:
            return _mk_and([_ground(g.left, A, fo_env, so_env, offsets, spaces, False),
                            _ground(g.right, A, fo_env, so_env, offsets, spaces, True)])
        return _mk_or([_ground(g.left, A, fo_env, so_env, offsets, spaces, True),
                       _ground(g.right, A, fo_env, so_env, offsets, spaces, False)])
    if isinstance(g, fm.Iff):
        lp = _ground(g.left, A, fo_env, so_env, offsets, spaces, False)
        ln = _ground(g.left, A, fo_env, so_env, offsets, spaces, True)
        rp = _ground(g.right, A, fo_env, so_env, offsets, spaces, False)
        rn = _ground(g.right, A, fo_env, so_env, offsets, spaces, True)
        if neg:
            return _mk_or([_mk_and([lp, rn]), _mk_and([ln, rp])])
        return _mk_or([_mk_and([lp, rp]), _mk_and([ln, rn])])
    if isinstance(g, (fm.ExistsFO, fm.ForallFO)):
        disjunctive = isinstance(g, fm.ExistsFO) != neg
        mk = _mk_or if disjunctive else _mk_and
        children = []
        old = fo_env.get(g.var)
        for e in range(A.size):
            fo_env[g.var] = e
            child = _ground(g.body, A, fo_env, so_env, offsets, spaces, neg)
            if disjunctive and child is TRUE:
                children = [TRUE]
                break
            if not disjunctive and child is FALSE:
                children = [FALSE]
                break
            children.append(child)
        if old is None:
            fo_env.pop(g.var, None)
        else:
            fo_env[g.var] = old
        return mk(children)
    raise SoLabError(f"matrix is not first-order: {g!r}")


# ---------------------------------------------------------------------------
# Tseitin transform and DPLL
# ---------------------------------------------------------------------------

def _tseitin(tree, nbase):
    clauses = []
    nvars = nbase
    memo = {}

    def lit_of(node):
        nonlocal nvars
        if isinstance(node, int):
            return node
        cached = memo.get(node)
        if cached is not None:
            return cached
        lits = [lit_of(c) for c in node[1]]
        nvars += 1
        v = nvars
        if node[0] == "and":
            for l in lits:
                clauses.append([-v, l])
            clauses.append([v] + [-l for l in lits])
        else:
            for l in lits:
                clauses.append([v, -l])
            clauses.append([-v] + lits)
        memo[node] = v
        return v

    root = lit_of(tree)
    clauses.append([root])
    return clauses, nvars


def _dpll(clauses, nvars, nbase):
    npos = [len(c) for c in clauses]
    nsat = [0] * len(clauses)
    occ = {}
    for ci, clause in enumerate(clauses):
        for lit in clause:
            occ.setdefault(lit, []).append(ci)
    assign = [0] * (nvars + 1)
    trail = []

    def set_literal(lit, units):
        v = abs(lit)
        value = 1 if lit > 0 else -1
        if assign[v]:
            return assign[v] == value
        assign[v] = value
        trail.append(v)
        ok = True
        for ci in occ.get(lit, ()):
            nsat[ci] += 1
        # Finish every counter update before reporting a conflict, or a
        # later undo would restore counts that were never decremented.
        for ci in occ.get(-lit, ()):
            npos[ci] -= 1
            if nsat[ci] == 0:
                if npos[ci] == 0:
                    ok = False
                elif npos[ci] == 1:
                    for l in clauses[ci]:
                        if assign[abs(l)] == 0:
                            units.append(l)
                            break
        return ok

    def propagate(units):
        while units:
            if not set_literal(units.pop(), units):
                return False
        return True

    def undo(mark):
        while len(trail) > mark:
            v = trail.pop()
            value = assign[v]
            assign[v] = 0
            lit = v if value > 0 else -v
            for ci in occ.get(lit, ()):
                nsat[ci] -= 1
            for ci in occ.get(-lit, ()):
                npos[ci] += 1

    units = [c[0] for c in clauses if len(c) == 1]
    if not propagate(units):
        return False

    # Tuple variables folded away during grounding are irrelevant to the
    # answer; branching over them would only pad the search.
    branch_order = [v for v in range(1, nbase + 1) if v in occ or -v in occ]

    def solve(start):
        var = 0
        for i in range(start, len(branch_order)):
            if assign[branch_order[i]] == 0:
                var = branch_order[i]
                start = i
                break
        if var == 0:
            # Every constrained tuple variable is fixed: propagation has
            # settled the Tseitin variables, so the formula is satisfied.
            return True
        for value in (var, -var):
            mark = len(trail)
            if propagate([value]) and solve(start + 1):
                return True
            undo(mark)
        return False

    return solve(0)
