"""Rewrite rules over the e-graph: patterns, matching, instantiation, saturation.

A mask written {w{s}} in datapath notation is materialized structurally as
And(x, Rep(w, s)) where s is a single select bit replicated to x's width.
"""

import random
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field

from .egraph import EGraph, EGraphError, ENode
from .ir import Design, DesignBuilder, WidthError, infer_width

Subst = dict[str, "int | str"]


@dataclass(frozen=True)
class PVar:
    """Matches any class and binds it."""

    name: str


@dataclass(frozen=True)
class PConst:
    """Matches (or builds) a literal constant."""

    width: int
    value: int


@dataclass(frozen=True)
class PConstOf:
    """Builds a constant as wide as a bound class; value is an int or "ones"."""

    width_of: str
    value: "int | str"


@dataclass(frozen=True)
class PRep:
    """A mask replication: a Rep node spreading one select bit to the width
    of the class bound as `width_of`."""

    child: "Pattern"
    width_of: str


@dataclass(frozen=True)
class PNode:
    """An operator node; `kinds` lists the admissible operators and
    `kind_var` binds whichever matched so the other side can reuse it."""

    kinds: tuple[str, ...]
    children: tuple["Pattern", ...]
    kind_var: str | None = None
    bind: str | None = None


Pattern = PVar | PConst | PConstOf | PRep | PNode


def _n(kind, *children, kind_var=None, bind=None) -> PNode:
    kinds = (kind,) if isinstance(kind, str) else tuple(kind)
    return PNode(kinds, tuple(children), kind_var, bind)


def _mask(x: Pattern, of: str, sel: Pattern) -> PNode:
    return _n("and", x, PRep(sel, of))


@dataclass(frozen=True)
class Rewrite:
    name: str
    group: str
    lhs: Pattern
    rhs: Pattern
    cond: Callable[[EGraph, Subst], bool] | None = None


# ---------------------------------------------------------------------------
# matching


def _match_children(g: EGraph, pats, classes, subst: Subst) -> Iterator[Subst]:
    if not pats:
        yield subst
        return
    for s in _match_class(g, pats[0], classes[0], subst):
        yield from _match_children(g, pats[1:], classes[1:], s)


def _match_class(g: EGraph, pat: Pattern, cid: int, subst: Subst) -> Iterator[Subst]:
    cid = g.find(cid)
    if isinstance(pat, PVar):
        bound = subst.get(pat.name)
        if bound is None:
            yield {**subst, pat.name: cid}
        elif g.find(bound) == cid:
            yield subst
        return
    if isinstance(pat, PConst):
        for n in g.nodes_of(cid):
            if n.kind == "const" and n.width == pat.width and n.value == pat.value:
                yield subst
                return
        return
    if isinstance(pat, PRep):
        of = subst.get(pat.width_of)
        if of is None:
            raise EGraphError(f"PRep width reference {pat.width_of!r} unbound at match time")
        want = g.class_width(of)
        for n in g.nodes_of(cid):
            if n.kind == "rep" and n.count == want:
                yield from _match_class(g, pat.child, n.children[0], subst)
        return
    if isinstance(pat, PNode):
        if pat.bind is not None:
            prev = subst.get(pat.bind)
            if prev is not None and g.find(prev) != cid:
                return
            subst = {**subst, pat.bind: cid}
        for n in g.nodes_of(cid):
            if n.kind not in pat.kinds:
                continue
            s0 = subst
            if pat.kind_var is not None:
                bound_kind = s0.get(pat.kind_var)
                if bound_kind is None:
                    s0 = {**s0, pat.kind_var: n.kind}
                elif bound_kind != n.kind:
                    continue
            yield from _match_children(g, pat.children, n.children, s0)
        return
    raise EGraphError(f"cannot match against {pat!r}")


def ematch(g: EGraph, pat: Pattern) -> list[tuple[int, Subst]]:
    """All (class, substitution) pairs where the pattern matches, deduplicated,
    in deterministic class-id order."""
    out = []
    seen = set()
    for cid in g.class_ids():
        for subst in _match_class(g, pat, cid, {}):
            key = (cid, tuple(sorted(subst.items())))
            if key not in seen:
                seen.add(key)
                out.append((cid, subst))
    return out


def instantiate(g: EGraph, pat: Pattern, subst: Subst) -> int:
    """Build a pattern into the graph under a substitution; returns its class."""
    if isinstance(pat, PVar):
        return g.find(subst[pat.name])
    if isinstance(pat, PConst):
        return g.add(ENode("const", (), pat.width, value=pat.value))
    if isinstance(pat, PConstOf):
        w = g.class_width(subst[pat.width_of])
        v = (1 << w) - 1 if pat.value == "ones" else int(pat.value)
        return g.add(ENode("const", (), w, value=v))
    if isinstance(pat, PRep):
        child = instantiate(g, pat.child, subst)
        count = g.class_width(subst[pat.width_of])
        width = count * g.class_width(child)
        return g.add(ENode("rep", (child,), width, count=count))
    if isinstance(pat, PNode):
        kind = subst[pat.kind_var] if pat.kind_var is not None else pat.kinds[0]
        children = tuple(instantiate(g, c, subst) for c in pat.children)
        widths = tuple(g.class_width(c) for c in children)
        try:
            width = infer_width(kind, widths)
        except WidthError as e:
            raise EGraphError(f"rewrite built an ill-formed {kind} node: {e}") from e
        return g.add(ENode(kind, children, width))
    raise EGraphError(f"cannot instantiate {pat!r}")


# ---------------------------------------------------------------------------
# the rule library

# Operator families. Gating distributes through all of these because each
# maps all-zero operands to an all-zero result.
_OPS_MASK = ("mul", "shl", "shr", "add", "sub")
_OPS_MASK_LEFT = ("mul", "shl", "shr")
_OPS_ZERO = ("add", "sub", "mul", "and", "or", "xor", "shl", "shr")
_OPS_RETIME = ("and", "or", "xor")


def rule_library() -> list[Rewrite]:
    a, b, c = PVar("a"), PVar("b"), PVar("c")
    s, s1, s2, en = PVar("s"), PVar("s1"), PVar("s2"), PVar("en")
    one = PConst(1, 1)
    zero = PConst(1, 0)
    rules = [
        # -- data gating ---------------------------------------------------
        Rewrite("gate-left", "data-gate",
                _n("mux", s, b, c),
                _n("mux", s, _mask(b, "b", s), c)),
        Rewrite("gate-right", "data-gate",
                _n("mux", s, b, c),
                _n("mux", s, b, _mask(c, "c", _n("not", s)))),
        Rewrite("propagate-mask", "data-gate",
                _n("and", _n(_OPS_MASK, a, b, kind_var="op", bind="ab"), PRep(s, "ab")),
                _n(_OPS_MASK, _mask(a, "a", s), _mask(b, "b", s), kind_var="op")),
        Rewrite("propagate-mask-left", "data-gate",
                _n("and", _n(_OPS_MASK_LEFT, a, b, kind_var="op", bind="ab"), PRep(s, "ab")),
                _n(_OPS_MASK_LEFT, _mask(a, "a", s), b, kind_var="op")),
        Rewrite("propagate-mux-mask", "data-gate",
                _n("and", _n("mux", s1, a, b, bind="m"), PRep(s2, "m")),
                _n("mux", s1, _mask(a, "a", s2), _mask(b, "b", s2))),
        Rewrite("propagate-mux-mask-right", "data-gate",
                _n("and", _n("mux", s1, a, b, bind="m"), PRep(s2, "m")),
                _n("mux", _n("and", s1, s2), a, _mask(b, "b", s2))),
        Rewrite("propagate-mux-mask-left", "data-gate",
                _n("and", _n("mux", s1, a, b, bind="m"), PRep(s2, "m")),
                _n("mux", _n("or", s1, _n("not", s2)), _mask(a, "a", s2), b)),
        Rewrite("combine-masks", "data-gate",
                _n("and", _mask(a, "a", s1), PRep(s2, "a")),
                _mask(a, "a", _n("and", s1, s2))),
        # -- transparent registers ------------------------------------------
        Rewrite("transp-reg-left", "transparent-register",
                _n("mux", s, b, c),
                _n("mux", s, _n("treg", b, s), c)),
        Rewrite("transp-reg-right", "transparent-register",
                _n("mux", s, b, c),
                _n("mux", s, b, _n("treg", c, _n("not", s)))),
        Rewrite("transp-reg-mask", "transparent-register",
                _mask(a, "a", s),
                _n("and", _n("treg", a, s), PRep(s, "a"))),
        Rewrite("transp-reg-saturate", "transparent-register",
                _n("or", a, PRep(s, "a")),
                _n("or", _n("treg", a, _n("not", s)), PRep(s, "a"))),
        Rewrite("transp-reg-reg", "transparent-register",
                _n("reg", a, en),
                _n("reg", _n("treg", a, en), en)),
        Rewrite("propagate", "transparent-register",
                _n("treg", _n(_OPS_ZERO, a, b, kind_var="op"), s),
                _n(_OPS_ZERO, _n("treg", a, s), _n("treg", b, s), kind_var="op")),
        Rewrite("propagate-mux", "transparent-register",
                _n("treg", _n("mux", s1, a, b), s2),
                _n("mux", _n("treg", s1, s2), _n("treg", a, s2), _n("treg", b, s2))),
        # Sound only when both guards are the same signal: with independent
        # guards the inner latch can refresh while the combined one holds.
        Rewrite("combine-transp-reg", "transparent-register",
                _n("treg", _n("treg", a, s), s),
                _n("treg", a, _n("and", s, s))),
        # -- clock gating and retiming ---------------------------------------
        # Restricted to operators with op(0,0) = 0 so the cycle-0 register
        # output is preserved (nand/nor/xnor would flip it).
        Rewrite("retime-boolean", "clock-gate-retime",
                _n(_OPS_RETIME, _n("reg", a, en), _n("reg", b, en), kind_var="op"),
                _n("reg", _n(_OPS_RETIME, a, b, kind_var="op"), en)),
        Rewrite("clock-gate-reg", "clock-gate-retime",
                _n("treg", _n("reg", a, en), _n("reg", b, en)),
                _n("reg", a, _n("and", en, b))),
        # -- boolean ---------------------------------------------------------
        Rewrite("and-mask-identity", "boolean", _mask(a, "a", one), a),
        Rewrite("and-mask-annihilate", "boolean", _mask(a, "a", zero), PConstOf("a", 0)),
        Rewrite("or-mask-identity", "boolean", _n("or", a, PRep(zero, "a")), a),
        Rewrite("or-mask-saturate", "boolean", _n("or", a, PRep(one, "a")), PConstOf("a", "ones")),
        Rewrite("and-idempotent", "boolean", _n("and", a, a), a),
        Rewrite("or-idempotent", "boolean", _n("or", a, a), a),
        Rewrite("double-negation", "boolean", _n("not", _n("not", a)), a),
        Rewrite("de-morgan-and", "boolean",
                _n("not", _n("and", a, b)),
                _n("or", _n("not", a), _n("not", b))),
        Rewrite("de-morgan-or", "boolean",
                _n("not", _n("or", a, b)),
                _n("and", _n("not", a), _n("not", b))),
        Rewrite("and-commute", "boolean", _n("and", a, b), _n("and", b, a)),
        Rewrite("and-associate", "boolean",
                _n("and", _n("and", a, b), c),
                _n("and", a, _n("and", b, c))),
        # -- arithmetic --------------------------------------------------------
        Rewrite("add-commute", "arithmetic", _n("add", a, b), _n("add", b, a)),
        Rewrite("add-associate", "arithmetic",
                _n("add", _n("add", a, b), c),
                _n("add", a, _n("add", b, c))),
        Rewrite("add-cluster", "arithmetic",
                _n("add", _n("add", a, b), c),
                _n("add3", a, b, c)),
        Rewrite("add-uncluster", "arithmetic",
                _n("add3", a, b, c),
                _n("add", _n("add", a, b), c)),
        Rewrite("mux-op-distribute", "arithmetic",
                _n(_OPS_ZERO, _n("mux", s, a, b), c, kind_var="op"),
                _n("mux", s, _n(_OPS_ZERO, a, c, kind_var="op"), _n(_OPS_ZERO, b, c, kind_var="op"))),
        Rewrite("mux-op-factor", "arithmetic",
                _n("mux", s, _n(_OPS_ZERO, a, c, kind_var="op"), _n(_OPS_ZERO, b, c, kind_var="op")),
                _n(_OPS_ZERO, _n("mux", s, a, b), c, kind_var="op")),
    ]
    for r in rules:
        _validate_rule(r)
    return rules


def rules_by_name(names=None, disabled=()) -> list[Rewrite]:
    """The library, optionally filtered; unknown names raise ValueError."""
    lib = rule_library()
    known = {r.name for r in lib}
    for name in list(names or []) + list(disabled):
        if name not in known:
            raise ValueError(f"unknown rule {name!r}; known rules: {', '.join(sorted(known))}")
    if names is not None:
        lib = [r for r in lib if r.name in set(names)]
    return [r for r in lib if r.name not in set(disabled)]


def _pattern_vars(pat: Pattern, out: list[str]) -> None:
    if isinstance(pat, PVar):
        if pat.name not in out:
            out.append(pat.name)
    elif isinstance(pat, PRep):
        _pattern_vars(pat.child, out)
    elif isinstance(pat, PNode):
        for c in pat.children:
            _pattern_vars(c, out)


def _pattern_binds(pat: Pattern, out: set[str]) -> None:
    if isinstance(pat, PRep):
        _pattern_binds(pat.child, out)
    elif isinstance(pat, PNode):
        if pat.bind:
            out.add(pat.bind)
        if pat.kind_var:
            out.add(pat.kind_var)
        for c in pat.children:
            _pattern_binds(c, out)


def _validate_rule(r: Rewrite) -> None:
    lhs_vars: list[str] = []
    _pattern_vars(r.lhs, lhs_vars)
    binds: set[str] = set(lhs_vars)
    _pattern_binds(r.lhs, binds)
    rhs_vars: list[str] = []
    _pattern_vars(r.rhs, rhs_vars)
    rhs_refs = set(rhs_vars)
    _pattern_binds(r.rhs, rhs_refs)
    loose = rhs_refs - binds
    if loose:
        raise EGraphError(f"rule {r.name}: right side references unbound {sorted(loose)}")


# ---------------------------------------------------------------------------
# saturation


@dataclass
class IterationStats:
    iteration: int
    classes: int
    nodes: int
    designs: int


@dataclass
class RunReport:
    iterations: list[IterationStats] = field(default_factory=list)
    stop_reason: str = "iteration-limit"

    @property
    def saturated(self) -> bool:
        return self.stop_reason == "saturated"


def apply_rules(
    g: EGraph,
    rules: list[Rewrite],
    max_iters: int = 8,
    max_nodes: int = 50_000,
    with_design_counts: bool = True,
) -> RunReport:
    """Run every rule each iteration until saturation or a limit.

    Matches are collected against the frozen graph, then instantiated and
    merged as a batch, then congruence is rebuilt once per iteration.
    """
    g.rebuild()
    report = RunReport()
    for it in range(1, max_iters + 1):
        before = g.version
        matches: list[tuple[Rewrite, int, Subst]] = []
        for rule in rules:
            for cid, subst in ematch(g, rule.lhs):
                if rule.cond is None or rule.cond(g, subst):
                    matches.append((rule, cid, subst))
        for rule, cid, subst in matches:
            g.origin_tag = rule.name
            try:
                new_cid = instantiate(g, rule.rhs, subst)
            finally:
                g.origin_tag = "design"
            lhs_cid = g.find(cid)
            if g.class_width(lhs_cid) != g.class_width(new_cid):
                raise EGraphError(f"rule {rule.name} changed width on class {lhs_cid}")
            g.merge(lhs_cid, new_cid)
        g.rebuild()
        report.iterations.append(IterationStats(
            it, g.class_count(), g.enode_count(),
            g.count_designs() if with_design_counts else 0,
        ))
        if g.enode_count() > max_nodes:
            report.stop_reason = "node-limit"
            break
        if g.version == before:
            report.stop_reason = "saturated"
            break
    return report


# ---------------------------------------------------------------------------
# instantiating a rule's two sides as concrete designs (for fuzz testing)


class _Widths:
    """Union-find over pattern variable widths with forced values."""

    def __init__(self):
        self.parent: dict[str, str] = {}
        self.forced: dict[str, int] = {}

    def find(self, v: str) -> str:
        self.parent.setdefault(v, v)
        while self.parent[v] != v:
            self.parent[v] = self.parent[self.parent[v]]
            v = self.parent[v]
        return v

    def union(self, x: str, y: str) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return
        fx, fy = self.forced.get(rx), self.forced.get(ry)
        if fx is not None and fy is not None and fx != fy:
            raise EGraphError(f"conflicting widths for {x} and {y}")
        self.parent[ry] = rx
        if fy is not None:
            self.forced[rx] = fy

    def force(self, v: str, k: int) -> None:
        r = self.find(v)
        prev = self.forced.get(r)
        if prev is not None and prev != k:
            raise EGraphError(f"conflicting widths for {v}")
        self.forced[r] = k


# Width handles: ("v", var), ("k", literal), ("s", h1, h2) for products,
# ("f",) for widths that adapt automatically (masks, built constants).
def _walk_widths(pat: Pattern, uf: _Widths, kinds: Subst):
    if isinstance(pat, PVar):
        return ("v", pat.name)
    if isinstance(pat, PConst):
        return ("k", pat.width)
    if isinstance(pat, PConstOf):
        return ("f",)
    if isinstance(pat, PRep):
        _force(_walk_widths(pat.child, uf, kinds), 1, uf)
        return ("f",)
    if isinstance(pat, PNode):
        kind = kinds[pat.kind_var] if pat.kind_var is not None else pat.kinds[0]
        hs = [_walk_widths(c, uf, kinds) for c in pat.children]
        if kind in ("add", "sub", "and", "or", "xor", "add3"):
            for other in hs[1:]:
                _unify(hs[0], other, uf)
            return _first_concrete(hs)
        if kind == "mux":
            _force(hs[0], 1, uf)
            _unify(hs[1], hs[2], uf)
            return _first_concrete(hs[1:])
        if kind in ("reg", "treg"):
            _force(hs[1], 1, uf)
            return hs[0]
        if kind == "mul":
            return ("s", hs[0], hs[1])
        if kind in ("shl", "shr", "not"):
            return hs[0]
    raise EGraphError(f"cannot solve widths for {pat!r}")


def _first_concrete(hs):
    for h in hs:
        if h[0] != "f":
            return h
    return ("f",)


def _unify(h1, h2, uf: _Widths) -> None:
    if h1[0] == "f" or h2[0] == "f":
        return
    if h1[0] == "s" and h2[0] == "s":
        _unify(h1[1], h2[1], uf)
        _unify(h1[2], h2[2], uf)
        return
    if h1[0] == "s" or h2[0] == "s":
        raise EGraphError("cannot unify a product width with a plain width")
    if h1[0] == "v" and h2[0] == "v":
        uf.union(h1[1], h2[1])
    elif h1[0] == "v":
        uf.force(h1[1], h2[1])
    elif h2[0] == "v":
        uf.force(h2[1], h1[1])
    elif h1[1] != h2[1]:
        raise EGraphError("conflicting literal widths")


def _force(h, k: int, uf: _Widths) -> None:
    if h[0] == "f":
        return
    if h[0] == "v":
        uf.force(h[1], k)
    elif h[0] == "k":
        if h[1] != k:
            raise EGraphError("conflicting literal widths")
    else:
        raise EGraphError("cannot force a product width")


def rule_kind_vars(rule: Rewrite) -> dict[str, tuple[str, ...]]:
    """kind_var name -> admissible operator family, from the left side."""
    out: dict[str, tuple[str, ...]] = {}

    def walk(pat):
        if isinstance(pat, PRep):
            walk(pat.child)
        elif isinstance(pat, PNode):
            if pat.kind_var is not None and pat.kind_var not in out:
                out[pat.kind_var] = pat.kinds
            for c in pat.children:
                walk(c)

    walk(rule.lhs)
    return out


def solve_rule_widths(rule: Rewrite, kinds: Subst, pick: Callable[[str], int]) -> dict[str, int]:
    """Assign a width to every left-side variable; `pick` chooses free widths."""
    uf = _Widths()
    _walk_widths(rule.lhs, uf, kinds)
    names: list[str] = []
    _pattern_vars(rule.lhs, names)
    chosen: dict[str, int] = {}
    widths: dict[str, int] = {}
    for name in names:
        root = uf.find(name)
        if root not in chosen:
            chosen[root] = uf.forced.get(root, 0) or pick(root)
        widths[name] = chosen[root]
    return widths


def _build_pattern(pat: Pattern, b: DesignBuilder, widths: dict[str, int],
                   kinds: Subst, bindw: dict[str, int]) -> int:
    if isinstance(pat, PVar):
        return b.var(pat.name)
    if isinstance(pat, PConst):
        return b.const(pat.width, pat.value)
    if isinstance(pat, PConstOf):
        w = bindw.get(pat.width_of, widths.get(pat.width_of, 0))
        value = (1 << w) - 1 if pat.value == "ones" else int(pat.value)
        return b.const(w, value)
    if isinstance(pat, PRep):
        child = _build_pattern(pat.child, b, widths, kinds, bindw)
        count = bindw.get(pat.width_of, widths.get(pat.width_of, 0))
        return b.op("rep", child, count=count)
    if isinstance(pat, PNode):
        kind = kinds[pat.kind_var] if pat.kind_var is not None else pat.kinds[0]
        children = [_build_pattern(c, b, widths, kinds, bindw) for c in pat.children]
        idx = b.op(kind, *children)
        if pat.bind is not None:
            bindw[pat.bind] = b.nodes[idx].width
        return idx
    raise EGraphError(f"cannot build {pat!r}")


def rule_designs(rule: Rewrite, widths: dict[str, int], kinds: Subst) -> tuple[Design, Design]:
    """Both sides of a rule as designs over identical input ports."""
    names: list[str] = []
    _pattern_vars(rule.lhs, names)
    designs = []
    for tag, pat in (("lhs", rule.lhs), ("rhs", rule.rhs)):
        b = DesignBuilder(f"{rule.name.replace('-', '_')}_{tag}")
        for name in names:
            b.add_input(name, widths[name])
        bindw: dict[str, int] = dict(widths)
        out = _build_pattern(pat, b, widths, kinds, bindw)
        b.add_output("out", out)
        designs.append(b.finish())
    return designs[0], designs[1]


def sample_rule_instance(rule: Rewrite, rng: random.Random, max_width: int = 4):
    """Random operator choices and widths for one fuzz trial."""
    kinds: Subst = {kv: rng.choice(family) for kv, family in rule_kind_vars(rule).items()}
    widths = solve_rule_widths(rule, kinds, lambda _root: rng.randint(1, max_width))
    return rule_designs(rule, widths, kinds), widths, kinds
