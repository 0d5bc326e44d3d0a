"""E-graph over netlist operators: union-find, hashconsing, and congruence rebuilding."""

from dataclasses import dataclass, field

from .ir import Design, Node, WidthError, infer_width

# Design-space counts saturate here so huge e-graphs stay cheap to summarize.
COUNT_CAP = (1 << 63) - 1


class EGraphError(Exception):
    """Internal invariant violation; indicates a bug, not bad user input."""


@dataclass(frozen=True)
class ENode:
    """An operator whose children are e-class ids."""

    kind: str
    children: tuple[int, ...] = ()
    width: int = 0
    port: str = ""
    value: int = 0
    count: int = 0


def node_key(n: ENode) -> tuple:
    """Stable sort key for e-nodes (Python's hash() is salted per process)."""
    return (n.kind, n.children, n.port, n.value, n.count)


def enode_of(design: Design, idx: int, classes: list[int]) -> ENode:
    n = design.nodes[idx]
    return ENode(n.kind, tuple(classes[c] for c in n.children), n.width, n.port, n.value, n.count)


class _EClass:
    __slots__ = ("nodes", "parents", "width")

    def __init__(self, width: int):
        self.nodes: set[ENode] = set()
        self.parents: list[tuple[ENode, int]] = []
        self.width = width


@dataclass
class RootInfo:
    """Output roots of the design the graph was seeded from."""

    ports: list[str] = field(default_factory=list)
    classes: list[int] = field(default_factory=list)


class EGraph:
    """Equality classes of netlist expressions with congruence closure.

    Merges queue affected classes on a worklist; rebuild() repairs parent
    hashcons entries and upward-merges congruent parents until a fixpoint.
    """

    def __init__(self):
        self._uf: list[int] = []
        self._classes: dict[int, _EClass] = {}
        self._hashcons: dict[ENode, int] = {}
        self._worklist: list[int] = []
        self.roots = RootInfo()
        # Bumped by any structural change; equal before/after means saturation.
        self.version = 0
        self._sorted_cache: dict[int, list[ENode]] = {}
        self._cache_version = -1
        # Which rewrite introduced each node ("design" for seeded nodes).
        self.made_by: dict[tuple, str] = {}
        self.origin_tag = "design"

    # -- union-find --------------------------------------------------------

    def find(self, c: int) -> int:
        root = c
        while self._uf[root] != root:
            root = self._uf[root]
        while self._uf[c] != root:  # path compression
            self._uf[c], c = root, self._uf[c]
        return root

    def _fresh(self, width: int) -> int:
        cid = len(self._uf)
        self._uf.append(cid)
        self._classes[cid] = _EClass(width)
        return cid

    # -- construction ------------------------------------------------------

    def canonicalize(self, n: ENode) -> ENode:
        ch = tuple(self.find(c) for c in n.children)
        if ch == n.children:
            return n
        out = ENode(n.kind, ch, n.width, n.port, n.value, n.count)
        tag = self.made_by.get(node_key(n))
        if tag is not None:
            self.made_by.setdefault(node_key(out), tag)
        return out

    def add(self, n: ENode) -> int:
        n = self.canonicalize(n)
        hit = self._hashcons.get(n)
        if hit is not None:
            return self.find(hit)
        cid = self._fresh(n.width)
        self._classes[cid].nodes.add(n)
        self.made_by.setdefault(node_key(n), self.origin_tag)
        for c in set(n.children):
            self._classes[c].parents.append((n, cid))
        self._hashcons[n] = cid
        self.version += 1
        return cid

    def add_expr(self, design: Design) -> list[int]:
        """Insert every node of a design; returns one root class per output."""
        classes: list[int] = []
        for i, n in enumerate(design.nodes):
            classes.append(self.add(enode_of(design, i, classes)))
        roots = [classes[idx] for _, idx in design.outputs]
        self.roots = RootInfo([p for p, _ in design.outputs], roots)
        return roots

    def design_classes(self, design: Design) -> list[int]:
        """Canonical class of each design node (idempotent re-insertion)."""
        classes: list[int] = []
        for i in range(len(design.nodes)):
            classes.append(self.add(enode_of(design, i, classes)))
        return classes

    def design_enodes(self, design: Design) -> dict[int, set[ENode]]:
        """Canonical members contributed by a design, grouped by class."""
        classes = self.design_classes(design)
        out: dict[int, set[ENode]] = {}
        for i in range(len(design.nodes)):
            n = self.canonicalize(enode_of(design, i, classes))
            out.setdefault(self.find(classes[i]), set()).add(n)
        return out

    # -- merging and rebuilding --------------------------------------------

    def merge(self, a: int, b: int) -> int:
        a, b = self.find(a), self.find(b)
        if a == b:
            return a
        ca, cb = self._classes[a], self._classes[b]
        if ca.width != cb.width:
            raise EGraphError(f"merging classes of widths {ca.width} and {cb.width}")
        # Union by size of the node sets.
        if len(ca.nodes) < len(cb.nodes):
            a, b, ca, cb = b, a, cb, ca
        self._uf[b] = a
        ca.nodes |= cb.nodes
        ca.parents.extend(cb.parents)
        del self._classes[b]
        self._worklist.append(a)
        self.version += 1
        return a

    def _repair(self, cid: int) -> None:
        cls = self._classes.get(cid)
        if cls is None:
            return
        # Re-canonicalize parents; congruent parents collapse via the hashcons.
        old_parents = cls.parents
        for pnode, pcls in old_parents:
            self._hashcons.pop(pnode, None)
        fresh: dict[ENode, int] = {}
        for pnode, pcls in old_parents:
            n = self.canonicalize(pnode)
            pcls = self.find(pcls)
            if n in fresh and fresh[n] != pcls:
                pcls = self.merge(fresh[n], pcls)
            fresh[n] = pcls
            hit = self._hashcons.get(n)
            if hit is not None and self.find(hit) != pcls:
                pcls = self.merge(hit, pcls)
                fresh[n] = pcls
            self._hashcons[n] = pcls
        cid = self.find(cid)
        cls = self._classes[cid]
        cls.parents = list(fresh.items())
        cls.nodes = {self.canonicalize(n) for n in cls.nodes}

    def _sweep(self) -> bool:
        """Full normalization pass; returns True if it found anything to merge."""
        merged = False
        canon: dict[ENode, int] = {}
        for cid in sorted(self._classes):
            if cid not in self._classes:
                continue
            cls = self._classes[cid]
            cls.nodes = {self.canonicalize(n) for n in cls.nodes}
            for n in cls.nodes:
                prev = canon.get(n)
                if prev is None:
                    canon[n] = cid
                elif self.find(prev) != self.find(cid):
                    self.merge(prev, cid)
                    merged = True
        if not merged:
            self._hashcons = {n: self.find(c) for n, c in canon.items()}
        return merged

    def rebuild(self) -> None:
        """Restore congruence: repair queued classes, then verify globally."""
        while True:
            while self._worklist:
                todo = {self.find(c) for c in self._worklist}
                self._worklist.clear()
                for cid in sorted(todo):
                    self._repair(cid)
            if not self._sweep():
                break

    # -- queries -----------------------------------------------------------

    def class_ids(self) -> list[int]:
        return sorted(self._classes)

    def nodes_of(self, cid: int) -> list[ENode]:
        cid = self.find(cid)
        if self._cache_version != self.version:
            self._sorted_cache.clear()
            self._cache_version = self.version
        hit = self._sorted_cache.get(cid)
        if hit is None:
            hit = sorted(self._classes[cid].nodes, key=node_key)
            self._sorted_cache[cid] = hit
        return hit

    def class_width(self, cid: int) -> int:
        return self._classes[self.find(cid)].width

    def class_count(self) -> int:
        return len(self._classes)

    def enode_count(self) -> int:
        return sum(len(c.nodes) for c in self._classes.values())

    def root_classes(self) -> list[int]:
        return [self.find(c) for c in self.roots.classes]

    def provenance(self, n: ENode) -> str:
        """Name of the rewrite that first introduced this node."""
        return self.made_by.get(node_key(n), "design")

    def check_invariants(self) -> None:
        """Hashcons injectivity and child canonicality; for tests and debugging."""
        seen: dict[ENode, int] = {}
        for cid, cls in self._classes.items():
            if self.find(cid) != cid:
                raise EGraphError(f"class {cid} stored under a non-canonical id")
            for n in cls.nodes:
                if self.canonicalize(n) != n:
                    raise EGraphError(f"stale children in {n} of class {cid}")
                if n in seen:
                    raise EGraphError(f"{n} appears in classes {seen[n]} and {cid}")
                seen[n] = cid

    # -- summaries -----------------------------------------------------------

    def _count_pass(self, counts: dict[int, int]) -> list[int]:
        changed = []
        for cid in sorted(self._classes):
            total = 0
            for n in self._classes[cid].nodes:
                prod = 1
                for c in n.children:
                    prod *= counts[self.find(c)]
                    if prod == 0 or prod >= COUNT_CAP:
                        break
                total += min(prod, COUNT_CAP)
                if total >= COUNT_CAP:
                    total = COUNT_CAP
                    break
            if total > counts[cid]:
                counts[cid] = total
                changed.append(cid)
        return changed

    def count_designs(self, roots: list[int] | None = None) -> int:
        """Number of distinct expression trees reachable for the root classes.

        Monotone fixpoint from zero: a node contributes the product of its
        child class counts, a class sums its nodes, everything saturates at
        COUNT_CAP. Classes only reachable through themselves stay at zero.
        A class still growing once every acyclic dependency chain has had
        time to settle is fed by a productive cycle, so its limit is the cap.
        """
        counts = {cid: 0 for cid in self._classes}
        limit = len(self._classes) + 1
        while True:
            changed: list[int] = []
            for _ in range(limit):
                changed = self._count_pass(counts)
                if not changed:
                    break
            if not changed:
                break
            for cid in changed:
                counts[cid] = COUNT_CAP
        if roots is None:
            roots = self.root_classes()
        result = 1
        for cid in sorted(set(self.find(c) for c in roots)):
            result = min(result * counts[cid], COUNT_CAP)
        return result

    def _render(self, n: ENode) -> str:
        if n.kind == "var":
            return f"var:{n.port}"
        if n.kind == "const":
            return f"const:{n.width}'d{n.value}"
        name = f"rep{n.count}" if n.kind == "rep" else n.kind
        return f"{name}(" + ",".join(f"c{c}" for c in n.children) + ")"

    def dump(self) -> str:
        """One line per class: 'c<ID> w<WIDTH>: node node ...'."""
        lines = []
        for cid in self.class_ids():
            cls = self._classes[cid]
            rendered = " ".join(self._render(n) for n in self.nodes_of(cid))
            lines.append(f"c{cid} w{cls.width}: {rendered}")
        return "\n".join(lines) + "\n"


def enode_width_check(n: ENode, widths: tuple[int, ...]) -> None:
    """Assert an e-node's stored width matches what its children imply."""
    if n.kind == "var" or n.kind == "const":
        return
    w = infer_width(n.kind, widths, n.count)
    if w != n.width:
        raise WidthError(f"{n.kind} node stored width {n.width}, inferred {w}")
