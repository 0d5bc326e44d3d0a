"""Minimum-cost extraction: pick one node per needed class, acyclically.

Selecting a node makes every child class needed. Combinational child edges
must respect a topological order; register data and enable edges read state
from the previous cycle and are exempt. Solved by depth-first branch and
bound with the original design seeding the incumbent, so a feasible answer
always exists and the objective can only improve on the baseline.
"""

import time
from dataclasses import dataclass, field

from .egraph import EGraph, EGraphError, ENode, node_key
from .ir import Design, DesignBuilder


@dataclass
class SelectionProblem:
    g: EGraph
    roots: list[int]
    candidates: dict[int, list[tuple[float, tuple, ENode]]]  # sorted (score, key, node)
    incumbent: dict[int, ENode] | None = None
    mode: str = "power"


@dataclass
class SolverStats:
    explored: int = 0
    proven_optimal: bool = False


@dataclass
class ExtractionSolution:
    choice: dict[int, ENode] = field(default_factory=dict)
    objective: float = 0.0
    stats: SolverStats = field(default_factory=SolverStats)


def build_problem(
    g: EGraph,
    scores: dict[int, dict[ENode, float]],
    roots: list[int] | None = None,
    incumbent: dict[int, ENode] | None = None,
    mode: str = "power",
) -> SelectionProblem:
    """Package per-node scores into a selection problem over the graph."""
    roots = [g.find(c) for c in (roots if roots is not None else g.root_classes())]
    candidates = {}
    for cid in g.class_ids():
        per = scores[cid]
        ranked = sorted(((per[n], node_key(n), n) for n in g.nodes_of(cid)))
        if not ranked:
            raise EGraphError(f"class {cid} has no candidate nodes")
        candidates[cid] = ranked
    return SelectionProblem(g, roots, candidates, incumbent, mode)


def seed_from_design(g: EGraph, design: Design) -> dict[int, ENode]:
    """The original design as a selection: each of its classes keeps its node."""
    origin = g.design_enodes(design)
    return {cid: min(nodes, key=node_key) for cid, nodes in origin.items()}


def _closure(g: EGraph, choice: dict[int, ENode], roots: list[int]) -> dict[int, ENode]:
    """Restrict a selection to the classes actually reachable from the roots."""
    out: dict[int, ENode] = {}
    stack = [g.find(r) for r in roots]
    while stack:
        cid = stack.pop()
        if cid in out:
            continue
        n = choice.get(cid)
        if n is None:
            raise EGraphError(f"selection misses needed class {cid}")
        out[cid] = n
        stack.extend(g.find(c) for c in n.children)
    return out


def selection_cost(problem: SelectionProblem, choice: dict[int, ENode]) -> float:
    total = 0.0
    for cid, n in choice.items():
        per = {key: (s, nd) for s, key, nd in problem.candidates[problem.g.find(cid)]}
        s, _ = per[node_key(n)]
        total += s
    return total


def solve(problem: SelectionProblem, time_budget: float | None = None) -> ExtractionSolution:
    """Exact branch and bound; returns the incumbent if the budget runs out.

    Classes are decided in ascending-id order among those currently needed;
    candidates are tried cheapest first; the bound adds each undecided needed
    class's cheapest member. Ties on the objective resolve to the selection
    that is lexicographically smallest by (class id, node key).
    """
    g = problem.g
    cands = problem.candidates
    min_cost = {cid: ranked[0][0] for cid, ranked in cands.items()}
    roots = sorted(set(problem.roots))

    best_choice: dict[int, ENode] | None = None
    best_cost = float("inf")
    best_key: tuple | None = None
    stats = SolverStats()

    def sel_key(choice: dict[int, ENode]) -> tuple:
        return tuple(sorted((cid, node_key(n)) for cid, n in choice.items()))

    if problem.incumbent is not None:
        seeded = _closure(g, problem.incumbent, roots)
        best_choice = seeded
        best_cost = selection_cost(problem, seeded)
        best_key = sel_key(seeded)

    deadline = time.monotonic() + time_budget if time_budget is not None else None
    out_of_time = False
    choice: dict[int, ENode] = {}
    edges: dict[int, set[int]] = {}

    def reaches(src: int, dst: int) -> bool:
        stack, seen = [src], set()
        while stack:
            x = stack.pop()
            if x == dst:
                return True
            if x in seen:
                continue
            seen.add(x)
            stack.extend(edges.get(x, ()))
        return False

    def dfs(undecided: set[int], cost: float) -> None:
        nonlocal best_choice, best_cost, best_key, out_of_time
        if out_of_time:
            return
        stats.explored += 1
        if deadline is not None and stats.explored % 256 == 0 and time.monotonic() > deadline:
            out_of_time = True
            return
        if not undecided:
            key = sel_key(choice)
            if cost < best_cost - 1e-9 or (
                cost <= best_cost + 1e-9 and (best_key is None or key < best_key)
            ):
                best_choice = dict(choice)
                best_cost = cost
                best_key = key
            return
        bound = cost + sum(min_cost[c] for c in undecided)
        if bound > best_cost + 1e-9:
            return
        cid = min(undecided)
        rest = undecided - {cid}
        for score, _key, n in cands[cid]:
            if cost + score + sum(min_cost[c] for c in rest) > best_cost + 1e-9:
                break  # candidates are sorted; nothing cheaper follows
            children = {g.find(c) for c in n.children}
            comb = children if n.kind != "reg" else set()
            if any(reaches(d, cid) for d in comb):
                continue
            choice[cid] = n
            edges[cid] = comb
            grow = {d for d in children if d not in choice and d != cid}
            dfs(rest | grow, cost + score)
            del choice[cid]
            del edges[cid]
            if out_of_time:
                return

    dfs(set(roots), 0.0)
    if best_choice is None:
        raise EGraphError("search exhausted with no feasible selection")
    stats.proven_optimal = not out_of_time
    return ExtractionSolution(best_choice, best_cost, stats)


def reconstruct(g: EGraph, solution: ExtractionSolution, base: Design) -> Design:
    """Materialize the chosen nodes as a design with the base's port interface."""
    root_classes = g.design_classes(base)
    b = DesignBuilder(base.name)
    for port, width in base.inputs:
        b.add_input(port, width)
    memo: dict[int, int] = {}
    on_path: set[int] = set()

    def build(cid: int) -> int:
        cid = g.find(cid)
        if cid in memo:
            return memo[cid]
        if cid in on_path:
            raise EGraphError(f"selected nodes form a register feedback loop at class {cid}")
        on_path.add(cid)
        n = solution.choice.get(cid)
        if n is None:
            raise EGraphError(f"no node chosen for needed class {cid}")
        if n.kind == "var":
            idx = b.var(n.port)
        elif n.kind == "const":
            idx = b.const(n.width, n.value)
        else:
            idx = b.op(n.kind, *(build(c) for c in n.children), count=n.count)
        on_path.discard(cid)
        memo[cid] = idx
        return idx

    for port, node_idx in base.outputs:
        b.add_output(port, build(root_classes[node_idx]))
    return b.finish()


def lp_text(problem: SelectionProblem) -> str:
    """The selection ILP in LP file format, for cross-checking with an
    external solver. x_<class>_<i> picks a node, y_<class> marks a class
    needed, integer levels linearize the combinational acyclicity."""
    g = problem.g
    class_ids = sorted(problem.candidates)
    big_m = len(class_ids) + 1
    obj_terms = []
    rows = []
    binaries = []
    generals = []
    for cid in class_ids:
        ranked = problem.candidates[cid]
        xs = []
        for i, (score, _key, n) in enumerate(ranked):
            x = f"x_{cid}_{i}"
            xs.append(x)
            binaries.append(x)
            obj_terms.append(f"{score:.9g} {x}")
            for child in sorted({g.find(c) for c in n.children}):
                rows.append(f" dep_{x}_{child}: {x} - y_{child} <= 0")
            if n.kind != "reg":
                for child in sorted({g.find(c) for c in n.children}):
                    rows.append(
                        f" lvl_{x}_{child}: lvl_{child} - lvl_{cid} + {big_m} {x} <= {big_m - 1}"
                    )
        rows.append(f" sel_{cid}: " + " + ".join(xs) + f" - y_{cid} = 0")
        binaries.append(f"y_{cid}")
        generals.append(f"lvl_{cid}")
    for r in sorted(set(problem.roots)):
        rows.append(f" root_{r}: y_{r} = 1")
    lines = ["Minimize", " obj: " + (" + ".join(obj_terms) if obj_terms else "0")]
    lines.append("Subject To")
    lines.extend(rows)
    lines.append("Bounds")
    for v in generals:
        lines.append(f" 0 <= {v} <= {big_m}")
    lines.append("Binaries")
    lines.append(" " + " ".join(binaries))
    lines.append("Generals")
    lines.append(" " + " ".join(generals))
    lines.append("End")
    return "\n".join(lines) + "\n"
