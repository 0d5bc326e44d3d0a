"""Cycle-accurate simulation of a whole e-graph via one representative per class.

Registers update from the previous cycle: a Reg's output at cycle i is its
data input at i-1 when enabled at i-1, the held value otherwise, and 0 at
cycle 0. A transparent register (Treg) passes its input combinationally while
enabled, holds while disabled, and reads 0 before its first enable.
"""

from dataclasses import dataclass

import numpy as np

from .egraph import EGraph, ENode, node_key
from .stimulus import Waveform


class SimulationError(Exception):
    pass


def choose_representatives(
    g: EGraph, origin: dict[int, set[ENode]] | None = None
) -> dict[int, ENode]:
    """Pick one member per class so the induced graph is combinationally acyclic.

    Classes holding nodes of the seed design take those nodes first (the
    statistics then favor the designer's structure); remaining classes are
    filled in rounds, each round admitting nodes whose combinational children
    are already assigned. Reg nodes read state, so they are always admissible.
    """
    rep: dict[int, ENode] = {}
    if origin:
        for cid in sorted(origin, key=lambda c: g.find(c)):
            root = g.find(cid)
            if root not in rep:
                rep[root] = min(origin[cid], key=node_key)

    def ready(n: ENode) -> bool:
        if n.kind == "reg":
            return True
        return all(g.find(c) in rep for c in n.children)

    pending = [c for c in g.class_ids() if c not in rep]
    while pending:
        progressed = False
        still = []
        for cid in pending:
            candidates = [n for n in g.nodes_of(cid) if ready(n)]
            if candidates:
                rep[cid] = candidates[0]  # nodes_of is sorted by node_key
                progressed = True
            else:
                still.append(cid)
        if not progressed:
            raise SimulationError(f"no acyclic representative choice for classes {still}")
        pending = still
    return rep


def _toposort(g: EGraph, rep: dict[int, ENode]) -> list[int]:
    """Classes ordered so combinational children precede their readers."""
    deps = {
        cid: set() if n.kind == "reg" else {g.find(c) for c in n.children}
        for cid, n in rep.items()
    }
    order: list[int] = []
    ready = sorted(c for c, d in deps.items() if not d)
    placed: set[int] = set()
    readers: dict[int, list[int]] = {}
    for cid, d in deps.items():
        for c in d:
            readers.setdefault(c, []).append(cid)
    remaining = {c: len(d) for c, d in deps.items()}
    while ready:
        nxt: list[int] = []
        for cid in ready:
            order.append(cid)
            placed.add(cid)
            for r in readers.get(cid, ()):
                remaining[r] -= 1
                if remaining[r] == 0:
                    nxt.append(r)
        ready = sorted(nxt)
    if len(order) != len(rep):
        raise SimulationError("combinational cycle among chosen representatives")
    return order


def eval_enode_stream(
    n: ENode, child_waves: list[list[int]], cycles: int, inputs: dict[str, Waveform]
) -> list[int]:
    """Simulate a single e-node given the full waveforms of its child classes."""
    mask = (1 << n.width) - 1
    out: list[int] = []
    if n.kind == "var":
        return list(inputs[n.port].values[:cycles])
    if n.kind == "const":
        return [n.value] * cycles
    for i in range(cycles):
        out.append(_step(n, child_waves, out, i, mask))
    return out


def _step(n: ENode, ch: list[list[int]], own: list[int], i: int, mask: int) -> int:
    kind = n.kind
    if kind == "reg":
        if i == 0:
            return 0
        return ch[0][i - 1] if ch[1][i - 1] else own[i - 1]
    if kind == "treg":
        if ch[1][i]:
            return ch[0][i]
        return own[i - 1] if i > 0 else 0
    if kind == "mux":
        return ch[1][i] if ch[0][i] else ch[2][i]
    if kind == "add":
        return (ch[0][i] + ch[1][i]) & mask
    if kind == "add3":
        return (ch[0][i] + ch[1][i] + ch[2][i]) & mask
    if kind == "sub":
        return (ch[0][i] - ch[1][i]) & mask
    if kind == "mul":
        return ch[0][i] * ch[1][i]
    if kind == "and":
        return ch[0][i] & ch[1][i]
    if kind == "or":
        return ch[0][i] | ch[1][i]
    if kind == "xor":
        return ch[0][i] ^ ch[1][i]
    if kind == "not":
        return ch[0][i] ^ mask
    if kind == "shl":
        sh = ch[1][i]
        return (ch[0][i] << sh) & mask if sh < n.width else 0
    if kind == "shr":
        sh = ch[1][i]
        return ch[0][i] >> sh if sh < n.width else 0
    if kind == "rep":
        v, w = ch[0][i], n.width // n.count
        return sum(v << (k * w) for k in range(n.count))
    raise SimulationError(f"cannot simulate {kind!r}")


def simulate(
    g: EGraph, rep: dict[int, ENode], stimuli: dict[str, Waveform]
) -> dict[int, Waveform]:
    """Waveform of every class under its representative. Every value is
    checked against the class width as it is produced."""
    cycle_counts = {w.cycles for w in stimuli.values()}
    if len(cycle_counts) != 1:
        raise SimulationError(f"stimuli disagree on cycle count: {sorted(cycle_counts)}")
    cycles = cycle_counts.pop()
    order = _toposort(g, rep)
    # buffers first: a register may precede its children in evaluation order
    waves: dict[int, list[int]] = {}
    for cid in order:
        n = rep[cid]
        if n.kind == "var":
            if n.port not in stimuli:
                raise SimulationError(f"no stimulus for input port {n.port!r}")
            waves[cid] = list(stimuli[n.port].values)
        elif n.kind == "const":
            waves[cid] = [n.value] * cycles
        else:
            waves[cid] = [0] * cycles
    evaluators: list[tuple[int, ENode, list[list[int]], list[int], int]] = []
    for cid in order:
        n = rep[cid]
        if n.kind in ("var", "const"):
            continue
        evaluators.append((cid, n, [waves[g.find(c)] for c in n.children],
                           waves[cid], (1 << n.width) - 1))
    for i in range(cycles):
        for cid, n, ch, own, mask in evaluators:
            v = _step(n, ch, own, i, mask)
            if v & ~mask:
                raise SimulationError(f"value {v} overflows width of class {cid}")
            own[i] = v
    return {cid: Waveform(rep[cid].width, vals) for cid, vals in waves.items()}


@dataclass(frozen=True)
class ActivityStats:
    """Switching statistics of one waveform."""

    width: int
    cycles: int
    toggles: tuple[int, ...]  # per-bit transition counts
    rates: tuple[float, ...]  # per-bit toggle rates, transitions/(cycles-1)
    word_rate: float  # arithmetic mean of the per-bit rates
    static_prob: tuple[float, ...]  # per-bit fraction of cycles spent at 1
    static_prob_mean: float


def activity(w: Waveform) -> ActivityStats:
    """Per-bit and word-level toggle statistics of a waveform."""
    n = w.cycles
    if n < 2:
        raise SimulationError("activity needs at least two cycles")
    if w.width <= 64:
        arr = np.array(w.values, dtype=np.uint64)
        diff = arr[1:] ^ arr[:-1]
        toggles = tuple(int(((diff >> np.uint64(b)) & np.uint64(1)).sum())
                        for b in range(w.width))
        ones = tuple(int(((arr >> np.uint64(b)) & np.uint64(1)).sum())
                     for b in range(w.width))
    else:
        toggles_l = [0] * w.width
        ones_l = [0] * w.width
        prev = w.values[0]
        for b in range(w.width):
            ones_l[b] += (prev >> b) & 1
        for v in w.values[1:]:
            d = v ^ prev
            for b in range(w.width):
                toggles_l[b] += (d >> b) & 1
                ones_l[b] += (v >> b) & 1
            prev = v
        toggles, ones = tuple(toggles_l), tuple(ones_l)
    rates = tuple(t / (n - 1) for t in toggles)
    probs = tuple(o / n for o in ones)
    return ActivityStats(
        width=w.width,
        cycles=n,
        toggles=toggles,
        rates=rates,
        word_rate=sum(rates) / w.width,
        static_prob=probs,
        static_prob_mean=sum(probs) / w.width,
    )


def graph_activity(waves: dict[int, Waveform]) -> dict[int, ActivityStats]:
    return {cid: activity(w) for cid, w in waves.items()}


def activity_csv(stats: dict[int, ActivityStats]) -> str:
    """CSV dump, one row per class: class_id,width,word_toggle_rate,static_prob_mean."""
    lines = ["class_id,width,word_toggle_rate,static_prob_mean"]
    for cid in sorted(stats):
        s = stats[cid]
        lines.append(f"{cid},{s.width},{s.word_rate:.6f},{s.static_prob_mean:.6f}")
    return "\n".join(lines) + "\n"


def class_consistency_mismatches(
    g: EGraph,
    rep: dict[int, ENode],
    waves: dict[int, Waveform],
    stimuli: dict[str, Waveform],
) -> list[tuple[int, ENode, int]]:
    """Every member of every class, simulated directly over its child class
    waveforms, must reproduce the class waveform. Returns (class, node,
    first differing cycle) triples; an empty list means consistent."""
    cycles = min(w.cycles for w in stimuli.values())
    bad = []
    for cid in g.class_ids():
        expect = waves[cid].values
        for n in g.nodes_of(cid):
            child_waves = [waves[g.find(c)].values for c in n.children]
            got = eval_enode_stream(n, child_waves, cycles, stimuli)
            if got != expect:
                first = next(i for i, (x, y) in enumerate(zip(got, expect)) if x != y)
                bad.append((cid, n, first))
    return bad
