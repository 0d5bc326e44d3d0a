"""Equivalence checking between designs: cosimulation, exhaustive enumeration,
and randomized rewrite-rule fuzzing.

This module evaluates designs with its own interpreter, separate from the
e-graph simulator, so it can serve as an oracle for the optimization path.
"""

import itertools
import random
from dataclasses import dataclass

from .ir import Design
from .rewrite import (
    Rewrite,
    rule_designs,
    rule_kind_vars,
    sample_rule_instance,
    solve_rule_widths,
)
from .stimulus import Waveform


class EquivError(Exception):
    pass


@dataclass
class Mismatch:
    """Earliest observed divergence between two designs."""

    cycle: int
    port: str
    expected: int
    actual: int
    stimuli: dict[str, Waveform]

    def __str__(self) -> str:
        return (f"output {self.port!r} differs at cycle {self.cycle}: "
                f"expected {self.expected}, got {self.actual}")


def simulate_design(
    d: Design, stimuli: dict[str, Waveform], cycles: int | None = None
) -> tuple[dict[str, Waveform], list[list[int]]]:
    """Outputs and per-node waveforms of one design under explicit stimuli."""
    if cycles is None:
        cycles = min(stimuli[p].cycles for p, _ in d.inputs) if d.inputs else 0
    values: list[list[int]] = [[0] * cycles for _ in d.nodes]
    for idx, n in enumerate(d.nodes):
        if n.kind == "var":
            src = stimuli[n.port]
            if src.width != n.width:
                raise EquivError(f"stimulus for {n.port!r} is {src.width} bits, want {n.width}")
            values[idx] = list(src.values[:cycles])
    mask_of = [(1 << n.width) - 1 for n in d.nodes]
    for i in range(cycles):
        for idx, n in enumerate(d.nodes):
            k = n.kind
            if k == "var":
                continue
            if k == "const":
                values[idx][i] = n.value
                continue
            ch = n.children
            if k == "reg":
                if i == 0:
                    v = 0
                elif values[ch[1]][i - 1]:
                    v = values[ch[0]][i - 1]
                else:
                    v = values[idx][i - 1]
            elif k == "treg":
                if values[ch[1]][i]:
                    v = values[ch[0]][i]
                else:
                    v = values[idx][i - 1] if i > 0 else 0
            elif k == "mux":
                v = values[ch[1]][i] if values[ch[0]][i] else values[ch[2]][i]
            elif k == "add":
                v = (values[ch[0]][i] + values[ch[1]][i]) & mask_of[idx]
            elif k == "add3":
                v = (values[ch[0]][i] + values[ch[1]][i] + values[ch[2]][i]) & mask_of[idx]
            elif k == "sub":
                v = (values[ch[0]][i] - values[ch[1]][i]) & mask_of[idx]
            elif k == "mul":
                v = values[ch[0]][i] * values[ch[1]][i]
            elif k == "and":
                v = values[ch[0]][i] & values[ch[1]][i]
            elif k == "or":
                v = values[ch[0]][i] | values[ch[1]][i]
            elif k == "xor":
                v = values[ch[0]][i] ^ values[ch[1]][i]
            elif k == "not":
                v = values[ch[0]][i] ^ mask_of[idx]
            elif k == "shl":
                sh = values[ch[1]][i]
                v = (values[ch[0]][i] << sh) & mask_of[idx] if sh < n.width else 0
            elif k == "shr":
                sh = values[ch[1]][i]
                v = values[ch[0]][i] >> sh if sh < n.width else 0
            elif k == "rep":
                base, w = values[ch[0]][i], n.width // n.count
                v = sum(base << (j * w) for j in range(n.count))
            else:
                raise EquivError(f"cannot simulate {k!r}")
            values[idx][i] = v
    outputs = {p: Waveform(d.nodes[idx].width, values[idx]) for p, idx in d.outputs}
    return outputs, values


def cosimulate(d1: Design, d2: Design, stimuli: dict[str, Waveform]) -> Mismatch | None:
    """Run both designs on the same stimuli; None means cycle-for-cycle equal."""
    if d1.signature() != d2.signature():
        raise EquivError(
            f"port signatures differ: {d1.signature()} vs {d2.signature()}"
        )
    out1, _ = simulate_design(d1, stimuli)
    out2, _ = simulate_design(d2, stimuli)
    cycles = min(w.cycles for w in stimuli.values())
    for i in range(cycles):
        for port, _ in d1.outputs:
            a, b = out1[port].values[i], out2[port].values[i]
            if a != b:
                return Mismatch(i, port, a, b, stimuli)
    return None


# ---------------------------------------------------------------------------
# exhaustive checking
#
# Every possible input stream is evaluated at once: each (port, cycle, bit)
# slot doubles the scenario space, and every signal bit is carried as one big
# integer whose j-th bit is that bit's value in scenario j. Word-level
# operators are lowered to bit operations (ripple adders, AND-row multiplier,
# decoded shifts), so the whole enumeration runs in a handful of bignum ops.


def _slot_mask(slot: int, total_bits: int) -> int:
    m = ((1 << (1 << slot)) - 1) << (1 << slot)
    filled = 1 << (slot + 1)
    while filled < (1 << total_bits):
        m |= m << filled
        filled *= 2
    return m


def _ripple_add(a: list[int], b: list[int], carry: int, full: int) -> list[int]:
    out = []
    for x, y in zip(a, b):
        out.append(x ^ y ^ carry)
        carry = (x & y) | (carry & (x ^ y))
    return out


class _BitSim:
    def __init__(self, d: Design, in_bits: dict[str, list[list[int]]], full: int, cycles: int):
        self.d = d
        self.in_bits = in_bits  # port -> [cycle][bit] scenario masks
        self.full = full
        self.cycles = cycles
        self.prev: list[list[int]] = [[0] * n.width for n in d.nodes]
        self.cur: list[list[int]] = [[0] * n.width for n in d.nodes]

    def step(self, i: int) -> None:
        full = self.full
        for idx, n in enumerate(self.d.nodes):
            ch = n.children
            k = n.kind
            if k == "var":
                v = self.in_bits[n.port][i]
            elif k == "const":
                v = [full if (n.value >> b) & 1 else 0 for b in range(n.width)]
            elif k == "not":
                v = [x ^ full for x in self.cur[ch[0]]]
            elif k == "and":
                v = [x & y for x, y in zip(self.cur[ch[0]], self.cur[ch[1]])]
            elif k == "or":
                v = [x | y for x, y in zip(self.cur[ch[0]], self.cur[ch[1]])]
            elif k == "xor":
                v = [x ^ y for x, y in zip(self.cur[ch[0]], self.cur[ch[1]])]
            elif k == "mux":
                s = self.cur[ch[0]][0]
                v = [(s & a) | ((s ^ full) & b)
                     for a, b in zip(self.cur[ch[1]], self.cur[ch[2]])]
            elif k == "rep":
                v = list(self.cur[ch[0]]) * n.count
            elif k == "add":
                v = _ripple_add(self.cur[ch[0]], self.cur[ch[1]], 0, full)
            elif k == "add3":
                v = _ripple_add(_ripple_add(self.cur[ch[0]], self.cur[ch[1]], 0, full),
                                self.cur[ch[2]], 0, full)
            elif k == "sub":
                flipped = [x ^ full for x in self.cur[ch[1]]]
                v = _ripple_add(self.cur[ch[0]], flipped, full, full)
            elif k == "mul":
                a, b = self.cur[ch[0]], self.cur[ch[1]]
                v = [0] * n.width
                for i_b, bit_b in enumerate(b):
                    row = [0] * n.width
                    for i_a, bit_a in enumerate(a):
                        if i_a + i_b < n.width:
                            row[i_a + i_b] = bit_a & bit_b
                    v = _ripple_add(v, row, 0, full)
            elif k in ("shl", "shr"):
                a, sh = self.cur[ch[0]], self.cur[ch[1]]
                v = [0] * n.width
                for amount in range(min(n.width, 1 << len(sh))):
                    eq = full
                    for t, bit in enumerate(sh):
                        eq &= bit if (amount >> t) & 1 else bit ^ full
                    if not eq:
                        continue
                    for b in range(n.width):
                        src = b - amount if k == "shl" else b + amount
                        if 0 <= src < n.width:
                            v[b] |= eq & a[src]
            elif k == "reg":
                if i == 0:
                    v = [0] * n.width
                else:
                    en = self.prev[ch[1]][0]
                    v = [(en & a) | ((en ^ full) & q)
                         for a, q in zip(self.prev[ch[0]], self.prev[idx])]
            elif k == "treg":
                en = self.cur[ch[1]][0]
                held = self.prev[idx] if i > 0 else [0] * n.width
                v = [(en & a) | ((en ^ full) & q)
                     for a, q in zip(self.cur[ch[0]], held)]
            else:
                raise EquivError(f"cannot simulate {k!r}")
            self.cur[idx] = v

    def flip(self) -> None:
        self.prev = [list(v) for v in self.cur]


def exhaustive_check(
    d1: Design, d2: Design, max_cycles: int, max_width: int | None = None
) -> Mismatch | None:
    """Compare two designs on every possible input stream of max_cycles cycles.

    The enumeration bound is (total input bits) * max_cycles <= 24."""
    if d1.signature() != d2.signature():
        raise EquivError("port signatures differ")
    if max_width is not None:
        wide = [p for p, w in d1.inputs if w > max_width]
        if wide:
            raise EquivError(f"ports wider than {max_width}: {', '.join(wide)}")
    total_bits = sum(w for _, w in d1.inputs) * max_cycles
    if total_bits > 24:
        raise EquivError(f"enumeration bound exceeded: {total_bits} stream bits > 24")
    full = (1 << (1 << total_bits)) - 1
    slot = 0
    in_bits: dict[str, list[list[int]]] = {}
    for port, width in d1.inputs:
        per_cycle = []
        for _ in range(max_cycles):
            per_cycle.append([_slot_mask(slot + b, total_bits) for b in range(width)])
            slot += width
        in_bits[port] = per_cycle
    sim1, sim2 = _BitSim(d1, in_bits, full, max_cycles), _BitSim(d2, in_bits, full, max_cycles)
    out1 = {p: idx for p, idx in d1.outputs}
    out2 = {p: idx for p, idx in d2.outputs}
    for i in range(max_cycles):
        sim1.step(i)
        sim2.step(i)
        for port, _ in d1.outputs:
            diff = 0
            for b1, b2 in zip(sim1.cur[out1[port]], sim2.cur[out2[port]]):
                diff |= b1 ^ b2
            if diff:
                scenario = (diff & -diff).bit_length() - 1
                stimuli = _decode_scenario(d1, scenario, max_cycles)
                mm = cosimulate(d1, d2, stimuli)
                if mm is None:  # cannot happen; decoded from a differing scenario
                    raise EquivError("scenario decode failed to reproduce mismatch")
                return mm
        sim1.flip()
        sim2.flip()
    return None


def _decode_scenario(d: Design, scenario: int, cycles: int) -> dict[str, Waveform]:
    slot = 0
    waves = {}
    for port, width in d.inputs:
        vals = []
        for _ in range(cycles):
            v = 0
            for b in range(width):
                v |= ((scenario >> (slot + b)) & 1) << b
            vals.append(v)
            slot += width
        waves[port] = Waveform(width, vals)
    return waves


# ---------------------------------------------------------------------------
# rule fuzzing


@dataclass
class Counterexample:
    lhs: Design
    rhs: Design
    widths: dict[str, int]
    kinds: dict[str, str]
    mismatch: Mismatch


@dataclass
class FuzzResult:
    rule: str
    passed: bool
    trials: int
    counterexample: Counterexample | None = None


def _random_stimuli(d: Design, rng: random.Random, cycles: int) -> dict[str, Waveform]:
    return {
        port: Waveform(width, [rng.getrandbits(width) for _ in range(cycles)])
        for port, width in d.inputs
    }


def _shrink(rule: Rewrite, kinds: dict, found: Counterexample) -> Counterexample:
    """Prefer the smallest witness: all widths 1, then the shortest stream."""
    try:
        widths1 = solve_rule_widths(rule, kinds, lambda _root: 1)
        lhs1, rhs1 = rule_designs(rule, widths1, kinds)
        for cycles in range(1, 5):
            if sum(w for _, w in lhs1.inputs) * cycles > 24:
                break
            mm = exhaustive_check(lhs1, rhs1, cycles)
            if mm is not None:
                return Counterexample(lhs1, rhs1, widths1, dict(kinds), mm)
    except EquivError:
        pass
    cut = found.mismatch.cycle + 1
    trimmed = {p: Waveform(w.width, w.values[:cut]) for p, w in found.mismatch.stimuli.items()}
    mm = cosimulate(found.lhs, found.rhs, trimmed)
    if mm is not None:
        return Counterexample(found.lhs, found.rhs, found.widths, found.kinds, mm)
    return found


def fuzz_rule(
    rule: Rewrite,
    trials: int = 1000,
    seed: int = 0,
    max_width: int = 4,
    cycles: int = 8,
) -> FuzzResult:
    """Random instantiations of both rule sides cosimulated on random streams.
    A counterexample is shrunk toward width 1 and the fewest cycles."""
    rng = random.Random(seed)
    for t in range(1, trials + 1):
        (lhs, rhs), widths, kinds = sample_rule_instance(rule, rng, max_width)
        stimuli = _random_stimuli(lhs, rng, cycles)
        mm = cosimulate(lhs, rhs, stimuli)
        if mm is not None:
            found = Counterexample(lhs, rhs, widths, dict(kinds), mm)
            return FuzzResult(rule.name, False, t, _shrink(rule, kinds, found))
    return FuzzResult(rule.name, True, trials)


def exhaustive_rule_check(rule: Rewrite, cycles: int = 4) -> Counterexample | None:
    """Width-1 instantiation of every operator combination, checked on every
    input stream of the given length."""
    families = rule_kind_vars(rule)
    names = sorted(families)
    for combo in itertools.product(*(families[n] for n in names)):
        kinds = dict(zip(names, combo))
        widths = solve_rule_widths(rule, kinds, lambda _root: 1)
        lhs, rhs = rule_designs(rule, widths, kinds)
        mm = exhaustive_check(lhs, rhs, cycles)
        if mm is not None:
            return Counterexample(lhs, rhs, widths, kinds, mm)
    return None
