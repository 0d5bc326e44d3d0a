"""What happens when a rewrite rule is wrong.

Every shipped rule survives randomized cosimulation plus exhaustive width-1
checking. This script adds a deliberately broken rule (the mask polarity on
a mux leg is inverted) and lets the fuzzer hunt it down, then prints the
shrunken counterexample: smallest widths, shortest stream.
"""

from powersat import fuzz_rule, print_design
from powersat.rewrite import PNode, PRep, PVar, Rewrite, rules_by_name

print("fuzzing the shipped library (60 trials each):")
for rule in rules_by_name(None):
    res = fuzz_rule(rule, trials=60, seed=1)
    print(f"  {rule.name:28s} {'ok' if res.passed else 'BROKEN'}")

s, b, c = PVar("s"), PVar("b"), PVar("c")
mask = PNode(("and",), (b, PRep(PNode(("not",), (s,)), "b")))
bad = Rewrite("gate-left-bad", "data-gate",
              PNode(("mux",), (s, b, c)),
              PNode(("mux",), (s, mask, c)))

res = fuzz_rule(bad, trials=1000, seed=1)
assert not res.passed
ce = res.counterexample
print(f"\n{bad.name}: counterexample after {res.trials} trials")
print(f"  mismatch: {ce.mismatch}")
print(f"  widths shrunk to {ce.widths}")
print("  left side:")
print("   " + print_design(ce.lhs).replace("\n", "\n   "))
print("  right side:")
print("   " + print_design(ce.rhs).replace("\n", "\n   "))
