"""Take a small word-level netlist from text to data structure and back.

The textual form is an s-expression module: declared input ports with bit
widths, then named outputs over a tiny operator vocabulary (mux, add, mul,
masks, registers). Every width in the tree is inferred bottom-up; a design
that survives parsing is width-correct by construction.
"""

from powersat import parse_design, print_design

TEXT = """
; select between a bypass word and a scaled sum
(module scaler
  (input sel 1)
  (input x 12)
  (input y 12)
  (output out (mux sel x (shl (add x y) (const 4 1)))))
"""

design = parse_design(TEXT)

print(f"module {design.name}: {len(design.nodes)} nodes")
for idx, node in enumerate(design.nodes):
    label = node.port if node.kind == "var" else node.kind
    print(f"  n{idx}: {label:5s} width={node.width} children={list(node.children)}")

print("\nprinted back out:")
print(print_design(design))

# the printer emits a canonical form, so a second trip is a fixed point
assert parse_design(print_design(design)) == design
print("round trip is exact")
