"""From directive strings to runtime calls.

The parser turns strings like "parallel for reduction(+:PI)" into validated
directives; the planner combines a directive with a structural description
of its block and emits the lowering: a nested function per parallel region,
scheduled_range in place of the loop header, and a critical-protected
combine per reduction variable.
"""

from ompcore import (
    BlockDescriptor,
    DirectiveSyntaxError,
    LoopLevel,
    classify_variables,
    parse,
    plan,
    render_plan,
    validity_table,
)

# Parsing and validation.
directive = parse("parallel for reduction(+:PI) schedule(static, 4)")
print("parsed names:", directive.names)
print("canonical form:", directive.render())

print("\nclauses allowed on 'single':", sorted(validity_table()["single"]))

try:
    parse("single copyprivate(x) nowait")
except DirectiveSyntaxError as exc:
    print("rejected as expected:", exc)

# Classification: clause-listed variables take their clause's class, other
# used non-locals default to shared, block locals stay invisible.
block = BlockDescriptor(
    kind="loop",
    levels=[LoopLevel("i", "0", "n")],
    body=["local = (i + 0.5) * w", "PI += 4.0 / (1.0 + local * local)"],
    reads={"n", "w", "PI"},
    writes={"PI"},
    locals={"local"},
)
captures = classify_variables(directive, block)
print("\ncaptures:", {var: cap.kind for var, cap in captures.items()})

# The full lowering. The emitted text is runnable Python against the
# ompcore runtime, which is how the test suite checks plan soundness.
rewrite = plan(directive, block)
print("\nlowering:")
print(render_plan(rewrite))

print("runtime calls in plan order:", [step[0] for step in rewrite.calls])
