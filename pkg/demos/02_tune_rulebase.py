"""Load the shipped rulebase, retune one term, and save the variant.

Run from anywhere:

    python3 demos/02_tune_rulebase.py

The confidence system is an ordinary .fis file, so a tuned variant is
just a matter of editing a membership function and serializing. The
stock system treats a rate of change above ~8 units/s as suspect; for a
process with legitimately fast dynamics, widening the ``Low`` term keeps
confidence up through quick but genuine transients.
"""

from dataclasses import replace
from pathlib import Path

from sensorval import (
    MembershipFunction,
    default_system,
    infer,
    serialize_fis,
    validate_fis,
)

stock = default_system()

roc = stock.inputs[1]
low = ("Low", MembershipFunction.triangular(-12.0, 0.0, 12.0))
tolerant = replace(
    stock,
    name="confidence_fast",
    inputs=stock.inputs[:1] + (replace(roc, terms=(low,) + roc.terms[1:]),) + stock.inputs[2:],
)
assert not validate_fis(tolerant), "edit broke the system"

out = Path("demo-out")
out.mkdir(exist_ok=True)
path = out / "confidence_fast.fis"
path.write_text(serialize_fis(tolerant))
print(f"wrote {path}")

print("\nconfidence for a mid-scale reading moving at 6 units/s (steady window):")
probe = [200.0, 6.0, 1.0]
print(f"  stock:    {infer(stock, probe).values[0]:.3f}")
print(f"  tolerant: {infer(tolerant, probe).values[0]:.3f}")
print("\nuse it on a stream with: sensorval validate stream.csv --fis " + str(path))
