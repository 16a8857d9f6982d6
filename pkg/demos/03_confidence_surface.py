"""Export the confidence surface and sketch it in the terminal.

Run from anywhere:

    python3 demos/03_confidence_surface.py

Holds distance at the midpoint of its range and sweeps the other two
inputs. The CSV this writes is the same format ``sensorval fis surface``
emits; docs/plotting.md has matplotlib recipes for it.
"""

from pathlib import Path

from sensorval import control_surface, default_system

system = default_system()
roc, std = system.inputs[1], system.inputs[2]
mid_distance = (system.inputs[0].lo + system.inputs[0].hi) / 2.0
surf = control_surface(system, 1, 2, {0: mid_distance}, grid=(50, 50))

out = Path("demo-out")
out.mkdir(exist_ok=True)
path = out / "surface.csv"
with open(path, "w", newline="\n") as f:
    f.write("x,y,output\n")
    xs, ys = roc.grid(50), std.grid(50)
    for a in range(50):
        for b in range(50):
            f.write(f"{xs[a]!r},{ys[b]!r},{surf[a, b]!r}\n")
print(f"wrote {path} ({surf.size} cells)")

# thumbnail: one digit per cell, 9 = full confidence, 0 = none
print(f"\nconfidence at distance={mid_distance:.0f}, digits are round(10 * confidence):")
print("        std_dev 0 .. 16")
for a in range(0, 50, 5):
    row = "".join(str(min(9, int(round(10 * surf[a, b])))) for b in range(0, 50, 5))
    label = f"roc={roc.grid(50)[a]:5.1f}"
    print(f"{label}  {row}")
print("\nconfidence only ever falls as rate-of-change or dispersion grows.")
