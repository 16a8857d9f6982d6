"""Walk a noisy stream with a spike and a noise burst through the validator.

Run from anywhere:

    python3 demos/01_validate_stream.py

Shows the outcome rows around the spike, then the fault report the
sustained burst produces.
"""

from sensorval import (
    FaultSpec,
    PipelineConfig,
    SensorValidator,
    SignalProfile,
    generate,
    inject_all,
)

stream = generate(SignalProfile("constant", level=200.0, noise_std=1.0, seed=42), 400, "tank_a")
labeled = inject_all(
    stream,
    [
        FaultSpec("spike", 120, 1, 18.0),            # one bad reading
        FaultSpec("noise_burst", 250, 60, 100.0),    # a minute of garbage
    ],
    seed=42,
)

validator = SensorValidator(PipelineConfig(), "tank_a")
outcomes = [validator.step(s) for s in labeled.samples]
reports = validator.finalize()

print("around the spike at t=120:")
print(f"{'t':>6} {'raw':>9} {'conf':>6} {'accepted':>9}  flags")
for o in outcomes[117:124]:
    mark = "*" if o.reconstructed else " "
    print(
        f"{o.timestamp:6.0f} {o.raw:9.2f} {o.confidence:6.3f} "
        f"{o.accepted:9.2f}{mark} {','.join(o.flags)}"
    )
print("(* = reading rejected and reconstructed)")

print(f"\n{sum(o.reconstructed for o in outcomes)} of {len(outcomes)} readings reconstructed")
print(f"{len(reports)} fault report(s):")
for r in reports:
    print(
        f"  {r.sensor_id}: t={r.start:.0f}..{r.end:.0f}, {r.count} samples, "
        f"confidence min/mean {r.min_confidence:.3f}/{r.mean_confidence:.3f}, "
        f"dominant flags {', '.join(r.dominant_flags)}"
    )
