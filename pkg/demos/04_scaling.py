"""Wall time against problem size for partial-DCT measurements.

Each size n uses n/8 DCT rows and n/64 spikes. The DCT is applied by FFT,
so each iteration costs O(n log n) and the fitted exponent of
time ~ n^alpha should stay near or below 1 when the iteration count does
not grow with n.
"""

from bbcs import harness
from bbcs.harness import ExperimentConfig, SignalSpec

sizes = harness.parse_sizes("2^10..2^16")
cfg = ExperimentConfig(signal=SignalSpec(n=sizes[0], k=sizes[0] // 64), m=sizes[0] // 8,
                       matrix_kind="partial-dct", trials=3)
for solver in ("bbcs", "fista"):
    report = harness.run_scaling(ExperimentConfig(**{**cfg.__dict__, "solver": solver}), sizes)
    print(f"--- {solver}")
    print(report.table())
    iters = {}
    for t in report.trials:
        iters.setdefault(t.n, []).append(t.iterations)
    print("iterations per size:", {n: v for n, v in iters.items()})
