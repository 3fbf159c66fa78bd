"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_backends.py [--repeat 200] [--sizes 3,6,12,24]

Times the symmetric eigensolver, the s-gradient field and one full flow
verification per backend. The flow run forces one backend through the
module-level dispatch (crossover disabled), so the columns compare the two
kernel sets head to head; the library itself switches to the fallback above
``_backend.CROSSOVER_N``.
"""
import argparse
import timeit

import numpy as np

from flagflow import _backend
from flagflow.cli import make_instance
from flagflow.flow import HeightFunction, verify_theorem_4_1
from flagflow.orbit import OrbitPoint


def _case(n, seed=0):
    cfg = {"algebra": "sl_real", "n": n, "spectrum": None}
    ctx, spec, frame, q = make_instance(cfg, seed)
    return OrbitPoint.from_spectrum(ctx, spec, frame), HeightFunction(q), spec


def _time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def run(sizes, repeat):
    names = _backend.available()
    rows = []
    for n in sizes:
        x, f, spec = _case(n)
        xm, qm = np.ascontiguousarray(x.mat), np.ascontiguousarray(f.q.mat)
        for kernel in ("eigh", "gradient_field", "verify_flow"):
            timings = {}
            for name in names:
                impl = _backend.get(name)
                if kernel == "eigh":
                    timings[name] = _time(lambda: impl.eigh(xm), repeat)
                elif kernel == "gradient_field":
                    timings[name] = _time(lambda: impl.gradient_field(xm, qm, spec), repeat)
                else:
                    saved = _backend._impl, _backend.CROSSOVER_N
                    _backend._impl, _backend.CROSSOVER_N = impl, n
                    try:
                        timings[name] = _time(lambda: verify_theorem_4_1(f, x, 2.0, 1e-10), max(3, repeat // 50))
                    finally:
                        _backend._impl, _backend.CROSSOVER_N = saved
            rows.append((n, kernel, timings))
    return names, rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeat", type=int, default=200)
    parser.add_argument("--sizes", default="3,6,12,24")
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    names, rows = run(sizes, args.repeat)
    header = f"{'n':>4} {'kernel':<15}" + "".join(f"{name + ' [us]':>16}" for name in names)
    if "compiled" in names:
        header += f"{'speedup':>10}"
    print(header)
    for n, kernel, t in rows:
        line = f"{n:>4} {kernel:<15}" + "".join(f"{t[name] * 1e6:>16.1f}" for name in names)
        if "compiled" in names:
            line += f"{t['python'] / t['compiled']:>10.2f}"
        print(line)


if __name__ == "__main__":
    main()
