"""Time the compiled kernels against their pure-Python twins.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

from josephson_qrc import backend, datasets
from josephson_qrc.baselines import STOParams, sto_features
from josephson_qrc.fock import vacuum
from josephson_qrc.lindblad import evolve_segment
from josephson_qrc.mixer import MixerConfig, problem_for

def lindblad_segment():
    cfg = MixerConfig(drive_scale=0.005)
    problem = problem_for(1.0, cfg)
    rho = vacuum(cfg.spec)
    return lambda: evolve_segment(problem, rho, cfg.segment)

def mackey_glass_series():
    cfg = datasets.MackeyGlassConfig()
    return lambda: datasets.gen_mackey_glass(cfg)

def sto_stream():
    x = datasets.gen_sine_square(50, seed=1).inputs
    params = STOParams(size=64)
    return lambda: sto_features(x, params)

CASES = {
    "lindblad: one 100 ns segment, d=64": lindblad_segment,
    "mackey-glass: 3100 samples": mackey_glass_series,
    "sto: 64 oscillators x 400 inputs": sto_stream,
}

def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)

def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    names = backend.available()
    print(f"{'case':40s}" + "".join(f"{n:>12s}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for label, make in CASES.items():
        fn = make()
        row = {}
        for name in names:
            prev = backend.use(name)
            try:
                row[name] = best_time(fn, args.repeat)
            finally:
                backend.use(prev)
        line = f"{label:40s}" + "".join(f"{row[n]:11.4f}s" for n in names)
        if "compiled" in row:
            line += f"{row['python'] / row['compiled']:11.1f}x"
        print(line)

if __name__ == "__main__":
    main()
