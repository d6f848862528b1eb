"""Time the compiled and numpy Monte Carlo kernels and check they agree.

    python benchmarks/bench_montecarlo.py [--pulses 2000000] [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

from uwqkd.channel_model import WATER_PROFILES, link_budget
from uwqkd.config import default_system
from uwqkd.montecarlo import McConfig, available_backends, simulate
from uwqkd.quantum_channel import channel_pipeline


def cases():
    sys = default_system()
    water = WATER_PROFILES["clear"]
    yield "bb84", link_budget(0.0, 100.0, water, sys), None
    yield "sarg04", link_budget(0.0, 100.0, water, sys), None
    yield "bbm92", link_budget(0.5, 1.0, water, sys), channel_pipeline(0.5, 1.0, water, sys)


def best_time(fn, repeat: int) -> tuple[float, object]:
    best, result = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--pulses", type=int, default=2_000_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    backends = available_backends()
    sys = default_system()
    packets = max(1, args.pulses // 1000)
    print(f"{'protocol':<8} " + " ".join(f"{b + ' [s]':>14}" for b in backends)
          + f" {'speedup':>8} {'identical':>9}")
    for protocol, link, rho in cases():
        times, results = [], []
        for backend in backends:
            mc = McConfig(packets, 1000, seed=12345, protocol=protocol,
                          use_kraus_channel=rho is not None, backend=backend)
            t, res = best_time(lambda: simulate(mc, link, sys.e_det, sys.mu, rho), args.repeat)
            times.append(t)
            results.append(res)
        speedup = times[-1] / times[0] if len(times) > 1 else 1.0
        same = all(r == results[0] for r in results)
        print(f"{protocol:<8} " + " ".join(f"{t:>14.4f}" for t in times)
              + f" {speedup:>8.1f} {str(same):>9}")


if __name__ == "__main__":
    main()
