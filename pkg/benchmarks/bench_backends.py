"""Time the numba and numpy kernel backends on the same workloads.

    python3 benchmarks/bench_backends.py [--preset starlink_like] [--repeat 3]
"""
import argparse
import time

from constellation_access import _accel, kernels
from constellation_access.access import MissionConfig, constellation_windows
from constellation_access.astro import Timestamp
from constellation_access.constellation import build_constellation, load_spec
from constellation_access.ground import GroundStation

EPOCH = Timestamp.from_iso("2022-05-11T00:00:00Z")
CALGARY = GroundStation("GS2_Calgary", 51.05, -114.07, 1.045, 25.0)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--preset", default="starlink_like")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    sats = build_constellation(load_spec(f"builtin:presets/{args.preset}.json"), EPOCH)
    mission = MissionConfig(EPOCH)
    table = kernels.element_table([s.elements for s in sats], EPOCH, True)
    times = mission.sample_times()
    frame = kernels.EarthFrame.at(EPOCH)
    site = CALGARY.site()
    evals = table.shape[0] * times.size

    backends = [kernels.NUMPY] + ([kernels.NUMBA] if _accel.NUMBA_INSTALLED else [])
    print(f"{args.preset}: {len(sats)} satellites, {times.size} samples, best of {args.repeat}")
    print(f"{'backend':<8} {'grid (s)':>9} {'ns/eval':>8} {'windows (s)':>12}")
    results = {}
    for backend in backends:
        # first call compiles (numba) or warms caches (numpy)
        backend.sin_elevation_grid(table[:2], times[:3], frame, site)
        grid_t = best_of(lambda: backend.sin_elevation_grid(table, times, frame, site), args.repeat)
        win_t = best_of(lambda: constellation_windows(CALGARY, sats, mission, backend=backend), args.repeat)
        results[backend.name] = constellation_windows(CALGARY, sats, mission, backend=backend)
        print(f"{backend.name:<8} {grid_t:>9.3f} {1e9 * grid_t / evals:>8.1f} {win_t:>12.3f}")

    if len(results) == 2:
        a, b = results["numpy"], results["numba"]
        worst = max(
            (abs(x.t_rise - y.t_rise) + abs(x.t_set - y.t_set) for sid in a for x, y in zip(a[sid], b[sid])),
            default=0.0,
        )
        same = all(len(a[sid]) == len(b[sid]) for sid in a)
        print(f"window sets identical: {same}; largest boundary difference {worst:.3g} s")


if __name__ == "__main__":
    main()
