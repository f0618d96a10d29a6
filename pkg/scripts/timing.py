"""Wall-clock time of each controller on the full eight-agent scenario.

    python scripts/timing.py [--duration 600]
"""
import argparse
import time

from etbcov import sim


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--duration", type=float, default=600.0)
    args = ap.parse_args()
    # compile the kernels before timing
    sim.run(sim.Scenario(duration=1.0))
    for c in sim.CONTROLLERS:
        t0 = time.perf_counter()
        tr = sim.run(sim.Scenario(controller=c, duration=args.duration))
        print(f"{c:>14}: {time.perf_counter() - t0:6.1f} s, {tr.total_messages} messages, "
              f"final H {tr.H_values[-1]:.1f}")


if __name__ == "__main__":
    main()
