"""Run all four controllers on the eight-agent scenario and tabulate traffic.

Writes traces, metrics, plots and summary.csv to the output directory and
prints cumulative messages at a few checkpoints.

    python scripts/compare_controllers.py [--duration 600] [--out results]
"""
import argparse

from etbcov import cli, sim

CHECKPOINTS = (60, 150, 230, 300, 450, 600)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--duration", type=float, default=600.0)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    cli.main(["compare", "--out", args.out, "--duration", str(args.duration),
              "--controllers", ",".join(sim.CONTROLLERS)])
    print()
    print("cumulative messages")
    print(f"{'t [s]':>6}  " + "  ".join(f"{c:>14}" for c in sim.CONTROLLERS))
    cum = {}
    for c in sim.CONTROLLERS:
        with open(f"{args.out}/metrics_{c}.csv") as fh:
            rows = [line.split(",") for line in fh.read().splitlines()[2:]]
        cum[c] = {round(float(r[0]), 6): int(r[2]) for r in rows}
    for t in CHECKPOINTS:
        if t > args.duration:
            break
        key = round(round(t * 60) / 60, 6)
        print(f"{t:>6}  " + "  ".join(f"{cum[c].get(key, 0):>14}" for c in sim.CONTROLLERS))


if __name__ == "__main__":
    main()
