"""Traffic of the two-speed controller against the motion tolerance.

Compares etb-constant with the periodic baseline for several arrival
tolerances, with and without the overshoot clamp, to show how much of the
saving comes from agents parking at their targets.

    python scripts/tolerance_sweep.py [--duration 600]
"""
import argparse

from etbcov import sim

SETTINGS = (
    ("half step, clamp", None, True),
    ("1e-9, clamp", 1e-9, True),
    ("half step, no clamp", None, False),
    ("1e-9, no clamp", 1e-9, False),
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--duration", type=float, default=600.0)
    args = ap.parse_args()
    base = sim.run(sim.Scenario(controller="periodic", duration=args.duration)).total_messages
    print(f"periodic: {base} messages")
    for label, eps, clamp in SETTINGS:
        tr = sim.run(sim.Scenario(controller="etb-constant", duration=args.duration,
                                  eps_move=eps, clamp=clamp))
        print(f"{label:>20}: {tr.total_messages:7d} messages, reduction "
              f"{sim.reduction(tr.total_messages, base):5.1f}%, final H {tr.H_values[-1]:.1f}")


if __name__ == "__main__":
    main()
