"""Compare how fast two flight families concentrate near the origin.

    python3 scripts/convergence_race.py --radius 0.3 --samples 200000

Runs two races: a planar conditional flight with w=2 against the planar
standard flight (the conditional tail should vanish faster), and a
four-dimensional conditional flight with w=0.6 against the standard one
inside the crossing radius (the conditional tail should vanish slower).
"""
import argparse

from randflight.flights import FlightSpec
from randflight.sampling import RngStream
from randflight.verify import convergence_race

RACES = {
    "X2 w=2 vs Z2 lambda=1": (FlightSpec("X", 2, w=2.0), FlightSpec("Z", 2, lam=1.0)),
    "Y4 w=0.6 vs Z4 lambda=1": (FlightSpec("Y", 4, w=0.6), FlightSpec("Z", 4, lam=1.0)),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--radius", type=float, default=0.3)
    ap.add_argument("--t-grid", type=float, nargs="+", default=[10, 20, 30, 40])
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    for k, (name, (a, b)) in enumerate(RACES.items()):
        res = convergence_race(a, b, args.radius, args.t_grid, args.samples, RngStream(args.seed, k), args.threads)
        print(f"\n{name}, radius {args.radius:g}")
        print(f"{'t':>6}{'p_a':>12}{'p_b':>12}{'ratio':>10}")
        for t, ea, eb, q in zip(res.t_grid, res.tails_a, res.tails_b, res.ratio):
            print(f"{t:>6g}{ea.p_hat:>12.4e}{eb.p_hat:>12.4e}{q:>10.4f}")
        print(f"log-ratio slope {res.log_ratio_slope:.5f} (predicted {res.predicted_log_ratio_slope:.5f}); "
              f"eventually decreasing: {res.eventually_decreasing}")


if __name__ == "__main__":
    main()
