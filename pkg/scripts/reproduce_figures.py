"""Write the data behind the rate-function figures and a few density curves.

    python3 scripts/reproduce_figures.py --out-dir results/figures

Outputs CSV only; plotting is left to the reader.
"""
import argparse
from pathlib import Path

import numpy as np

from randflight import densities as dens
from randflight.cli import fmt, write_csv
from randflight.rates import RateFunction, compare_rates, crossing_radius_4d


def rate_panels(lam, c, ws, step):
    radii = np.round(np.arange(0.0, c + step / 2, step), 12)
    i2 = RateFunction.standard(2, lam, c)
    j4 = RateFunction.standard(4, lam, c)
    header = ["r", "I2", "J4"] + [f"J4_w{fmt(w)}" for w in ws]
    cols = [radii, i2(radii), j4(radii)] + [RateFunction.conditional("Y", 4, c, w)(radii) for w in ws]
    return header, list(zip(*cols))


def density_curves(points):
    rows = []
    for model, d, n in (("X", 2, 1), ("X", 3, 2), ("Y", 4, 1), ("Y", 5, 3)):
        params = dens.IsotropicDensity(model, d, n)
        for r in np.linspace(0.0, 1.0, points)[:-1]:
            rows.append([f"{model}{d}", n, r, dens.radial_marginal(params, r)])
    for d in (2, 4):
        for r in np.linspace(0.0, 1.0, points)[:-1]:
            rows.append([f"Z{d}", "lambda=1", r, dens.standard_radial_density(d, 1.0, 1.0, 1.0, r)])
    return ["law", "n_or_lambda", "r", "radial_density"], rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results/figures")
    ap.add_argument("--lam", type=float, default=1.0)
    ap.add_argument("--c", type=float, default=1.0)
    ap.add_argument("--step", type=float, default=0.01)
    ap.add_argument("--w", type=float, nargs="+", default=[0.6, 1.5])
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    header, rows = rate_panels(args.lam, args.c, args.w, args.step)
    write_csv(out / "rates.csv", header, rows, "r=length/time, rates=1/time")
    print(f"wrote {out / 'rates.csv'} ({len(rows)} radii)")

    grid = np.linspace(0.0, args.c, 1001)
    comp = compare_rates(RateFunction.standard(4, args.lam, args.c), RateFunction.standard(2, args.lam, args.c), grid)
    print(f"J4 >= I2 on the grid: {bool(np.all(comp.sign >= 0))}; equal at r = {comp.radii[comp.equal].tolist()}")
    for w in args.w:
        if w < args.lam:
            gamma, xi = crossing_radius_4d(args.lam, args.c, w)
            print(f"w={w:g}: conditional J4 below J4 on (0, {gamma * args.c:.6f}), above beyond (xi={xi:.6f})")
        else:
            print(f"w={w:g}: conditional J4 dominates J4 on (0, c]")

    header, rows = density_curves(201)
    write_csv(out / "densities.csv", header, rows, "r=length, radial_density=1/length")
    print(f"wrote {out / 'densities.csv'}")


if __name__ == "__main__":
    main()
