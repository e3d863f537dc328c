"""Final-temperature bound versus protocol time for radiation baths.

Fits the log-log slope over the top two decades and compares it with the
predicted exponent ``-(2D + 1)``. Writes one CSV per dimension.

    python3 scripts/time_scaling.py --out results/
"""
import argparse
import pathlib

import numpy as np

from thirdlaw import bounds as B
from thirdlaw.spectra import build_thermal_system, radiation_bath


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--dims", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--u", type=float, default=1.0)
    ap.add_argument("--v", type=float, default=1.0)
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    system = build_thermal_system([0, 1], 1.0)
    t = np.geomspace(1, 1e6, 61)
    for D in args.dims:
        bath = radiation_bath(1.0, D, 1.0, 1.0)
        T = np.array([B.time_bound(system, bath, B.ResourceBudget.at_time(x, args.u, args.v, D))[0].T_prime_lb
                      for x in t])
        np.savetxt(out / f"time_scaling_D{D}.csv", np.column_stack([t, T]), delimiter=",",
                   header="t,T_prime_lb", comments="")
        top = t >= 1e4
        slope = np.polyfit(np.log(t[top]), np.log(T[top]), 1)[0]
        print(f"D={D}: fitted slope {slope:.4f}, predicted {-B.time_scaling_exponent(D)}")


if __name__ == "__main__":
    main()
