"""Error bound after truncating an infinite ladder to its lowest ``d'`` levels.

    python3 scripts/truncation_sweep.py --w-max 5 --max-dim 30
"""
import argparse

from thirdlaw import bounds as B
from thirdlaw.spectra import compose_bath, oscillator_mode


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--w-max", type=float, default=5.0)
    ap.add_argument("--max-dim", type=int, default=30)
    ap.add_argument("--e-cut", type=float, default=60.0)
    ap.add_argument("--method", choices=["smooth", "general"], default="smooth")
    args = ap.parse_args()
    bath = compose_bath([oscillator_mode(f, args.e_cut) for f in (1.0, 1.414, 1.732)], args.e_cut, 1.0)
    res = B.truncation_optimize(lambda k: float(k), 1.0, bath, args.w_max,
                                range(1, args.max_dim + 1), method=args.method)
    print("d_prime,epsilon_lb")
    for d, eps in res.sweep:
        print(f"{d},{eps:.6g}")
    print(f"# best d' = {res.best_dim}, epsilon_lb = {res.best.epsilon_lb:.6g}")


if __name__ == "__main__":
    main()
