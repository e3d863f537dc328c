"""Compare the counting bound with the brute-force oracle on random spectra.

    python3 scripts/random_validation.py --instances 1000 --seed 1
"""
import argparse

import numpy as np

from thirdlaw.oracle import random_instance, validate_bound


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-bath-states", type=int, default=50)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    margins, ratios, gaps = [], [], []
    for _ in range(args.instances):
        inst = random_instance(rng, args.max_bath_states)
        rep = validate_bound(inst.system, inst.bath, inst.w_max)
        margins.append(rep.margin)
        if rep.epsilon_oracle > 0:
            ratios.append(rep.epsilon_bound / rep.epsilon_oracle)
        if rep.relaxation_gap is not None:
            gaps.append(rep.relaxation_gap)
    margins = np.array(margins)
    print(f"instances: {args.instances}")
    print(f"violations (margin < -1e-12): {int(np.sum(margins < -1e-12))}")
    print(f"min margin: {margins.min():.3g}")
    if ratios:
        print(f"bound / oracle: median {np.median(ratios):.3g}, max {np.max(ratios):.3g}")
    if gaps:
        print(f"two-sided minus relaxed optimum on {len(gaps)} tiny instances: min {min(gaps):.3g}")


if __name__ == "__main__":
    main()
