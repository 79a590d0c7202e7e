"""Bisect the measurement-dependence threshold for PR-box / singlet mixtures.

For each visibility v the behavior is v * target + (1 - v) * uniform; the
largest level l at which it still has a measurement-dependent local model is
bracketed to the requested precision.
"""
import argparse
from fractions import Fraction

from bellepr.decide import Joint, decide_lhv, mdl_threshold
from bellepr.quantum import chsh_singlet_behavior
from bellepr.sampling import CHSH_SCENARIO, mixture
from bellepr.scenario import max_chsh_value, pr_box_behavior, uniform_behavior


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--target", choices=("pr-box", "singlet"), default="pr-box")
    ap.add_argument("--steps", type=int, default=8, help="visibilities v = k/steps")
    ap.add_argument("--precision", default="1/256")
    ap.add_argument("--digits", type=int, default=6, help="rationalization digits for the singlet")
    args = ap.parse_args()

    target = pr_box_behavior() if args.target == "pr-box" else chsh_singlet_behavior().rationalized(args.digits)
    noise = uniform_behavior(CHSH_SCENARIO)
    precision = Fraction(args.precision)
    print(f"{'v':>6} {'CHSH':>8} {'local':>6}  threshold bracket")
    for k in range(args.steps + 1):
        v = Fraction(k, args.steps)
        b = mixture([(v, target), (1 - v, noise)])
        thr = mdl_threshold(Joint.from_behavior(b), precision)
        local = decide_lhv(b).feasible
        print(f"{float(v):6.3f} {float(max_chsh_value(b)):8.4f} {str(local):>6}  [{thr.lo}, {thr.hi}]")


if __name__ == "__main__":
    main()
