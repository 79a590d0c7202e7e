"""Run every pre-wired reproduction pipeline and print a one-line verdict each."""
import argparse
import sys
import time

from bellepr.reproduce import PIPELINES, reproduce


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("-v", "--verbose", action="store_true", help="print every named check")
    args = ap.parse_args()

    all_ok = True
    for pid in PIPELINES:
        start = time.perf_counter()
        rep = reproduce(pid, seed=args.seed)
        secs = time.perf_counter() - start
        all_ok &= rep["match"]
        print(f"{pid:<20} {'match' if rep['match'] else 'MISMATCH':<9} {secs:6.2f} s")
        if args.verbose or not rep["match"]:
            for chk in rep["checks"]:
                tag = "ok  " if chk["match"] else "FAIL"
                print(f"    [{tag}] {chk['name']}: {chk['observed']}")
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
