"""Run every gallery example end to end and print a verdict table.

Builds each manifest (sweeping a few weight choices for the weighted
products), executes its full check suite, and compares the outcomes against
the manifest's expected rows.  Exit status is nonzero when any expectation
is missed, so this doubles as a slow smoke test:

    python3 scripts/run_all_examples.py --points 48
"""

import argparse
import sys
import time

from lcslab.gallery import (
    cotangent,
    coupling_example_s2,
    evaluate_manifest,
    hopf,
    inoue,
    run_manifest,
)


def builders():
    yield "hopf (1,1)", lambda: hopf(2, (1.0, 1.0))
    yield "hopf (1,2)", lambda: hopf(2, (1.0, 2.0))
    yield "hopf (2,3)", lambda: hopf(2, (2.0, 3.0))
    yield "hopf7", lambda: hopf(4, (1.0, 1.0, 1.0, 1.0))
    yield "inoue", inoue
    yield "cotangent m=1", lambda: cotangent(m=1)
    yield "cotangent m=2", lambda: cotangent(m=2)
    yield "coupling-s2", lambda: coupling_example_s2((1.0, 1.0))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=32, help="sample count per check")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tol", type=float, default=1e-8)
    args = ap.parse_args(argv)

    print(f"{'example':<16} {'checks':>6} {'failed':>6} {'expected':>10} {'time':>7}")
    missed_total = 0
    for label, build in builders():
        t0 = time.monotonic()
        man = build()
        reports = run_manifest(man, points=args.points, seed=args.seed, tol=args.tol)
        verdicts = evaluate_manifest(man, reports)
        dt = time.monotonic() - t0

        checks = sum(len(r.checks) for r in reports.values())
        failed = sum(1 for r in reports.values() for c in r.checks if not c.passed)
        met = sum(1 for c in verdicts.checks if c.passed)
        missed = len(verdicts.checks) - met
        missed_total += missed
        print(
            f"{label:<16} {checks:>6} {failed:>6} {met:>5}/{len(verdicts.checks):<4} {dt:>6.1f}s"
        )
        for c in verdicts.checks:
            if not c.passed:
                print(f"    missed: {c.id} (wanted {c.details['expected']!r}, got {c.verdict!r})")

    if missed_total:
        print(f"\n{missed_total} expectation(s) missed")
        return 1
    print("\nall expectations met")
    return 0


if __name__ == "__main__":
    sys.exit(main())
