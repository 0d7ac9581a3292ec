"""Run the acceptance experiments and print one PASS/FAIL line per criterion.

    python3 scripts/run_acceptance.py [--only 1 5 9] [--json results.json]
"""
import argparse
import json
import sys
import time

from schurkit import acceptance


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--only", type=int, nargs="*", help="criterion numbers to run")
    parser.add_argument("--json", help="also write results to this file")
    args = parser.parse_args()
    chosen = [c for i, c in enumerate(acceptance.CRITERIA, 1) if not args.only or i in args.only]
    results = []
    for criterion in chosen:
        start = time.perf_counter()
        result = criterion()
        print(f"{result.line()}  ({time.perf_counter() - start:.1f}s)", flush=True)
        results.append(result)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump([{"number": r.number, "title": r.title, "passed": r.passed,
                        "metrics": {k: v if isinstance(v, (int, float, bool)) else str(v) for k, v in r.metrics.items()}}
                       for r in results], fh, indent=1)
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
