#!/usr/bin/env python3
"""
Run the csapricer acceptance suite and write a JSON report.

Accuracy checks cover curve repricing, CDS calibration, the single-period
and lattice CSA valuations, default payments, the CVA and VaR threshold
sweeps and the collateralized par-rate spread. The timing run values each
bundled netting set in all three modes. Exits 1 if any check fails.
"""
import argparse
import sys
from pathlib import Path

# Add the parent directory to the Python path so we can import from tests
sys.path.insert(0, str(Path(__file__).parent.parent))

from tests.test_benchmarks import CsaBenchmarker


def main():
    parser = argparse.ArgumentParser(description="Check csapricer valuations, CVA and VaR against closed forms and bundled fixtures")
    parser.add_argument(
        "--output", "-o",
        default="benchmark_report.json",
        help="Where to write the JSON report of every check"
    )
    parser.add_argument(
        "--quick", "-q",
        action="store_true",
        help="Run the fast closed-form and fixture checks only"
    )
    parser.add_argument(
        "--performance-only", "-p",
        action="store_true",
        help="Only time the three-mode valuation of the bundled netting sets"
    )
    parser.add_argument(
        "--accuracy-only", "-a",
        action="store_true",
        help="Only run the valuation accuracy checks, including the lattice sweeps"
    )
    parser.add_argument(
        "--iterations",
        type=int,
        default=20,
        help="Valuations per netting set in the performance run"
    )
    parser.add_argument("--seed", type=int, default=0, help="Seed for the synthetic trades and market history")

    args = parser.parse_args()

    benchmarker = CsaBenchmarker(seed=args.seed)

    if args.quick:
        print("Closed-form and fixture checks...")
        benchmarker.run_accuracy_benchmarks(quick=True)

    elif args.performance_only:
        print(f"Timing bundled netting sets ({args.iterations} valuations each)...")
        benchmarker.run_performance_benchmarks(iterations=args.iterations)

    elif args.accuracy_only:
        print("Valuation accuracy checks...")
        benchmarker.run_accuracy_benchmarks()

    else:
        benchmarker.run_full_suite()

    report = benchmarker.generate_report()
    benchmarker.save_report(args.output)

    print("\nFINAL SUMMARY:")
    print(f"Pass rate: {report.pass_rate:.1f}% ({report.passed_tests}/{report.total_tests})")
    print(f"Worst error / tolerance: {report.max_metric_ratio:.3g}")
    print(f"Total time: {report.total_processing_time_ms / 1000:.2f} s")
    print(f"Report saved: {args.output}")

    if report.passed_tests < report.total_tests:
        failed = [r.test_name for r in report.results if not r.passed]
        print(f"\nACCEPTANCE FAILED: {', '.join(failed)}")
        sys.exit(1)
    else:
        print("\nALL CHECKS PASSED")


if __name__ == "__main__":
    main()
