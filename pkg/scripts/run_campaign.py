#!/usr/bin/env python3
"""Full evaluation campaign: simulate, enroll (single and 3MRR), plan, validate.

Usage: python scripts/run_campaign.py [config.yaml] [--trials N]
"""

import argparse
import json
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from pufkit.analytics.montecarlo import SimulatorSource, montecarlo_failure
from pufkit.analytics.planner import overhead_report, plan_code
from pufkit.bch.catalog import default_catalog
from pufkit.config import Config
from pufkit.enrollment.enroller import EnrollmentPlan, enroll, reference_ber_table
from pufkit.exceptions import PlanningError
from pufkit.puf.model import parse_condition_label, sample_chip, simulate_dataset
from pufkit.utils.logger import get_logger, setup_logger

logger = get_logger("pufkit.campaign")

TEMPERATURES = "-15,0,25,40,80"


def main():
    """Campaign workflow."""
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("config", nargs="?", default=None)
    parser.add_argument("--trials", type=int, default=1000)
    parser.add_argument("--cells", type=int, default=16384)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    try:
        print("=" * 60)
        print("🔑 pufkit evaluation campaign")
        print("=" * 60)

        config = Config(args.config)
        setup_logger(level=config.get('logging.level', 'INFO'), format_style='simple')
        conditions = [parse_condition_label(t) for t in TEMPERATURES.split(",")]

        print("\n🔬 Step 1/4: Simulating chip...")
        chip = sample_chip(args.cells, config.population_params, args.seed)
        dataset = simulate_dataset(chip, conditions, 100, args.seed)
        print(f"  ✓ {dataset}")

        print("\n🔐 Step 2/4: Enrolling single-reference and 3MRR records...")
        single_plan = EnrollmentPlan('25C', presel_repeats=10, mv_repeats=9)
        mrr_plan = EnrollmentPlan('25C', ('-15C', '80C'), presel_repeats=10, mv_repeats=9)
        records = {'single': enroll(dataset, single_plan), '3mrr': enroll(dataset, mrr_plan)}
        holdout = mrr_plan.holdout_start

        print("\n📐 Step 3/4: Planning codes at the configured target...")
        catalog = default_catalog(**config.catalog_spec)
        target = float(config.get('code.target_pfail'))
        plans = {}
        for name, record in records.items():
            table = reference_ber_table(record, dataset, holdout)
            profile = {
                c.label: [table[ref.condition_label][c.label] for ref in record.references]
                for c in conditions
            }
            try:
                plans[name] = plan_code(target, 128, profile, catalog)
                print(f"  ✓ {name}: {plans[name].code} x {plans[name].L}, cost {plans[name].cost}")
            except PlanningError as e:
                print(f"  ✗ {name}: {e}")

        if 'single' in plans and '3mrr' in plans:
            overhead = overhead_report(plans['3mrr'], plans['single'])
            print(f"  ✓ 3MRR cost ratio vs single: {overhead['cost_ratio']:.3f}")

        print("\n🎲 Step 4/4: Monte Carlo at every temperature...")
        summary = {}
        for name, plan in plans.items():
            for condition in conditions:
                source = SimulatorSource(chip, records[name].challenge, condition)
                result = montecarlo_failure(
                    records[name], plan.code, source, args.trials,
                    seed=args.seed, predicted=plan.budget.p_fail, progress=True,
                )
                summary[f"{name}@{condition.label}"] = result.to_dict()

        print("\n" + "=" * 60)
        print("✨ Campaign complete!")
        print("=" * 60)
        print(json.dumps(summary, indent=2))

    except KeyboardInterrupt:
        print("\n\n⚠️  Interrupted by user")
        sys.exit(1)

    except Exception as e:
        print(f"\n\n❌ Error: {e}")
        logger.error(f"Fatal error: {e}", exc_info=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
