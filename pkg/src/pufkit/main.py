"""Command-line entry point: ``pufkit <command> ...``.

Reports (JSON) go to stdout; progress lines go to stderr.

Exit codes: 0 success, 1 key recovery failed, 2 usage/IO/parameter/planning
error, 3 malformed file or helper data.
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .analytics.entropy import entropy_report
from .analytics.failure import failure_budget
from .analytics.montecarlo import (
    CorrelatedFlipInjector,
    DatasetSource,
    FlipInjector,
    ResponseSource,
    SimulatorSource,
    montecarlo_failure,
    write_csv,
)
from .analytics.planner import overhead_report, plan_code
from .bch.catalog import blocks_needed, default_catalog, parse_code
from .bch.codec import build_code
from .config import Config
from .enrollment.enroller import (
    EnrollmentPlan,
    enroll,
    load_challenge,
    load_record,
    reference_ber_table,
    save_challenge,
    save_record,
)
from .exceptions import (
    ConditionLookupError,
    ConfigError,
    FormatError,
    ParameterError,
    PlanningError,
    ProtocolError,
    PufkitError,
)
from .keygen.helper import load_helper, save_helper
from .keygen.protocol import KEY_BITS, save_key, server_recover, token_generate
from .puf.dataset import PufDataset, load_dataset, save_dataset
from .puf.model import (
    parse_condition_label,
    power_up,
    sample_chip,
    simulate_dataset,
    simulate_population,
)
from .puf.quality import measure_quality
from .reports.html_report import HTMLReportGenerator
from .utils.logger import setup_logger

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RECOVERY_FAILED = 1
EXIT_USAGE = 2
EXIT_FORMAT = 3


@dataclass
class RunConfig:
    """Resolved settings of one CLI invocation (config file + env + flags)."""

    seed: int
    paths: Dict[str, Optional[Path]] = field(default_factory=dict)
    code: Optional[Tuple[int, int, int]] = None
    key_bits: int = KEY_BITS
    conditions: List[str] = field(default_factory=list)
    trials: int = 0

    def __post_init__(self):
        if self.key_bits != KEY_BITS:
            raise ParameterError(f"key_bits must be {KEY_BITS}")

    @classmethod
    def from_args(cls, args: argparse.Namespace, config: Config) -> 'RunConfig':
        seed = args.seed if args.seed is not None else int(config.get('seed', 0))
        path_names = (
            'dataset', 'record', 'challenge', 'helper', 'key_out', 'helper_out',
            'output', 'csv', 'html',
        )
        paths = {
            name: Path(getattr(args, name)) if getattr(args, name, None) else None
            for name in path_names
        }
        code = parse_code(args.code) if getattr(args, 'code', None) else None
        conditions = _labels(getattr(args, 'conditions', None) or getattr(args, 'temps', None))
        trials = getattr(args, 'trials', None)
        if trials is None:
            trials = config.montecarlo_config['trials']
        return cls(seed, paths, code, int(config.get('code.key_bits', KEY_BITS)), conditions, int(trials))


def _status(message: str):
    print(message, file=sys.stderr)


def _emit(report: Any, output: Optional[Path] = None):
    text = json.dumps(report, indent=2, default=_json_default)
    print(text)
    if output is not None:
        output.parent.mkdir(parents=True, exist_ok=True)
        output.write_text(text + "\n", encoding='utf-8')


def _json_default(value: Any):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def _normalize_label(text: str) -> str:
    try:
        return parse_condition_label(text).label
    except ParameterError:
        return text.strip()


def _labels(text: Optional[str]) -> List[str]:
    if not text:
        return []
    return [_normalize_label(part) for part in text.split(',') if part.strip()]


def _catalog(config: Config):
    catalog = config.catalog_spec
    return default_catalog(catalog['ms'], catalog['extra'])


def _reference_label(dataset: PufDataset, preferred: str) -> str:
    return preferred if preferred in dataset.labels else dataset.labels[0]


# ---------------------------------------------------------------- simulate

def cmd_simulate(args: argparse.Namespace, config: Config) -> int:
    """Simulate one chip (or a population) and write datasets to disk."""
    run = RunConfig.from_args(args, config)
    conditions = [parse_condition_label(t) for t in (args.temps or '25').split(',')]
    params = config.population_params
    out_dir = Path(args.output)
    reference = _normalize_label(config.get('enrollment.reference_condition', '25C'))

    _status(f"🔬 Simulating {args.chips} chip(s) x {args.cells} cells x {args.repeats} repeats...")
    if args.chips == 1:
        chip = sample_chip(args.cells, params, run.seed)
        dataset = simulate_dataset(chip, conditions, args.repeats, run.seed, chip_id=args.chip_id)
        manifest = save_dataset(dataset, out_dir)
        quality = measure_quality(dataset, _reference_label(dataset, reference))
        _status(f"  ✓ Dataset written: {manifest}")
        _emit({'manifest': manifest, 'chip_id': dataset.chip_id, 'seed': run.seed,
               'quality': quality.to_dict()})
        return EXIT_OK

    datasets = simulate_population(args.chips, args.cells, conditions, args.repeats, run.seed, params)
    manifests = [save_dataset(ds, out_dir / ds.chip_id) for ds in datasets]
    ref_label = _reference_label(datasets[0], reference)
    quality = measure_quality(datasets[0], ref_label, population=datasets[1:])
    _status(f"  ✓ {len(manifests)} datasets written under {out_dir}")
    _emit({'manifests': manifests, 'seed': run.seed, 'quality': quality.to_dict()})
    return EXIT_OK


# ------------------------------------------------------------------ enroll

def cmd_enroll(args: argparse.Namespace, config: Config) -> int:
    """Enroll a chip from its dataset; the record stays in the server directory."""
    run = RunConfig.from_args(args, config)
    dataset = load_dataset(run.paths['dataset'])
    settings = config.enrollment_plan_defaults
    settings.update({
        'strategy': args.strategy or settings['strategy'],
        'reference_condition': _normalize_label(args.ref or settings['reference_condition']),
        'other_conditions': _labels(args.others) or [_normalize_label(c) for c in settings['other_conditions']],
        'presel_repeats': args.presel or settings['presel_repeats'],
        'mv_repeats': args.mv or settings['mv_repeats'],
        'debias': args.debias or settings['debias'],
    })
    plan = EnrollmentPlan.from_config(settings)

    _status(f"🔐 Enrolling {dataset.chip_id} ({args.strategy or settings['strategy']})...")
    record = enroll(dataset, plan)

    server_dir = Path(config.get('directories.server_dir', 'server'))
    record_path = run.paths['record'] or server_dir / f"{dataset.chip_id}.record.json"
    challenge_path = run.paths['challenge'] or record_path.with_name(f"{dataset.chip_id}.challenge.json")
    save_record(record, record_path)
    save_challenge(record.challenge, challenge_path)
    _status(f"  ✓ Record (server only): {record_path}")
    _status(f"  ✓ Public challenge: {challenge_path}")

    _emit({
        'chip_id': dataset.chip_id,
        'J': record.num_references,
        'mask_size': int(record.challenge_mask.size),
        'response_bits': record.response_bits,
        'holdout_start': plan.holdout_start,
        'ber': reference_ber_table(record, dataset, plan.holdout_start),
        'record': record_path,
        'challenge': challenge_path,
    })
    return EXIT_OK


# ------------------------------------------------------------ token/server

def _token_response(args: argparse.Namespace, config: Config, run: RunConfig, challenge) -> np.ndarray:
    condition = parse_condition_label(args.condition)
    if run.paths['dataset'] is not None:
        dataset = load_dataset(run.paths['dataset'])
        label = condition.label if condition.label in dataset.labels else args.condition
        repeats = dataset.repeats(label)
        index = args.repeat if args.repeat is not None else repeats.shape[0] - 1
        if not 0 <= index < repeats.shape[0]:
            raise ParameterError(f"repeat {index} out of range at {label}")
        return challenge.extract_response(repeats[index])
    if args.chip_seed is None:
        raise ParameterError("token needs --dataset or --chip-seed for a live simulation")
    chip = sample_chip(challenge.num_cells, config.population_params, args.chip_seed)
    return challenge.extract_response(power_up(chip, condition, run.seed))


def cmd_token(args: argparse.Namespace, config: Config) -> int:
    """Token role: read a fresh response, emit helper data, keep the key locally."""
    run = RunConfig.from_args(args, config)
    if run.code is None:
        raise ParameterError("--code n,k,t is required")
    challenge = load_challenge(run.paths['challenge'])
    code = build_code(*run.code)

    _status(f"📟 Token: fresh response at {args.condition}, {code}...")
    response = _token_response(args, config, run, challenge)
    output = token_generate(response, code, run.key_bits)

    helper_path = save_helper(output.helper, run.paths['helper_out'] or Path('helper.bin'))
    key_path = save_key(output.sk, run.paths['key_out'] or Path('token.key'))
    _status(f"  ✓ Helper data: {helper_path}")
    _status(f"  ✓ Local key: {key_path}")
    _emit({
        'code': list(code.code_id),
        'L': output.helper.num_blocks,
        'helper_bits': output.helper.helper_bits,
        'helper': helper_path,
        'key_fingerprint': output.sk.fingerprint,
    })
    return EXIT_OK


def cmd_server(args: argparse.Namespace, config: Config) -> int:
    """Server role: recover the token's key from helper data."""
    run = RunConfig.from_args(args, config)
    record = load_record(run.paths['record'])
    helper = load_helper(run.paths['helper'])

    _status(f"🖥️  Server: recovering with J={record.num_references} references...")
    result = server_recover(helper, record, ambient_temperature_c=args.ambient_temp)
    report = result.to_dict()
    if result.success:
        report['used_reference'] = record.references[result.used_reference_index].condition_label
        _status(f"  ✓ Key recovered on attempt {result.attempts}")
    else:
        _status(f"  ✗ Recovery failed after {result.attempts} attempts")
    _emit(report, run.paths['output'])
    return EXIT_OK if result.success else EXIT_RECOVERY_FAILED


# ------------------------------------------------------------------- plan

def _ber_profile(args: argparse.Namespace, run: RunConfig):
    """Per-condition BER lists of every reference, or a literal --ber list."""
    if args.ber:
        try:
            return [float(b) for b in args.ber.split(',')]
        except ValueError as e:
            raise ParameterError(f"--ber must be comma-separated numbers, got {args.ber!r}") from e
    if run.paths['record'] is None or run.paths['dataset'] is None:
        raise ParameterError("plan needs --ber, or both --record and --dataset")
    record = load_record(run.paths['record'])
    dataset = load_dataset(run.paths['dataset'])
    holdout = args.holdout if args.holdout is not None else 0
    table = reference_ber_table(record, dataset, holdout, run.conditions or None)
    labels = run.conditions or dataset.labels
    return {
        label: [table[ref.condition_label][label] for ref in record.references]
        for label in labels
    }


def cmd_plan(args: argparse.Namespace, config: Config) -> int:
    """Pick the cheapest code meeting the failure target."""
    run = RunConfig.from_args(args, config)
    target = args.target if args.target is not None else float(config.get('code.target_pfail'))
    catalog = _catalog(config)
    profile = _ber_profile(args, run)

    _status(f"📐 Planning for P_fail < {target:g} over {len(catalog)} codes...")
    sections: List[Dict[str, Any]] = []
    try:
        plan = plan_code(target, run.key_bits, profile, catalog)
    except PlanningError as e:
        report = {'name': 'plan', 'error': str(e), 'best_p_fail': e.best_p_fail,
                  'best_code': list(e.best_code) if e.best_code else None}
        _emit(report, run.paths['output'])
        _write_html(run, 'plan', [report])
        return EXIT_USAGE

    report = plan.to_dict()
    report['name'] = 'plan'
    baseline = None
    references = len(next(iter(profile.values()))) if isinstance(profile, dict) else len(profile)
    if references > 1:
        single = {k: v[:1] for k, v in profile.items()} if isinstance(profile, dict) else profile[:1]
        try:
            baseline = plan_code(target, run.key_bits, single, catalog)
            report['baseline'] = baseline.to_dict()
        except PlanningError as e:
            report['baseline'] = {'error': str(e), 'best_p_fail': e.best_p_fail}
    report['overhead'] = overhead_report(plan, baseline)
    _status(f"  ✓ {plan.code} x {plan.L}, P_fail={plan.budget.p_fail:.3g}, cost={plan.cost}")

    _emit(report, run.paths['output'])
    html_sections = [report] + ([dict(baseline.to_dict(), name='single-reference baseline')] if baseline else [])
    _write_html(run, 'plan', html_sections)
    return EXIT_OK


# ---------------------------------------------------------------- analyze

def cmd_analyze(args: argparse.Namespace, config: Config) -> int:
    """Entropy ledger of a code configuration."""
    run = RunConfig.from_args(args, config)
    if run.code is None:
        raise ParameterError("--code n,k,t is required")
    n, k, _ = build_code(*run.code).code_id
    L = blocks_needed(k, run.key_bits)

    if args.bias is not None:
        bias = args.bias
    elif run.paths['dataset'] is not None:
        dataset = load_dataset(run.paths['dataset'])
        bias = measure_quality(dataset, dataset.labels[0]).bias
    else:
        raise ParameterError("analyze needs --bias or --dataset")

    _status(f"🧮 Entropy ledger for {L} x BCH({n},{k}) at bias {bias:.4f}...")
    report = entropy_report(L * n, L * (n - k), bias, run.key_bits).to_dict()
    report['name'] = 'entropy'
    _emit(report, run.paths['output'])
    _write_html(run, 'analyze', [report])
    return EXIT_OK


# ------------------------------------------------------------- montecarlo

def _mc_source(args: argparse.Namespace, config: Config, run: RunConfig, record) -> Tuple[ResponseSource, List[float]]:
    """Build the response source and estimate each reference's BER under it."""
    reference = record.references[0].bits
    if args.iid_ber is not None:
        source: ResponseSource = FlipInjector(reference, args.iid_ber)
    elif args.burst_ber is not None:
        source = CorrelatedFlipInjector(reference, args.burst_ber, args.burst_length)
    elif run.paths['dataset'] is not None:
        dataset = load_dataset(run.paths['dataset'])
        source = DatasetSource(dataset, record.challenge, _normalize_label(args.condition), args.holdout or 0)
    elif args.chip_seed is not None:
        chip = sample_chip(record.challenge.num_cells, config.population_params, args.chip_seed)
        source = SimulatorSource(chip, record.challenge, parse_condition_label(args.condition))
    else:
        raise ParameterError("montecarlo needs --iid-ber, --burst-ber, --dataset or --chip-seed")

    sample = source.sample_batch(np.random.default_rng([run.seed, 1]), 256)
    bers = [float((sample != ref.bits[None, :]).mean()) for ref in record.references]
    return source, bers


def cmd_montecarlo(args: argparse.Namespace, config: Config) -> int:
    """Empirical key failure rate versus the analytic prediction."""
    run = RunConfig.from_args(args, config)
    if run.trials < 1:
        raise ParameterError(f"trials must be at least 1, got {run.trials}")
    if run.code is None:
        raise ParameterError("--code n,k,t is required")
    record = load_record(run.paths['record'])
    source, bers = _mc_source(args, config, run, record)

    L = blocks_needed(run.code[1], run.key_bits)
    if args.iid_ber is not None:
        predicted = failure_budget([args.iid_ber], run.code, L).p_fail
    else:
        predicted = failure_budget(bers, run.code, L).p_fail
    mc = config.montecarlo_config

    _status(f"🎲 Monte Carlo: {run.trials} trials...")
    result = montecarlo_failure(
        record, run.code, source, run.trials,
        seed=run.seed,
        chunk_size=mc['chunk_size'],
        workers=args.workers or mc['workers'],
        mode=args.mode,
        predicted=predicted,
        progress=not args.no_progress,
    )
    report = result.to_dict()
    report['estimated_ber'] = bers
    report['name'] = f"montecarlo {result.condition}"
    if run.paths['csv'] is not None:
        write_csv(result.rows, run.paths['csv'])
        _status(f"  ✓ Trials written: {run.paths['csv']}")
    _emit(report, run.paths['output'])
    _write_html(run, 'montecarlo', [report])
    return EXIT_OK


def _write_html(run: RunConfig, kind: str, sections: Sequence[Dict[str, Any]]):
    if run.paths.get('html') is None:
        return
    path = HTMLReportGenerator().write(kind, list(sections), run.paths['html'])
    _status(f"  ✓ HTML report: {path}")


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='pufkit',
        description='Lightweight SRAM PUF key generation with a reverse fuzzy extractor.',
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('--config', help='YAML/JSON configuration file')
    parser.add_argument('--log-level', help='DEBUG, INFO, WARNING or ERROR')
    parser.add_argument('--log-file', help='Rotating log file')
    parser.add_argument('--seed', type=int, help='Seed for every random draw of the command')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('simulate', help='simulate SRAM power-up measurements')
    p.add_argument('--cells', type=int, default=16384)
    p.add_argument('--repeats', type=int, default=100)
    p.add_argument('--temps', default='-15,0,25,40,80', help='comma-separated temperatures in C')
    p.add_argument('--chips', type=int, default=1)
    p.add_argument('--chip-id', default='chip0')
    p.add_argument('-o', '--output', required=True, help='output directory')
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser('enroll', help='enroll a chip from its dataset')
    p.add_argument('--dataset', required=True)
    p.add_argument('--strategy', choices=['none', 'mv', 'presel', 'mrr'])
    p.add_argument('--ref', help='reference condition, e.g. 25C')
    p.add_argument('--others', help='further MRR conditions, e.g. -15C,80C')
    p.add_argument('--mv', type=int, help='majority-vote repeats')
    p.add_argument('--presel', type=int, help='preselection repeats')
    p.add_argument('--debias', choices=['cvn', '2o-vn'])
    p.add_argument('-o', '--record', help='record path (server side)')
    p.add_argument('--challenge', help='public challenge path')
    p.set_defaults(handler=cmd_enroll)

    p = sub.add_parser('token', help='token role: generate helper data')
    p.add_argument('--challenge', required=True)
    p.add_argument('--code', required=True, help='n,k,t')
    p.add_argument('--condition', default='25C')
    p.add_argument('--dataset', help='take the response from a measured repeat')
    p.add_argument('--repeat', type=int, help='repeat index (default: last)')
    p.add_argument('--chip-seed', type=int, help='simulate a live power-up of this chip')
    p.add_argument('--helper-out', help='helper file (.json for the debug form)')
    p.add_argument('--key-out', help='local key file')
    p.set_defaults(handler=cmd_token)

    p = sub.add_parser('server', help='server role: recover the key')
    p.add_argument('--record', required=True)
    p.add_argument('--helper', required=True)
    p.add_argument('--ambient-temp', type=float, help='token-reported temperature, orders attempts')
    p.add_argument('-o', '--output', help='also write the report here')
    p.set_defaults(handler=cmd_server)

    p = sub.add_parser('plan', help='choose a code and block count')
    p.add_argument('--record')
    p.add_argument('--dataset')
    p.add_argument('--ber', help='literal per-reference BER list instead of a dataset')
    p.add_argument('--conditions', help='evaluation conditions (default: all)')
    p.add_argument('--holdout', type=int, help='first repeat index used for BER')
    p.add_argument('--target', type=float)
    p.add_argument('-o', '--output')
    p.add_argument('--html')
    p.set_defaults(handler=cmd_plan)

    p = sub.add_parser('analyze', help='min-entropy ledger')
    p.add_argument('--code', required=True, help='n,k,t')
    p.add_argument('--bias', type=float)
    p.add_argument('--dataset')
    p.add_argument('-o', '--output')
    p.add_argument('--html')
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser('montecarlo', help='empirical key failure rate')
    p.add_argument('--record', required=True)
    p.add_argument('--code', required=True, help='n,k,t')
    p.add_argument('--trials', type=int)
    p.add_argument('--condition', default='25C')
    p.add_argument('--dataset')
    p.add_argument('--holdout', type=int)
    p.add_argument('--chip-seed', type=int)
    p.add_argument('--iid-ber', type=float)
    p.add_argument('--burst-ber', type=float)
    p.add_argument('--burst-length', type=int, default=4)
    p.add_argument('--mode', choices=['protocol', 'distance'], default='protocol')
    p.add_argument('--workers', type=int)
    p.add_argument('--csv')
    p.add_argument('--no-progress', action='store_true')
    p.add_argument('-o', '--output')
    p.add_argument('--html')
    p.set_defaults(handler=cmd_montecarlo)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run the command and map errors to exit codes."""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = Config(args.config)
        config.override(logging__level=args.log_level, logging__file=args.log_file)
        log_config = config.config.get('logging', {})
        setup_logger(
            level=log_config.get('level', 'INFO'),
            log_file=log_config.get('file'),
            format_style=log_config.get('format', 'simple'),
        )
        logger.debug(f"{config!r}, command={args.command}")
        return args.handler(args, config)

    except KeyboardInterrupt:
        _status("\n⚠️  Interrupted by user")
        logger.warning("Interrupted by user")
        return EXIT_USAGE

    except (FormatError, ProtocolError) as e:
        _status(f"❌ {e}")
        logger.debug("Format/protocol error", exc_info=True)
        return EXIT_FORMAT

    except (ParameterError, PlanningError, ConfigError, ConditionLookupError, PufkitError) as e:
        _status(f"❌ {e}")
        logger.debug("Parameter error", exc_info=True)
        return EXIT_USAGE

    except ValueError as e:
        _status(f"❌ Invalid value: {e}")
        logger.debug("Unhandled value error", exc_info=True)
        return EXIT_USAGE

    except OSError as e:
        _status(f"❌ I/O error: {e}")
        logger.debug("I/O error", exc_info=True)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
