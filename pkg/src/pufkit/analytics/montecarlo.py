"""End-to-end Monte Carlo validation of the key failure rate.

Trials are split into fixed-size chunks; chunk ``i`` draws from the i-th
child of ``SeedSequence(seed)``, so results do not depend on the number of
worker processes.
"""

import csv
import logging
from abc import ABC, abstractmethod
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from tqdm import tqdm

from ..bch.catalog import CodeParams, blocks_needed
from ..bch.codec import build_code
from ..enrollment.enroller import Challenge, EnrollmentRecord
from ..exceptions import ParameterError
from ..keygen.protocol import KEY_BITS, attempt_order, server_recover, token_generate
from ..puf.dataset import Condition, PufDataset
from ..puf.model import ChipModel, one_probability
from .failure import wilson_interval

logger = logging.getLogger(__name__)

MODES = ('protocol', 'distance')


class ResponseSource(ABC):
    """Produces fresh token responses (already passed through the challenge)."""

    label: str = ''

    @abstractmethod
    def sample_batch(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Return a (count, response_bits) uint8 array."""


class FlipInjector(ResponseSource):
    """Independent bit flips at rate ``ber`` applied to a fixed response."""

    def __init__(self, response: np.ndarray, ber: float, label: str = 'iid'):
        if not 0.0 <= ber <= 1.0:
            raise ParameterError(f"ber must lie in [0, 1], got {ber}")
        self.response = np.asarray(response, dtype=np.uint8)
        self.ber = float(ber)
        self.label = label

    def sample_batch(self, rng: np.random.Generator, count: int) -> np.ndarray:
        flips = rng.random((count, self.response.size)) < self.ber
        return self.response[None, :] ^ flips.astype(np.uint8)


class CorrelatedFlipInjector(ResponseSource):
    """Bursts of ``burst_length`` consecutive flips, mean bit error rate ~ ``ber``.

    Errors cluster inside blocks, so block failures are more frequent than
    the i.i.d. model predicts.
    """

    def __init__(self, response: np.ndarray, ber: float, burst_length: int = 4, label: str = 'burst'):
        if burst_length < 1:
            raise ParameterError("burst_length must be at least 1")
        if not 0.0 <= ber <= 1.0:
            raise ParameterError(f"ber must lie in [0, 1], got {ber}")
        self.response = np.asarray(response, dtype=np.uint8)
        self.ber = float(ber)
        self.burst_length = int(burst_length)
        self.label = label

    def sample_batch(self, rng: np.random.Generator, count: int) -> np.ndarray:
        size = self.response.size
        starts = rng.random((count, size)) < self.ber / self.burst_length
        flips = np.zeros((count, size), dtype=bool)
        for offset in range(self.burst_length):
            flips[:, offset:] |= starts[:, : size - offset]
        return self.response[None, :] ^ flips.astype(np.uint8)


class SimulatorSource(ResponseSource):
    """Live power-ups of a simulated chip at one condition."""

    def __init__(self, chip: ChipModel, challenge: Challenge, condition: Condition):
        self.chip = chip
        self.challenge = challenge
        self.condition = condition
        self.label = condition.label
        self._p_one = one_probability(chip, condition.temperature_c)

    def sample_batch(self, rng: np.random.Generator, count: int) -> np.ndarray:
        raw = (rng.random((count, len(self.chip))) < self._p_one[None, :]).astype(np.uint8)
        return self.challenge.extract_response(raw)


class DatasetSource(ResponseSource):
    """Repeats drawn (with replacement) from recorded measurements."""

    def __init__(self, dataset: PufDataset, challenge: Challenge, condition: str, start: int = 0):
        data = dataset.repeats(condition)
        if start >= data.shape[0]:
            raise ParameterError(f"no repeats at {condition} from index {start}")
        self.responses = challenge.extract_response(data[start:])
        self.label = condition

    def sample_batch(self, rng: np.random.Generator, count: int) -> np.ndarray:
        picks = rng.integers(0, self.responses.shape[0], size=count)
        return self.responses[picks]


@dataclass
class TrialRow:
    trial: int
    condition: str
    success: bool
    attempts: int


@dataclass
class MonteCarloResult:
    """Empirical failure rate with its Wilson interval."""

    trials: int
    failures: int
    code: Tuple[int, int, int]
    L: int
    condition: str
    ci_low: float
    ci_high: float
    predicted: Optional[float] = None
    rows: List[TrialRow] = field(default_factory=list, repr=False)

    @property
    def empirical_rate(self) -> float:
        return self.failures / self.trials

    def to_dict(self) -> Dict[str, Any]:
        return {
            'condition': self.condition,
            'code': list(self.code),
            'L': self.L,
            'trials': self.trials,
            'failures': self.failures,
            'empirical_rate': self.empirical_rate,
            'ci_low': self.ci_low,
            'ci_high': self.ci_high,
            'predicted': self.predicted,
        }


@dataclass
class _ChunkTask:
    record: EnrollmentRecord
    code: CodeParams
    source: ResponseSource
    first_trial: int
    count: int
    seed: np.random.SeedSequence
    mode: str
    ambient_temperature_c: Optional[float]


def _run_protocol(task: _ChunkTask, responses: np.ndarray) -> List[TrialRow]:
    code = build_code(*task.code)
    rows = []
    for offset, response in enumerate(responses):
        output = token_generate(response, code, KEY_BITS)
        result = server_recover(output.helper, task.record, task.ambient_temperature_c)
        ok = result.success and result.sk == output.sk
        rows.append(TrialRow(task.first_trial + offset, task.source.label, ok, result.attempts))
    return rows


def _run_distance(task: _ChunkTask, responses: np.ndarray) -> List[TrialRow]:
    """Decoder-equivalent outcome from per-block Hamming distances.

    A bounded-distance decoder recovers a block exactly when it differs from
    the reference block in at most t positions; any other block yields a
    wrong key and thus a tag mismatch.
    """
    n, _, t = task.code
    L = blocks_needed(task.code.k, KEY_BITS)
    used = responses[:, : L * n].reshape(len(responses), L, n)
    order = attempt_order(task.record, task.ambient_temperature_c)

    success = np.zeros(len(responses), dtype=bool)
    attempts = np.full(len(responses), len(order), dtype=np.int64)
    for attempt, index in enumerate(order, start=1):
        reference = task.record.references[index].bits[: L * n].reshape(L, n)
        weights = (used != reference[None, :, :]).sum(axis=2)
        ok = np.all(weights <= t, axis=1) & ~success
        attempts[ok] = attempt
        success |= ok

    return [
        TrialRow(task.first_trial + i, task.source.label, bool(success[i]), int(attempts[i]))
        for i in range(len(responses))
    ]


def _run_chunk(task: _ChunkTask) -> List[TrialRow]:
    rng = np.random.default_rng(task.seed)
    responses = task.source.sample_batch(rng, task.count)
    if task.mode == 'protocol':
        return _run_protocol(task, responses)
    return _run_distance(task, responses)


def montecarlo_failure(
    record: EnrollmentRecord,
    code: Union[CodeParams, Tuple[int, int, int]],
    source: ResponseSource,
    trials: int,
    seed: int = 0,
    L: Optional[int] = None,
    chunk_size: int = 1000,
    workers: int = 1,
    mode: str = 'protocol',
    ambient_temperature_c: Optional[float] = None,
    predicted: Optional[float] = None,
    progress: bool = False,
    keep_rows: bool = True,
) -> MonteCarloResult:
    """Run token Gen + server Rep ``trials`` times with fresh responses.

    Args:
        record: Enrollment record the server uses
        code: Block code (n, k, t)
        source: Fresh response generator (simulator, dataset or injector)
        trials: Number of trials, at least 1
        seed: Campaign seed
        L: Expected block count; checked against ceil(128 / k) when given
        chunk_size: Trials per chunk (and per derived seed)
        workers: Worker processes; 1 runs in-process
        mode: ``protocol`` runs the real Gen/Rep; ``distance`` evaluates the
            decoder-equivalent block-distance criterion, for large campaigns
        ambient_temperature_c: Passed to the server's attempt ordering
        predicted: Analytic failure rate to carry into the report
        progress: Show a tqdm progress bar
        keep_rows: Keep per-trial rows (disable for very large campaigns)

    Returns:
        MonteCarloResult with per-trial rows in trial order

    Raises:
        ParameterError: If trials < 1 or the mode or L is invalid
    """
    if trials < 1:
        raise ParameterError(f"trials must be at least 1, got {trials}")
    if mode not in MODES:
        raise ParameterError(f"mode must be one of {MODES}")
    if chunk_size < 1 or workers < 1:
        raise ParameterError("chunk_size and workers must be positive")
    params = CodeParams(*code)
    blocks = blocks_needed(params.k, KEY_BITS)
    if L is not None and L != blocks:
        raise ParameterError(f"L={L} but {params} needs {blocks} blocks for a {KEY_BITS}-bit key")
    build_code(*params)

    counts = [chunk_size] * (trials // chunk_size)
    if trials % chunk_size:
        counts.append(trials % chunk_size)
    seeds = np.random.SeedSequence(seed).spawn(len(counts))
    tasks = [
        _ChunkTask(record, params, source, i * chunk_size, count, child, mode, ambient_temperature_c)
        for i, (count, child) in enumerate(zip(counts, seeds))
    ]

    logger.info(
        f"Monte Carlo: {trials} trials of {params} x {blocks} at {source.label or 'source'} "
        f"({len(tasks)} chunks, {workers} workers, mode={mode})"
    )

    results: Dict[int, List[TrialRow]] = {}
    failures = 0

    def collect(index: int, chunk_rows: List[TrialRow]):
        nonlocal failures
        failures += sum(1 for row in chunk_rows if not row.success)
        results[index] = chunk_rows if keep_rows else []

    if workers == 1:
        for index, task in enumerate(tqdm(tasks, desc="Monte Carlo", disable=not progress)):
            collect(index, _run_chunk(task))
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            future_to_index = {executor.submit(_run_chunk, task): i for i, task in enumerate(tasks)}
            for future in tqdm(
                as_completed(future_to_index),
                total=len(tasks),
                desc="Monte Carlo",
                disable=not progress,
            ):
                collect(future_to_index[future], future.result())

    rows = [row for index in range(len(tasks)) for row in results[index]]
    low, high = wilson_interval(failures, trials)

    result = MonteCarloResult(
        trials=trials,
        failures=failures,
        code=tuple(params),
        L=blocks,
        condition=source.label,
        ci_low=low,
        ci_high=high,
        predicted=predicted,
        rows=rows,
    )
    logger.info(f"Monte Carlo: {failures}/{trials} failures, 95% CI [{low:.3g}, {high:.3g}]")
    return result


def write_csv(rows: List[TrialRow], path: Union[str, Path]) -> Path:
    """Write per-trial rows as CSV (trial, condition, success, attempts)."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(['trial', 'condition', 'success', 'attempts'])
        for row in rows:
            writer.writerow([row.trial, row.condition, int(row.success), row.attempts])
    return out
