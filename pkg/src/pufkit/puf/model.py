"""Hidden-variable model of SRAM power-up behaviour.

Each cell has a latent preference (the mismatch of its cross-coupled
inverters), a per-degree drift of that preference, and Gaussian power-up
noise. The probability that a cell powers up as 1 at temperature T is

    Phi((skew + sensitivity * (T - T_ref)) / noise)

with Phi the standard normal CDF.
"""

import logging
import re
import zlib
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Union, overload

import numpy as np
from scipy.stats import norm

from ..exceptions import ParameterError
from .dataset import Condition, PufDataset

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PopulationParams:
    """Distribution of cell parameters across a fabricated population."""

    skew_mean: float = 0.0
    skew_sigma: float = 9.5
    temp_sigma: float = 0.058
    noise_sigma: float = 1.0
    noise_spread: float = 0.05
    reference_temperature_c: float = 25.0

    def validate(self):
        """Raise ParameterError on a degenerate population."""
        for name in ('skew_sigma', 'temp_sigma', 'noise_sigma'):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive, got {getattr(self, name)}")
        if self.noise_spread < 0:
            raise ParameterError("noise_spread must be non-negative")


@dataclass(frozen=True)
class CellModel:
    """Parameters of a single SRAM cell."""

    latent_skew: float
    temp_sensitivity: float
    noise_sigma: float

    def __post_init__(self):
        if not self.noise_sigma > 0:
            raise ParameterError(f"noise_sigma must be positive, got {self.noise_sigma}")


class ChipModel(Sequence[CellModel]):
    """Column-wise storage of a chip's cells; indexes like a sequence of CellModel."""

    def __init__(
        self,
        skew: np.ndarray,
        sensitivity: np.ndarray,
        noise: np.ndarray,
        reference_temperature_c: float = 25.0,
    ):
        self.skew = np.asarray(skew, dtype=np.float64)
        self.sensitivity = np.asarray(sensitivity, dtype=np.float64)
        self.noise = np.asarray(noise, dtype=np.float64)
        self.reference_temperature_c = float(reference_temperature_c)

        if not self.skew.shape == self.sensitivity.shape == self.noise.shape:
            raise ParameterError("cell parameter arrays must have equal shapes")
        if self.skew.ndim != 1 or self.skew.size == 0:
            raise ParameterError("a chip needs at least one cell")
        if not np.all(self.noise > 0):
            raise ParameterError("noise_sigma must be positive for every cell")

    @classmethod
    def from_cells(cls, cells: Sequence[CellModel], reference_temperature_c: float = 25.0) -> 'ChipModel':
        if isinstance(cells, ChipModel):
            return cells
        return cls(
            np.array([c.latent_skew for c in cells], dtype=np.float64),
            np.array([c.temp_sensitivity for c in cells], dtype=np.float64),
            np.array([c.noise_sigma for c in cells], dtype=np.float64),
            reference_temperature_c,
        )

    def __len__(self) -> int:
        return int(self.skew.size)

    @overload
    def __getitem__(self, index: int) -> CellModel: ...

    @overload
    def __getitem__(self, index: slice) -> 'ChipModel': ...

    def __getitem__(self, index):
        if isinstance(index, slice):
            return ChipModel(
                self.skew[index], self.sensitivity[index], self.noise[index],
                self.reference_temperature_c,
            )
        return CellModel(
            float(self.skew[index]), float(self.sensitivity[index]), float(self.noise[index])
        )

    def __iter__(self) -> Iterator[CellModel]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChipModel):
            return NotImplemented
        return (
            np.array_equal(self.skew, other.skew)
            and np.array_equal(self.sensitivity, other.sensitivity)
            and np.array_equal(self.noise, other.noise)
            and self.reference_temperature_c == other.reference_temperature_c
        )

    def __repr__(self) -> str:
        return f"ChipModel(cells={len(self)}, t_ref={self.reference_temperature_c})"


CellsLike = Union[ChipModel, Sequence[CellModel]]


def sample_chip(num_cells: int, model_params: PopulationParams, seed: int) -> ChipModel:
    """Draw the cells of one chip from the population.

    Args:
        num_cells: Number of SRAM cells
        model_params: Population parameters
        seed: Fabrication seed; identical seeds give identical chips

    Returns:
        ChipModel with ``num_cells`` independent cells

    Raises:
        ParameterError: If num_cells < 1 or a population sigma is not positive
    """
    if num_cells < 1:
        raise ParameterError(f"num_cells must be positive, got {num_cells}")
    model_params.validate()

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    skew = rng.normal(model_params.skew_mean, model_params.skew_sigma, num_cells)
    sensitivity = rng.normal(0.0, model_params.temp_sigma, num_cells)
    if model_params.noise_spread > 0:
        noise = model_params.noise_sigma * rng.lognormal(0.0, model_params.noise_spread, num_cells)
    else:
        noise = np.full(num_cells, model_params.noise_sigma)

    return ChipModel(skew, sensitivity, noise, model_params.reference_temperature_c)


def one_probability(cells: CellsLike, temperature_c: float) -> np.ndarray:
    """Probability that each cell powers up as 1 at ``temperature_c``."""
    chip = ChipModel.from_cells(cells)
    drift = chip.sensitivity * (temperature_c - chip.reference_temperature_c)
    return norm.cdf((chip.skew + drift) / chip.noise)


def _measurement_rng(seed: int, condition: Condition, repeat: int) -> np.random.Generator:
    label_key = zlib.crc32(condition.label.encode('utf-8'))
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, label_key, repeat])


def power_up(cells: CellsLike, condition: Condition, seed: int, repeat: int = 0) -> np.ndarray:
    """Sample one power-up state of the chip under ``condition``.

    Args:
        cells: Cell models of the chip
        condition: Operating condition (only the temperature matters)
        seed: Measurement seed
        repeat: Index of the repeated measurement

    Returns:
        uint8 bit-vector, deterministic for fixed (seed, condition, repeat)
    """
    chip = ChipModel.from_cells(cells)
    p_one = one_probability(chip, condition.temperature_c)
    draws = _measurement_rng(seed, condition, repeat).random(len(chip))
    return (draws < p_one).astype(np.uint8)


def parse_condition_label(text: str) -> Condition:
    """Parse ``"-15C"``, ``"−15℃"`` or ``"80"`` into a Condition."""
    cleaned = text.strip().replace('−', '-').replace('℃', 'C')
    match = re.fullmatch(r'([+-]?\d+)\s*(?:C|c|degC)?', cleaned)
    if not match:
        raise ParameterError(f"cannot parse temperature condition {text!r}")
    return Condition(int(match.group(1)), format_condition_label(int(match.group(1))))


def format_condition_label(temperature_c: int) -> str:
    """Canonical label of a temperature, e.g. ``-15C``."""
    return f"{int(temperature_c)}C"


def simulate_dataset(
    cells: CellsLike,
    conditions: Sequence[Condition],
    repeats: int,
    seed: int,
    chip_id: str = "chip0",
) -> PufDataset:
    """Measure a simulated chip ``repeats`` times under every condition."""
    if repeats < 1:
        raise ParameterError("repeats must be at least 1")
    chip = ChipModel.from_cells(cells)
    measurements = {}
    for condition in conditions:
        measurements[condition.label] = np.stack(
            [power_up(chip, condition, seed, repeat=r) for r in range(repeats)]
        )
        logger.debug(f"Simulated {repeats} repeats of {chip_id} at {condition.label}")
    return PufDataset(chip_id, len(chip), tuple(conditions), measurements)


def simulate_population(
    num_chips: int,
    num_cells: int,
    conditions: Sequence[Condition],
    repeats: int,
    seed: int,
    model_params: Optional[PopulationParams] = None,
) -> List[PufDataset]:
    """Fabricate and measure ``num_chips`` independent chips."""
    if num_chips < 1:
        raise ParameterError("num_chips must be at least 1")
    params = model_params or PopulationParams()
    chip_seeds = np.random.SeedSequence(seed).generate_state(num_chips, dtype=np.uint64)
    datasets = []
    for index, chip_seed in enumerate(chip_seeds.tolist()):
        chip = sample_chip(num_cells, params, chip_seed)
        datasets.append(
            simulate_dataset(chip, conditions, repeats, chip_seed, chip_id=f"chip{index:02d}")
        )
    logger.info(f"Simulated population of {num_chips} chips x {num_cells} cells")
    return datasets
