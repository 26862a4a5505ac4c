"""SRAM PUF modelling, measurement datasets and quality metrics."""

from .dataset import Condition, PufDataset, load_dataset, save_dataset
from .model import (
    CellModel,
    ChipModel,
    PopulationParams,
    format_condition_label,
    one_probability,
    parse_condition_label,
    power_up,
    sample_chip,
    simulate_dataset,
    simulate_population,
)
from .quality import QualityReport, compute_ber, measure_quality

__all__ = [
    'Condition', 'PufDataset', 'load_dataset', 'save_dataset',
    'CellModel', 'ChipModel', 'PopulationParams', 'sample_chip', 'power_up',
    'one_probability', 'simulate_dataset', 'simulate_population',
    'parse_condition_label', 'format_condition_label',
    'QualityReport', 'measure_quality', 'compute_ber',
]
