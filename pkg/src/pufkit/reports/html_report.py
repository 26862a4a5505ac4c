"""HTML report generation for plan and Monte Carlo outputs."""

import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from jinja2 import Environment, FileSystemLoader, select_autoescape

logger = logging.getLogger(__name__)

TEMPLATE_DIR = Path(__file__).parent / 'templates'


class HTMLReportGenerator:
    """Renders JSON-style report dictionaries into a standalone HTML page."""

    def __init__(self, config=None):
        """Initialize HTML generator.

        Args:
            config: Configuration object (optional; only used for the
                calibration tag shown in the footer)
        """
        self.calibration = config.get('model.calibration', 'v2') if config is not None else 'v2'

        self.env = Environment(
            loader=FileSystemLoader(str(TEMPLATE_DIR)),
            autoescape=select_autoescape(['html', 'xml'])
        )

        # Add custom filters
        self.env.filters['sci'] = self._format_scientific
        self.env.filters['code'] = self._format_code

    def render(self, kind: str, sections: List[Dict[str, Any]], title: Optional[str] = None) -> str:
        """Render a report.

        Args:
            kind: ``plan``, ``montecarlo`` or ``analyze``
            sections: Report dictionaries as printed by the CLI
            title: Page title

        Returns:
            HTML text
        """
        template = self.env.get_template('report.html')
        return template.render(
            kind=kind,
            title=title or f"pufkit {kind} report",
            sections=sections,
            calibration=self.calibration,
            generation_time=datetime.now().strftime("%Y-%m-%d %H:%M:%S"),
        )

    def write(
        self,
        kind: str,
        sections: List[Dict[str, Any]],
        output_file: Union[str, Path],
        title: Optional[str] = None,
    ) -> Path:
        """Render and save a report; returns the written path."""
        out = Path(output_file)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, 'w', encoding='utf-8') as f:
            f.write(self.render(kind, sections, title))
        logger.info(f"Report saved to: {out}")
        return out

    @staticmethod
    def _format_scientific(value: Any) -> str:
        """Format probabilities and rates compactly."""
        if value is None:
            return "n/a"
        if isinstance(value, float):
            if value == 0.0:
                return "0"
            if abs(value) < 1e-3 or abs(value) >= 1e6:
                return f"{value:.3e}"
            return f"{value:.4f}"
        return str(value)

    @staticmethod
    def _format_code(value: Any) -> str:
        """Format an (n, k, t) triple as BCH(n,k,t)."""
        if value is None:
            return "n/a"
        n, k, t = value
        return f"BCH({n},{k},{t})"
