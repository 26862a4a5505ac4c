"""HTML rendering of CLI reports."""

from .html_report import HTMLReportGenerator

__all__ = ['HTMLReportGenerator']
