# Report renderers module

from app.reports.base import ReportRenderer
from app.reports.renderers import CsvRenderer, JsonRenderer, TextRenderer, get_renderer

__all__ = ["CsvRenderer", "JsonRenderer", "ReportRenderer", "TextRenderer", "get_renderer"]
