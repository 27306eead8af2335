"""Abstract report renderer interface."""

from abc import ABC, abstractmethod

from app.models.domain import CommutationReport, ConstraintReport, RunReport


class ReportRenderer(ABC):
    """Turns report models into the text written to stdout or --out.

    Every renderer must be deterministic: equal reports give equal bytes.
    """

    @abstractmethod
    def render_run(self, report: RunReport) -> str:
        """Render a full scenario run.

        Args:
            report: The run report.

        Returns:
            The rendered document, ending with a newline.
        """
        ...

    @abstractmethod
    def render_comparison(self, report: CommutationReport) -> str:
        """Render the comparison of two pipelines.

        Args:
            report: The commutation report.

        Returns:
            The rendered document, ending with a newline.
        """
        ...

    @abstractmethod
    def render_audit(self, report: ConstraintReport) -> str:
        """Render the constraint audit of one pipeline."""
        ...
