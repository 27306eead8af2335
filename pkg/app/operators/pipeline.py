"""Running pipelines of operations from an evidential state."""

import logging

from app.errors import EngineError
from app.models.operations import Pipeline
from app.operators.state import EvidentialState, apply

logger = logging.getLogger(__name__)


class PipelineStepError(EngineError):
    """Raised when a pipeline step fails; wraps the underlying engine error."""

    def __init__(self, label: str, index: int, step: str, cause: EngineError):
        self.label = label
        self.index = index
        self.step = step
        self.cause = cause
        super().__init__(f"Pipeline {label!r} failed at step {index} ({step}): {cause}")


def run_pipeline(initial: EvidentialState, pipeline: Pipeline) -> list[EvidentialState]:
    """States after every prefix of the pipeline, the initial state first."""
    states = [initial]
    for index, op in enumerate(pipeline.steps):
        logger.debug(f"{pipeline.label}[{index}]: {op.describe()}")
        try:
            states.append(apply(states[-1], op))
        except EngineError as e:
            raise PipelineStepError(pipeline.label, index, op.describe(), e) from e
    logger.info(
        f"Pipeline {pipeline.label}: {len(pipeline.steps)} steps, "
        f"{states[-1].admissible.count} admissible members"
    )
    return states
