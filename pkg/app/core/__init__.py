# Core orchestration module

from app.core.runner import ScenarioRunner, UnknownLabel

__all__ = ["ScenarioRunner", "UnknownLabel"]
