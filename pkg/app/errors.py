"""Exception roots shared by the engine and the scenario front end."""


class EngineError(Exception):
    """Base exception for failures while evaluating a scenario.

    The command line maps every subclass to exit code 3.
    """

    pass


class ScenarioError(Exception):
    """Base exception for malformed or inconsistent scenario input.

    The command line maps every subclass to exit code 2.
    """

    pass
