import pytest

from finsler_forge.expressions import compile_field
from finsler_forge.nholon import DMetric
from finsler_forge.nholon import MatrixRule
from finsler_forge.nholon import matrix_rule
from finsler_forge.nholon import zero_rule

COORDINATES: list[str] = ["x1", "x2", "y1", "y2"]
CURVED_POINT: list[float] = [0.3, 0.5, 1.2, 0.7]


def field_rule(rows: list[list[str | float]], coordinates: list[str]) -> MatrixRule:
    """Matrix rule from a table of expressions and constants.

    Returns:
        The rule.
    """
    return matrix_rule([[compile_field(entry, coordinates) for entry in row] for row in rows])


@pytest.fixture
def curved() -> DMetric:
    """A generic 2+2 d-metric with fiber-dependent blocks and a curved N-connection.

    Returns:
        The d-metric.
    """
    return DMetric.single(
        g=field_rule([["1 + x1^2 + 0.1*y1^2", 0.0], [0.0, "exp(0.2*x2)"]], COORDINATES),
        h=field_rule([["1 + y1^2", 0.0], [0.0, "2 + x1 + 0.1*y2"]], COORDINATES),
        N=field_rule([["0.1*y1", "x2"], [0.0, "0.2*x1*y2"]], COORDINATES),
        n=2,
        m=2,
        name="curved",
    )


@pytest.fixture
def sphere() -> DMetric:
    """Unit two-sphere with a flat one-dimensional fiber and no N-connection.

    Returns:
        The d-metric on ``(theta, phi, y)``.
    """
    coordinates: list[str] = ["theta", "phi", "y"]
    return DMetric.single(
        g=field_rule([[1.0, 0.0], [0.0, "sin(theta)^2"]], coordinates),
        h=field_rule([[1.0]], coordinates),
        N=zero_rule(2, 1),
        n=2,
        m=1,
        name="sphere",
    )
