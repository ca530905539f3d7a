"""Four-dimensional solution generators for the canonical and h-v connections.

Both generators share the metric blocks ``g_i = eps_i e^psi``, ``h_3 = eps_3 h0 (f*)^2 |varsigma|`` and
``h_4 = eps_4 (f - f0)^2``; they differ in how the N-coefficients close the mixed equations.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from finsler_forge import jetcalc
from finsler_forge.ansatzgen.recipes import check_kind
from finsler_forge.ansatzgen.recipes import value_of
from finsler_forge.ansatzgen.shells import VerticalShell
from finsler_forge.exceptions import PreconditionError
from finsler_forge.jetcalc import SPECTRAL_NODES
from finsler_forge.nholon import DMetric
from finsler_forge.nholon import MetricBlocks
from finsler_forge.nholon import ShellBlocks

if TYPE_CHECKING:
    from collections.abc import Callable
    from collections.abc import Sequence

    from finsler_forge.ansatzgen.recipes import ConnectionKind
    from finsler_forge.ansatzgen.recipes import SolutionRecipe
    from finsler_forge.jetcalc import Number

logger: logging.Logger = logging.getLogger(__name__)

FLAT_SLOPE: float = 1e-12


@dataclass(frozen=True)
class _NodeData:
    """h-v closing data at one v-node, stripped of the local x seed."""

    h3: Number
    h3_star: Number
    a_star: Number
    b: tuple[Number, Number]
    k: tuple[Number, Number]


def _node_data(
    recipe: SolutionRecipe,
    shell: VerticalShell,
    local: list[Number],
    tag_x: int,
    s: Number,
    running: Number,
) -> _NodeData:
    eps4: int = recipe.signs[3]

    def integrand(t: Number) -> Number:
        return shell.integrand(shell.at(local, t))

    def h3_of(t: Number) -> Number:
        return shell.h_pair(shell.at(local, t), jetcalc.anchored(running, integrand, t, tag_x))[0]

    def h4_of(t: Number) -> Number:
        phi: Number = shell.phi(shell.at(local, t))
        return eps4 * phi * phi

    h3, h3_s, h3_ss = jetcalc.second_jet(h3_of, s)
    h4, h4_s, h4_ss = jetcalc.second_jet(h4_of, s)
    g1, g2 = recipe.horizontal(local)

    a: Number = h3_s / (2.0 * h3) + h4_s / (2.0 * h4)
    a_star: Number = (h3_ss * h3 - h3_s * h3_s) / (2.0 * h3 * h3) + (h4_ss * h4 - h4_s * h4_s) / (2.0 * h4 * h4)
    dg1: list[Number] = [jetcalc.tangent(g1, tag_x, j) for j in range(2)]
    dg2: list[Number] = [jetcalc.tangent(g2, tag_x, j) for j in range(2)]
    b: list[Number] = [
        h4_s / (2.0 * h4) * (dg1[j] / (2.0 * g1) - dg2[j] / (2.0 * g2)) - jetcalc.tangent(a, tag_x, j) for j in range(2)
    ]
    k1: Number = -0.5 * (dg1[1] / (g2 * h3) + dg2[0] / (g2 * h4))
    k2: Number = 0.5 * (dg2[0] / (g1 * h3) - dg2[1] / (g2 * h4))

    def local_value(x: Number) -> Number:
        return jetcalc.strip(x, tag_x)

    return _NodeData(
        h3=local_value(h3),
        h3_star=local_value(h3_s),
        a_star=local_value(a_star),
        b=(local_value(b[0]), local_value(b[1])),
        k=(local_value(k1), local_value(k2)),
    )


def hv_closing(
    recipe: SolutionRecipe,
    shell: VerticalShell,
    point: Sequence[Number],
) -> tuple[list[Number], list[Number]]:
    """N-coefficients solving the h-v mixed equations at ``point``.

    ``w_j`` solves the linear ODE ``w* = -P w + Q`` along ``v`` from ``w_j(v0) = w0_j``, with
    ``P = 2 h3 A*/h3*`` and ``Q = -2 h3 B_j / h3*``. If ``h3*`` vanishes on the whole segment the equation
    is algebraic and ``w_j = -B_j / A*``. ``n_i`` integrates ``h3 K_i``.

    Returns:
        ``(w, n)``.

    Raises:
        PreconditionError: If ``h3*`` vanishes on part of the segment only.
    """
    tag_x, xs = jetcalc.seed([point[0], point[1]])
    local: list[Number] = [xs[0], xs[1], point[2], point[3]]
    upper: Number = point[2]
    samples: jetcalc.Profile = jetcalc.profile(
        lambda s: shell.integrand(shell.at(local, s)), shell.v0, upper, shell.nodes
    )
    nodes: list[_NodeData] = [
        _node_data(recipe, shell, local, tag_x, s, running)
        for s, running in zip(samples.points, samples.running, strict=True)
    ]

    def integrate(values: Sequence[Number]) -> tuple[Number, ...]:
        return jetcalc.cumulative(values, shell.v0, upper, shell.nodes)

    w0: list[Number] = [value_of(recipe.w0[j], point) for j in range(2)]
    flat: list[bool] = [abs(jetcalc.primal(node.h3_star)) < FLAT_SLOPE for node in nodes]
    if all(flat):
        end: _NodeData = nodes[-1]
        if jetcalc.primal(end.a_star) == 0:
            w = w0
        else:
            w = [-end.b[j] / end.a_star for j in range(2)]
        logger.debug("h3* vanishes along v, using the algebraic h-v closing")
    elif any(flat):
        msg: str = "h3* vanishes on part of the v-segment; the h-v closing needs h3* != 0 throughout"
        raise PreconditionError(msg)
    else:
        exponent: tuple[Number, ...] = integrate([2.0 * nd.h3 * nd.a_star / nd.h3_star for nd in nodes])
        w = []
        for j in range(2):
            if recipe.printed_formulas:
                weights: list[Number] = [
                    nd.h3 * nd.b[j] / nd.h3_star * jetcalc.exp(-e) for nd, e in zip(nodes, exponent, strict=True)
                ]
                w.append(w0[j] * jetcalc.exp(-exponent[-1]) * integrate(weights)[-1])
                continue
            forced: list[Number] = [
                -2.0 * nd.h3 * nd.b[j] / nd.h3_star * jetcalc.exp(e) for nd, e in zip(nodes, exponent, strict=True)
            ]
            w.append(jetcalc.exp(-exponent[-1]) * (w0[j] + integrate(forced)[-1]))

    n: list[Number] = [
        value_of(recipe.n0[i], point) + integrate([nd.h3 * nd.k[i] for nd in nodes])[-1] for i in range(2)
    ]
    return w, n


def _shell_of(recipe: SolutionRecipe, nodes: int) -> VerticalShell:
    return VerticalShell(
        recipe=recipe.shell, base=2, v0=recipe.v0, nodes=nodes, printed=recipe.printed_formulas
    )


def _generator(
    recipe: SolutionRecipe,
    closing: Callable[[VerticalShell, Sequence[Number]], tuple[list[Number], list[Number]]],
    nodes: int,
    name: str,
) -> DMetric:
    shell: VerticalShell = _shell_of(recipe, nodes)

    def evaluate(point: Sequence[Number]) -> MetricBlocks:
        g1, g2 = recipe.horizontal(point)
        h3, h4 = shell.h_at(point)
        w, n = closing(shell, point)
        return MetricBlocks(
            g=np.array([[g1, 0.0], [0.0, g2]], dtype=object),
            shells=(
                ShellBlocks(
                    h=np.array([[h3, 0.0], [0.0, h4]], dtype=object),
                    N=np.array([[w[0], n[0]], [w[1], n[1]]], dtype=object),
                ),
            ),
        )

    logger.info("Generated %s from recipe (signs %s, v0=%g)", name, recipe.signs, recipe.v0)
    return DMetric(n=2, shell_dims=(2,), evaluate=evaluate, name=name)


def generate_sol1(
    recipe: SolutionRecipe,
    connection: ConnectionKind = "hv",
    nodes: int = SPECTRAL_NODES,
) -> DMetric:
    """Generate the four-dimensional solution of a recipe.

    Args:
        recipe: Generating functions, integration functions and source.
        connection: ``hv`` closes the mixed equations of the h-v connection, ``canonical`` those of the
            canonical d-connection.
        nodes: Spectral nodes per v-integral.

    Returns:
        The d-metric; its blocks are computed on demand and carry exact derivatives at dual points.
    """
    if check_kind(connection) == "canonical":
        return generate_canonical(recipe, nodes=nodes)
    return _generator(
        recipe, lambda shell, point: hv_closing(recipe, shell, point), nodes, "generated solution (h-v)"
    )


def generate_canonical(recipe: SolutionRecipe, nodes: int = SPECTRAL_NODES) -> DMetric:
    """Generate the solution of a recipe closed for the canonical d-connection.

    Returns:
        The d-metric.
    """
    return _generator(
        recipe, lambda shell, point: shell.canonical_closing(point), nodes, "generated solution (canonical)"
    )
