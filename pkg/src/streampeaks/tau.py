"""Adaptive cut-distance control.

The cut distance tau decides which dependency links separate clusters.
A single objective scores any candidate tau against the current
multiset of dependent distances; the user's initial choice pins down
how much they weigh separation against compactness (alpha), and from
then on tau re-selects itself as the distance distribution drifts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

from streampeaks.errors import StreamClusteringError


class UndefinedObjective(StreamClusteringError):
    """The requested tau leaves one side of the partition empty."""


class NoConsistentAlpha(StreamClusteringError):
    """No grid alpha makes the user's initial tau optimal."""


ALPHA_GRID = tuple(i / 100.0 for i in range(1, 100))


@dataclass
class TauState:
    """Current threshold, learned preference, and the candidate
    distances it was last evaluated against."""

    alpha: float
    tau: float
    candidates: tuple[float, ...] = ()

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly inside (0, 1)")
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")


class DecisionGraphPoint(NamedTuple):
    cell_id: int
    rho: float
    delta: float


def _finite(deltas: Iterable[float]) -> list[float]:
    return [d for d in deltas if math.isfinite(d)]


def _split(deltas: Sequence[float], tau: float) -> tuple[list[float], list[float]]:
    intra = [d for d in deltas if d <= tau]
    inter = [d for d in deltas if d > tau]
    return intra, inter


def objective(alpha: float, tau: float, deltas: Iterable[float]) -> float:
    """Score of cutting at tau: alpha weighs the (normalized) average
    separation of cut links, (1-alpha) the reciprocal compactness of
    kept links.  Lower is better.  Both partitions must be non-empty.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly inside (0, 1)")
    ds = _finite(deltas)
    intra, inter = _split(ds, tau)
    intra_sum = sum(intra)
    if not inter or not intra or intra_sum <= 0.0:
        raise UndefinedObjective(
            f"tau={tau} leaves {len(inter)} inter / {len(intra)} intra links")
    mean = sum(ds) / len(ds)
    return (alpha * sum(inter) / (len(inter) * mean)
            + (1.0 - alpha) * (len(intra) * mean) / intra_sum)


def candidate_taus(deltas: Iterable[float]) -> list[float]:
    """Distinct finite distances that induce a valid two-sided
    partition: every distinct value except the largest (cutting at the
    maximum leaves no inter link)."""
    distinct = sorted(set(_finite(deltas)))
    return distinct[:-1]


def select_tau(alpha: float, deltas: Iterable[float], *,
               previous: Optional[float] = None) -> float:
    """Candidate tau minimizing the objective, ties toward smaller tau.

    The objective only changes when the partition changes, so scanning
    the distinct distances is exhaustive.  With no valid candidate the
    previous tau is retained (or an error raised if there is none).
    """
    ds = _finite(deltas)
    best_tau, best_F = None, math.inf
    for tau in candidate_taus(ds):
        F = objective(alpha, tau, ds)
        if F < best_F:
            best_tau, best_F = tau, F
    if best_tau is None:
        if previous is None:
            raise UndefinedObjective("no candidate tau induces a valid partition")
        return previous
    return best_tau


def learn_alpha(deltas: Iterable[float], tau0: float) -> float:
    """Alpha under which the user's initial tau beats every other
    candidate partition, taken from a 0.01-step grid.

    Feasibility is an interval (the objective is linear in alpha); the
    lower-median grid value is returned as the most drift-tolerant
    choice.
    """
    ds = _finite(deltas)
    intra0, inter0 = _split(ds, tau0)
    if not intra0 or not inter0:
        raise UndefinedObjective(
            f"initial tau={tau0} does not induce a valid partition")
    part0 = len(intra0)
    rivals = [tau for tau in candidate_taus(ds)
              if len(_split(ds, tau)[0]) != part0]
    if not rivals:
        raise NoConsistentAlpha(
            "only one candidate partition exists; nothing to learn from")
    feasible = [alpha for alpha in ALPHA_GRID
                if all(objective(alpha, tau0, ds) < objective(alpha, tau, ds)
                       for tau in rivals)]
    if not feasible:
        raise NoConsistentAlpha(
            f"no grid alpha makes tau={tau0} optimal for these distances")
    return feasible[(len(feasible) - 1) // 2]


def decision_graph(tree, t: float) -> list[DecisionGraphPoint]:
    """(density, dependent distance) per active cell, for operator
    inspection when picking the initial tau.

    The root's infinite distance is drawn at 1.1x the largest finite
    one (or 1.0 when it is the only cell) so the graph stays plottable;
    the sentinel never feeds the objective.
    """
    finite = _finite(tree.delta.values())
    ceiling = 1.1 * max(finite) if finite else 1.0
    rows = []
    for c in sorted(tree.nodes()):
        d = tree.delta[c]
        rows.append(DecisionGraphPoint(
            cell_id=c,
            rho=tree.space.cell_density_at(c, t),
            delta=d if math.isfinite(d) else ceiling))
    return rows
