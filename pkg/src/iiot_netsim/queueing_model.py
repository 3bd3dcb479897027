"""M/M/c broker-queue analytics plus a discrete-event simulation oracle.

The model pair actually used downstream is the standard Erlang-C waiting
probability C(c, rho) and W_q = C/(c*mu - lambda).  An unsimplified
variant of the waiting expression (which carries an extra factor of c in
its numerator) is kept alongside for cross-checking; the two disagree by
exactly that factor, so both are exposed rather than silently reconciled.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import InstabilityError, InvalidParameterError
from .rng import RngStream

WARMUP_FRACTION = 0.1


@dataclass(frozen=True)
class QueueParams:
    """Arrival rate lam, per-server service rate mu, c parallel servers."""

    lam: float
    mu: float
    servers: int = 1

    def __post_init__(self):
        if not self.lam > 0:
            raise InvalidParameterError(f"lam must be > 0, got {self.lam}")
        if not self.mu > 0:
            raise InvalidParameterError(f"mu must be > 0, got {self.mu}")
        if self.servers < 1:
            raise InvalidParameterError(f"servers must be >= 1, got {self.servers}")

    @property
    def rho(self) -> float:
        return self.lam / self.mu

    def require_stable(self) -> None:
        if self.rho >= self.servers:
            raise InstabilityError(
                f"instability: offered load rho={self.rho:.6g} must be below servers={self.servers}"
            )


def _poisson_terms(rho: float, c: int) -> tuple[float, float]:
    """(sum of rho^k/k! for k < c, rho^c/c!), built iteratively to dodge overflow."""
    term = 1.0
    acc = 0.0
    for k in range(c):
        acc += term
        term *= rho / (k + 1)
    return acc, term


def erlang_c_probability(params: QueueParams) -> float:
    """Probability an arrival must wait: C(c, rho)."""
    params.require_stable()
    c, rho = params.servers, params.rho
    partial, top = _poisson_terms(rho, c)
    tail = top / (1.0 - rho / c)
    return tail / (partial + tail)


def mean_wait_in_queue(params: QueueParams) -> float:
    """Mean queueing delay W_q = C(c, rho) / (c*mu - lambda), seconds."""
    params.require_stable()
    return erlang_c_probability(params) / (params.servers * params.mu - params.lam)


def erlang_c_unsimplified(params: QueueParams) -> float:
    """Unsimplified form of the waiting expression, kept for cross-checking.

    numerator   rho^c * (c/c!) / (1 - lambda/(c*mu))
    denominator sum_{k<c} rho^k/k!  +  (rho^c/c!) * c*mu/(c*mu - lambda)
    Equals c * erlang_c_probability exactly.
    """
    params.require_stable()
    c, rho, lam, mu = params.servers, params.rho, params.lam, params.mu
    partial, top = _poisson_terms(rho, c)
    numerator = top * c / (1.0 - lam / (c * mu))
    denominator = partial + top * (c * mu) / (c * mu - lam)
    return numerator / denominator


def simulate_mmc(
    params: QueueParams, arrivals: int, rng: RngStream
) -> tuple[float, float]:
    """Event-driven M/M/c oracle: (mean wait, fraction of arrivals that wait).

    Poisson arrivals, exponential service, c FIFO servers.  The first 10%
    of arrivals are discarded as warm-up.
    """
    params.require_stable()
    if arrivals < 1:
        raise InvalidParameterError(f"arrivals must be >= 1, got {arrivals}")
    gen = rng.gen
    t_arrive = np.cumsum(gen.exponential(1.0 / params.lam, arrivals))
    service = gen.exponential(1.0 / params.mu, arrivals)

    free_at = [0.0] * params.servers
    heapq.heapify(free_at)
    waits = np.empty(arrivals)
    for i in range(arrivals):
        t = t_arrive[i]
        earliest = heapq.heappop(free_at)
        start = earliest if earliest > t else t
        waits[i] = start - t
        heapq.heappush(free_at, start + service[i])

    kept = waits[int(arrivals * WARMUP_FRACTION):]
    return float(kept.mean()), float(np.count_nonzero(kept > 0.0) / kept.size)
