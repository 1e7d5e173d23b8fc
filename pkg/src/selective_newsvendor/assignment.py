"""Max-weight capacitated bipartite assignment via incremental augmenting chains.

Agents form the capacitated side (a handful of rows); customers join one at a
time.  After every arrival the state is a maximum-weight assignment of the
customers seen so far: the arriving customer is attached through the most
profitable augmenting chain (a direct placement, or a cascade of relocations
that ends at an agent with spare capacity), and the chain is applied only
when its net gain is strictly positive, so zero-weight customers stay
unplaced.  Forcing the assignment up to a minimum cardinality repeats the
same chain search over all unplaced customers, accepting non-positive gains;
successive max-gain augmentation keeps each intermediate cardinality optimal.

The chain search runs on an agent-level graph: edge (i1 -> i2) carries the
best single relocation of one of i1's customers to i2, and a Bellman-Ford
pass over the (tiny) agent set finds the best chain.  No positive cycle can
exist while the current assignment is optimal, which keeps the longest-path
computation well defined.  All argmax tie-breaks take the first (lowest)
index, so equal-weight agents resolve to the lower agent id.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import InfeasibleError
from .model import Assignment


class CapacitatedMatcher:
    """Incremental max-weight assignment of customers to capacitated agents."""

    def __init__(self, weights, capacities, eligible=None):
        weights = np.asarray(weights, dtype=float)
        if weights.ndim != 2:
            raise ValueError("weights must be a 2-D (agents x customers) array")
        self.n_agents, self.n_customers = weights.shape
        if eligible is None:
            eligible = np.isfinite(weights)
        self.masked_weights = np.where(eligible, weights, -np.inf)
        self.capacities = np.asarray(capacities, dtype=np.int64)
        if self.capacities.shape != (self.n_agents,):
            raise ValueError("capacities must have one entry per agent")
        self.agent_of = np.full(self.n_customers, -1, dtype=np.int64)
        self.loads = np.zeros(self.n_agents, dtype=np.int64)
        self.offered = np.zeros(self.n_customers, dtype=bool)

    def clone(self) -> "CapacitatedMatcher":
        twin = object.__new__(CapacitatedMatcher)
        twin.n_agents = self.n_agents
        twin.n_customers = self.n_customers
        twin.masked_weights = self.masked_weights
        twin.capacities = self.capacities
        twin.agent_of = self.agent_of.copy()
        twin.loads = self.loads.copy()
        twin.offered = self.offered.copy()
        return twin

    @property
    def n_assigned(self) -> int:
        return int(np.count_nonzero(self.agent_of >= 0))

    def assignment_vector(self) -> np.ndarray:
        return self.agent_of.copy()

    def add_customer(self, customer: int) -> bool:
        """Offer one customer; place it iff the best augmenting chain gains > 0.

        Chains may end at an agent with spare capacity (one more customer
        served) or by dropping the cheapest occupant of a full agent (a swap
        that keeps the count but raises the weight); weights are assumed
        non-negative, so dropping never beats an equally good spare slot.
        """
        self.offered[customer] = True
        entry = self.masked_weights[:, customer]
        if not np.any(np.isfinite(entry)):
            return False
        spare = self.loads < self.capacities
        if spare.all():
            # Relocations and swaps cannot help while every agent has room.
            best = int(np.argmax(entry))
            if entry[best] > 0.0:
                self._place(customer, best)
                return True
            return False
        entry_customer = np.full(self.n_agents, customer, dtype=np.int64)
        gain, chain = self._best_chain(entry, entry_customer, allow_drop=True)
        if chain is not None and gain > 0.0:
            self._apply(chain)
            return True
        return False

    def force_one(self) -> bool:
        """Place one more customer along the best chain regardless of gain sign.

        Drop endings are excluded (they keep the count unchanged).  Returns
        False when no unplaced offered customer can be attached at all
        (capacity exhausted or no eligible agent reachable).
        """
        candidates = np.flatnonzero(self.offered & (self.agent_of < 0))
        if candidates.size == 0:
            return False
        sub = self.masked_weights[:, candidates]
        entry = sub.max(axis=1)
        entry_customer = candidates[np.argmax(sub, axis=1)]
        gain, chain = self._best_chain(entry, entry_customer, allow_drop=False)
        if chain is None:
            return False
        self._apply(chain)
        return True

    def total_weight(self) -> float:
        placed = np.flatnonzero(self.agent_of >= 0)
        if placed.size == 0:
            return 0.0
        return float(np.sum(self.masked_weights[self.agent_of[placed], placed]))

    # -- chain machinery ---------------------------------------------------

    def _place(self, customer: int, agent: int) -> None:
        self.agent_of[customer] = agent
        self.loads[agent] += 1

    def _relocation_edges(self):
        """Best single relocation between every ordered agent pair.

        edge[i1, i2] is the max over customers held by i1 of
        weight(i2, j) - weight(i1, j); mover[i1, i2] records the customer.
        """
        n = self.n_agents
        edge = np.full((n, n), -np.inf)
        mover = np.full((n, n), -1, dtype=np.int64)
        for i1 in range(n):
            held = np.flatnonzero(self.agent_of == i1)
            if held.size == 0:
                continue
            delta = self.masked_weights[:, held] - self.masked_weights[i1, held][None, :]
            pick = np.argmax(delta, axis=1)
            edge[i1, :] = delta[np.arange(n), pick]
            mover[i1, :] = held[pick]
        return edge, mover

    def _best_chain(self, entry_gain, entry_customer, allow_drop: bool):
        """Max-gain augmenting chain for one incoming unit.

        entry_gain[i] is the gain of starting the chain by placing
        entry_customer[i] at agent i.  Returns (gain, chain) where chain is
        (entry_customer, agent path, movers along the path, dropped customer
        or -1); (None, None) when no ending is reachable.
        """
        n = self.n_agents
        edge, mover = self._relocation_edges()
        dist = entry_gain.astype(float).copy()
        parent = np.full(n, -1, dtype=np.int64)
        moved = np.full(n, -1, dtype=np.int64)
        for _ in range(n - 1):
            cand = dist[:, None] + edge
            best = cand.max(axis=0)
            arg = np.argmax(cand, axis=0)
            improved = best > dist
            if not improved.any():
                break
            dist = np.where(improved, best, dist)
            parent = np.where(improved, arg, parent)
            moved = np.where(improved, mover[arg, np.arange(n)], moved)

        spare_gain = np.where(self.loads < self.capacities, dist, -np.inf)
        best_gain, last, dropped = -np.inf, -1, -1
        if np.any(np.isfinite(spare_gain)):
            last = int(np.argmax(spare_gain))
            best_gain = float(spare_gain[last])
        if allow_drop:
            cheapest = np.full(n, np.inf)
            cheapest_customer = np.full(n, -1, dtype=np.int64)
            for i in range(n):
                held = np.flatnonzero(self.agent_of == i)
                if held.size:
                    pick = int(np.argmin(self.masked_weights[i, held]))
                    cheapest[i] = self.masked_weights[i, held[pick]]
                    cheapest_customer[i] = held[pick]
            drop_gain = dist - cheapest
            if np.any(np.isfinite(drop_gain)) and np.nanmax(drop_gain) > best_gain:
                at = int(np.argmax(np.where(np.isfinite(drop_gain), drop_gain, -np.inf)))
                best_gain = float(drop_gain[at])
                last = at
                dropped = int(cheapest_customer[at])
        if last < 0 or not math.isfinite(best_gain):
            return None, None
        path = [last]
        movers = []
        while parent[path[-1]] >= 0:
            movers.append(int(moved[path[-1]]))
            path.append(int(parent[path[-1]]))
            if len(path) > n:
                raise RuntimeError("augmenting chain reconstruction cycled")
        path.reverse()
        movers.reverse()
        return best_gain, (int(entry_customer[path[0]]), path, movers, dropped)

    def _apply(self, chain) -> None:
        customer, path, movers, dropped = chain
        # Relocations run from the entry agent outward; each keeps loads even.
        # The final agent either absorbs the extra unit or sheds its dropped
        # occupant, keeping the count unchanged.
        for step, mover in enumerate(movers):
            self.agent_of[mover] = path[step + 1]
        self.agent_of[customer] = path[0]
        if dropped >= 0:
            self.agent_of[dropped] = -1
        else:
            self.loads[path[-1]] += 1


def max_weight_capacitated_assignment(
    weights,
    capacities,
    min_cardinality: int = 0,
    eligible=None,
) -> Assignment:
    """Maximum-weight assignment of customers to capacitated agents.

    Each customer is placed with at most one agent, each agent serves at most
    its capacity, and at least ``min_cardinality`` customers are placed (even
    at a weight loss).  Among equal-weight optima, ties resolve toward the
    lower agent id, and zero-weight customers are placed only when the
    cardinality floor requires it.

    Raises :class:`InfeasibleError` when fewer than ``min_cardinality``
    customers can be placed at all.
    """
    matcher = CapacitatedMatcher(weights, capacities, eligible)
    for customer in range(matcher.n_customers):
        matcher.add_customer(customer)
    while matcher.n_assigned < min_cardinality:
        if not matcher.force_one():
            raise InfeasibleError(
                f"cannot place {min_cardinality} customers: only "
                f"{matcher.n_assigned} attainable"
            )
    return Assignment.from_vector(matcher.assignment_vector())
