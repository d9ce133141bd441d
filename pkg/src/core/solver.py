"""Exact minimum dominating sets of incidence graphs.

Domination is solved as the equivalent set-cover instance: the universe is
the vertex set and vertex w offers its closed neighbourhood N[w]. The search
always branches on the undominated vertex with the fewest remaining
candidate dominators (ties by lowest index) and tries candidates in
increasing index order. Candidates tried in earlier sibling branches are
excluded from later ones, so every cover is reached along exactly one path.
"""
import itertools
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

from .designs import Design, DualDesign, bits, dual_with_maps, is_symmetric
from .incidence import (
    IncidenceGraph,
    VertexSet,
    every_member_has_private_neighbour,
    incidence_graph,
    is_neat,
)

logger = logging.getLogger(__name__)

DEFAULT_NODE_BUDGET = 10 ** 9
DEFAULT_ORACLE_MAX_VERTICES = 26

# nodes counted locally before syncing with the shared total
_SYNC_EVERY = 1024


class BudgetExceededError(RuntimeError):
    """Raised when a search runs out of nodes; carries what was found so far."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class SolverError(RuntimeError):
    """Raised when the search contradicts a proven fact."""


@dataclass
class GammaResult:
    """Outcome of a minimum-domination search.

    When complete is False the budget ran out: gamma is the best size found
    and root_bound the only certified lower bound.
    """

    gamma: int
    witness: VertexSet
    nodes_explored: int
    root_bound: int
    complete: bool = True

    def to_dict(self) -> dict:
        return {
            'gamma': self.gamma,
            'witness': self.witness.labels(),
            'nodes_explored': self.nodes_explored,
            'root_bound': self.root_bound,
            'complete': self.complete,
        }


@dataclass
class NeatnessReport:
    gamma: int
    count_mds: int
    count_neat: int
    is_neat_design: bool
    is_super_neat: bool

    def to_dict(self) -> dict:
        return {
            'count_mds': self.count_mds,
            'count_neat': self.count_neat,
            'neat': self.is_neat_design,
            'super_neat': self.is_super_neat,
        }


class _BudgetExhausted(Exception):
    pass


@dataclass
class _SharedState:
    """State shared by all workers of one search.

    The incumbent only ever improves.
    """

    budget: int
    best_size: int
    best_mask: int
    nodes: int = 0
    stop: bool = False
    exhausted: bool = False
    found: List[int] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def offer(self, size: int, mask: int) -> None:
        with self.lock:
            if size < self.best_size:
                self.best_size = size
                self.best_mask = mask
                logger.info("Incumbent improved to %d", size)

    def add_nodes(self, count: int) -> None:
        with self.lock:
            self.nodes += count
            if self.nodes > self.budget:
                self.exhausted = True


class _Search:
    """One worker of the branch-and-bound.

    In 'minimize' mode a node is pruned when it cannot beat the incumbent;
    in 'enumerate' mode covers of size exactly `cap` are collected.
    """

    def __init__(self, graph: IncidenceGraph, state: _SharedState, mode: str,
                 cap: Optional[int] = None,
                 accept: Optional[Callable[[int], bool]] = None):
        self.nbhd = graph.closed_nbhd
        self.state = state
        self.mode = mode
        self.cap = cap
        self.accept = accept
        self.local_nodes = 0
        self.sync_every = max(1, min(_SYNC_EVERY, state.budget))

    def _tick(self) -> None:
        self.local_nodes += 1
        if self.local_nodes >= self.sync_every:
            self.flush()
        if self.state.exhausted:
            raise _BudgetExhausted()

    def flush(self) -> None:
        if self.local_nodes:
            self.state.add_nodes(self.local_nodes)
            self.local_nodes = 0

    def _limit(self) -> int:
        """Largest total size a node may still reach."""
        if self.mode == 'minimize':
            return self.state.best_size - 1
        return self.cap

    def lower_bound(self, undominated: int, allowed: int) -> Optional[int]:
        """Admissible bound on further picks, or None if infeasible.

        Two bounds are combined: undominated vertices with pairwise disjoint
        candidate sets need distinct dominators, and the sorted coverage
        counts of the allowed candidates must add up to the undominated count.
        """
        nbhd = self.nbhd
        packing = 0
        used = 0
        for u in bits(undominated):
            cand = nbhd[u] & allowed
            if not cand:
                return None
            if not cand & used:
                used |= cand
                packing += 1

        remaining = undominated.bit_count()
        cover = sorted(((nbhd[w] & undominated).bit_count() for w in bits(allowed)),
                       reverse=True)
        total = 0
        need = 0
        for c in cover:
            if total >= remaining or c == 0:
                break
            total += c
            need += 1
        if total < remaining:
            return None
        return max(packing, need)

    def branch_vertex(self, undominated: int, allowed: int) -> int:
        best_u, best_count = -1, None
        for u in bits(undominated):
            count = (self.nbhd[u] & allowed).bit_count()
            if best_count is None or count < best_count:
                best_u, best_count = u, count
        return best_u

    def children(self, chosen: int, count: int, undominated: int,
                 allowed: int) -> List[Tuple[int, int, int, int]]:
        """Expand a node; an empty list means the node is pruned."""
        bound = self.lower_bound(undominated, allowed)
        if bound is None or count + bound > self._limit():
            return []
        u = self.branch_vertex(undominated, allowed)
        out = []
        for w in bits(self.nbhd[u] & allowed):
            allowed &= ~(1 << w)
            out.append((chosen | 1 << w, count + 1, undominated & ~self.nbhd[w], allowed))
        return out

    def run(self, chosen: int, count: int, undominated: int, allowed: int) -> None:
        if self.state.stop:
            return
        self._tick()
        if not undominated:
            self._record(chosen, count)
            return
        for child in self.children(chosen, count, undominated, allowed):
            if self.state.stop:
                return
            self.run(*child)

    def _record(self, chosen: int, count: int) -> None:
        if self.mode == 'minimize':
            self.state.offer(count, chosen)
            return
        if count != self.cap:
            return
        if self.accept is not None:
            if self.accept(chosen):
                with self.state.lock:
                    self.state.found.append(chosen)
                    self.state.stop = True
            return
        with self.state.lock:
            self.state.found.append(chosen)


def _greedy_cover(g: IncidenceGraph) -> int:
    """Greedy dominating set (most newly dominated, ties by lowest index)."""
    undominated = g.all_vertices
    chosen = 0
    while undominated:
        best_w, best_gain = -1, 0
        for w in range(g.n):
            gain = (g.closed_nbhd[w] & undominated).bit_count()
            if gain > best_gain:
                best_w, best_gain = w, gain
        chosen |= 1 << best_w
        undominated &= ~g.closed_nbhd[best_w]
    return chosen


def _drive(g: IncidenceGraph, state: _SharedState, mode: str, threads: int,
           cap: Optional[int] = None, accept=None) -> None:
    """Run a search from the root, splitting root branches across threads."""
    root = (0, 0, g.all_vertices, g.all_vertices)
    worker = _Search(g, state, mode, cap, accept)
    try:
        if threads <= 1:
            worker.run(*root)
            return
        worker._tick()
        branches = worker.children(*root)
    except _BudgetExhausted:
        state.exhausted = True
        return
    finally:
        worker.flush()

    def explore(branch):
        sub = _Search(g, state, mode, cap, accept)
        try:
            sub.run(*branch)
        except _BudgetExhausted:
            state.exhausted = True
        finally:
            sub.flush()

    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(explore, branches))


def minimum_domination(g: IncidenceGraph, node_budget: Optional[int] = None,
                       threads: int = 1) -> GammaResult:
    """Exact domination number with one witness.

    Args:
        g: Graph to dominate (nonempty)
        node_budget: Maximum search nodes (default 10^9)
        threads: Worker count; gamma does not depend on it, the witness is
            deterministic only for threads == 1

    Returns:
        GammaResult; complete is False if the budget ran out
    """
    if g.n == 0:
        raise ValueError("Cannot dominate an empty graph")
    budget = DEFAULT_NODE_BUDGET if node_budget is None else node_budget

    greedy = _greedy_cover(g)
    state = _SharedState(budget=budget, best_size=greedy.bit_count(), best_mask=greedy)
    root_bound = _Search(g, state, 'minimize').lower_bound(g.all_vertices, g.all_vertices)
    logger.debug("Greedy incumbent %d, root bound %d", state.best_size, root_bound)

    _drive(g, state, 'minimize', threads)
    if state.exhausted:
        logger.warning("Node budget %d exhausted; gamma in [%d, %d]",
                       budget, root_bound, state.best_size)
    return GammaResult(
        gamma=state.best_size,
        witness=VertexSet.from_mask(state.best_mask, g.v, g.b),
        nodes_explored=state.nodes,
        root_bound=root_bound,
        complete=not state.exhausted,
    )


def _resolve_gamma(g: IncidenceGraph, gamma: Optional[int], node_budget: Optional[int],
                   threads: int) -> int:
    if gamma is not None:
        return gamma
    result = minimum_domination(g, node_budget, threads)
    if not result.complete:
        raise BudgetExceededError("Budget exhausted while computing gamma")
    return result.gamma


def enumerate_minimum_dominating_sets(g: IncidenceGraph, gamma: Optional[int] = None,
                                      node_budget: Optional[int] = None,
                                      threads: int = 1) -> List[VertexSet]:
    """Every dominating set of size gamma, once each, in canonical order.

    Args:
        g: Graph
        gamma: Known domination number (computed when omitted)
        node_budget: Maximum search nodes
        threads: Worker count; the sorted result does not depend on it

    Raises:
        BudgetExceededError: With the sets found so far in `partial`
    """
    budget = DEFAULT_NODE_BUDGET if node_budget is None else node_budget
    gamma = _resolve_gamma(g, gamma, node_budget, threads)

    state = _SharedState(budget=budget, best_size=gamma + 1, best_mask=0)
    _drive(g, state, 'enumerate', threads, cap=gamma)
    found = sorted(VertexSet.from_mask(m, g.v, g.b) for m in state.found)
    if state.exhausted:
        raise BudgetExceededError(
            f"Enumeration budget {budget} exhausted after {len(found)} sets", partial=found)
    logger.debug("Enumerated %d minimum dominating sets", len(found))
    return found


def exhaustive_gamma_oracle(g: IncidenceGraph,
                            max_vertices: int = DEFAULT_ORACLE_MAX_VERTICES) -> int:
    """Domination number by scanning all subsets in increasing size."""
    if g.n > max_vertices:
        raise ValueError(f"Oracle limited to {max_vertices} vertices, graph has {g.n}")
    full = g.all_vertices
    for size in range(g.n + 1):
        for combo in itertools.combinations(g.closed_nbhd, size):
            covered = 0
            for nb in combo:
                covered |= nb
            if covered == full:
                return size
    raise SolverError("No dominating set found")  # the full vertex set always dominates


def classify_neatness(d: Design, node_budget: Optional[int] = None, threads: int = 1,
                      gamma: Optional[int] = None) -> NeatnessReport:
    """Count minimum dominating sets and how many of them are neat."""
    g = incidence_graph(d)
    sets = enumerate_minimum_dominating_sets(g, gamma, node_budget, threads)
    if not sets:
        raise SolverError(f"No minimum dominating set found for {d}")
    count_neat = sum(1 for S in sets if is_neat(d, S))
    return NeatnessReport(
        gamma=len(sets[0]),
        count_mds=len(sets),
        count_neat=count_neat,
        is_neat_design=count_neat >= 1,
        is_super_neat=count_neat == len(sets),
    )


def epn_certified_mds(g: IncidenceGraph, gamma: Optional[int] = None,
                      node_budget: Optional[int] = None, threads: int = 1) -> VertexSet:
    """A minimum dominating set in which every member has an external private neighbour.

    Such a set exists in every graph without isolated vertices. The search
    stops at the first one it reaches, which is deterministic when
    single-threaded.

    Raises:
        SolverError: If the enumeration finishes without one
        BudgetExceededError: If the budget runs out first
    """
    budget = DEFAULT_NODE_BUDGET if node_budget is None else node_budget
    gamma = _resolve_gamma(g, gamma, node_budget, threads)

    def accept(mask: int) -> bool:
        return every_member_has_private_neighbour(g, VertexSet.from_mask(mask, g.v, g.b))

    state = _SharedState(budget=budget, best_size=gamma + 1, best_mask=0)
    _drive(g, state, 'enumerate', threads, cap=gamma, accept=accept)
    if state.found:
        return VertexSet.from_mask(min(state.found), g.v, g.b)
    if state.exhausted:
        raise BudgetExceededError("Budget exhausted before a private-neighbour set was found")
    raise SolverError("No minimum dominating set with private neighbours everywhere")


def dual_balanced_mds(d: Design, node_budget: Optional[int] = None,
                      threads: int = 1) -> Tuple[Design, VertexSet]:
    """A minimum dominating set with at most as many points as blocks.

    For a symmetric design the dual has an isomorphic incidence graph with
    the parts swapped, so a witness that is point-heavy in d becomes
    block-heavy in dual(d).

    Returns:
        The design the witness refers to (d or its dual) and the witness
    """
    if not is_symmetric(d):
        raise ValueError("Dual balancing needs a symmetric design")
    result = minimum_domination(incidence_graph(d), node_budget, threads)
    if not result.complete:
        raise BudgetExceededError("Budget exhausted while computing gamma")
    S = result.witness
    n_points = S.points.bit_count()
    if n_points <= len(S) - n_points:
        return d, S
    swap = dual_with_maps(d)
    g_dual = incidence_graph(swap.design)
    swapped = VertexSet.of(g_dual, [_dual_vertex(d, swap, u) for u in S])
    return swap.design, swapped


def _dual_vertex(d: Design, swap: DualDesign, u: int) -> int:
    """Image of vertex u of G_d in G_dual(d)."""
    if u < d.v:
        return swap.design.v + swap.block_of_point(u)
    return swap.point_map.index(u - d.v)
