"""Closed-form domination bounds for designs and their checks against the solver.

All threshold arithmetic is exact: integer ceiling division and Fraction
comparisons, never floats.
"""
import itertools
import logging
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .designs import Design, DesignParams, PointSet, ResidualDesign, is_symmetric, residual
from .incidence import (
    VertexSet,
    blocks_avoiding,
    blocks_meeting,
    incidence_graph,
    is_dominating,
    neat_closure,
    project_points,
)
from .solver import BudgetExceededError, minimum_domination

logger = logging.getLogger(__name__)


class BoundNotApplicableError(ValueError):
    """Raised when a bound is asked for outside its hypotheses."""


class BoundStatus(str, Enum):
    SATISFIED = 'satisfied'
    VIOLATED = 'violated'
    NOT_APPLICABLE = 'not-applicable'


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def lb_general(p: DesignParams) -> int:
    """ceil((2v - 1 - (k-1)/lambda) / k), the lower bound valid for every 2-design."""
    return ceil_div(p.lam * (2 * p.v - 1) - (p.k - 1), p.lam * p.k)


def lb_point_count(p: DesignParams, psize: int) -> int:
    """Lower bound on |S| for a dominating set S with |π(S)| = psize."""
    if not 0 <= psize <= p.v:
        raise ValueError(f"Point count {psize} outside [0, {p.v}]")
    return ceil_div(p.v + psize * (p.k - 1), p.k)


def nonsymmetric_bracket(p: DesignParams) -> Tuple[int, int]:
    """(2k-1, (v-k^2)(v-1)/(k(k-1)) + 2k-1) for a non-symmetric 2-(v,k,1) design.

    The upper end is |I_B| for a block B, i.e. k + (b - (r-1)k - 1).
    """
    if p.lam != 1:
        raise BoundNotApplicableError(f"Bracket needs lambda = 1, got {p.lam}")
    if p.b <= p.v:
        raise BoundNotApplicableError("Bracket needs a non-symmetric design (b > v)")
    lo = 2 * p.k - 1
    hi = p.b - (p.r - 2) * p.k - 1
    return lo, hi


def neat_point_limit(p: DesignParams) -> int:
    """Largest |P| for which I_P is guaranteed to dominate: ceil(r/lambda) - 1."""
    return ceil_div(p.r, p.lam) - 1


def neat_upper(d: Design, P: PointSet) -> Optional[int]:
    """|I_P| when |P| is small enough that I_P dominates; None otherwise."""
    if P.bit_count() > neat_point_limit(d.params):
        return None
    return len(neat_closure(d, P))


def biplane_line_bounds(k: int, ell: int) -> Tuple[int, int]:
    """(max |L(P)|, min |I_P|) over |P| = ell in a symmetric 2-(v,k,2) design.

    Both are attained when P lies inside a block, and for ell <= k-2 only then.
    At ell >= k-1 the maximum equals b.
    """
    if not 2 <= ell <= k:
        raise BoundNotApplicableError(f"|P| = {ell} outside [2, {k}]")
    l_max = ell * (2 * k - 1 - ell) // 2 + 1
    i_min = (k * k - k + ell * ell - ell * (2 * k - 3)) // 2
    return l_max, i_min


def biplane_f(k: int, x) -> Fraction:
    """f(x) = (k^2-k)/2 + (x^2 - x(2k-3))/2; decreasing on [2, k-2], f(k-1) = f(k-2)."""
    x = Fraction(x)
    return Fraction(k * k - k, 2) + (x * x - x * (2 * k - 3)) / 2


def lb_biplane_sum(k: int) -> int:
    """k - 1 + sum over i >= 1 of floor((k-4) / 2^(2i-1)), for biplanes with k >= 5."""
    if k < 5:
        raise BoundNotApplicableError(f"Biplane sum bound needs k >= 5, got {k}")
    total = k - 1
    step = 2
    while step <= k - 4:
        total += (k - 4) // step
        step *= 4
    return total


def superneat_threshold(p: DesignParams) -> Fraction:
    """(ceil(r/lambda)(k-1) + v) / k; gamma below it forces super-neatness."""
    return Fraction(ceil_div(p.r, p.lam) * (p.k - 1) + p.v, p.k)


def lambda_one_threshold(p: DesignParams) -> Fraction:
    """(2v - 1)/k, the lambda = 1 form of the super-neat threshold."""
    if p.lam != 1:
        raise BoundNotApplicableError(f"Needs lambda = 1, got {p.lam}")
    return Fraction(2 * p.v - 1, p.k)


def superneat_sufficient(p: DesignParams, gamma: int) -> bool:
    if gamma < 1:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return gamma < superneat_threshold(p)


def epn_point_lower_bound(p: DesignParams) -> int:
    """ceil((r-1)/lambda): points in a private-neighbour minimum dominating set with π(S) != X."""
    return ceil_div(p.r - 1, p.lam)


def expected_gamma_plane(kind: str, q: int) -> int:
    if q < 2:
        raise ValueError(f"Plane order must be >= 2, got {q}")
    if kind == 'projective':
        return 2 * q
    if kind == 'affine':
        return 2 * q - 1
    raise ValueError(f"Unknown plane kind: {kind}")


def lift_from_residual(d: Design, res: ResidualDesign, S1: VertexSet) -> VertexSet:
    """S1 ∪ {B0}, a dominating set of d built from one of Res(d, B0)."""
    members = [_residual_to_parent(d, res, u) for u in S1]
    members.append(d.v + res.removed_block)
    return VertexSet.from_mask(sum(1 << u for u in members), d.v, d.b)


def restrict_to_residual(d: Design, S: VertexSet) -> Optional[Tuple[ResidualDesign, VertexSet]]:
    """Drop an avoiding block B0 of π(S) from a minimum dominating set S.

    Returns:
        (Res(d, B0), S minus B0 in residual indices), or None if every block
        meets π(S)
    """
    P = project_points(S)
    avoiding = [j for j in S.block_indices if not d.blocks[j] & P]
    if not avoiding:
        return None
    b0 = avoiding[0]
    res = residual(d, b0)
    point_index = {old: new for new, old in enumerate(res.point_map)}
    block_index = {old: new for new, old in enumerate(res.block_map)}
    members = []
    for u in S:
        if u < d.v:
            members.append(point_index[u])
        elif u - d.v != b0:
            members.append(res.design.v + block_index[u - d.v])
    return res, VertexSet.from_mask(sum(1 << u for u in members), res.design.v, res.design.b)


def _residual_to_parent(d: Design, res: ResidualDesign, u: int) -> int:
    v1 = res.design.v
    if u < v1:
        return res.point_map[u]
    return d.v + res.block_map[u - v1]


@dataclass
class ResidualRelationReport:
    """Domination numbers of all residuals of a symmetric design.

    status is 'violated' when gamma(D1) < gamma(D) - 1 anywhere, or when a
    design assumed block-transitive misses equality; missed equality without
    that assumption is a 'finding'.
    """

    gamma: int
    residual_gammas: List[int]
    status: str
    violations: List[str] = field(default_factory=list)
    findings: List[str] = field(default_factory=list)
    repeated_blocks: bool = False

    def to_dict(self) -> dict:
        return {
            'gamma': self.gamma,
            'residual_gammas': self.residual_gammas,
            'status': self.status,
            'violations': self.violations,
            'findings': self.findings,
            'repeated_blocks': self.repeated_blocks,
        }


def residual_relation_check(d: Design, assume_transitive: bool,
                            node_budget: Optional[int] = None,
                            threads: int = 1) -> ResidualRelationReport:
    """Compare gamma of every residual with gamma(D) - 1.

    Each residual witness is also lifted back to d, and the witness of d is
    restricted to a residual, so both directions of the relation are
    exercised constructively.

    Raises:
        BudgetExceededError: If any gamma cannot be computed within budget
    """
    if not is_symmetric(d):
        raise BoundNotApplicableError("Residual relations need a symmetric design")
    g = incidence_graph(d)
    base = minimum_domination(g, node_budget, threads)
    if not base.complete:
        raise BudgetExceededError(f"Budget exhausted computing gamma of {d}")
    gamma = base.gamma

    violations: List[str] = []
    findings: List[str] = []
    misses = 0
    gammas: List[int] = []
    repeated = False
    for b0 in range(d.b):
        res = residual(d, b0)
        repeated = repeated or res.design.has_repeated_blocks()
        sub = minimum_domination(incidence_graph(res.design), node_budget, threads)
        if not sub.complete:
            raise BudgetExceededError(f"Budget exhausted computing gamma of residual {b0}")
        gammas.append(sub.gamma)

        lifted = lift_from_residual(d, res, sub.witness)
        if not is_dominating(g, lifted):
            violations.append(f"B{b0}: lifted residual witness does not dominate")
        if sub.gamma < gamma - 1:
            violations.append(f"B{b0}: residual gamma {sub.gamma} < {gamma - 1}")
        elif sub.gamma != gamma - 1:
            misses += 1
            message = f"B{b0}: residual gamma {sub.gamma} != {gamma - 1}"
            (violations if assume_transitive else findings).append(message)

    restricted = restrict_to_residual(d, base.witness)
    if restricted is not None:
        res, S1 = restricted
        if not is_dominating(incidence_graph(res.design), S1):
            violations.append(f"B{res.removed_block}: restricted witness does not dominate")
    else:
        findings.append("witness has no block avoiding its points; restriction skipped")

    if assume_transitive and len(set(gammas)) > 1:
        violations.append(f"residual gammas differ: {sorted(set(gammas))}")
    if repeated:
        findings.append("some residuals have repeated blocks")

    if violations:
        status = 'violated'
        logger.error("Residual relation violated for %s: %s", d, violations)
    elif misses:
        status = 'finding'
    else:
        status = 'satisfied'
    return ResidualRelationReport(
        gamma=gamma,
        residual_gammas=gammas,
        status=status,
        violations=violations,
        findings=findings,
        repeated_blocks=repeated,
    )


@dataclass
class BoundsReport:
    """Every applicable bound for one design, with status against gamma."""

    design_id: str
    params: DesignParams
    lb_general: int
    point_count_curve: List[int]
    superneat_threshold: Fraction
    bracket: Optional[Tuple[int, int]] = None
    biplane_lb: Optional[int] = None
    biplane_lines: Optional[List[Tuple[int, int, int]]] = None
    superneat_sufficient: Optional[bool] = None
    gamma: Optional[int] = None
    status: Dict[str, BoundStatus] = field(default_factory=dict)

    def violated(self) -> List[str]:
        return [name for name, s in self.status.items() if s is BoundStatus.VIOLATED]

    def to_dict(self) -> dict:
        out = {'lb_general': self.lb_general, 'point_count_curve': self.point_count_curve}
        if self.bracket is not None:
            out['bracket'] = list(self.bracket)
        if self.biplane_lb is not None:
            out['biplane_lb'] = self.biplane_lb
        if self.biplane_lines is not None:
            out['biplane_lines'] = [list(row) for row in self.biplane_lines]
        out['superneat_threshold'] = str(self.superneat_threshold)
        if self.superneat_sufficient is not None:
            out['superneat_sufficient'] = self.superneat_sufficient
        out['status'] = {name: s.value for name, s in self.status.items()}
        return out


def _status(ok: bool) -> BoundStatus:
    return BoundStatus.SATISFIED if ok else BoundStatus.VIOLATED


def evaluate_bounds(d: Design, design_id: str = '', gamma: Optional[int] = None,
                    witness: Optional[VertexSet] = None) -> BoundsReport:
    """Evaluate every bound that applies to d.

    Args:
        d: Validated design
        design_id: Label used in reports
        gamma: Exact domination number, if known
        witness: A dominating set, checked against the point-count bound

    Returns:
        BoundsReport with one status per bound
    """
    p = d.params
    report = BoundsReport(
        design_id=design_id or d.name,
        params=p,
        lb_general=lb_general(p),
        point_count_curve=[lb_point_count(p, s) for s in range(p.v + 1)],
        superneat_threshold=superneat_threshold(p),
        gamma=gamma,
    )
    na = BoundStatus.NOT_APPLICABLE

    report.status['lb_general'] = na if gamma is None else _status(report.lb_general <= gamma)

    if p.lam == 1 and p.b > p.v:
        report.bracket = nonsymmetric_bracket(p)
        lo, hi = report.bracket
        report.status['bracket'] = na if gamma is None else _status(lo <= gamma <= hi)
    else:
        report.status['bracket'] = na

    if p.lam == 2 and is_symmetric(d):
        report.biplane_lines = [(ell,) + biplane_line_bounds(p.k, ell) for ell in range(2, p.k + 1)]
        if p.k >= 5:
            report.biplane_lb = lb_biplane_sum(p.k)
    if report.biplane_lb is not None and gamma is not None:
        report.status['biplane_lb'] = _status(report.biplane_lb <= gamma)
    else:
        report.status['biplane_lb'] = na

    if witness is not None:
        ok = len(witness) >= lb_point_count(p, project_points(witness).bit_count())
        report.status['point_count'] = _status(ok)
    else:
        report.status['point_count'] = na

    if gamma is not None:
        report.superneat_sufficient = superneat_sufficient(p, gamma)

    for name in report.violated():
        logger.error("Bound %s violated on %s (gamma = %s)", name, report.design_id, gamma)
    return report



def _point_subsets(v: int, size: int, exhaustive_limit: int, samples: int, rng: random.Random):
    """All size-subsets of the points, or a random sample when there are too many."""
    if math.comb(v, size) <= exhaustive_limit:
        yield from itertools.combinations(range(v), size)
        return
    for _ in range(samples):
        yield tuple(sorted(rng.sample(range(v), size)))


def neat_closure_failures(d: Design, exhaustive_limit: int = 100_000, samples: int = 1000,
                          seed: int = 0) -> Tuple[int, List[Tuple[int, ...]]]:
    """Test that I_P dominates for every small P.

    Sizes run up to ceil(r/lambda) - 1; each size is scanned exhaustively
    when C(v, size) <= exhaustive_limit and sampled otherwise.

    Returns:
        (number of point sets tested, point sets whose closure fails to dominate)
    """
    g = incidence_graph(d)
    rng = random.Random(seed)
    tested = 0
    failures = []
    for size in range(neat_point_limit(d.params) + 1):
        for points in _point_subsets(d.v, size, exhaustive_limit, samples, rng):
            tested += 1
            P = sum(1 << x for x in points)
            if not is_dominating(g, neat_closure(d, P)):
                failures.append(points)
    return tested, failures


def biplane_line_failures(d: Design) -> Tuple[int, List[Tuple[int, ...]]]:
    """Brute-force the |L(P)| bound for a symmetric 2-(v,k,2) design.

    For every P with 2 <= |P| <= k, |L(P)| must not exceed its bound and must
    reach it when P lies in a block. For |P| >= k-1 the bound equals b, so
    the converse (equality forces P into a block) is only checked up to k-2.

    Returns:
        (number of point sets tested, point sets breaking the statement)
    """
    p = d.params
    if p.lam != 2 or not is_symmetric(d):
        raise BoundNotApplicableError(f"Needs a symmetric design with lambda = 2, got {p}")
    tested = 0
    failures = []
    for ell in range(2, p.k + 1):
        l_max, _ = biplane_line_bounds(p.k, ell)
        for points in itertools.combinations(range(d.v), ell):
            tested += 1
            P = sum(1 << x for x in points)
            meeting = blocks_meeting(d, P).bit_count()
            inside = any(blk & P == P for blk in d.blocks)
            converse = ell <= p.k - 2 and meeting == l_max and not inside
            if meeting > l_max or (inside and meeting != l_max) or converse:
                failures.append(points)
    return tested, failures


def avoiding_blocks_included(d: Design, S: VertexSet) -> bool:
    """Whether every block missing π(S) belongs to S (true for dominating S)."""
    avoiding = blocks_avoiding(d, project_points(S))
    return avoiding & ~(S.mask >> d.v) == 0
