"""Inner-bound rate-region polyhedron for multiparty distributed compression.

The achievable region of an m-sender pure source state is the
supermodular polyhedron (contra-polymatroid)

    { (Q_1, ..., Q_m) : sum_{k in K} Q_k >= C_K  for all nonempty K },

where C_K is half the mutual information between the senders in K and
everything else, written out as entropies of the single-copy state.
This module builds the constants, enumerates the corner points and the
polyhedron vertices (which coincide), reconstructs maximal chains from
saturated constraint systems, and optimizes linear costs greedily.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import qstate
from .qstate import MultipartyState

FEAS_TOL = 1e-7
DEDUP_TOL = 1e-6
PIVOT_TOL = 1e-9

MAX_ENUM_SENDERS = 5


class RegionError(ValueError):
    """Invalid region arguments (bad permutation, costs, subsets, ...)."""


def subset_key(subset: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(subset))


def nonempty_subsets(senders: Sequence[str]) -> list[frozenset[str]]:
    """All nonempty sender subsets, ordered by (size, lexicographic)."""
    out = []
    for r in range(1, len(senders) + 1):
        for combo in itertools.combinations(sorted(senders), r):
            out.append(frozenset(combo))
    return out


@dataclass(frozen=True, eq=False)
class RegionConstants:
    """Map from every nonempty sender subset K to the bound C_K (bits)."""

    senders: tuple[str, ...]
    reference: str
    c: Mapping[frozenset[str], float]

    def __post_init__(self):
        senders = tuple(self.senders)
        object.__setattr__(self, "senders", senders)
        if len(senders) < 1:
            raise RegionError("at least one sender required")
        if len(set(senders)) != len(senders):
            raise RegionError("sender labels must be distinct")
        expected = set(nonempty_subsets(senders))
        c = {frozenset(k): float(v) for k, v in dict(self.c).items()}
        if set(c) != expected:
            raise RegionError("constants must cover every nonempty subset")
        object.__setattr__(self, "c", MappingProxyType(c))

    def value(self, subset: Iterable[str]) -> float:
        """C_K, with the empty set mapped to 0 by convention."""
        key = frozenset(subset)
        if not key:
            return 0.0
        try:
            return self.c[key]
        except KeyError:
            raise RegionError(f"unknown subset {sorted(key)}") from None

    @property
    def m(self) -> int:
        return len(self.senders)


@dataclass(frozen=True)
class RatePoint:
    """Rate tuple in qubits per source copy, ordered like ``senders``."""

    senders: tuple[str, ...]
    rates: tuple[float, ...]
    witness: tuple[str, ...] | None = None

    def __post_init__(self):
        if len(self.rates) != len(self.senders):
            raise RegionError("one rate per sender required")
        if not all(np.isfinite(self.rates)):
            raise RegionError("rates must be finite")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.rates, dtype=float)

    def rate(self, sender: str) -> float:
        return self.rates[self.senders.index(sender)]

    def subset_sum(self, subset: Iterable[str]) -> float:
        return float(sum(self.rate(lab) for lab in subset))


@dataclass(frozen=True)
class VRegion:
    """Vertex description: deduplicated vertices plus the implicit
    nonnegative-orthant cone generators e_1 ... e_m."""

    senders: tuple[str, ...]
    vertices: tuple[RatePoint, ...]

    def arrays(self) -> np.ndarray:
        return np.array([v.rates for v in self.vertices], dtype=float)


@dataclass(frozen=True)
class SaturatedSystem:
    """m sender subsets whose indicator rows pin down a vertex."""

    senders: tuple[str, ...]
    sets: tuple[frozenset[str], ...]

    def indicator_matrix(self) -> np.ndarray:
        rows = np.zeros((len(self.sets), len(self.senders)))
        for i, subset in enumerate(self.sets):
            for lab in subset:
                rows[i, self.senders.index(lab)] = 1.0
        return rows


@dataclass(frozen=True)
class ChainFamily:
    """Maximal chain K_1 c K_2 c ... c K_m and a permutation realizing
    it via suffix sets."""

    sets: tuple[frozenset[str], ...]
    permutation: tuple[str, ...]


@dataclass(frozen=True)
class Membership:
    verdict: str  # "inside" | "boundary" | "outside"
    violated: tuple[frozenset[str], ...]
    tight: tuple[frozenset[str], ...]


# ---------------------------------------------------------------------------

def region_constants(state: MultipartyState,
                     reference: str) -> RegionConstants:
    """Entropy-derived constants C_K = [sum_K H(A_k) + H(R) - H(R A_K)]/2.

    The derivation assumes a globally pure state; a warning is emitted
    for mixed inputs and the formula is evaluated regardless.
    """
    ref_idx = state.index_of(reference)
    senders = tuple(lab for i, lab in enumerate(state.labels)
                    if i != ref_idx)
    if not senders:
        raise RegionError("need at least one sender besides the reference")
    if not state.is_pure(1e-7):
        warnings.warn("input state is not pure (purity "
                      f"{state.purity():.6f}); the inner bound assumes a "
                      "pure global state", stacklevel=2)
    h_single = {lab: qstate.entropy(state, {lab}) for lab in senders}
    h_ref = qstate.entropy(state, {reference})
    c = {}
    for subset in nonempty_subsets(senders):
        h_joint = qstate.entropy(state, set(subset) | {reference})
        c[subset] = 0.5 * (sum(h_single[lab] for lab in subset)
                           + h_ref - h_joint)
    return RegionConstants(senders, reference, c)


def _check_permutation(rc: RegionConstants, perm: Sequence[str]):
    if sorted(perm) != sorted(rc.senders):
        raise RegionError(f"{tuple(perm)} is not a permutation of "
                          f"{rc.senders}")


def corner_point(rc: RegionConstants, perm: Sequence[str]) -> RatePoint:
    """Unique solution of the saturated suffix-chain system for ``perm``.

    The sender in the last position receives its singleton constant;
    earlier positions receive successive suffix differences.
    """
    _check_permutation(rc, perm)
    perm = tuple(perm)
    m = len(perm)
    rates = {}
    for i in range(m):
        suffix = rc.value(perm[i:])
        after = rc.value(perm[i + 1:]) if i + 1 < m else 0.0
        rates[perm[i]] = suffix - after
    return RatePoint(rc.senders,
                     tuple(rates[lab] for lab in rc.senders),
                     witness=perm)


def corner_set(rc: RegionConstants, tol: float = DEDUP_TOL) -> VRegion:
    """All corner points over the m! permutations, deduplicated.

    Permutations are visited in lexicographic label order, so each
    retained point carries the lexicographically smallest witness.
    """
    if tol <= 0:
        raise RegionError("dedup tolerance must be positive")
    kept: list[RatePoint] = []
    for perm in itertools.permutations(sorted(rc.senders)):
        pt = corner_point(rc, perm)
        arr = pt.as_array()
        if any(np.max(np.abs(arr - k.as_array())) <= tol for k in kept):
            continue
        kept.append(pt)
    return VRegion(rc.senders, tuple(kept))


def membership(rc: RegionConstants, q: RatePoint,
               tol: float = FEAS_TOL) -> Membership:
    """Classify a rate point against every subset-sum constraint."""
    if sorted(q.senders) != sorted(rc.senders):
        raise RegionError("rate point senders do not match the region")
    violated, tight = [], []
    for subset in nonempty_subsets(rc.senders):
        total = q.subset_sum(subset)
        bound = rc.value(subset)
        if total < bound - tol:
            violated.append(subset)
        elif abs(total - bound) <= tol:
            tight.append(subset)
    if violated:
        verdict = "outside"
    elif tight:
        verdict = "boundary"
    else:
        verdict = "inside"
    return Membership(verdict, tuple(violated), tuple(tight))


def greedy_minimize(rc: RegionConstants,
                    costs: Sequence[float]) -> tuple[RatePoint, float]:
    """Minimize a positive linear cost over the region by the greedy rule.

    Senders are ordered by ascending cost (ties broken by label), which
    places the largest cost at the final position where it receives the
    smallest chain increment; the resulting corner point attains the LP
    optimum.  Costs are given in ``rc.senders`` order.
    """
    costs = [float(c) for c in costs]
    if len(costs) != rc.m:
        raise RegionError("one cost per sender required")
    if any(c <= 0 for c in costs):
        raise RegionError("costs must be positive for a bounded minimum")
    cost_of = dict(zip(rc.senders, costs))
    perm = tuple(sorted(rc.senders, key=lambda lab: (cost_of[lab], lab)))
    pt = corner_point(rc, perm)
    value = float(np.dot(pt.as_array(), costs))
    return pt, value


def _row_rank(matrix: np.ndarray, tol: float = PIVOT_TOL) -> int:
    """Row rank via Gaussian elimination with partial pivoting."""
    a = np.array(matrix, dtype=float)
    rows, cols = a.shape
    rank = 0
    for col in range(cols):
        if rank >= rows:
            break
        piv = rank + int(np.argmax(np.abs(a[rank:, col])))
        if abs(a[piv, col]) <= tol:
            continue
        a[[rank, piv]] = a[[piv, rank]]
        a[rank] /= a[rank, col]
        for r in range(rows):
            if r != rank and abs(a[r, col]) > tol:
                a[r] -= a[r, col] * a[rank]
        rank += 1
    return rank


def enumerate_vertices(rc: RegionConstants,
                       feas_tol: float = FEAS_TOL,
                       dedup_tol: float = DEDUP_TOL) -> VRegion:
    """Brute-force vertex enumeration of the halfspace description.

    Solves every m-subset of constraints with independent indicator
    rows and keeps the solutions feasible for all constraints.  Each
    vertex is witnessed by the permutation of the maximal chain
    reconstructed from its saturated system.
    """
    m = rc.m
    if m > MAX_ENUM_SENDERS:
        raise RegionError(f"vertex enumeration limited to m ≤ "
                          f"{MAX_ENUM_SENDERS} senders")
    subsets = nonempty_subsets(rc.senders)
    kept: list[RatePoint] = []
    for combo in itertools.combinations(subsets, m):
        sys = SaturatedSystem(rc.senders, combo)
        a = sys.indicator_matrix()
        if _row_rank(a) < m:
            continue
        b = np.array([rc.value(s) for s in combo])
        x = np.linalg.solve(a, b)
        feasible = all(
            sum(x[rc.senders.index(lab)] for lab in subset)
            >= rc.value(subset) - feas_tol
            for subset in subsets)
        if not feasible:
            continue
        if any(np.max(np.abs(x - k.as_array())) <= dedup_tol for k in kept):
            continue
        chain = reconstruct_chain(sys)
        kept.append(RatePoint(rc.senders, tuple(float(v) for v in x),
                              witness=chain.permutation))
    return VRegion(rc.senders, tuple(kept))


def reconstruct_chain(sys: SaturatedSystem) -> ChainFamily:
    """Recover the maximal chain hidden in a saturated constraint system.

    Builds the implication graph with an edge (j, k) whenever every set
    containing j also contains k, topologically sorts it (lowest label
    first among ties), and reads the chain off as suffix sets of the
    order.  The suffix sets are independently re-derived from unions of
    intersected sets as a consistency check.
    """
    senders = tuple(sys.senders)
    m = len(senders)
    if len(sys.sets) != m:
        raise RegionError(f"expected {m} sets, got {len(sys.sets)}")
    if _row_rank(sys.indicator_matrix()) < m:
        raise RegionError("indicator rows are linearly dependent")

    edges = {j: set() for j in senders}
    for j in senders:
        containing = [s for s in sys.sets if j in s]
        for k in senders:
            if k != j and all(k in s for s in containing):
                edges[j].add(k)

    # Kahn topological sort, lowest label first among available nodes
    indeg = {k: 0 for k in senders}
    for j in senders:
        for k in edges[j]:
            indeg[k] += 1
    avail = sorted(k for k in senders if indeg[k] == 0)
    order: list[str] = []
    while avail:
        node = avail.pop(0)
        order.append(node)
        for k in sorted(edges[node]):
            indeg[k] -= 1
            if indeg[k] == 0:
                avail.append(k)
        avail.sort()
    if len(order) != m:
        raise InternalCheckError("implication graph has a cycle despite "
                                 "linearly independent rows")

    chain = tuple(frozenset(order[m - l:]) for l in range(1, m + 1))

    # cross-check: rebuild each chain set from unions of intersections
    current = frozenset().union(*sys.sets)
    if current != frozenset(senders):
        raise InternalCheckError("saturated sets do not cover every sender")
    for l in range(m, 0, -1):
        if chain[l - 1] != current:
            raise InternalCheckError("chain reconstruction mismatch at "
                                     f"level {l}")
        head = order[m - l]
        current = frozenset().union(
            frozenset(),
            *[s & current for s in sys.sets if head not in (s & current)])
    return ChainFamily(chain, tuple(order))


class InternalCheckError(RuntimeError):
    """An internal consistency invariant failed (should be unreachable)."""


def check_supermodular(rc: RegionConstants, tol: float = FEAS_TOL) \
        -> list[tuple[frozenset[str], frozenset[str], float]]:
    """Test C_{K u L} + C_{K n L} >= C_K + C_L over all subset pairs.

    Returns the list of violating (K, L, deficit) triples; empty means
    the map is supermodular within ``tol``.  Constants derived from a
    quantum state always pass (the inequality is strong subadditivity
    in disguise).
    """
    subsets = nonempty_subsets(rc.senders)
    violations = []
    for k_set, l_set in itertools.combinations_with_replacement(subsets, 2):
        lhs = rc.value(k_set | l_set) + rc.value(k_set & l_set)
        rhs = rc.value(k_set) + rc.value(l_set)
        if lhs < rhs - tol:
            violations.append((k_set, l_set, rhs - lhs))
    return violations
