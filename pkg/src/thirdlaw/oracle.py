"""Brute-force optimal cooling error on explicit finite spectra.

The relaxed problem asks how much initial probability mass can be moved
into the ground space when an eigenstate of energy ``E`` may only land on a
ground slot of energy at most ``E + w_max``. A slot is a bath eigenstate
paired with one of the ``g`` target states. Feasible sets of entries form a
transversal matroid, so taking entries by decreasing probability and placing
each on the highest free feasible slot is optimal. The exhaustive search
checks this on tiny instances and also handles the two-sided constraint
``|slot - E| <= w_max``.

Only entries with ``E + w_max`` inside the trusted spectrum of a truncated
bath are assessed; the mass of the others is reported separately.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .bounds import error_bound_general
from .spectra import TOL, ExplicitBathSpectrum, SystemSpec, explicit_bath, build_system, erasure_system

GREEDY_BUDGET = 10**5
EXHAUSTIVE_BUDGET = 8


class BudgetExceededError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class JointStateTable:
    """Eigenvalues of ``rho_S (x) rho_B`` sorted by probability, ties by ``(s, b)``."""

    s: np.ndarray
    b: np.ndarray
    energy: np.ndarray
    p: np.ndarray

    def __len__(self) -> int:
        return int(self.p.size)

    def rows(self):
        return list(zip(self.s.tolist(), self.b.tolist(), self.energy.tolist(), self.p.tolist()))


@dataclass(frozen=True, eq=False)
class GroundSlotList:
    """Bath energies in ascending order, each repeated ``g`` times."""

    energy: np.ndarray
    bath_index: np.ndarray
    horizon: float = math.inf

    def __len__(self) -> int:
        return int(self.energy.size)


def enumerate_joint(system: SystemSpec, bath: ExplicitBathSpectrum,
                    budget: int = GREEDY_BUDGET) -> tuple[JointStateTable, GroundSlotList]:
    """Joint eigenvalue table and ground slots of a system and an explicit bath."""
    n = bath.n_states
    if system.d * n > budget:
        raise BudgetExceededError(f"{system.d} x {n} joint states exceed budget {budget}")
    e_b = bath.energies
    log_w = -bath.beta * e_b
    w = np.exp(log_w - log_w.max())
    p_b = w / math.fsum(w)
    lam = np.asarray(system.init_eigs)
    e_s = system.energies
    s_idx, b_idx = np.meshgrid(np.arange(system.d), np.arange(n), indexing="ij")
    s_idx, b_idx = s_idx.ravel(), b_idx.ravel()
    p = lam[s_idx] * p_b[b_idx]
    # stable lexsort: primary key -p, then s, then b
    order = np.lexsort((b_idx, s_idx, -p))
    table = JointStateTable(s_idx[order], b_idx[order], (e_s[s_idx] + e_b[b_idx])[order], p[order])
    slots = GroundSlotList(np.repeat(e_b, system.g), np.repeat(np.arange(n), system.g), bath.horizon)
    return table, slots


def _assessed(table: JointStateTable, slots: GroundSlotList, w_max: float) -> np.ndarray:
    return table.energy + w_max <= slots.horizon + TOL


def unassessed_mass(table: JointStateTable, slots: GroundSlotList, w_max: float) -> float:
    return math.fsum(table.p[~_assessed(table, slots, w_max)].tolist())


def greedy_optimal_error(table: JointStateTable, slots: GroundSlotList, w_max: float) -> float:
    """Optimal relaxed error: upper-side constraint ``slot <= E + w_max`` only."""
    deadlines = np.searchsorted(slots.energy, table.energy + w_max + TOL, side="right") - 1
    assessed = _assessed(table, slots, w_max)
    # parent[k] points to the highest free slot index <= k; index -1 is shifted to 0
    parent = list(range(len(slots) + 1))

    def find(k: int) -> int:
        root = k
        while parent[root] != root:
            root = parent[root]
        while parent[k] != root:
            parent[k], k = root, parent[k]
        return root

    lost = []
    for dl, ok, p in zip(deadlines.tolist(), assessed.tolist(), table.p.tolist()):
        if not ok:
            continue
        free = find(dl + 1)
        if free == 0:
            lost.append(p)
        else:
            parent[free] = free - 1
    return math.fsum(lost)


def exhaustive_optimal_error(table: JointStateTable, slots: GroundSlotList, w_max: float,
                             two_sided: bool = True) -> float:
    """Exact optimum by enumerating every subset of entries and testing matchability."""
    n = len(table)
    if n > EXHAUSTIVE_BUDGET:
        raise BudgetExceededError(f"{n} joint states exceed exhaustive budget {EXHAUSTIVE_BUDGET}")
    assessed = _assessed(table, slots, w_max)
    items = [i for i in range(n) if assessed[i]]
    feasible = []
    for i in items:
        E = table.energy[i]
        ok = slots.energy <= E + w_max + TOL
        if two_sided:
            ok &= slots.energy >= E - w_max - TOL
        feasible.append(tuple(np.flatnonzero(ok).tolist()))

    @lru_cache(maxsize=None)
    def matchable(subset: frozenset, used: int) -> bool:
        if not subset:
            return True
        k = min(subset)
        rest = subset - {k}
        return any(not used >> j & 1 and matchable(rest, used | 1 << j) for j in feasible[k])

    best = math.inf
    m = len(items)
    for mask in range(1 << m):
        chosen = frozenset(k for k in range(m) if mask >> k & 1)
        if not matchable(chosen, 0):
            continue
        eps = math.fsum(table.p[items[k]] for k in range(m) if not mask >> k & 1)
        best = min(best, eps)
    return best


def erasure_threshold_simple(bath: ExplicitBathSpectrum, w_max: float) -> float:
    """Largest bath level ``E0`` with ``2 I(E) <= I(E + w_max)`` for every level ``E <= E0``.

    ``+inf`` when every trusted level passes, ``-inf`` when the lowest fails.
    """
    levels = bath.levels
    cand = levels[levels + w_max <= bath.horizon + TOL]
    ok = 2 * bath.count_below(cand) <= bath.count_below(cand + w_max)
    if ok.all():
        return math.inf
    first_bad = int(np.argmin(ok))
    return -math.inf if first_bad == 0 else float(cand[first_bad - 1])


@dataclass(frozen=True)
class ValidationReport:
    epsilon_oracle: float
    epsilon_bound: float
    ok: bool
    margin: float
    unassessed_mass: float
    epsilon_exact: Optional[float] = None
    relaxation_gap: Optional[float] = None
    extras: dict = field(default_factory=dict)


def validate_bound(system: SystemSpec, bath: ExplicitBathSpectrum, w_max: float,
                   omega: Optional[float] = None, exhaustive: bool = True) -> ValidationReport:
    """Compare the relaxed oracle with the general counting bound on one spectrum."""
    table, slots = enumerate_joint(system, bath)
    eps_oracle = greedy_optimal_error(table, slots, w_max)
    eps_bound = error_bound_general(system, bath, w_max, omega).epsilon_lb
    margin = eps_oracle - eps_bound
    exact = gap = None
    if exhaustive and len(table) <= EXHAUSTIVE_BUDGET:
        exact = exhaustive_optimal_error(table, slots, w_max, two_sided=True)
        gap = exact - eps_oracle
    return ValidationReport(eps_oracle, eps_bound, margin >= -1e-12, margin,
                            unassessed_mass(table, slots, w_max), exact, gap)


@dataclass(frozen=True)
class RandomInstance:
    system: SystemSpec
    bath: ExplicitBathSpectrum
    w_max: float


def random_instance(rng: np.random.Generator, max_bath_states: int = 50,
                    d_choices=(2, 3, 4)) -> RandomInstance:
    """Small random system, bath, temperature and work budget.

    Energies are drawn on a coarse lattice half of the time so that
    degeneracies and exact threshold coincidences are exercised.
    """
    d = int(rng.choice(d_choices))
    beta = float(rng.uniform(0.1, 5.0))
    n_bath = int(rng.integers(2, max_bath_states + 1))
    e_b = rng.uniform(0.0, 3.0, size=n_bath)
    if rng.random() < 0.5:
        e_b = np.round(e_b * 4) / 4
    bath = explicit_bath(e_b, beta)
    e_s = rng.uniform(0.0, 2.0, size=d)
    if rng.random() < 0.5:
        e_s = np.round(e_s * 2) / 2
    e_s = np.sort(e_s - e_s.min())
    eigs = rng.dirichlet(np.ones(d))
    levels = [(float(e), 1) for e in e_s]
    if np.allclose(e_s, 0.0):
        system = erasure_system(d, int(rng.integers(1, d)), eigs / math.fsum(eigs))
    else:
        system = build_system(levels, eigs[np.argsort(-eigs)] / math.fsum(eigs),
                              g=int(rng.integers(1, d)))
    span = float(bath.max_energy) or 1.0
    w_max = float(rng.uniform(0.0, 2 * span))
    return RandomInstance(system, bath, w_max)
