"""System and bath spectral models.

Every other module consumes the three types defined here:

* :class:`SystemSpec` -- the finite system being cooled (levels, target rank,
  gap, initial eigenvalues).
* :class:`ExplicitBathSpectrum` -- a finite list of bath eigen-energies, stored
  as distinct levels with multiplicities.
* :class:`AnalyticBathModel` -- the closed-form entropy family
  ``S(E) = alpha * V**(1 - nu) * E**nu``.

All energy comparisons ``E <= X`` use the absolute tolerance :data:`TOL`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

TOL = 1e-9
"""Absolute tolerance of every threshold comparison (``E <= X + TOL``)."""

DEFAULT_STATE_BUDGET = 10**6


class SpectrumError(ValueError):
    """Raised for spectra that violate a model invariant."""


def _normalize_levels(levels) -> tuple[tuple[float, int], ...]:
    """Accept ``[(E, g), ...]`` or bare energies; merge equal energies, shift min to 0."""
    pairs = []
    for item in levels:
        if isinstance(item, (tuple, list)):
            energy, deg = item
        else:
            energy, deg = item, 1
        deg_int = int(deg)
        if deg_int != deg or deg_int < 1:
            raise SpectrumError(f"degeneracy must be a positive integer, got {deg!r}")
        if not math.isfinite(float(energy)):
            raise SpectrumError(f"level energy must be finite, got {energy!r}")
        pairs.append((float(energy), deg_int))
    if not pairs:
        raise SpectrumError("levels must be non-empty")
    e_min = min(e for e, _ in pairs)
    merged: dict[float, int] = {}
    for e, g in sorted(pairs):
        e = e - e_min
        # merge levels equal within tolerance
        key = next((k for k in merged if abs(k - e) <= TOL), e)
        merged[key] = merged.get(key, 0) + g
    return tuple(sorted(merged.items()))


@dataclass(frozen=True)
class SystemSpec:
    """The system being cooled.

    ``g`` is the rank of the target subspace and ``Delta`` the gap above it.
    For ordinary cooling they are the ground degeneracy and first gap of
    ``levels``; for erasure (``H_S = 0``) or a changed final Hamiltonian they
    are set independently. ``Delta`` is ``None`` when no gap is defined.
    """

    levels: tuple[tuple[float, int], ...]
    init_eigs: tuple[float, ...]
    g: int
    Delta: Optional[float]
    T_S: Optional[float] = None
    Z_S: Optional[float] = None

    def __post_init__(self):
        d = sum(deg for _, deg in self.levels)
        if len(self.init_eigs) != d:
            raise SpectrumError(f"init_eigs has {len(self.init_eigs)} entries, expected d = {d}")
        if abs(self.levels[0][0]) > TOL:
            raise SpectrumError("lowest level energy must be 0")
        if any(lam <= 0 for lam in self.init_eigs):
            raise SpectrumError("initial eigenvalues must be strictly positive")
        if abs(sum(self.init_eigs) - 1.0) > 1e-12:
            raise SpectrumError(f"initial eigenvalues sum to {sum(self.init_eigs)!r}, not 1")
        if not 1 <= self.g <= d:
            raise SpectrumError(f"target rank g = {self.g} outside [1, {d}]")
        if self.Delta is not None and not self.Delta > 0:
            raise SpectrumError("Delta must be > 0")

    @property
    def d(self) -> int:
        return sum(deg for _, deg in self.levels)

    @property
    def J(self) -> float:
        return self.levels[-1][0]

    @property
    def energies(self) -> np.ndarray:
        """Per-state energies aligned with ``init_eigs``."""
        return np.repeat([e for e, _ in self.levels], [deg for _, deg in self.levels])

    @property
    def lambda_min(self) -> float:
        return min(self.init_eigs)

    @property
    def lambda_max(self) -> float:
        return max(self.init_eigs)

    @property
    def is_thermal(self) -> bool:
        return self.T_S is not None

    @property
    def ground_degeneracy(self) -> int:
        return self.levels[0][1]


def _gap(levels) -> Optional[float]:
    return levels[1][0] if len(levels) > 1 else None


def build_thermal_system(levels, T_S: float) -> SystemSpec:
    """Gibbs state of ``levels`` at temperature ``T_S`` (``math.inf`` allowed).

    Target rank and gap are the ground degeneracy and first gap.
    """
    if not T_S > 0:
        raise SpectrumError("T_S must be > 0")
    lv = _normalize_levels(levels)
    if len(lv) < 2:
        raise SpectrumError("gapless system: all levels are equal")
    energies = np.repeat([e for e, _ in lv], [g for _, g in lv])
    weights = np.exp(-energies / T_S)
    Z_S = float(weights.sum())
    eigs = weights / Z_S
    # renormalise in extended precision so the 1e-12 sum invariant holds for any d
    eigs = tuple(float(x) for x in eigs / math.fsum(eigs))
    return SystemSpec(levels=lv, init_eigs=eigs, g=lv[0][1], Delta=_gap(lv), T_S=float(T_S), Z_S=Z_S)


def build_system(levels, init_eigs: Sequence[float], g: Optional[int] = None,
                 Delta: Optional[float] = None) -> SystemSpec:
    """System with an arbitrary initial spectrum.

    ``init_eigs`` is aligned with the states of ``levels`` expanded in ascending
    energy. ``g`` and ``Delta`` default to the ground degeneracy and first gap.
    """
    lv = _normalize_levels(levels)
    eigs = tuple(float(x) for x in init_eigs)
    return SystemSpec(levels=lv, init_eigs=eigs,
                      g=lv[0][1] if g is None else int(g),
                      Delta=_gap(lv) if Delta is None else float(Delta))


def erasure_system(d: int, g: int = 1, init_eigs: Optional[Sequence[float]] = None) -> SystemSpec:
    """``H_S = 0`` system of dimension ``d`` to be erased into a rank-``g`` subspace."""
    eigs = [1.0 / d] * d if init_eigs is None else list(init_eigs)
    return SystemSpec(levels=((0.0, int(d)),), init_eigs=tuple(float(x) for x in eigs),
                      g=int(g), Delta=None)


def rebuild_system(system: SystemSpec) -> SystemSpec:
    """Reconstruct a system from its own data (idempotent)."""
    if system.is_thermal:
        out = build_thermal_system(system.levels, system.T_S)
        return replace(out, g=system.g, Delta=system.Delta)
    return build_system(system.levels, system.init_eigs, g=system.g, Delta=system.Delta)


@dataclass(frozen=True, eq=False)
class ExplicitBathSpectrum:
    """Finite bath spectrum with Gibbs state at inverse temperature ``beta``.

    ``levels`` are the distinct energies (ascending, first = 0) and
    ``multiplicity`` their degeneracies; :attr:`energies` expands them.
    When ``truncation_cutoff`` is set the list is the low-energy part of a
    larger (possibly infinite) spectrum, complete only up to the cutoff.
    """

    levels: np.ndarray
    multiplicity: np.ndarray
    V: float
    beta: float
    truncation_cutoff: Optional[float] = None
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=float)
        mult = np.asarray(self.multiplicity, dtype=float)
        if levels.ndim != 1 or levels.shape != mult.shape:
            raise SpectrumError("levels and multiplicity must be 1-d arrays of equal length")
        if np.any(np.diff(levels) <= 0):
            raise SpectrumError("bath levels must be strictly increasing")
        if levels.size == 0 or abs(levels[0]) > TOL:
            raise SpectrumError("lowest bath energy must be 0")
        if np.any(mult < 1) or np.any(mult != np.round(mult)):
            raise SpectrumError("multiplicities must be positive integers")
        if mult.sum() < 2:
            raise SpectrumError("bath needs at least 2 states")
        if not self.V > 0 or not self.beta > 0:
            raise SpectrumError("V and beta must be > 0")
        levels.flags.writeable = False
        mult.flags.writeable = False
        cum = np.cumsum(mult)
        cum.flags.writeable = False
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "multiplicity", mult)
        object.__setattr__(self, "_cum", cum)

    @property
    def n_states(self) -> int:
        return int(self._cum[-1])

    @property
    def max_energy(self) -> float:
        return float(self.levels[-1])

    @property
    def horizon(self) -> float:
        """Energy up to which counting functions are exact."""
        return math.inf if self.truncation_cutoff is None else float(self.truncation_cutoff)

    @property
    def trusted_top(self) -> float:
        return min(self.max_energy, self.horizon)

    @property
    def energies(self) -> np.ndarray:
        if self.n_states > DEFAULT_STATE_BUDGET * 10:
            raise SpectrumError(f"refusing to expand {self.n_states} states")
        return np.repeat(self.levels, self.multiplicity.astype(np.int64))

    def count_below(self, E) -> np.ndarray:
        """Vectorised I(E): number of states with energy <= E + TOL."""
        idx = np.searchsorted(self.levels, np.asarray(E, dtype=float) + TOL, side="right")
        padded = np.concatenate(([0.0], self._cum))
        return padded[idx]

    def with_beta(self, beta: float) -> "ExplicitBathSpectrum":
        return ExplicitBathSpectrum(self.levels, self.multiplicity, self.V, beta, self.truncation_cutoff)


def explicit_bath(energies: Iterable[float], beta: float, V: float = 1.0,
                  truncation_cutoff: Optional[float] = None) -> ExplicitBathSpectrum:
    """Bath from a list of eigen-energies with repetition (shifted so min = 0)."""
    e = np.sort(np.asarray(list(energies), dtype=float))
    if e.size < 2:
        raise SpectrumError("bath needs at least 2 states")
    e = e - e[0]
    return _from_sorted(e, beta, V, truncation_cutoff)


def _from_sorted(e: np.ndarray, beta, V, cutoff) -> ExplicitBathSpectrum:
    # group energies equal within TOL
    breaks = np.flatnonzero(np.diff(e) > TOL) + 1
    starts = np.concatenate(([0], breaks))
    levels = e[starts]
    mult = np.diff(np.concatenate((starts, [e.size]))).astype(float)
    levels[0] = 0.0
    return ExplicitBathSpectrum(levels, mult, float(V), float(beta), cutoff)


def oscillator_mode(frequency: float, e_cut: float) -> list[float]:
    """Levels ``n * frequency`` of a harmonic mode up to ``e_cut``."""
    if not frequency > 0:
        raise SpectrumError("oscillator frequency must be > 0")
    n = int(math.floor(e_cut / frequency + TOL))
    return [k * frequency for k in range(n + 1)]


def compose_bath(mode_spectra: Sequence[Sequence[float]], E_cut: float, beta: float,
                 V: Optional[float] = None, budget: int = DEFAULT_STATE_BUDGET) -> ExplicitBathSpectrum:
    """Tensor-sum spectrum of independent modes, truncated at ``E_cut``.

    Each mode is shifted so its minimum is 0. Modes with no positive level
    (zero-energy bosonic modes) are dropped. ``V`` defaults to the number of
    retained modes.
    """
    if not E_cut > 0:
        raise SpectrumError("E_cut must be > 0")
    modes = []
    for m in mode_spectra:
        arr = np.sort(np.asarray(m, dtype=float))
        if arr.size == 0:
            raise SpectrumError("empty mode spectrum")
        arr = arr - arr[0]
        if np.all(arr <= TOL):
            continue
        modes.append(arr[arr <= E_cut + TOL])
    if not modes:
        raise SpectrumError("no mode has a positive level")

    current = np.zeros(1)
    for arr in modes:
        current.sort()
        counts = [np.searchsorted(current, E_cut - lvl + TOL, side="right") for lvl in arr]
        total = int(sum(counts))
        if total > budget:
            raise SpectrumError(
                f"composed bath exceeds state budget: at least {total} states below "
                f"E_cut = {E_cut} (budget {budget})")
        current = np.concatenate([current[:c] + lvl for lvl, c in zip(arr, counts)])
    current.sort()
    return _from_sorted(current, beta, len(modes) if V is None else V, float(E_cut))


def bath_from_counting(count: Callable[[np.ndarray], np.ndarray], grid: np.ndarray,
                       beta: float, V: float = 1.0) -> ExplicitBathSpectrum:
    """Bath whose cumulative count equals ``count(E)`` at every grid point.

    ``count`` is rounded to integers; states are placed on the grid. The
    result is marked truncated at the last grid point.
    """
    grid = np.asarray(grid, dtype=float)
    if grid[0] != 0 or np.any(np.diff(grid) <= 0):
        raise SpectrumError("grid must start at 0 and increase")
    cum = np.round(np.asarray(count(grid), dtype=float))
    if cum[0] < 1:
        raise SpectrumError("count(0) must be >= 1")
    mult = np.diff(np.concatenate(([0.0], cum)))
    if np.any(mult < 0):
        raise SpectrumError("count must be non-decreasing")
    keep = mult > 0
    return ExplicitBathSpectrum(grid[keep], mult[keep], float(V), float(beta), float(grid[-1]))


def exponential_count_bath(alpha: float, n_steps: int, beta: float,
                           step: Optional[float] = None, V: float = 1.0) -> ExplicitBathSpectrum:
    """Bath with ``I(E) = round(exp(alpha * E))`` on the grid ``k * step``.

    ``step`` defaults to ``ln 2 / alpha`` so that ``I(k * step) = 2**k``.
    """
    h = math.log(2) / alpha if step is None else step
    grid = h * np.arange(n_steps + 1)
    return bath_from_counting(lambda E: np.exp(alpha * E), grid, beta, V)


@dataclass(frozen=True)
class AnalyticBathModel:
    """Closed-form bath entropy ``S(E) = alpha * V**(1 - nu) * E**nu``."""

    alpha: float
    nu: float
    V: float
    D: int
    beta: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise SpectrumError("alpha must be > 0")
        if not 0.5 <= self.nu < 1:
            raise SpectrumError(f"nu = {self.nu} outside [1/2, 1)")
        if not self.V > 0 or not self.beta > 0:
            raise SpectrumError("V and beta must be > 0")
        if int(self.D) != self.D or self.D < 1:
            raise SpectrumError("D must be a positive integer")

    def entropy(self, E) -> np.ndarray:
        E = np.asarray(E, dtype=float)
        return self.alpha * self.V ** (1 - self.nu) * E ** self.nu

    def with_volume(self, V: float) -> "AnalyticBathModel":
        return replace(self, V=float(V))


def radiation_bath(alpha: float, D: int, V: float, beta: float) -> AnalyticBathModel:
    """Massless bosonic field in ``D`` dimensions: ``nu = D / (D + 1)``."""
    return AnalyticBathModel(alpha=alpha, nu=D / (D + 1), V=V, D=D, beta=beta)


def load_system(doc: dict) -> SystemSpec:
    """System from ``{"levels": [[E, g], ...], "T_S": ...}`` or with ``init_eigs``."""
    if "T_S" in doc:
        return build_thermal_system(doc["levels"], _as_temperature(doc["T_S"]))
    if "init_eigs" in doc:
        return build_system(doc["levels"], doc["init_eigs"], g=doc.get("g"), Delta=doc.get("Delta"))
    if "d" in doc:
        return erasure_system(doc["d"], doc.get("g", 1))
    raise SpectrumError("system document needs 'T_S', 'init_eigs' or 'd'")


def _as_temperature(x) -> float:
    return math.inf if x in ("inf", "Infinity") else float(x)


def mode_levels(mode, e_cut: float) -> list[float]:
    """Levels of one bath mode: a level list, ``{"oscillator": f}`` or ``{"spin": gap}``."""
    if isinstance(mode, dict):
        if "oscillator" in mode:
            return oscillator_mode(mode["oscillator"], e_cut)
        if "spin" in mode:
            return [0.0, float(mode["spin"])]
        raise SpectrumError(f"unknown mode description {mode!r}")
    return [float(x) for x in mode]


def load_bath(doc: dict, beta: float, V: Optional[float] = None):
    """Bath from ``{"modes": [...], "e_cut": x}``, ``{"energies": [...]}`` or ``{"analytic": {...}}``."""
    V = doc.get("V", V)
    if "modes" in doc:
        modes = [mode_levels(m, doc["e_cut"]) for m in doc["modes"]]
        return compose_bath(modes, doc["e_cut"], beta, V)
    if "energies" in doc:
        return explicit_bath(doc["energies"], beta, 1.0 if V is None else V, doc.get("truncation_cutoff"))
    if "exponential" in doc:
        p = doc["exponential"]
        return exponential_count_bath(p["alpha"], p["n_steps"], beta, p.get("step"), 1.0 if V is None else V)
    if "analytic" in doc:
        p = doc["analytic"]
        nu = p.get("nu", p["D"] / (p["D"] + 1))
        return AnalyticBathModel(alpha=p["alpha"], nu=nu, V=p.get("V", V), D=p["D"], beta=beta)
    raise SpectrumError("bath document needs 'modes', 'energies', 'exponential' or 'analytic'")


def load_spectrum_file(path) -> dict:
    return json.loads(Path(path).read_text())
