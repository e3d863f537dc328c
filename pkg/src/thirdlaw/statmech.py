"""Counting functions, microcanonical entropy and free-energy densities of a bath.

Explicit baths are evaluated by direct counting with energy windows of
width ``omega``; analytic baths use the closed forms of the entropy family
``S(E) = alpha * V * (E / V)**nu``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.special import logsumexp

from .spectra import TOL, AnalyticBathModel, ExplicitBathSpectrum

Bath = Union[ExplicitBathSpectrum, AnalyticBathModel]

# |S''| * omega**2 below this counts as zero curvature
CURVATURE_TOL = 1e-9


class UndefinedEntropyError(ValueError):
    """The energy window holds no state, so ``S = ln(Omega)`` is undefined."""


class OutOfRangeError(ValueError):
    """No grid energy solves the requested equation within the trusted spectrum."""


def _require_explicit(bath) -> ExplicitBathSpectrum:
    if not isinstance(bath, ExplicitBathSpectrum):
        raise TypeError("operation needs an explicit bath spectrum")
    return bath


def cumulative_count(bath: ExplicitBathSpectrum, E: float) -> int:
    """``I(E)``: number of bath states with energy at most ``E``."""
    return int(_require_explicit(bath).count_below(E))


def window_count(bath: ExplicitBathSpectrum, E: float, omega: float) -> int:
    """``Omega(E) = I(E) - I(E - omega)``: states in the window ``(E - omega, E]``."""
    if not omega > 0:
        raise ValueError("omega must be > 0")
    b = _require_explicit(bath)
    return int(b.count_below(E) - b.count_below(E - omega))


def _window_counts(bath: ExplicitBathSpectrum, E, omega) -> np.ndarray:
    E = np.asarray(E, dtype=float)
    return bath.count_below(E) - bath.count_below(E - omega)


def min_level_spacing(bath: ExplicitBathSpectrum) -> Optional[float]:
    if bath.levels.size < 2:
        return None
    return float(np.min(np.diff(bath.levels)))


@dataclass(frozen=True)
class StatmechCache:
    """Canonical-ensemble quantities of a bath at one inverse temperature.

    ``omega`` is the default energy-window width. It is ``None`` when the
    canonical heat capacity vanishes and no override was supplied.
    ``omega_clamped`` records that the window was widened to the minimum
    level spacing.
    """

    bath: Bath
    beta: float
    log_Z_B: float
    E_mean: float
    E_var: float
    C_can: float
    f_can: float
    omega: Optional[float]
    omega_clamped: bool = False

    @property
    def Z_B(self) -> float:
        return math.exp(self.log_Z_B)

    @property
    def T(self) -> float:
        return 1.0 / self.beta

    def require_omega(self) -> float:
        if self.omega is None:
            raise ValueError("canonical heat capacity is zero; supply omega explicitly")
        return self.omega


def analytic_f_can(bath: AnalyticBathModel, beta: float) -> float:
    """Saddle-point canonical free-energy density of the analytic family."""
    a, nu = bath.alpha, bath.nu
    p = 1.0 / (1.0 - nu)
    return (a / beta) ** p * (nu ** p - nu ** (nu * p))


def canonical_ensemble(bath: Bath, beta: Optional[float] = None, omega: Optional[float] = None) -> StatmechCache:
    """Partition function, canonical moments, heat capacity and window width.

    For analytic baths the moments come from the saddle point of
    ``S(E) - beta * E`` and the heat capacity equals ``C_mic`` there.
    """
    beta = bath.beta if beta is None else float(beta)
    if not beta > 0:
        raise ValueError("beta must be > 0")
    if isinstance(bath, AnalyticBathModel):
        f_can = analytic_f_can(bath, beta)
        E_star = bath.V * (bath.alpha * bath.nu / beta) ** (1.0 / (1.0 - bath.nu))
        C = micro_heat_capacity(bath, E_star)
        om = math.sqrt(C) / beta if omega is None else float(omega)
        return StatmechCache(bath, beta, -beta * bath.V * f_can, E_star, C / beta**2, C, f_can, om)

    levels, mult = bath.levels, bath.multiplicity
    log_w = np.log(mult) - beta * levels
    log_Z = float(logsumexp(log_w))
    p = np.exp(log_w - log_Z)
    E_mean = float(np.dot(p, levels))
    E_var = float(max(np.dot(p, (levels - E_mean) ** 2), 0.0))
    C = beta**2 * E_var
    f_can = -log_Z / (beta * bath.V)
    clamped = False
    if omega is not None:
        om: Optional[float] = float(omega)
    elif C > 0:
        om = math.sqrt(C) / beta
        spacing = min_level_spacing(bath)
        if spacing is not None and om < spacing:
            om, clamped = spacing, True
    else:
        om = None
    return StatmechCache(bath, beta, log_Z, E_mean, E_var, C, f_can, om, clamped)


def micro_entropy(bath: Bath, E: float, omega: Optional[float] = None) -> float:
    """``S(E) = ln Omega(E)``; closed form for analytic baths."""
    if isinstance(bath, AnalyticBathModel):
        return float(bath.entropy(E))
    n = window_count(bath, E, omega)
    if n < 1:
        raise UndefinedEntropyError(f"no bath state in ({E - omega}, {E}]")
    return math.log(n)


def discrete_derivatives(bath: Bath, E: float, omega: Optional[float] = None) -> tuple[float, float]:
    """First and second discrete derivatives ``(S', S'')`` of the entropy at ``E``.

    ``S'(E) = [S(E) - S(E - w)] / w`` and
    ``S''(E) = [S(E) + S(E - 2w) - 2 S(E - w)] / w**2``.
    """
    if isinstance(bath, AnalyticBathModel):
        a, nu, V = bath.alpha, bath.nu, bath.V
        x = E / V
        return a * nu * x ** (nu - 1), a * nu * (nu - 1) * x ** (nu - 2) / V
    s0 = micro_entropy(bath, E, omega)
    s1 = micro_entropy(bath, E - omega, omega)
    s2 = micro_entropy(bath, E - 2 * omega, omega)
    d1 = (s0 - s1) / omega
    d2 = (s0 + s2 - 2 * s1) / omega**2
    if abs(d2) * omega**2 <= CURVATURE_TOL:
        d2 = 0.0
    return d1, d2


def micro_heat_capacity(bath: Bath, E: float, omega: Optional[float] = None) -> float:
    """``C_mic = -S'**2 / S''``.

    Returns ``math.inf`` when ``S''`` vanishes; a negative value signals a
    bath with super-linear entropy growth.
    """
    if isinstance(bath, AnalyticBathModel):
        nu = bath.nu
        return bath.alpha * nu / (1 - nu) * bath.V * (E / bath.V) ** nu
    d1, d2 = discrete_derivatives(bath, E, omega)
    if d2 == 0.0:
        return math.inf
    return -d1 * d1 / d2


def energy_grid(bath: ExplicitBathSpectrum, omega: float) -> np.ndarray:
    """Window grid ``0, omega, 2 omega, ...`` up to the trusted top of the spectrum."""
    top = bath.trusted_top
    n = int(math.floor(top / omega + TOL))
    return omega * np.arange(n + 1)


def entropy_profile(bath: ExplicitBathSpectrum, omega: float, grid: Optional[np.ndarray] = None):
    """Vectorised ``(grid, S, S')`` on the window grid; undefined points are NaN."""
    if grid is None:
        grid = energy_grid(bath, omega)
    with np.errstate(divide="ignore"):
        S = np.log(_window_counts(bath, grid, omega))
        S_prev = np.log(_window_counts(bath, grid - omega, omega))
    S[~np.isfinite(S)] = np.nan
    S_prev[~np.isfinite(S_prev)] = np.nan
    return grid, S, (S - S_prev) / omega


def solve_inverse_temperature(bath: Bath, beta0: float, omega: Optional[float] = None) -> float:
    """Energy ``E0`` with ``S'(E0) = beta0``.

    Explicit baths: scan the window grid for the first place where ``S'``
    drops from above ``beta0`` to ``beta0`` or below, and return whichever
    of the two bracketing grid energies has ``S'`` closer to ``beta0``.
    """
    if isinstance(bath, AnalyticBathModel):
        return bath.V * (beta0 / (bath.alpha * bath.nu)) ** (1.0 / (bath.nu - 1.0))
    grid, _, dS = entropy_profile(bath, omega)
    idx = np.flatnonzero(np.isfinite(dS))
    vals = dS[idx]
    above = vals > beta0
    if not above.any():
        raise OutOfRangeError(f"S' never exceeds beta0 = {beta0} on the window grid")
    after = np.flatnonzero(~above[int(np.argmax(above)):]) + int(np.argmax(above))
    if after.size == 0:
        raise OutOfRangeError(f"S' never drops to beta0 = {beta0} within the trusted spectrum")
    lo, hi = after[0] - 1, after[0]
    k = lo if abs(vals[lo] - beta0) < abs(vals[hi] - beta0) else hi
    return float(grid[idx[k]])


def micro_free_energy_density(bath: Bath, beta: float, beta0: float,
                              omega: Optional[float] = None) -> tuple[float, float]:
    """``(f_mic, E0)`` with ``f_mic = [E0 - S(E0) / beta] / V`` and ``S'(E0) = beta0``."""
    if not beta > 0 or not beta0 > 0:
        raise ValueError("beta and beta0 must be > 0")
    E0 = solve_inverse_temperature(bath, beta0, omega)
    S0 = micro_entropy(bath, E0, omega)
    return (E0 - S0 / beta) / bath.V, E0
