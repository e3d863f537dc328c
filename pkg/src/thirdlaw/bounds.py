"""Lower bounds on the cooling error and on the final temperature.

The error bounds work on explicit spectra (direct counting) or on the
analytic entropy family; the temperature bounds follow from them for thermal
initial and final states, and the time bounds follow from substituting
resource-versus-time relations into the analytic temperature bound.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .spectra import (
    TOL,
    AnalyticBathModel,
    ExplicitBathSpectrum,
    SpectrumError,
    SystemSpec,
    build_thermal_system,
)
from .statmech import (
    OutOfRangeError,
    StatmechCache,
    UndefinedEntropyError,
    analytic_f_can,
    canonical_ensemble,
    entropy_profile,
    micro_entropy,
    micro_free_energy_density,
    solve_inverse_temperature,
    window_count,
)

Bath = Union[ExplicitBathSpectrum, AnalyticBathModel]

# Result-3 threshold ratio: below it ln(2d / 3g) <= 0 and the smooth bound is void
SMOOTH_MIN_RATIO = 1.5


class BoundInapplicableError(ValueError):
    """The requested bound has no meaning for these inputs."""


@dataclass(frozen=True)
class ResourceBudget:
    """Worst-case work, bath volume and the speeds that tie them to time."""

    w_max: float
    u: float
    v: float
    D: int
    V: float
    t: Optional[float] = None

    def __post_init__(self):
        if self.w_max < 0 or not self.u > 0 or not self.v > 0 or not self.V > 0:
            raise ValueError("need w_max >= 0 and u, v, V > 0")
        if self.t is not None:
            if not self.t > 0:
                raise ValueError("t must be > 0")
            if self.V > (self.v * self.t) ** self.D * (1 + TOL) or self.w_max > self.u * self.t + TOL:
                raise ValueError("budget exceeds what time t allows: need V <= (v t)^D and w_max <= u t")

    @classmethod
    def at_time(cls, t: float, u: float, v: float, D: int) -> "ResourceBudget":
        """Largest volume and work reachable in time ``t``."""
        return cls(w_max=u * t, u=u, v=v, D=D, V=(v * t) ** D, t=t)


@dataclass(frozen=True)
class BoundReport:
    method: str
    xi: float
    w0: float
    E_threshold: float
    epsilon_lb: float
    T_prime_lb: Optional[float]
    premise_ok: bool
    premise_detail: str
    perfect_cooling: bool
    omega: Optional[float] = None
    clamped: bool = False
    T_prime_asymptote: Optional[float] = None
    f_mic: Optional[float] = None
    f_can: Optional[float] = None
    extras: dict = field(default_factory=dict)
    notes: tuple = ()

    def to_dict(self) -> dict:
        out = asdict(self)
        out["notes"] = list(self.notes)
        return out


def _clamp_epsilon(value: float) -> tuple[float, bool]:
    if value < 0:
        return 0.0, True
    if value > 1:
        return 1.0, True
    return float(value), False


def compute_xi(system: SystemSpec, T: float, w_max: float) -> tuple[float, float]:
    """``(xi, w0)`` for a system cooled with bath temperature ``T``.

    ``xi = J + T ln(lambda_max / lambda_min) + w_max`` and
    ``w0 = J + T ln(lambda_max) + w_max``; for thermal systems the log ratio
    is replaced by its exact value ``J / T_S``.
    """
    if system.lambda_min <= 0:
        raise BoundInapplicableError("lambda_min = 0: truncate the system first (truncation_optimize)")
    J = system.J
    if system.is_thermal:
        xi = J + (T / system.T_S) * J + w_max
        w0 = J - T * math.log(system.Z_S) + w_max
    else:
        xi = J + T * math.log(system.lambda_max / system.lambda_min) + w_max
        w0 = J + T * math.log(system.lambda_max) + w_max
    return xi, w0


def threshold_energy_general(bath: ExplicitBathSpectrum, d: int, g: int, xi: float,
                             margin: float = 0.0) -> float:
    """Smallest energy ``E`` with ``d I(E) > g I(E + xi)``, or ``inf``.

    Only energies with ``E + xi + margin`` inside the trusted spectrum are
    examined. The violation set can only start at a bath level, so the scan
    over distinct levels is exact.
    """
    if d <= g:
        return math.inf
    levels = bath.levels
    cand = levels[levels + xi + margin <= bath.horizon + TOL]
    if cand.size == 0:
        return math.inf
    viol = d * bath.count_below(cand) > g * bath.count_below(cand + xi)
    if not viol.any():
        return math.inf
    return float(cand[int(np.argmax(viol))])


def perfect_cooling_check(bath: ExplicitBathSpectrum, d: int, g: int, w_max: float) -> bool:
    """True iff ``I(E + w_max) / I(E) >= d / g`` at every trusted bath level."""
    if d <= g:
        return True
    levels = bath.levels
    cand = levels[levels + w_max <= bath.horizon + TOL]
    return bool(np.all(g * bath.count_below(cand + w_max) >= d * bath.count_below(cand)))


def _trivial_report(method: str, xi: float, w0: float, omega=None) -> BoundReport:
    return BoundReport(method=method, xi=xi, w0=w0, E_threshold=math.inf, epsilon_lb=0.0,
                       T_prime_lb=None, premise_ok=True, premise_detail="d = g: target space is the full space",
                       perfect_cooling=True, omega=omega, notes=("d = g short-circuit",))


def temperature_from_error(system: SystemSpec, epsilon: float) -> Optional[float]:
    """Final-temperature bound ``Delta / ln(d / (g epsilon))`` for a thermal final state.

    ``None`` means no constraint (``epsilon = 0`` or a non-positive log).
    """
    if system.Delta is None:
        raise BoundInapplicableError("system has no gap Delta; temperature is undefined")
    if epsilon <= 0:
        return None
    arg = system.d / (system.g * epsilon)
    if arg <= 1:
        return None
    return system.Delta / math.log(arg)


def _temperature_or_none(system: SystemSpec, epsilon: float) -> Optional[float]:
    return None if system.Delta is None else temperature_from_error(system, epsilon)


def error_bound_general(system: SystemSpec, bath: ExplicitBathSpectrum, w_max: float,
                        omega: Optional[float] = None) -> BoundReport:
    """Counting bound on the error, valid for any explicit bath.

    For every energy ``E`` the ``d I(E)`` joint states below it carry
    probability at least ``lambda_min exp(-beta E) / Z_B`` and can reach at
    most ``g I(E + xi)`` ground slots, so
    ``eps >= lambda_min exp(-beta E) / Z_B * [d I(E) - g I(E + xi)]``.
    The report takes the supremum over bath levels, which is never below the
    single window evaluation at the first violating energy ``E0`` (kept in
    ``extras['epsilon_at_threshold']``) and is non-increasing in ``w_max``.
    """
    cache = canonical_ensemble(bath, omega=omega)
    # the supremum needs no window; omega only enters the threshold diagnostic
    om = cache.omega
    xi, w0 = compute_xi(system, cache.T, w_max)
    d, g = system.d, system.g
    if d <= g:
        return _trivial_report("general", xi, w0, om)
    notes = []
    if cache.omega_clamped:
        notes.append("omega clamped to minimum level spacing")
    E0 = threshold_energy_general(bath, d, g, xi)
    if math.isinf(E0):
        if bath.truncation_cutoff is not None:
            notes.append("no violation below the truncation horizon")
        return BoundReport("general", xi, w0, E0, 0.0, None, True, "no premise required", True,
                           omega=om, f_can=cache.f_can, notes=tuple(notes))
    levels = bath.levels
    cand = levels[levels + xi <= bath.horizon + TOL]
    excess = d * bath.count_below(cand) - g * bath.count_below(cand + xi)
    log_terms = np.full(cand.shape, -np.inf)
    pos = excess > 0
    log_terms[pos] = np.log(excess[pos]) - cache.beta * cand[pos]
    k = int(np.argmax(log_terms))
    raw = system.lambda_min * math.exp(log_terms[k] - cache.log_Z_B)
    eps, clamped = _clamp_epsilon(raw)
    if clamped:
        notes.append(f"epsilon clamped from {raw!r}")
    extras = {"E_argmax": float(cand[k])}
    if om is not None and E0 + xi + om <= bath.horizon + TOL:
        bracket = d * window_count(bath, E0 + om, om) - g * window_count(bath, E0 + xi + om, om)
        extras["epsilon_at_threshold"] = (system.lambda_min * bracket
                                          * math.exp(-cache.beta * (E0 + om) - cache.log_Z_B))
    return BoundReport("general", xi, w0, E0, eps, _temperature_or_none(system, eps), True,
                       "no premise required", False, omega=om, clamped=clamped,
                       f_can=cache.f_can, extras=extras, notes=tuple(notes))


def premise_check(system: SystemSpec, cache: StatmechCache, xi: float) -> tuple[bool, str]:
    """Validity range of the smooth bound.

    Requires ``(T / sqrt 2) sqrt(C_can) > xi`` and ``0 <= C_mic(E) < inf`` on
    every grid energy where ``C_mic`` is defined.
    """
    T = cache.T
    root_c = math.sqrt(max(cache.C_can, 0.0))
    strict = T / math.sqrt(2) * root_c > xi
    loose = root_c > 1.3 * cache.beta * xi
    parts = [f"heat-capacity clause {'ok' if strict else 'FAILED'}: (T/sqrt2) sqrt(C_can) = "
             f"{T / math.sqrt(2) * root_c:.6g} vs xi = {xi:.6g} (1.3-form {'ok' if loose else 'fails'})"]
    mic_ok = True
    bath = cache.bath
    if isinstance(bath, ExplicitBathSpectrum):
        om = cache.require_omega()
        grid, S, dS = entropy_profile(bath, om)
        _, S2, _ = entropy_profile(bath, om, grid - 2 * om)
        S1 = S - dS * om
        d2 = (S + S2 - 2 * S1) / om**2
        defined = np.isfinite(d2)
        d2 = np.where(np.abs(d2) * om**2 <= 1e-9, 0.0, d2)
        n_def = int(defined.sum())
        if n_def == 0:
            mic_ok = False
            parts.append("C_mic undefined at every grid energy")
        else:
            bad_inf = int(np.sum(defined & (d2 == 0.0)))
            bad_neg = int(np.sum(defined & (d2 > 0)))
            mic_ok = bad_inf == 0 and bad_neg == 0
            parts.append(f"C_mic clause {'ok' if mic_ok else 'FAILED'}: {bad_neg} negative, "
                         f"{bad_inf} infinite of {n_def} defined grid points")
    else:
        parts.append("C_mic clause ok: analytic family has 0 < C_mic < inf")
    ok = strict and mic_ok
    return ok, "; ".join(parts)


def _log_ratio(system: SystemSpec) -> float:
    ratio = system.d / system.g
    if ratio <= SMOOTH_MIN_RATIO:
        raise BoundInapplicableError("d/g <= 3/2: ln(2d/3g) <= 0")
    return math.log(2 * system.d / (3 * system.g))


def error_bound_smooth(system: SystemSpec, bath: Bath, w_max: float,
                       omega: Optional[float] = None) -> BoundReport:
    """Error bound from the threshold ``S'(E1) xi = ln(2d / 3g)``.

    Falls back to :func:`error_bound_general` on explicit baths when
    ``d/g <= 3/2`` or ``S'`` has no crossing.
    """
    cache = canonical_ensemble(bath, omega=omega)
    om = cache.require_omega()
    xi, w0 = compute_xi(system, cache.T, w_max)
    if system.d <= system.g:
        return _trivial_report("smooth", xi, w0, om)

    def fallback(reason: str) -> BoundReport:
        if not isinstance(bath, ExplicitBathSpectrum):
            raise BoundInapplicableError(reason)
        rep = error_bound_general(system, bath, w_max, omega)
        return replace(rep, notes=rep.notes + (f"smooth bound inapplicable ({reason}); general bound used",))

    try:
        L = _log_ratio(system)
    except BoundInapplicableError as exc:
        return fallback(str(exc))
    ok, detail = premise_check(system, cache, xi)
    try:
        E1 = solve_inverse_temperature(bath, L / xi, om)
        S_top = micro_entropy(bath, E1 + om, om)
        S1 = micro_entropy(bath, E1, om)
    except (OutOfRangeError, UndefinedEntropyError) as exc:
        return fallback(str(exc))
    if isinstance(bath, ExplicitBathSpectrum) and E1 + om > bath.trusted_top + TOL:
        return fallback("threshold window beyond trusted spectrum")
    raw = math.exp(-cache.beta * (E1 + om) + S_top - cache.log_Z_B) * system.lambda_min * system.d / 3
    eps, clamped = _clamp_epsilon(raw)
    f_mic = (E1 - S1 / cache.beta) / bath.V
    notes = ("omega clamped to minimum level spacing",) if cache.omega_clamped else ()
    if not ok:
        notes += ("premise violated: value is the formula, not a proven bound",)
    return BoundReport("smooth", xi, w0, E1, eps, _temperature_or_none(system, eps), ok, detail, False,
                       omega=om, clamped=clamped, f_mic=f_mic, f_can=cache.f_can, notes=notes)


def _require_thermal(system: SystemSpec):
    if not system.is_thermal:
        raise BoundInapplicableError("system must start in a thermal state")
    if system.Delta is None:
        raise BoundInapplicableError("system has no gap")


def _positive_temperature(T_delta: float, denom: float) -> Optional[float]:
    return T_delta / denom if denom > 0 else None


def thermal_cooling_bound(system: SystemSpec, bath: Bath, w_max: float,
                          omega: Optional[float] = None) -> BoundReport:
    """Final-temperature bound from free-energy densities of the bath.

    The denominator is ``V [f_mic(beta0) - f_can(beta)] + (T/T_S) J + T ln(3d/g)``
    with ``beta0 = ln(2d/3g) / xi``. Explicit baths also add the window width
    ``max(T sqrt(C_can), omega)``,
    which keeps the value below the bound obtained by passing the smooth error
    bound through :func:`temperature_from_error`; the version without it is
    reported as the asymptote. Analytic baths use the full closed-form
    ``f_mic`` and report the large-``xi`` form as the asymptote.
    """
    _require_thermal(system)
    cache = canonical_ensemble(bath, omega=omega)
    T, beta = cache.T, cache.beta
    xi, w0 = compute_xi(system, T, w_max)
    if system.d <= system.g:
        return _trivial_report("thermal", xi, w0, cache.omega)
    L = _log_ratio(system)
    beta0 = L / xi
    ok, detail = premise_check(system, cache, xi)
    tail = (T / system.T_S) * system.J + T * math.log(3 * system.d / system.g)
    T_delta = T * system.Delta
    if isinstance(bath, AnalyticBathModel):
        f_mic, E1 = micro_free_energy_density(bath, beta, beta0)
        f_can = analytic_f_can(bath, beta)
        lead = bath.V * (f_mic - f_can)
        p = 1.0 / (1.0 - bath.nu)
        asym_lead = bath.V * (bath.alpha * bath.nu * xi / L) ** p
        denom = lead + tail
        asymptote = _positive_temperature(T_delta, asym_lead + tail)
        log_eps = -beta * lead
    else:
        om = cache.require_omega()
        f_mic, E1 = micro_free_energy_density(bath, beta, beta0, om)
        f_can = cache.f_can
        lead = bath.V * (f_mic - f_can)
        # window term: T sqrt(C_can) unless omega was widened past it
        window = max(T * math.sqrt(cache.C_can), om)
        denom = lead + window + tail
        asymptote = _positive_temperature(T_delta, lead + tail)
        log_eps = -beta * (lead + window)
    eps, clamped = _clamp_epsilon(math.exp(min(log_eps, 0.0)) * system.lambda_min * system.d / 3)
    T_prime = _positive_temperature(T_delta, denom)
    notes = () if T_prime is not None else ("denominator non-positive: no temperature constraint",)
    return BoundReport("thermal", xi, w0, E1, eps, T_prime, ok, detail, False, omega=cache.omega,
                       clamped=clamped, T_prime_asymptote=asymptote, f_mic=f_mic, f_can=f_can,
                       extras={"f_mic_minus_f_can": f_mic - f_can}, notes=notes)


def radiation_bound(system: SystemSpec, bath: AnalyticBathModel, w_max: float) -> BoundReport:
    """Final-temperature bound for the analytic entropy family.

    ``T_prime_lb`` uses ``V [alpha xi / ln(2d/3g)]**(1/(1-nu))`` (the form
    relaxed with ``nu <= 1``); ``extras['T_prime_unrelaxed']`` keeps the
    factor ``nu`` inside the bracket.
    """
    if not isinstance(bath, AnalyticBathModel):
        raise TypeError("radiation_bound needs an AnalyticBathModel")
    _require_thermal(system)
    T = 1.0 / bath.beta
    xi, w0 = compute_xi(system, T, w_max)
    if system.d <= system.g:
        return _trivial_report("radiation", xi, w0)
    L = _log_ratio(system)
    p = 1.0 / (1.0 - bath.nu)
    tail = (T / system.T_S) * system.J + T * math.log(3 * system.d / system.g)
    T_delta = T * system.Delta
    relaxed = T_delta / (bath.V * (bath.alpha * xi / L) ** p + tail)
    unrelaxed = T_delta / (bath.V * (bath.alpha * bath.nu * xi / L) ** p + tail)
    cache = canonical_ensemble(bath)
    ok, detail = premise_check(system, cache, xi)
    f_mic, E1 = micro_free_energy_density(bath, bath.beta, L / xi)
    log_eps = -bath.beta * bath.V * (f_mic - cache.f_can)
    eps, clamped = _clamp_epsilon(math.exp(min(log_eps, 0.0)) * system.lambda_min * system.d / 3)
    return BoundReport("radiation", xi, w0, E1, eps, relaxed, ok, detail, False, omega=cache.omega,
                       clamped=clamped, f_mic=f_mic, f_can=cache.f_can,
                       extras={"T_prime_unrelaxed": unrelaxed, "bath_exponent": p})


def time_scaling_exponent(D: int) -> int:
    """Exponent of ``t`` in the large-time temperature bound: ``2D + 1``."""
    return 2 * D + 1


def time_bound(system: SystemSpec, bath: AnalyticBathModel, budget: ResourceBudget) -> tuple[BoundReport, int]:
    """Temperature bound after time ``t`` with ``V = (v t)^D`` and ``w_max = u t``.

    Returns the report (exact expression in ``T_prime_lb``, large-``t``
    asymptote in ``T_prime_asymptote``) and the exponent ``2D + 1``.
    """
    if budget.t is None:
        raise ValueError("budget.t must be set")
    D = budget.D
    if bath.D != D or abs(bath.nu - D / (D + 1)) > 1e-12:
        raise BoundInapplicableError("time bound needs a radiation bath with nu = D/(D+1) matching budget.D")
    t = budget.t
    rep = radiation_bound(system, bath.with_volume((budget.v * t) ** D), budget.u * t)
    L = _log_ratio(system)
    T = 1.0 / bath.beta
    n = time_scaling_exponent(D)
    asymptote = T * system.Delta / budget.v**D * (L / (bath.alpha * budget.u)) ** (D + 1) * t ** (-n)
    rep = replace(rep, method="time", T_prime_asymptote=asymptote,
                  extras={**rep.extras, "exponent": n, "t": t})
    return rep, n


def characteristic_time_exponent(D: int) -> Fraction:
    """Exponent of the system size in the time needed to reach a fixed temperature."""
    return Fraction(D + 1, 2 * D + 1)


def characteristic_time(system: SystemSpec, bath: AnalyticBathModel, u: float, v: float,
                        T_target: float) -> float:
    """Time at which the large-``t`` temperature bound reaches ``T_target``."""
    D = bath.D
    L = _log_ratio(system)
    T = 1.0 / bath.beta
    const = T * system.Delta / v**D * (L / (bath.alpha * u)) ** (D + 1)
    return (const / T_target) ** (1.0 / time_scaling_exponent(D))


@dataclass(frozen=True)
class TruncationResult:
    best_dim: int
    best: BoundReport
    sweep: tuple


def truncation_optimize(level_energy: Callable[[int], float], T_S: float, bath: Bath, w_max: float,
                        dims: Iterable[int], method: str = "smooth",
                        omega: Optional[float] = None) -> TruncationResult:
    """Best error bound over truncations of a (possibly infinite) thermal system.

    ``level_energy(k)`` gives the energy of level ``k = 0, 1, ...``. Each
    truncation keeps the lowest ``d'`` levels; its bound applies to the kept
    part only, so it is weighted by that part's probability.
    """
    dims = sorted(set(int(k) for k in dims))
    if not dims:
        raise ValueError("empty truncation range")
    if dims[0] < 1:
        raise ValueError("truncation dimension must be >= 1")
    Z_full = _full_partition_function(level_energy, T_S)
    bound_fn = {"smooth": error_bound_smooth, "general": error_bound_general}[method]
    sweep = []
    best: Optional[tuple[int, BoundReport]] = None
    for k in dims:
        if k == 1:
            rep = BoundReport(method, w_max, w_max, math.inf, 0.0, None, True,
                              "single level: nothing outside the ground space", True)
        else:
            levels = [level_energy(s) for s in range(k)]
            sub = build_thermal_system(levels, T_S)
            kept = sub.Z_S / Z_full
            rep = bound_fn(sub, bath, w_max, omega)
            rep = replace(rep, epsilon_lb=rep.epsilon_lb * kept, T_prime_lb=None,
                          extras={**rep.extras, "kept_mass": kept, "truncated_dim": k},
                          notes=rep.notes + ("error weighted by the kept probability",))
        sweep.append((k, rep.epsilon_lb))
        if best is None or rep.epsilon_lb > best[1].epsilon_lb:
            best = (k, rep)
    return TruncationResult(best[0], best[1], tuple(sweep))


def _full_partition_function(level_energy, T_S: float, max_levels: int = 10**6) -> float:
    z, k = 0.0, 0
    while k < max_levels:
        w = math.exp(-level_energy(k) / T_S)
        z += w
        if w < 1e-18 * z:
            break
        k += 1
    return z


def remap_changed_hamiltonian(system: SystemSpec, final_g: int, final_Delta: float) -> SystemSpec:
    """System view whose target rank and gap come from a different final Hamiltonian."""
    if final_g < 1 or not final_Delta > 0:
        raise ValueError("need final_g >= 1 and final_Delta > 0")
    return replace(system, g=int(final_g), Delta=float(final_Delta))


def discard_subsystem_ratio(d1: int, g1: int, d2: int) -> tuple[int, int]:
    """Dimensions ``(d, g)`` when a ``d2``-dimensional part is discarded at the end."""
    if min(d1, g1, d2) < 1:
        raise ValueError("dimensions must be positive")
    d, g = d1 * d2, g1 * d2
    assert d * g1 == d1 * g
    return d, g


def discard_subsystem(system: SystemSpec, d2: int) -> SystemSpec:
    """Composite of ``system`` with a maximally mixed, zero-energy ``d2``-level part that is discarded."""
    d, g = discard_subsystem_ratio(system.d, system.g, d2)
    levels = tuple((e, deg * d2) for e, deg in system.levels)
    eigs = tuple(lam / d2 for lam in system.init_eigs for _ in range(d2))
    Z_S = None if system.Z_S is None else system.Z_S * d2
    return SystemSpec(levels=levels, init_eigs=eigs, g=g, Delta=system.Delta, T_S=system.T_S, Z_S=Z_S)


@dataclass(frozen=True)
class ProtocolPoint:
    t: float
    T_prime: float
    W: float
    p_ground: float


def isothermal_shift_protocol(Delta: float, T: float, u: float, times: Sequence[float]) -> list[ProtocolPoint]:
    """Raise the excited level by ``w_max = u t`` isothermally, decouple, lower it back.

    Final temperature ``T Delta / (Delta + u t)``; mean work
    ``T ln(1 + exp(-Delta / T))`` independent of ``t``.
    """
    if not Delta > 0 or not T > 0:
        raise ValueError("Delta and T must be > 0")
    W = T * math.log1p(math.exp(-Delta / T))
    out = []
    for t in times:
        w_max = u * t
        out.append(ProtocolPoint(float(t), T * Delta / (Delta + w_max), W,
                                 1.0 / (1.0 + math.exp(-(Delta + w_max) / T))))
    return out
