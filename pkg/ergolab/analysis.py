"""Rabi-angle sweeps, efficiency curves and their kappa-free optima.

The optimum searches work on the log-odds of an efficiency,
ln(eta / (1 - eta)) = ln(delta_e) - ln(kappa * angle). It is a monotone
transform of eta, and kappa only shifts it by a constant, so the located
angles do not move when kappa changes by orders of magnitude.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import optimize

from .config import QubitParams, preset
from .dynamics import NoiseModel, evolve_free
from .errors import DomainError, NoInteriorMax, NoRoot
from .ergotropy import coherent_ergotropy, ergotropy, partial_dephase, pure_state_coherence
from .protocols import Settings, run_sequential
from .state import pure_state

logger = logging.getLogger(__name__)

HALF_PI = math.pi / 2.0
DEFAULT_GRID = 181
OPTIMUM_XTOL = 1e-12

Grid = Union[int, Sequence[float]]

CSV_COLUMNS = (
    "theta_rad",
    "energy",
    "coherence_nats",
    "e_inc",
    "e_coh",
    "eta_prep",
    "eta_vpi",
    "eta_uc",
    "eta_total",
)


@dataclass
class SweepRow:
    theta: float
    energy: float
    coherence: float
    e_inc: float
    e_coh: float
    eta_prep: Optional[float]
    eta_vpi: Optional[float]
    eta_uc: Optional[float]
    eta_total: Optional[float]
    c_change_vpi: float = 0.0
    c_drop_uc: float = 0.0
    std_error: Dict[str, float] = field(default_factory=dict)

    def csv_values(self) -> Tuple[Optional[float], ...]:
        return (
            self.theta,
            self.energy,
            self.coherence,
            self.e_inc,
            self.e_coh,
            self.eta_prep,
            self.eta_vpi,
            self.eta_uc,
            self.eta_total,
        )

    def to_dict(self) -> dict:
        out = dict(zip(CSV_COLUMNS, self.csv_values()))
        out.update(c_change_vpi=self.c_change_vpi, c_drop_uc=self.c_drop_uc, std_error=dict(self.std_error))
        return out


@dataclass(frozen=True)
class Optimum:
    theta: float
    coherence: float

    @property
    def theta_over_pi(self) -> float:
        return self.theta / math.pi


@dataclass(frozen=True)
class StorageRow:
    hold_time: float
    incoherent: float
    coherent: float
    incoherent_energy: float
    coherent_energy: float

    @property
    def preferred(self) -> str:
        return "coherent" if self.coherent > self.incoherent else "incoherent"

    def to_dict(self) -> dict:
        out = asdict(self)
        out["preferred"] = self.preferred
        return out


def theta_grid(grid: Grid, lo: float = 0.0, hi: float = math.pi, min_points: int = 2) -> np.ndarray:
    if isinstance(grid, (int, np.integer)):
        if grid < max(min_points, 2):
            raise DomainError(f"grid needs at least 2 points, got {grid}")
        return np.linspace(lo, hi, int(grid))
    values = np.atleast_1d(np.asarray(grid, dtype=float))
    if values.size < min_points:
        raise DomainError(f"grid needs at least {min_points} points, got {values.size}")
    if values.min() < lo - 1e-12 or values.max() > hi + 1e-12:
        raise DomainError(f"grid values must lie in [{lo:.6g}, {hi:.6g}]")
    return np.clip(values, lo, hi)


def _check_kappa(kappa: float) -> None:
    if not kappa > 0:
        raise DomainError(f"kappa must be > 0, got {kappa}")


def _eta(delta_e: float, cost: float) -> Optional[float]:
    total = delta_e + cost
    return delta_e / total if total > 0 else None


def eta_prep(theta: float, kappa: float) -> Optional[float]:
    return _eta(math.sin(theta / 2.0) ** 2, kappa * theta)


def eta_vpi(theta: float, kappa: float) -> Optional[float]:
    return _eta(max(0.0, -math.cos(theta)), kappa * math.pi)


def eta_uc(theta: float, kappa: float) -> Optional[float]:
    return _eta(math.cos(theta / 2.0) ** 2, kappa * (math.pi - theta))


def eta_total(theta: float, kappa: float) -> Optional[float]:
    return _eta(math.sin(theta / 2.0) ** 2, kappa * (2.0 * math.pi - theta))


def _sweep_point(task: Tuple[int, float, str, QubitParams, Settings]) -> SweepRow:
    index, theta, mode, params, settings = task
    trace = run_sequential(theta, params, mode, replace(settings, stream=(*settings.stream, index)))
    prepared = trace.step("prepare")
    c_before_uc = prepared.coherence
    c_change = 0.0
    if "V_pi" in trace.works:
        c_after_vpi = trace.step("V_pi").coherence
        c_change = c_after_vpi - prepared.coherence
        c_before_uc = c_after_vpi
    eff = trace.efficiencies
    row = SweepRow(
        theta=theta,
        energy=prepared.energy,
        coherence=prepared.coherence,
        e_inc=trace.incoherent_work,
        e_coh=trace.coherent_work,
        eta_prep=eff.get("prepare"),
        eta_vpi=eff.get("V_pi"),
        eta_uc=eff.get("U_c"),
        eta_total=eff.get("total"),
        c_change_vpi=c_change,
        c_drop_uc=c_before_uc - trace.step("U_c").coherence,
    )
    if trace.std_error:
        row.std_error = {
            "energy": prepared.std_error["energy"],
            "coherence": prepared.std_error["coherence"],
            "e_inc": trace.std_error.get("work_V_pi_err", 0.0),
            "e_coh": trace.std_error["work_U_c_err"],
        }
    return row


def sweep_theta(
    grid: Grid = DEFAULT_GRID,
    mode: str = "ideal",
    params: Optional[QubitParams] = None,
    kappa: Optional[float] = None,
    settings: Optional[Settings] = None,
    jobs: int = 1,
) -> List[SweepRow]:
    """Sequential extraction across Rabi angles in [0, pi].

    Each row holds the prepared state's energy and coherence with the work
    V_pi and U_c take out of it. Rows come back in grid order for any `jobs`.
    """
    thetas = theta_grid(grid)
    params = params or preset("working-point")
    settings = settings or Settings()
    if kappa is not None:
        _check_kappa(kappa)
        settings = replace(settings, kappa=kappa)
    tasks = [(i, float(t), mode, params, settings) for i, t in enumerate(thetas)]
    logger.info("sweep over %d angles (%s mode, %d job(s))", len(tasks), mode, jobs)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_point, tasks))
    return [_sweep_point(t) for t in tasks]


def efficiency_sweep(grid: Grid = DEFAULT_GRID, kappa: float = 1.0) -> List[SweepRow]:
    """Closed-form efficiencies of the prepared pure states for theta in [pi/2, pi]."""
    _check_kappa(kappa)
    rows = []
    for theta in theta_grid(grid, HALF_PI, math.pi, min_points=1):
        theta = float(theta)
        c = pure_state_coherence(theta)
        rows.append(
            SweepRow(
                theta=theta,
                energy=math.sin(theta / 2.0) ** 2,
                coherence=c,
                e_inc=max(0.0, -math.cos(theta)),
                e_coh=math.cos(theta / 2.0) ** 2,
                eta_prep=eta_prep(theta, kappa),
                eta_vpi=eta_vpi(theta, kappa),
                eta_uc=eta_uc(theta, kappa),
                eta_total=eta_total(theta, kappa),
                c_drop_uc=c,
            )
        )
    return rows


def find_theta_m(kappa: float) -> Optimum:
    """Interior maximum of the preparation efficiency on [pi/2, pi] by golden section."""
    _check_kappa(kappa)

    def neg_log_odds(theta: float) -> float:
        return -(math.log(math.sin(theta / 2.0) ** 2) - math.log(kappa * theta))

    result = optimize.minimize_scalar(
        neg_log_odds,
        bracket=(HALF_PI, 0.75 * math.pi, math.pi),
        method="golden",
        options={"xtol": 1e-10},
    )
    theta = float(result.x)
    if not HALF_PI + 1e-6 < theta < math.pi - 1e-6:
        raise NoInteriorMax(f"preparation efficiency peaks at the interval edge theta={theta}")
    logger.debug("theta_m=%.9f after %d evaluations", theta, result.nfev)
    return Optimum(theta, pure_state_coherence(theta))


def find_theta_e(kappa: float) -> Optimum:
    """Angle on (pi/2, pi) where U_c and V_pi extract equally efficiently."""
    _check_kappa(kappa)

    def gap(theta: float) -> float:
        coh = math.log(math.cos(theta / 2.0) ** 2) - math.log(kappa * (math.pi - theta))
        inc = math.log(-math.cos(theta)) - math.log(kappa * math.pi)
        return coh - inc

    lo, hi = HALF_PI + 1e-9, math.pi - 1e-9
    if gap(lo) * gap(hi) > 0:
        raise NoRoot("efficiency difference keeps one sign on (pi/2, pi)")
    theta = float(optimize.bisect(gap, lo, hi, xtol=OPTIMUM_XTOL))
    logger.debug("theta_e=%.9f", theta)
    return Optimum(theta, pure_state_coherence(theta))


def stationary_theta_m() -> float:
    """Root of tan(theta/2) = theta, where d(eta_prep)/d(theta) vanishes for any kappa."""
    return float(optimize.brentq(lambda t: math.tan(t / 2.0) - t, HALF_PI, math.pi - 1e-6, xtol=OPTIMUM_XTOL))


def balanced_theta_e() -> float:
    """Root of (-cos theta)(pi - theta) = pi cos^2(theta/2) inside (pi/2, pi)."""

    def condition(t: float) -> float:
        return -math.cos(t) * (math.pi - t) - math.pi * math.cos(t / 2.0) ** 2

    return float(optimize.brentq(condition, HALF_PI, math.pi - 1e-6, xtol=OPTIMUM_XTOL))


def surface_grid(n_theta: int = 41, n_coherence: int = 41) -> Tuple[np.ndarray, np.ndarray]:
    """Angles strictly inside (pi/2, pi) and coherences up to the largest reachable."""
    if n_theta < 1 or n_coherence < 2:
        raise DomainError("surface grid needs n_theta >= 1 and n_coherence >= 2")
    thetas = np.linspace(HALF_PI, math.pi, n_theta + 2)[1:-1]
    c_top = max(pure_state_coherence(float(t)) for t in thetas)
    return thetas, np.linspace(0.0, c_top, n_coherence)


def surface_ec(
    thetas: Sequence[float],
    coherences: Sequence[float],
    fill: Optional[float] = None,
) -> np.ndarray:
    """Coherent ergotropy of partially dephased states on a (theta, C) grid.

    Row i is thetas[i]. Points above the coherence reachable at that angle
    raise DomainError, or take `fill` when one is given.
    """
    out = np.empty((len(thetas), len(coherences)))
    for i, theta in enumerate(thetas):
        theta = float(theta)
        if not HALF_PI < theta < math.pi:
            raise DomainError(f"surface angles must lie in (pi/2, pi), got {theta}")
        c_max = pure_state_coherence(theta)
        for j, c in enumerate(coherences):
            c = float(c)
            if c > c_max + 1e-12:
                if fill is None:
                    raise DomainError(f"coherence {c} unreachable at theta={theta} (max {c_max})")
                out[i, j] = fill
                continue
            out[i, j] = coherent_ergotropy(partial_dephase(theta, min(c, c_max)))
    return out


def storage_comparison(
    params: QubitParams,
    hold_times: Sequence[float],
    dt: Optional[float] = None,
) -> List[StorageRow]:
    """Ergotropy left after holding a fully incoherent (theta = pi) or fully coherent (theta = pi/2) charge.

    Dephasing-limited devices keep more at theta = pi; once T2 approaches
    2*T1 the coherent charge outlasts the population-inverted one.
    """
    noise = NoiseModel.from_params(params)
    incoherent0 = pure_state(math.pi)
    coherent0 = pure_state(HALF_PI)
    rows = []
    for t in hold_times:
        inc = evolve_free(incoherent0, noise, float(t), dt).final
        coh = evolve_free(coherent0, noise, float(t), dt).final
        rows.append(StorageRow(float(t), ergotropy(inc), ergotropy(coh), inc.p1, coh.p1))
        logger.debug("storage t=%.3g: incoherent %.5f coherent %.5f", t, rows[-1].incoherent, rows[-1].coherent)
    return rows
