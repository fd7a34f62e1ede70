"""Work-extraction protocols: dephasing, direct and sequential.

Every protocol starts by preparing R_Y(theta_s)|0>. Extracted work is always
read from state energies before and after a step, never from gate
bookkeeping, so noisy runs show their losses directly.

Modes:
    ideal    exact unitaries; a hold is an instantaneous full dephasing
    noisy    every gate and hold integrated through the Lindblad model; gates
             are driven on the gate device (sweet spot unless set) and holds
             sit on the run's own device
    sampled  noisy (or, with noise=False, ideal) dynamics read out by
             repeated tomography; works carry standard errors
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .config import DEFAULT_TAU, PRESETS, QubitParams
from .control import Gate, apply_ideal, default_kappa, gate_cost, make_uc, rotation_y, safe_efficiency, v_pi
from .dynamics import NoiseModel, apply_noisy, evolve_free
from .errors import DomainError
from .ergotropy import coherence, dephase
from .measurement import (
    DEFAULT_REPETITIONS,
    DEFAULT_SHOTS,
    TomographyResult,
    repeat_stats,
    tomography,
)
from .state import GROUND, DensityMatrix, from_bloch, pure_state

logger = logging.getLogger(__name__)

MODES = ("ideal", "noisy", "sampled")
PROTOCOLS = ("dephasing", "direct", "sequential")


@dataclass(frozen=True)
class Settings:
    kappa: Optional[float] = None
    tau: float = DEFAULT_TAU
    dt: Optional[float] = None
    envelope: str = "flat"
    shots: int = DEFAULT_SHOTS
    repetitions: int = DEFAULT_REPETITIONS
    seed: int = 0
    noise: bool = True
    gate_params: Optional[QubitParams] = None
    stream: Tuple[int, ...] = ()


@dataclass
class ProtocolStep:
    label: str
    state: DensityMatrix
    energy: float
    coherence: float
    delta_energy: float
    work: Optional[float] = None
    loss: float = 0.0
    cost: Optional[float] = None
    efficiency: Optional[float] = None
    tomography: Optional[TomographyResult] = None
    std_error: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "label": self.label,
            "state": self.state.to_dict(),
            "energy": self.energy,
            "coherence": self.coherence,
            "delta_energy": self.delta_energy,
            "work": self.work,
            "loss": self.loss,
            "cost": self.cost,
            "efficiency": self.efficiency,
            "std_error": dict(self.std_error),
        }
        if self.tomography is not None:
            out["tomography"] = {
                "shots_per_basis": self.tomography.shots_per_basis,
                "repetitions": self.tomography.repetitions,
                "seed": list(self.tomography.seed),
                "bloch_samples": [[b.x, b.y, b.z] for b in self.tomography.bloch_samples],
            }
        return out


@dataclass
class ProtocolTrace:
    protocol: str
    steps: List[ProtocolStep]
    works: Dict[str, float]
    costs: Dict[str, float]
    efficiencies: Dict[str, Optional[float]]
    params: Dict[str, Any]
    std_error: Dict[str, float] = field(default_factory=dict)

    def step(self, label: str) -> ProtocolStep:
        for s in self.steps:
            if s.label == label:
                return s
        raise KeyError(f"protocol {self.protocol} has no step {label!r}")

    @property
    def extracted_work(self) -> float:
        return sum(self.works.values())

    @property
    def incoherent_work(self) -> float:
        return self.works.get("V_pi", 0.0)

    @property
    def coherent_work(self) -> float:
        return self.works.get("U_c", 0.0)

    def summary(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"protocol": self.protocol, "total_work": self.extracted_work}
        out.update({f"work_{k}": v for k, v in self.works.items()})
        out["efficiency_total"] = self.efficiencies.get("total")
        out.update({k: v for k, v in self.std_error.items()})
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            "protocol": self.protocol,
            "params": self.params,
            "steps": [s.to_dict() for s in self.steps],
            "works": self.works,
            "costs": self.costs,
            "efficiencies": self.efficiencies,
            "std_error": self.std_error,
        }


class _Runner:
    """Carries the true state through a protocol and records readouts."""

    def __init__(self, protocol: str, params: QubitParams, mode: str, settings: Optional[Settings]) -> None:
        if mode not in MODES:
            raise DomainError(f"unknown mode {mode!r}; use one of {MODES}")
        self.protocol = protocol
        self.params = params
        self.mode = mode
        self.settings = settings or Settings()
        self.kappa = self.settings.kappa if self.settings.kappa is not None else default_kappa(params, self.settings.tau)
        if not self.kappa > 0:
            raise DomainError(f"kappa must be > 0, got {self.kappa}")
        noisy = mode == "noisy" or (mode == "sampled" and self.settings.noise)
        self.gate_params = self.settings.gate_params or PRESETS["sweet-spot"]
        self.noise = NoiseModel.from_params(params) if noisy else None
        self.gate_noise = NoiseModel.from_params(self.gate_params) if noisy else None
        self.state = GROUND
        self.steps: List[ProtocolStep] = []
        self.costs: Dict[str, float] = {}
        self.efficiencies: Dict[str, Optional[float]] = {}
        self._rep_energies = np.zeros(self.settings.repetitions)
        self._rep_works: Dict[str, np.ndarray] = {}

    def _gate_kwargs(self) -> Dict[str, Any]:
        return {"tau": self.settings.tau, "envelope": self.settings.envelope}

    def _evolve_gate(self, gate: Gate) -> None:
        if self.gate_noise is None:
            self.state = apply_ideal(gate, self.state)
        else:
            self.state = apply_noisy(gate, self.state, self.gate_noise, self.settings.dt).final

    def _readout(self, label: str) -> Tuple[ProtocolStep, Optional[np.ndarray]]:
        previous = self.steps[-1].energy if self.steps else 0.0
        if self.mode != "sampled":
            e = self.state.p1
            return ProtocolStep(label, self.state, e, coherence(self.state), e - previous), None
        s = self.settings
        tomo = tomography(self.state, s.shots, s.repetitions, s.seed, stream=(*s.stream, len(self.steps)))
        rep_energies = np.array([from_bloch(b).p1 for b in tomo.bloch_samples])
        delta = rep_energies - self._rep_energies
        self._rep_energies = rep_energies
        step = ProtocolStep(
            label,
            tomo.estimate,
            tomo.means["energy"],
            tomo.means["coherence"],
            float(delta.mean()),
            tomography=tomo,
            std_error={"energy": tomo.std_error["energy"], "coherence": tomo.std_error["coherence"]},
        )
        return step, delta

    def prepare(self, theta: float) -> None:
        gate = rotation_y(theta, label="prepare", **self._gate_kwargs())
        self._evolve_gate(gate)
        step, _ = self._readout("prepare")
        step.cost = gate_cost(gate, self.kappa)
        step.efficiency = safe_efficiency(step.delta_energy, step.cost)
        self.costs["prepare"] = step.cost
        self.efficiencies["prepare"] = step.efficiency
        self.steps.append(step)

    def hold(self, duration: float) -> None:
        if self.noise is None:
            if duration > 0:
                self.state = dephase(self.state)
        else:
            self.state = evolve_free(self.state, self.noise, duration, self.settings.dt).final
        step, _ = self._readout("hold")
        step.loss = -step.delta_energy
        self.steps.append(step)

    def extract(self, gate: Gate) -> None:
        self._evolve_gate(gate)
        step, rep_delta = self._readout(gate.label)
        step.work = -step.delta_energy
        step.cost = gate_cost(gate, self.kappa)
        step.efficiency = safe_efficiency(step.work, step.cost)
        if rep_delta is not None:
            self._rep_works[gate.label] = -rep_delta
        self.costs[gate.label] = step.cost
        self.efficiencies[gate.label] = step.efficiency
        self.steps.append(step)
        logger.debug("%s %s: work=%.6f cost=%.3e", self.protocol, gate.label, step.work, step.cost)

    def finish(self, **extra: Any) -> ProtocolTrace:
        works = {s.label: s.work for s in self.steps if s.work is not None}
        extraction_cost = sum(v for k, v in self.costs.items() if k != "prepare")
        self.efficiencies["total"] = safe_efficiency(sum(works.values()), extraction_cost)
        std_error: Dict[str, float] = {}
        if self._rep_works:
            per_rep = [
                {**{f"work_{k}": float(w[i]) for k, w in self._rep_works.items()},
                 "total_work": float(sum(w[i] for w in self._rep_works.values()))}
                for i in range(self.settings.repetitions)
            ]
            stats = repeat_stats(per_rep)
            std_error = {f"{k}_err": e.std_error for k, e in stats.items()}
            for s in self.steps:
                if s.work is not None:
                    s.std_error["work"] = stats[f"work_{s.label}"].std_error
        params: Dict[str, Any] = {
            "device": self.params.model_dump(),
            "mode": self.mode,
            "noise": self.noise is not None,
            "gate_device": self.gate_params.model_dump() if self.gate_noise is not None else None,
            "kappa": self.kappa,
            "tau": self.settings.tau,
            "dt": self.settings.dt,
            "envelope": self.settings.envelope,
        }
        if self.mode == "sampled":
            params.update(shots=self.settings.shots, repetitions=self.settings.repetitions, seed=self.settings.seed)
        params.update(extra)
        logger.info("%s (%s): extracted %.6f", self.protocol, self.mode, sum(works.values()))
        return ProtocolTrace(self.protocol, self.steps, works, self.costs, self.efficiencies, params, std_error)


def _check_theta(theta_s: float, lo: float, hi: float, open_lo: bool = False) -> None:
    below = theta_s <= lo if open_lo else theta_s < lo
    if below or theta_s > hi:
        bracket = "(" if open_lo else "["
        raise DomainError(f"theta_s={theta_s} outside {bracket}{lo:.6g}, {hi:.6g}]")


def run_dephasing(
    theta_s: float,
    hold_time: float,
    params: QubitParams,
    mode: str = "ideal",
    settings: Optional[Settings] = None,
) -> ProtocolTrace:
    """Prepare, hold while phase noise removes coherence, then V_pi."""
    _check_theta(theta_s, math.pi / 2.0, math.pi, open_lo=True)
    if hold_time < 0:
        raise DomainError(f"hold_time must be >= 0, got {hold_time}")
    run = _Runner("dephasing", params, mode, settings)
    run.prepare(theta_s)
    run.hold(hold_time)
    run.extract(v_pi(**run._gate_kwargs()))
    return run.finish(theta_s=theta_s, hold_time=hold_time)


def run_direct(
    theta_s: float,
    params: QubitParams,
    mode: str = "ideal",
    settings: Optional[Settings] = None,
) -> ProtocolTrace:
    """Prepare, then undo the preparation gate in one step."""
    _check_theta(theta_s, 0.0, math.pi)
    run = _Runner("direct", params, mode, settings)
    run.prepare(theta_s)
    run.extract(rotation_y(-theta_s, label="inverse", **run._gate_kwargs()))
    return run.finish(theta_s=theta_s)


def run_sequential(
    theta_s: float,
    params: QubitParams,
    mode: str = "ideal",
    settings: Optional[Settings] = None,
) -> ProtocolTrace:
    """Prepare, take the incoherent part with V_pi, then the coherent part with U_c.

    For theta_s <= pi/2 the state is already its own sigma state, so V_pi is
    skipped and all work comes out through U_c. U_c is calibrated on the
    ideal sigma state; under noise it acts on whatever state is really there.
    """
    _check_theta(theta_s, 0.0, math.pi)
    run = _Runner("sequential", params, mode, settings)
    target = pure_state(theta_s)
    run.prepare(theta_s)
    if theta_s > math.pi / 2.0:
        gate = v_pi(**run._gate_kwargs())
        run.extract(gate)
        target = apply_ideal(gate, target)
    run.extract(make_uc(target, **run._gate_kwargs()))
    return run.finish(theta_s=theta_s)


def run_protocol(
    name: str,
    theta_s: float,
    params: QubitParams,
    mode: str = "ideal",
    hold_time: float = 0.0,
    settings: Optional[Settings] = None,
) -> ProtocolTrace:
    if name == "dephasing":
        return run_dephasing(theta_s, hold_time, params, mode, settings)
    if name == "direct":
        return run_direct(theta_s, params, mode, settings)
    if name == "sequential":
        return run_sequential(theta_s, params, mode, settings)
    raise DomainError(f"unknown protocol {name!r}; use one of {PROTOCOLS}")
