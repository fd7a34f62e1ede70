"""Command-line front end.

    python -m ergolab protocol sequential --theta-s fig2 --mode ideal
    python -m ergolab protocol dephasing --hold 4e-6 --mode noisy --device working-point
    python -m ergolab sweep --grid 181 --kappa default --optimum
    python -m ergolab surface --grid 41 --grid-coherence 41
    python -m ergolab decay-check --device working-point --duration 4e-6
    python -m ergolab storage --device decoupled

Exit status: 0 ok, 2 configuration error, 3 numeric error.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from typing import Any, Callable, Dict, List, Optional, Union

from pydantic import ValidationError

from . import analysis, export
from .config import PRESETS, RunConfig, load_run_config, log_level
from .dynamics import NoiseModel, evolve_free, fit_coherence_rate, free_decay_closed_form
from .errors import ConfigError, NumericError
from .protocols import PROTOCOLS, ProtocolTrace, Settings, run_protocol
from .state import pure_state

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
DECAY_TOL = 1e-6


def _print(msg: str = "") -> None:
    try:
        print(msg, flush=True)
    except Exception:
        pass


def _fmt(value: Optional[float], digits: int = 4) -> str:
    return "-" if value is None else f"{value:.{digits}f}"


def _kappa_arg(text: str) -> Union[float, str]:
    if text == "default":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"kappa must be a number or 'default', got {text!r}")


def settings_from(config: RunConfig) -> Settings:
    return Settings(
        kappa=config.resolved_kappa(),
        tau=config.tau,
        dt=config.dt,
        shots=config.shots,
        repetitions=config.repetitions,
        seed=config.seed,
        noise=config.noise,
        gate_params=config.gate_params(),
    )


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        export.save_text(output, text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def print_trace_summary(trace: ProtocolTrace) -> None:
    p = trace.params
    _print(f"protocol {trace.protocol} ({p['mode']}), theta_s = {p['theta_s']:.6f} rad, kappa = {p['kappa']:.4g}")
    _print(f"{'step':<10}{'energy':>10}{'coherence':>11}{'work':>10}{'cost':>11}{'eta':>8}")
    for s in trace.steps:
        _print(
            f"{s.label:<10}{_fmt(s.energy):>10}{_fmt(s.coherence):>11}{_fmt(s.work):>10}"
            f"{_fmt(s.cost, 6):>11}{_fmt(s.efficiency):>8}"
        )
    err = trace.std_error

    def line(name: str, value: float, key: str) -> str:
        text = f"{name} = {value:.4f}"
        if key in err:
            text += f" +/- {err[key]:.4f}"
        return text

    if trace.protocol == "sequential":
        _print(line("E_i", trace.incoherent_work, "work_V_pi_err"))
        _print(line("E_c", trace.coherent_work, "work_U_c_err"))
    _print(line("total work", trace.extracted_work, "total_work_err"))
    _print(f"total efficiency = {_fmt(trace.efficiencies.get('total'))}")


def cmd_protocol(config: RunConfig, args: argparse.Namespace) -> int:
    trace = run_protocol(
        args.name,
        config.theta_s,
        config.qubit_params(),
        config.mode,
        hold_time=config.hold_time,
        settings=settings_from(config),
    )
    if config.output:
        export.save_text(config.output, export.render_trace(trace, config.format))
    print_trace_summary(trace)
    return EXIT_OK


def cmd_sweep(config: RunConfig, args: argparse.Namespace) -> int:
    kappa = config.resolved_kappa()
    if args.closed_form:
        rows = analysis.efficiency_sweep(config.grid, kappa)
    else:
        rows = analysis.sweep_theta(
            config.grid,
            config.mode,
            config.qubit_params(),
            kappa=kappa,
            settings=settings_from(config),
            jobs=config.jobs,
        )
    optimum = None
    if config.optimum:
        optimum = {"theta_m": analysis.find_theta_m(kappa), "theta_e": analysis.find_theta_e(kappa)}
    _emit(export.render_sweep(rows, config.format, optimum), config.output)
    return EXIT_OK


def cmd_surface(config: RunConfig, args: argparse.Namespace) -> int:
    thetas, coherences = analysis.surface_grid(config.grid, config.grid_coherence)
    values = analysis.surface_ec(thetas, coherences, fill=math.nan)
    _emit(export.render_surface(thetas, coherences, values, config.format), config.output)
    return EXIT_OK


def cmd_decay_check(config: RunConfig, args: argparse.Namespace) -> int:
    """Integrate a free hold of pure_state(theta_s) and compare with the closed form."""
    params = config.qubit_params()
    noise = NoiseModel.from_params(params)
    rho0 = pure_state(config.theta_s)
    result = evolve_free(rho0, noise, config.duration, config.dt)
    exact = free_decay_closed_form(rho0, noise, config.duration)
    dp = abs(result.final.p1 - exact.p1)
    da = abs(result.final.a - exact.a)
    _print(f"hold {config.duration:g} s on {params.T1:g}/{params.T2:g} s (T1/T2), {result.step_count} steps")
    _print(f"p1   numeric {result.final.p1:.8f}  closed form {exact.p1:.8f}  |diff| {dp:.2e}")
    _print(f"|a|  numeric {abs(result.final.a):.8f}  closed form {abs(exact.a):.8f}  |diff| {da:.2e}")
    if rho0.a != 0 and config.duration > 0:
        rate = fit_coherence_rate(result)
        _print(f"coherence decay rate {rate:.6g} 1/s, expected {noise.coherence_rate:.6g} 1/s")
    _print(f"max trace error {result.max_trace_error:.2e}")
    if config.output:
        export.write_trajectory_csv(result, config.output)
    if max(dp, da) > DECAY_TOL:
        raise NumericError(f"integrator and closed form differ by {max(dp, da):.2e} (> {DECAY_TOL:g})")
    return EXIT_OK


def cmd_storage(config: RunConfig, args: argparse.Namespace) -> int:
    rows = analysis.storage_comparison(config.qubit_params(), config.hold_times, config.dt)
    _emit(export.render_storage(rows, config.format), config.output)
    return EXIT_OK


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration; flags override its values")
    p.add_argument("--log-level", default=None, help="logging level (default from ERGOLAB_LOG_LEVEL)")
    p.add_argument("--jobs", type=int, default=None, help="worker processes for sweeps")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", default=None, help="output file (stdout when omitted)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--device", choices=sorted(PRESETS), default=None)
    p.add_argument("--gate-device", choices=sorted(PRESETS), default=None,
                   help="device the gates are driven on in noisy runs (default sweet-spot)")
    p.add_argument("--kappa", type=_kappa_arg, default=None, help="cost unit, a number > 0 or 'default'")
    p.add_argument("--mode", choices=("ideal", "noisy", "sampled"), default=None)
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--repetitions", type=int, default=None)
    p.add_argument("--no-noise", dest="noise", action="store_const", const=False, default=None,
                   help="sampled mode without decoherence")
    p.add_argument("--tau", type=float, default=None, help="gate duration (s)")
    p.add_argument("--dt", type=float, default=None, help="integration step (s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ergolab", description="Coherent and incoherent ergotropy of a driven qubit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("protocol", help="run one work-extraction protocol")
    p.add_argument("name", choices=PROTOCOLS)
    p.add_argument("--theta-s", default=None, help="preparation angle: radians, 'reference' (alias 'fig2') or e.g. '0.75pi'")
    p.add_argument("--hold", dest="hold_time", type=float, default=None, help="hold time before V_pi (s)")
    _common(p)
    p.set_defaults(handler=cmd_protocol)

    p = sub.add_parser("sweep", help="ergotropy and efficiencies across Rabi angles")
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--optimum", action="store_const", const=True, default=None,
                   help="append theta_m and theta_e footer lines")
    p.add_argument("--closed-form", action="store_true", help="closed-form efficiencies on [pi/2, pi]")
    _common(p)
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("surface", help="coherent ergotropy over (theta, coherence)")
    p.add_argument("--grid", type=int, default=None, help="interior angles in (pi/2, pi)")
    p.add_argument("--grid-coherence", type=int, default=None)
    _common(p)
    p.set_defaults(handler=cmd_surface)

    p = sub.add_parser("decay-check", help="integrator against the closed-form free decay")
    p.add_argument("--theta-s", default=None)
    p.add_argument("--duration", type=float, default=None, help="hold time (s)")
    _common(p)
    p.set_defaults(handler=cmd_decay_check)

    p = sub.add_parser("storage", help="ergotropy kept after holding incoherent vs coherent charge")
    p.add_argument("--hold-times", type=float, nargs="+", default=None)
    _common(p)
    p.set_defaults(handler=cmd_storage)
    return parser


_NOT_CONFIG = {"command", "handler", "config", "log_level", "name", "closed_form"}


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {k: v for k, v in vars(args).items() if k not in _NOT_CONFIG and v is not None}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=(args.log_level or log_level()).upper(),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    handler: Callable[[RunConfig, argparse.Namespace], int] = args.handler
    try:
        config = load_run_config(args.config, _overrides(args))
        return handler(config, args)
    except ValidationError as e:
        print(f"ERROR: invalid configuration: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as e:
        print(f"ERROR: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except Exception:
        logger.exception("%s failed", args.command)
        raise


if __name__ == "__main__":
    raise SystemExit(main())
