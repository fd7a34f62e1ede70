"""CSV and JSON output for traces, sweeps, surfaces and trajectories.

CSV is written with '.' decimals via repr(float), LF line endings and empty
cells for undefined values, so identical inputs give identical bytes.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, TextIO

import numpy as np

from .analysis import CSV_COLUMNS, Optimum, StorageRow, SweepRow
from .dynamics import EvolutionResult
from .protocols import ProtocolTrace

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("protocol", "step_label", "energy", "coherence", "work", "cost", "eta")
SURFACE_COLUMNS = ("theta_rad", "coherence_nats", "e_coh")
STORAGE_COLUMNS = ("hold_time_s", "ergotropy_incoherent", "ergotropy_coherent", "preferred")
TRAJECTORY_COLUMNS = ("time_s", "p1", "re_a", "im_a")


def ensure_dir(path: str) -> None:
    if path:
        os.makedirs(path, exist_ok=True)


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return repr(value) if math.isfinite(value) else ""
    return str(value)


def _json_safe(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, np.ndarray):
        return _json_safe(value.tolist())
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def write_csv(out: TextIO, columns: Sequence[str], rows: Iterable[Mapping[str, Any]], footer: Sequence[str] = ()) -> None:
    writer = csv.DictWriter(out, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _cell(row.get(k)) for k in columns})
    for line in footer:
        out.write(f"# {line}\n")


def write_json(out: TextIO, payload: Any) -> None:
    json.dump(_json_safe(payload), out, ensure_ascii=False, indent=2, allow_nan=False)
    out.write("\n")


def render(fmt: str, columns: Sequence[str], rows: List[Mapping[str, Any]], payload: Any, footer: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    if fmt == "csv":
        write_csv(buf, columns, rows, footer)
    elif fmt == "json":
        write_json(buf, payload)
    else:
        raise ValueError(f"unknown output format {fmt!r}")
    return buf.getvalue()


def save_text(path: str, text: str) -> None:
    ensure_dir(os.path.dirname(path))
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    logger.info("wrote %s", path)


def load_json(path: str) -> Optional[Dict]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        logger.warning("file not found: %s", path)
        return None
    except json.JSONDecodeError as e:
        logger.warning("invalid JSON in %s: %s", path, e)
        return None


def trace_rows(trace: ProtocolTrace) -> List[Dict[str, Any]]:
    return [
        {
            "protocol": trace.protocol,
            "step_label": s.label,
            "energy": s.energy,
            "coherence": s.coherence,
            "work": s.work,
            "cost": s.cost,
            "eta": s.efficiency,
        }
        for s in trace.steps
    ]


def render_trace(trace: ProtocolTrace, fmt: str = "csv") -> str:
    return render(fmt, TRACE_COLUMNS, trace_rows(trace), trace.to_dict())


def optimum_footer(theta_m: Optimum, theta_e: Optimum) -> List[str]:
    return [
        f"theta_m={theta_m.theta!r} ({theta_m.theta_over_pi:.6f} pi) C_m={theta_m.coherence!r}",
        f"theta_e={theta_e.theta!r} ({theta_e.theta_over_pi:.6f} pi) C_e={theta_e.coherence!r}",
    ]


def render_sweep(
    rows: Sequence[SweepRow],
    fmt: str = "csv",
    optimum: Optional[Mapping[str, Optimum]] = None,
) -> str:
    dicts = [r.to_dict() for r in rows]
    payload: Dict[str, Any] = {"columns": list(CSV_COLUMNS), "rows": dicts}
    footer: List[str] = []
    if optimum:
        payload["optimum"] = {
            name: {"theta_rad": o.theta, "theta_over_pi": o.theta_over_pi, "coherence_nats": o.coherence}
            for name, o in optimum.items()
        }
        footer = optimum_footer(optimum["theta_m"], optimum["theta_e"])
    return render(fmt, CSV_COLUMNS, dicts, payload, footer)


def render_surface(thetas: Sequence[float], coherences: Sequence[float], values: np.ndarray, fmt: str = "csv") -> str:
    """Long-format rows for reachable points; JSON keeps the full matrix with nulls."""
    rows = [
        {"theta_rad": float(t), "coherence_nats": float(c), "e_coh": float(values[i, j])}
        for i, t in enumerate(thetas)
        for j, c in enumerate(coherences)
        if math.isfinite(values[i, j])
    ]
    payload = {"theta_rad": list(thetas), "coherence_nats": list(coherences), "e_coh": values}
    return render(fmt, SURFACE_COLUMNS, rows, payload)


def render_storage(rows: Sequence[StorageRow], fmt: str = "csv") -> str:
    dicts = [
        {
            "hold_time_s": r.hold_time,
            "ergotropy_incoherent": r.incoherent,
            "ergotropy_coherent": r.coherent,
            "preferred": r.preferred,
        }
        for r in rows
    ]
    return render(fmt, STORAGE_COLUMNS, dicts, [r.to_dict() for r in rows])


def trajectory_rows(result: EvolutionResult) -> List[Dict[str, float]]:
    return [{"time_s": t, "p1": rho.p1, "re_a": rho.a.real, "im_a": rho.a.imag} for t, rho in result.trajectory]


def write_trajectory_csv(result: EvolutionResult, path: str) -> None:
    buf = io.StringIO()
    write_csv(buf, TRAJECTORY_COLUMNS, trajectory_rows(result))
    save_text(path, buf.getvalue())
