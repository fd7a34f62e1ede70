#!/usr/bin/env python3
import argparse
import logging
import os
import sys

# Ensure project root is importable when run as a script
THIS_DIR = os.path.dirname(__file__)
PROJECT_ROOT = os.path.abspath(os.path.join(THIS_DIR, os.pardir))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

from ergolab import analysis, export
from ergolab.config import DATA_DIR, DEFAULT_HOLD, PRESETS, THETA_S_REFERENCE, log_level
from ergolab.control import default_kappa
from ergolab.dynamics import NoiseModel, evolve_free
from ergolab.protocols import Settings, run_dephasing, run_sequential
from ergolab.state import pure_state


def reproduce(out_dir: str, grid: int, jobs: int, seed: int) -> int:
    working = PRESETS["working-point"]
    kappa = default_kappa(working)
    written = 0

    def save(name: str, text: str) -> None:
        nonlocal written
        export.save_text(os.path.join(out_dir, name), text)
        written += 1

    # ergotropy split and efficiencies across the Rabi angle
    rows = analysis.sweep_theta(grid, "ideal", working, kappa=kappa, jobs=jobs)
    optimum = {"theta_m": analysis.find_theta_m(kappa), "theta_e": analysis.find_theta_e(kappa)}
    save("sweep.csv", export.render_sweep(rows, "csv", optimum))
    save("efficiency.csv", export.render_sweep(analysis.efficiency_sweep(grid, kappa), "csv", optimum))

    # sequential extraction of the reference state, ideal and measured
    save("sequential_ideal.csv", export.render_trace(run_sequential(THETA_S_REFERENCE, working)))
    settings = Settings(kappa=kappa, shots=1000, repetitions=20, seed=seed)
    measured = run_sequential(THETA_S_REFERENCE, working, mode="sampled", settings=settings)
    save("sequential_sampled.json", export.render_trace(measured, "json"))

    # dephasing before V_pi
    dephased = run_dephasing(THETA_S_REFERENCE, DEFAULT_HOLD, working, mode="noisy", settings=Settings(kappa=kappa))
    save("dephasing_noisy.csv", export.render_trace(dephased))
    hold = evolve_free(pure_state(THETA_S_REFERENCE), NoiseModel.from_params(working), DEFAULT_HOLD, samples=201)
    export.write_trajectory_csv(hold, os.path.join(out_dir, "dephasing_hold.csv"))
    written += 1

    thetas, coherences = analysis.surface_grid()
    save("surface.csv", export.render_surface(thetas, coherences, analysis.surface_ec(thetas, coherences, fill=float("nan"))))

    holds = [1e-6, 2e-6, 4e-6, 8e-6, 16e-6, 32e-6, 64e-6]
    for device in ("working-point", "decoupled"):
        save(f"storage_{device}.csv", export.render_storage(analysis.storage_comparison(PRESETS[device], holds)))

    print(f"Wrote {written} data files to {out_dir}.")
    return written


def main() -> int:
    parser = argparse.ArgumentParser(description="Write the data behind every ergotropy plot")
    parser.add_argument("--out", default=os.path.join(DATA_DIR, "figures"), help="output directory")
    parser.add_argument("--grid", type=int, default=181, help="Rabi angles per sweep")
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0, help="seed for the sampled run")
    args = parser.parse_args()
    logging.basicConfig(level=log_level(), format="%(levelname)s %(name)s: %(message)s")
    reproduce(args.out, args.grid, args.jobs, args.seed)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
