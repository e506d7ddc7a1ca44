"""
WaveLab - experiment orchestration

Runs one subcommand against a validated ExperimentConfig:

    verify          inequality suite        -> reports.ndjson
    simulate-det    deterministic run       -> trajectory.ndjson
    simulate-stoch  single stochastic path  -> trajectory.ndjson
    exit-mc         exit-probability MC     -> summary.json, trials.ndjson
    constants       derived constants       -> constants.json

Every run writes manifest.json before it starts and finalizes it with the
sha256 of each output file. A run that raises leaves only the manifest,
marked as an error.
"""

import hashlib
import logging
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from wavelab import __version__
from wavelab.checks.suite import count_failures, run_suite, worst_slack
from wavelab.core.grid_ops import Grid
from wavelab.core.wave_core import derive_constants, plateau_distance_norm_sq, wave
from wavelab.simulation.dynamics import DeterministicSimulator, initial_perturbation, summarize_trajectory
from wavelab.simulation.noise import hs_bound_check
from wavelab.simulation.stochastic import build_stochastic, exit_probability_mc, trial_seed
from wavelab.utils.config import ExperimentConfig, config_to_text
from wavelab.utils.errors import WaveLabError
from wavelab.utils.schemas import RunManifest
from wavelab.utils.serialization import write_json, write_ndjson


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_ERROR = 2

MANIFEST_NAME = "manifest.json"

# Sections each subcommand reads; anything else set in the config is reported.
SECTIONS_USED: Dict[str, frozenset] = {
    "verify": frozenset({"model", "grid", "verify", "mc", "output"}),
    "simulate-det": frozenset({"model", "grid", "time", "init", "output"}),
    "simulate-stoch": frozenset({"model", "grid", "time", "init", "noise", "mc", "output"}),
    "exit-mc": frozenset({"model", "grid", "time", "init", "noise", "mc", "output"}),
    "constants": frozenset({"model", "output"}),
}

# Recovery tolerances for a front started at a small shift y0.
SHIFT_NORM_TOL = 1e-3
SHIFT_PHASE_TOL = 1e-2

# ANSI formatting
RED = "\033[91m"
YELLOW = "\033[93m"
GREEN = "\033[92m"
BOLD = "\033[1m"
RESET = "\033[0m"
HR = "-" * 60


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_error_manifest(
    out_dir: str,
    subcommand: str,
    error: BaseException,
    config: Optional[ExperimentConfig] = None,
) -> str:
    """
    Write a manifest describing a run that never produced outputs.

    Returns:
        Path of the manifest
    """
    os.makedirs(out_dir, exist_ok=True)
    manifest = RunManifest(
        subcommand=subcommand,
        status="error",
        config=config.model_dump() if config is not None else {},
        config_text=config_to_text(config) if config is not None else "",
        code_version=__version__,
        started_at=_now(),
        finished_at=_now(),
        error=f"{type(error).__name__}: {error}",
    )
    path = os.path.join(out_dir, MANIFEST_NAME)
    write_json(path, manifest.model_dump())
    return path


class WaveLab:
    """
    Main orchestrator for wavelab runs.

    Holds the validated config, the derived constants and the output
    directory; ``run`` dispatches a subcommand and returns the process exit
    code (0 when every acceptance predicate of the run holds).
    """

    _template_cache: Dict[str, str] = {}
    _templates_dir = Path(__file__).parent / "templates"

    def __init__(
        self,
        config: ExperimentConfig,
        out_dir: str,
        workers: Optional[int] = None,
        progress: bool = True,
        color: bool = True,
    ) -> None:
        self.config = config
        self.out_dir = out_dir
        self.workers = workers
        self.progress = progress
        self.color = color

        model = config.model
        self.params = derive_constants(model.nu, model.b, model.a, model.m_factor)
        self.grid = Grid.for_params(self.params, config.grid.L_factor, config.grid.n)

    # -------------------------------------------------------------------------
    # Templates and console output
    # -------------------------------------------------------------------------

    def _load_template(self, name: str) -> str:
        """
        Load a console summary template, cached at class level.

        Raises:
            FileNotFoundError: If the template file doesn't exist
        """
        if name not in self._template_cache:
            path = self._templates_dir / f"summary_{name}.txt"
            if not path.exists():
                raise FileNotFoundError(f"Template '{name}' not found at {path}")
            self._template_cache[name] = path.read_text(encoding="utf-8")
        return self._template_cache[name]

    def _paint(self, text: str, *codes: str) -> str:
        if not self.color:
            return text
        return "".join(codes) + text + RESET

    def display_console_summary(self, subcommand: str, results: Dict[str, Any]) -> None:
        """Print the filled template, any failing items and the PASS/FAIL verdict."""
        name = subcommand.replace("-", "_")
        print()
        print(self._paint(self._load_template(name).format(**results["summary"]).rstrip(), BOLD))

        failures: List[str] = results.get("failures", [])
        if failures:
            print(HR)
            print(self._paint(f">>> FAILING ITEMS ({len(failures)}) <<<", RED, BOLD))
            for item in failures[:20]:
                print(f"  • {self._paint(item, RED)}")
            if len(failures) > 20:
                print(f"  ... and {len(failures) - 20} more")

        for note in results.get("notes", []):
            print(self._paint(f"note: {note}", YELLOW))

        print(HR)
        if results["passed"]:
            print(self._paint("PASS", GREEN, BOLD))
        else:
            print(self._paint("FAIL", RED, BOLD))
        print(f"Outputs: {self.out_dir}")

    # -------------------------------------------------------------------------
    # Run lifecycle
    # -------------------------------------------------------------------------

    def _warn_unused_sections(self, subcommand: str) -> List[str]:
        unused = [s for s in self.config.sections_set if s not in SECTIONS_USED[subcommand]]
        for section in unused:
            logger.warning(f"config section '{section}' is not used by {subcommand}")
        return unused

    def _constants(self) -> Dict[str, float]:
        p = self.params
        constants = p.as_dict()
        constants.update(
            q1=p.q1,
            q2=p.q2,
            stability_radius=p.stability_radius(self.config.model.delta),
            plateau_distance_sq=plateau_distance_norm_sq(p),
        )
        return constants

    def _write_manifest(self, manifest: RunManifest) -> None:
        write_json(os.path.join(self.out_dir, MANIFEST_NAME), manifest.model_dump())

    def run(self, subcommand: str) -> int:
        """
        Execute one subcommand end to end.

        Returns:
            EXIT_OK, EXIT_FAILED when an acceptance predicate fails, or
            EXIT_ERROR when the run raised
        """
        handlers: Dict[str, Callable[[], Dict[str, Any]]] = {
            "verify": self.verify,
            "simulate-det": self.simulate_det,
            "simulate-stoch": self.simulate_stoch,
            "exit-mc": self.exit_mc,
            "constants": self.constants,
        }
        if subcommand not in handlers:
            raise ValueError(f"unknown subcommand '{subcommand}'")

        os.makedirs(self.out_dir, exist_ok=True)
        unused = self._warn_unused_sections(subcommand)
        manifest = RunManifest(
            subcommand=subcommand,
            config=self.config.model_dump(),
            config_text=config_to_text(self.config),
            constants=self._constants(),
            code_version=__version__,
            started_at=_now(),
            notes=[f"unused section: {s}" for s in unused],
        )
        self._write_manifest(manifest)
        logger.info(f"{subcommand}: writing to {self.out_dir}")

        try:
            results = handlers[subcommand]()
        except Exception as e:
            if isinstance(e, WaveLabError):
                logger.error(f"{subcommand} aborted: {e}")
            else:
                logger.exception(f"{subcommand} aborted with an unexpected error")
            manifest.status = "error"
            manifest.error = f"{type(e).__name__}: {e}"
            manifest.finished_at = _now()
            self._write_manifest(manifest)
            return EXIT_ERROR

        manifest.files = {
            name: sha256_file(os.path.join(self.out_dir, name)) for name in results["files"]
        }
        manifest.notes.extend(results.get("notes", []))
        manifest.status = "ok" if results["passed"] else "failed"
        manifest.finished_at = _now()
        self._write_manifest(manifest)

        self.display_console_summary(subcommand, results)
        return EXIT_OK if results["passed"] else EXIT_FAILED

    # -------------------------------------------------------------------------
    # Subcommands
    # -------------------------------------------------------------------------

    def verify(self) -> Dict[str, Any]:
        cfg = self.config
        reports = run_suite(
            self.grid,
            self.params,
            n_random=cfg.verify.n_random,
            master_seed=cfg.mc.master_seed,
            rel_tol=cfg.verify.rel_tol,
            workers=self.workers,
        )
        write_ndjson(os.path.join(self.out_dir, "reports.ndjson"), (r.to_record() for r in reports))

        failures = count_failures(reports)
        return {
            "files": ["reports.ndjson"],
            "passed": failures == 0,
            "failures": [f"{r.name} (seed {r.seed}): slack {r.slack:.3e}" for r in reports if not r.passed],
            "summary": {
                "L": self.grid.half_width,
                "n": self.grid.n,
                "n_reports": len(reports),
                "failures": failures,
                "worst": worst_slack(reports),
            },
        }

    def simulate_det(self) -> Dict[str, Any]:
        cfg = self.config
        delta = cfg.model.delta
        sim = DeterministicSimulator(self.grid, self.params, cfg.time.dt)
        u0 = initial_perturbation(self.grid, self.params, cfg.init, delta)
        traj = sim.run_det(u0, cfg.time.T_end, delta, cfg.time.sample_every, y0=cfg.init.y0)
        summary = summarize_trajectory(traj, self.params, delta)

        checks = {"lem0_envelope_ok": summary["lem0_envelope_ok"]}
        notes: List[str] = []
        if summary["small_data"]:
            checks["decay_envelope_ok"] = summary["decay_envelope_ok"]
        else:
            notes.append("initial data exceeds the stability radius; decay envelope not enforced")
        if cfg.init.family == "shifted-wave":
            recovered = (
                summary["final_norm_h"] <= SHIFT_NORM_TOL
                and abs(summary["final_C"] - cfg.init.y0) <= SHIFT_PHASE_TOL
            )
            summary["shift_recovered"] = recovered
            checks["shift_recovered"] = recovered

        write_ndjson(os.path.join(self.out_dir, "trajectory.ndjson"), traj.rows() + [summary])

        fitted = summary["fitted_rate"]
        residual = summary["max_energy_residual"]
        return {
            "files": ["trajectory.ndjson"],
            "passed": all(checks.values()),
            "failures": [name for name, ok in checks.items() if not ok],
            "notes": notes,
            "summary": {
                "n_samples": len(traj.t),
                "T_end": cfg.time.T_end,
                "dt": sim.dt,
                "final_norm_h": summary["final_norm_h"],
                "final_C": summary["final_C"],
                "fitted_rate": "n/a" if fitted is None else f"{fitted:.6g}",
                "theoretical_rate": summary["theoretical_rate"],
                "max_energy_residual": "n/a" if residual is None else f"{residual:.3e}",
            },
        }

    def simulate_stoch(self) -> Dict[str, Any]:
        cfg = self.config
        sim, u0 = build_stochastic(cfg)
        sim.check_noise_precondition()

        label = f"{cfg.mc.master_seed}:0"
        rng = np.random.default_rng(trial_seed(cfg.mc.master_seed, 0))
        traj = sim.run_path(
            u0, cfg.time.T_end, rng, cfg.model.delta, cfg.time.sample_every, y0=cfg.init.y0, seed=label
        )

        # the forcing bound at the initial state, where u~ = u0 around v(x)
        hs = hs_bound_check(
            sim.noise, sim.sigma_model, u0, wave(self.grid.points, self.params), sim.m_sqrtq
        )
        p = self.params
        max_norm = max(traj.norm_h)
        summary = {
            "summary": True,
            "noise_seed": label,
            "hs_bound": hs.to_record(),
            "exited": max_norm > p.c_star,
            "max_norm_h": max_norm,
            "final_C": traj.C[-1],
        }
        rows = [dict(row, noise_seed=label) for row in traj.rows()]
        write_ndjson(os.path.join(self.out_dir, "trajectory.ndjson"), rows + [summary])

        return {
            "files": ["trajectory.ndjson"],
            "passed": hs.passed,
            "failures": [] if hs.passed else [f"hs_bound: slack {hs.slack:.3e}"],
            "summary": {
                "noise_seed": label,
                "n_samples": len(traj.t),
                "T_end": cfg.time.T_end,
                "dt": sim.dt,
                "noise_strength": sim.m_sqrtq * sim.sigma_model.lipschitz ** 2,
                "noise_limit": p.kappa_star / 4.0,
                "max_norm": max_norm,
                "c_star": p.c_star,
                "final_C": traj.C[-1],
            },
        }

    def exit_mc(self) -> Dict[str, Any]:
        cfg = self.config
        stats, records = exit_probability_mc(cfg, workers=self.workers, progress=self.progress)

        censor_note = (
            f"{stats.censored_at_T_max} trials reached T_max={stats.T_max:g} without exiting "
            "and count as non-exits"
        )
        summary = stats.summary_record()
        summary.update(
            exit_times=stats.exit_times,
            bound_respected=stats.bound_respected,
            moment_respected=stats.moment_respected,
            note=censor_note,
        )
        write_json(os.path.join(self.out_dir, "summary.json"), summary)
        write_ndjson(os.path.join(self.out_dir, "trials.ndjson"), (r.model_dump() for r in records))

        checks = {"bound_respected": stats.bound_respected, "moment_respected": stats.moment_respected}
        return {
            "files": ["summary.json", "trials.ndjson"],
            "passed": all(checks.values()),
            "failures": [name for name, ok in checks.items() if not ok],
            "notes": [censor_note],
            "summary": {
                "n_trials": stats.n_trials,
                "T_max": stats.T_max,
                "censored": stats.censored_at_T_max,
                "n_exits": stats.n_exits,
                "p_hat": stats.p_hat,
                "wilson_lo": stats.wilson_lo,
                "wilson_hi": stats.wilson_hi,
                "theorem_bound": stats.theorem_bound,
                "stopped_moment": stats.stopped_moment,
                "stopped_moment_se": stats.stopped_moment_se,
                "stopped_moment_bound": stats.stopped_moment_bound,
            },
        }

    def constants(self) -> Dict[str, Any]:
        constants = self._constants()
        write_json(os.path.join(self.out_dir, "constants.json"), constants)
        p = self.params
        return {
            "files": ["constants.json"],
            "passed": True,
            "summary": {
                "nu": p.nu,
                "b": p.b,
                "a": p.a,
                "k": p.k,
                "c": p.c,
                "eta": p.eta,
                "kappa_star": p.kappa_star,
                "C_star": p.C_star,
                "c_star": p.c_star,
                "m": p.m,
                "radius": constants["stability_radius"],
                "delta": self.config.model.delta,
            },
        }
