import csv
import io
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pydantic
import scipy

from .. import __version__
from ..repositories.run_repository import PLOTS_FILE, REPORT_FILE, RunRepository
from ..schemas.api import CheckResponse
from ..schemas.grid import GridMode, GridSpec
from ..schemas.params import EpsilonVariant, ProblemParams, TheoremVerdict
from ..schemas.run import DataSlot, DataSpec, RunConfig, ScanRanges
from ..schemas.series import NormSeries
from ..utils.transforms import SpatialField, to_physical, zeros
from . import decay_service, exponent_service, report_service
from .evolution_service import picard_solve, run_coupled

logger = logging.getLogger(__name__)

REGION_FILE = "region.csv"
DATA_SLOTS = (DataSlot.U0, DataSlot.U1, DataSlot.V0, DataSlot.V1)


def build_data(spec: GridSpec, data: DataSpec) -> Tuple[SpatialField, ...]:
    """(u0, u1, v0, v1): the scaled profile in each selected slot, zero elsewhere."""
    profile = decay_service.profile_field(spec, data.kind, data.amplitude, data.width)
    blank = zeros(spec)
    return tuple(profile if slot in data.slots else blank for slot in DATA_SLOTS)


def _versions() -> Dict[str, str]:
    return {
        "sigma_evolution": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pydantic": pydantic.VERSION,
    }


def _dump(models) -> List[Dict[str, Any]]:
    return [model.model_dump() for model in models]


class SuiteService:
    """Runs one command end to end: compute, persist, report."""

    def __init__(self, repository: Optional[RunRepository] = None) -> None:
        self.repo = repository or RunRepository()

    def admissibility(
        self, params: ProblemParams, variant: EpsilonVariant = EpsilonVariant.PAPER
    ) -> Tuple[CheckResponse, TheoremVerdict]:
        consts = exponent_service.derived_constants(params)
        verdict = exponent_service.classify(params, consts)
        rates = weights = None
        if verdict.applies:
            rates = exponent_service.predicted_rates(params, verdict, consts, variant)
            weights = decay_service.build_weights(params, verdict, consts, variant).exponents
        response = CheckResponse(params=params, constants=consts, verdict=verdict, rates=rates, weights=weights)
        return response, verdict

    def _start(self, cfg: RunConfig, command: str, out: Optional[str]) -> Path:
        run_dir = self.repo.create_run_dir(command, out or cfg.output_dir)
        meta = {"command": command, "config": cfg.model_dump(mode="json"), "versions": _versions()}
        if cfg.params is not None:
            consts = exponent_service.derived_constants(cfg.params)
            meta["constants"] = consts.model_dump()
            meta["scenario"] = exponent_service.classify(cfg.params, consts).scenario.value
        self.repo.write_meta(run_dir, meta)
        return run_dir

    def _finish(self, run_dir: Path, verdicts: Dict[str, Any], series: Optional[NormSeries] = None) -> Path:
        self.repo.write_verdicts(run_dir, verdicts)
        if series is not None:
            self.repo.write_series(run_dir, series)
        return self.report(run_dir)

    def check(self, cfg: RunConfig, out: Optional[str] = None) -> Tuple[Path, Dict[str, Any]]:
        params = cfg.require_params()
        variant = EpsilonVariant(cfg.epsilon_variant)
        logger.info("Checking admissibility of %s", params.as_tuple())
        response, verdict = self.admissibility(params, variant)
        verdicts = {"command": "check", **response.model_dump(exclude={"params"})}
        if verdict.applies:
            consts = response.constants
            verdicts["duhamel_split"] = exponent_service.duhamel_split_exponents(params, consts, verdict.scenario)
            verdicts["gn_exponents"] = exponent_service.gn_envelope_exponents(params, consts, verdict.scenario)
        run_dir = self._start(cfg, "check", out)
        self._finish(run_dir, verdicts)
        return run_dir, verdicts

    def scan(self, cfg: RunConfig, jobs: int = 1, out: Optional[str] = None) -> Tuple[Path, Dict[str, Any]]:
        ranges: ScanRanges = cfg.scan
        results = exponent_service.region_scan(ranges, jobs=jobs)
        counts = exponent_service.summarize(results)
        run_dir = self._start(cfg, "scan", out)
        rows = [
            [*params.as_tuple(), verdict.scenario.value, verdict.eps_p1_sigma2, verdict.eps_p2_sigma1]
            for params, verdict in results
        ]
        self.repo.write_text(run_dir, REGION_FILE, _csv_text(
            ["n", "m", "q", "sigma1", "sigma2", "p1", "p2", "scenario", "eps_p1_sigma2", "eps_p2_sigma1"], rows
        ))
        verdicts = {"command": "scan", "scan": {"total": len(results), "counts": counts}}
        self._finish(run_dir, verdicts)
        return run_dir, verdicts

    def kernel(self, cfg: RunConfig, out: Optional[str] = None) -> Tuple[Path, Dict[str, Any]]:
        suite = cfg.kernel_suite
        times = decay_service.geometric_times(suite.t_min, suite.t_max, suite.samples)
        spec = decay_service.kernel_grid(suite.n, suite.sigma, suite.t_max)
        results = []
        columns: Dict[str, List[float]] = {}
        for a in suite.a_values:
            for r_exp in suite.r_values:
                result = decay_service.kernel_norm_suite(suite.n, suite.sigma, a, r_exp, times, suite.kernel, spec)
                results.append(result)
                columns[f"{suite.kernel}_a{a:g}_r{r_exp:g}"] = result.norms
        run_dir = self._start(cfg, "kernel", out)
        verdicts = {"command": "kernel", "kernel": _dump(results)}
        self._finish(run_dir, verdicts, NormSeries.from_columns(times, columns))
        return run_dir, verdicts

    def linear(self, cfg: RunConfig, out: Optional[str] = None) -> Tuple[Path, Dict[str, Any]]:
        suite = cfg.linear_suite
        grid = cfg.grid if cfg.grid.n == suite.n and cfg.grid.mode is GridMode.RADIAL else None
        blocks = []
        columns: Dict[str, List[float]] = {}
        times: List[float] = []
        for sigma in suite.sigmas:
            collected: Dict[str, NormSeries] = {}
            envelopes = decay_service.linear_rate_suite(
                suite.n, sigma, suite.q, suite.m, suite.kind, grid, cfg.horizon, collect=collected
            )
            blocks.append({"sigma": sigma, "envelopes": _dump(envelopes)})
            for slot, series in collected.items():
                times = series.times
                for name in series.column_names:
                    columns[f"s{sigma:g}_{slot}_{name}"] = series.columns[name]
        run_dir = self._start(cfg, "linear", out)
        verdicts = {"command": "linear", "linear": blocks}
        self._finish(run_dir, verdicts, NormSeries.from_columns(times, columns))
        return run_dir, verdicts

    def run(self, cfg: RunConfig, out: Optional[str] = None) -> Tuple[Path, Dict[str, Any]]:
        params = cfg.require_params()
        variant = EpsilonVariant(cfg.epsilon_variant)
        consts = exponent_service.derived_constants(params)
        verdict = exponent_service.classify(params, consts)
        data = build_data(cfg.grid, cfg.data)

        result = run_coupled(params, data, cfg.horizon, cfg.stepper)
        series = result.series
        verdicts: Dict[str, Any] = {
            "command": "run",
            "verdict": verdict.model_dump(),
            "constants": consts.model_dump(),
            "blow_up": series.blow_up,
            "blow_up_time": series.blow_up_time,
            "max_boundary_mass": result.max_boundary_mass,
            "steps": result.steps,
            "warnings": list(result.warnings),
        }
        if verdict.applies:
            verdicts.update(self._run_envelopes(params, consts, verdict, series, cfg.horizon, variant))
        else:
            logger.warning("No admissibility result applies; skipping weighted envelope checks")
            verdicts["warnings"].append("no admissibility result applies: envelope checks skipped")

        run_dir = self._start(cfg, "run", out)
        if cfg.snapshots:
            for name, component in (("u_final", result.final_state.u), ("v_final", result.final_state.v)):
                self.repo.write_snapshot(run_dir, name, to_physical(component.field_hat), result.final_state.t)
        self._finish(run_dir, verdicts, series)
        return run_dir, verdicts

    def _run_envelopes(self, params, consts, verdict: TheoremVerdict, series: NormSeries, horizon: float, variant):
        weights = decay_service.build_weights(params, verdict, consts, variant)
        rates = exponent_service.predicted_rates(params, verdict, consts, variant)
        envelopes = decay_service.check_weighted_envelopes(series, weights)
        gn = decay_service.gn_envelope_check(series, params, consts, verdict.scenario)
        at_horizon = decay_service.x_norm(series, weights)
        at_tenth = decay_service.x_norm(series, weights, until=horizon / 10.0)
        logger.info("X-norm: X(T)=%.4e, X(T/10)=%.4e", at_horizon, at_tenth)
        return {
            "rates": rates.model_dump(),
            "weights": weights.exponents,
            "envelopes": _dump(envelopes),
            "gn_envelopes": _dump(gn),
            "duhamel_split": exponent_service.duhamel_split_exponents(params, consts, verdict.scenario),
            "x_norm": {
                "at_horizon": at_horizon,
                "at_tenth": at_tenth,
                "bounded": bool(at_horizon <= 2.0 * at_tenth),
            },
        }

    def picard(self, cfg: RunConfig, out: Optional[str] = None) -> Tuple[Path, Dict[str, Any]]:
        params = cfg.require_params()
        data = build_data(cfg.grid, cfg.data)
        result = picard_solve(params, data, cfg.horizon, cfg.stepper)
        if result.diverged:
            logger.warning("Picard iteration diverged after %d iterates", result.iterations)
        run_dir = self._start(cfg, "picard", out)
        verdicts = {"command": "picard", "picard": result.model_dump()}
        self._finish(run_dir, verdicts)
        return run_dir, verdicts

    def report(self, run_dir: Path) -> Path:
        """Rebuild report.md and plots.gp from meta.json, verdicts.json and series.csv."""
        run_dir = Path(run_dir)
        meta = self.repo.read_meta(run_dir)
        verdicts = self.repo.read_verdicts(run_dir)
        series = self.repo.read_series(run_dir)
        generated_at = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        self.repo.write_text(run_dir, REPORT_FILE, report_service.render_report(meta, verdicts, series, generated_at))
        self.repo.write_text(run_dir, PLOTS_FILE, report_service.render_plots(series))
        logger.info("Report written to %s", run_dir / REPORT_FILE)
        return run_dir / REPORT_FILE


def _csv_text(header: List[str], rows: List[List[Any]]) -> str:
    buffer = io.StringIO(newline="")
    writer = csv.writer(buffer)
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if cell is None else repr(cell) if isinstance(cell, float) else cell for cell in row])
    return buffer.getvalue()


suite_service = SuiteService()
