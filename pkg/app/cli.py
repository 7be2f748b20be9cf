"""Command-line entry point: python -m app <command> <config.json> [flags].

Exit codes: 0 success (including "no theorem applies" and observed blow-up),
2 invalid input, 3 I/O failure.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from .core.config import get_settings
from .core.exceptions import InvalidParametersError, MissingColumnError, RunDirectoryError
from .schemas.params import SCENARIO_TITLES, Scenario
from .schemas.run import RunConfig
from .services import exponent_service
from .services.suite_service import SuiteService

logger = logging.getLogger("sigma_evolution")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3

COMMANDS = ("check", "scan", "kernel", "linear", "run", "picard")


class ConfigError(Exception):
    """Config file that cannot be parsed or validated; carries line/field diagnostics."""


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive (got {text})")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1 (got {text})")
    return value


def _parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="python -m app",
        description="Decay and admissibility verifier for weakly coupled sigma-evolution systems",
    )
    parser.add_argument("--log-level", default=None, help="Overrides SIGEVO_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    for command in COMMANDS:
        cmd = sub.add_parser(command, help=f"{command} from a JSON run config")
        cmd.add_argument("config", type=Path, help="Path to the JSON run config")
        cmd.add_argument("--out", default=None, help="Run directory (default: a fresh one under SIGEVO_OUTPUT_ROOT)")
        cmd.add_argument("--horizon", type=_positive_float, default=None, help="Overrides the config horizon T")
        cmd.add_argument("--seedless", action="store_true", help="Reserved: every input is already deterministic")
        if command == "scan":
            cmd.add_argument("--jobs", type=_positive_int, default=None, help="Worker processes for the scan")

    report = sub.add_parser("report", help="Rebuild report.md and plots.gp of a run directory")
    report.add_argument("run_dir", type=Path, help="Existing run directory")
    return parser.parse_args(argv)


def _validation_messages(exc: ValidationError) -> List[str]:
    messages = []
    for error in exc.errors():
        where = ".".join(str(part) for part in error["loc"]) or "<root>"
        messages.append(f"{where}: {error['msg']}")
    return messages


def load_config(path: Path, command: str, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}:1:1: config must be a JSON object")

    if isinstance(data.get("params"), dict):
        try:
            exponent_service.validate_params(data["params"])
        except InvalidParametersError as exc:
            raise ConfigError(f"{path}: invalid config\n  params: {exc}") from exc

    data["command"] = command
    data.update({key: value for key, value in (overrides or {}).items() if value is not None})
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"{path}: invalid config\n  " + "\n  ".join(_validation_messages(exc))) from exc


def _print_check(verdicts: Dict[str, Any]) -> None:
    verdict = verdicts["verdict"]
    scenario = Scenario(verdict["scenario"])
    if scenario is Scenario.NONE:
        failing = [e["condition_id"] for e in verdict["report"]["entries"] if not e["satisfied"]]
        print(f"none: no theorem applies; failing conditions: {', '.join(failing)}")
        return
    line = f"{scenario.value} ({SCENARIO_TITLES[scenario]}): APPLIES"
    if verdict.get("eps_p1_sigma2") is not None:
        line += f", eps(p1,sigma2)={verdict['eps_p1_sigma2']:g}"
    if verdict.get("eps_p2_sigma1") is not None:
        line += f", eps(p2,sigma1)={verdict['eps_p2_sigma1']:g}"
    print(line)
    for note in verdict.get("notes", []):
        print(f"note: {note}")


def _print_summary(command: str, verdicts: Dict[str, Any]) -> None:
    if command == "check":
        _print_check(verdicts)
    elif command == "scan":
        counts = ", ".join(f"{name}={count}" for name, count in sorted(verdicts["scan"]["counts"].items()))
        print(f"classified {verdicts['scan']['total']} tuples: {counts}")
    elif command == "kernel":
        passed = sum(result["envelope"]["passed"] for result in verdicts["kernel"])
        print(f"kernel envelopes: {passed}/{len(verdicts['kernel'])} pass")
    elif command == "linear":
        envelopes = [e for block in verdicts["linear"] for e in block["envelopes"]]
        print(f"linear envelopes: {sum(e['passed'] for e in envelopes)}/{len(envelopes)} pass")
    elif command == "run":
        if verdicts.get("blow_up"):
            print(f"blow-up observed at t={verdicts['blow_up_time']:g}")
        if "x_norm" in verdicts:
            x = verdicts["x_norm"]
            print(f"X(T)={x['at_horizon']:.6e} X(T/10)={x['at_tenth']:.6e} bounded={x['bounded']}")
    elif command == "picard":
        picard = verdicts["picard"]
        print(f"picard: {picard['iterations']} iterates, distances {', '.join(f'{d:.3e}' for d in picard['distances'])}")


def main(argv: Optional[List[str]] = None) -> int:
    args = _parse_args(argv)
    settings = get_settings()
    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    try:
        settings.validate()
    except RuntimeError as exc:
        logger.error("Configuration validation failed: %s", exc)
        return EXIT_INVALID

    service = SuiteService()
    try:
        if args.command == "report":
            print(f"report: {service.report(args.run_dir)}")
            return EXIT_OK

        cfg = load_config(args.config, args.command, {"horizon": args.horizon})
        if args.command == "scan":
            run_dir, verdicts = service.scan(cfg, jobs=args.jobs or settings.default_jobs, out=args.out)
        else:
            run_dir, verdicts = getattr(service, args.command)(cfg, out=args.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (InvalidParametersError, MissingColumnError, ValidationError, ValueError) as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (RunDirectoryError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    _print_summary(args.command, verdicts)
    print(f"run directory: {run_dir}")
    return EXIT_OK
