"""Markdown reports and gnuplot scripts rebuilt from a run directory's files alone."""
import logging
from typing import Any, Dict, Iterable, List, Optional, Sequence

from ..core.exceptions import FitError
from ..schemas.series import NormSeries
from . import decay_service

logger = logging.getLogger(__name__)

YOUNG_INDEX_FOOTNOTE = (
    "Decay exponents use r from 1 + 1/q = 1/r + 1/m, the convention of the linear estimates, "
    "carried over to the nonlinear statements."
)
DATA_DECAY_FOOTNOTE = (
    "Runs start from rapidly decaying data on a truncated domain; rates for slowly decaying "
    "L^m data are not observed here."
)


def fmt(value: Any) -> str:
    """Echo stored values exactly: floats via repr, booleans as pass/FAIL."""
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "pass" if value else "FAIL"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _table(headers: Sequence[str], rows: Iterable[Sequence[Any]]) -> List[str]:
    lines = ["| " + " | ".join(headers) + " |", "|" + "---|" * len(headers)]
    for row in rows:
        lines.append("| " + " | ".join(fmt(cell) for cell in row) + " |")
    return lines


def _envelope_rows(envelopes: List[Dict[str, Any]]) -> List[Sequence[Any]]:
    return [
        (e["column"], e["exponent"], e.get("constant"), e.get("slope"), e["passed"], e.get("note") or "")
        for e in envelopes
    ]


def _envelope_table(envelopes: List[Dict[str, Any]]) -> List[str]:
    return _table(("column", "exponent", "constant C", "fitted slope", "envelope", "note"), _envelope_rows(envelopes))


def _params_section(meta: Dict[str, Any]) -> List[str]:
    params = (meta.get("config") or {}).get("params")
    if not params:
        return []
    keys = ("n", "sigma1", "sigma2", "p1", "p2", "q", "m")
    return ["## Parameters", ""] + _table(keys, [[params.get(k) for k in keys]]) + [""]


def _verdict_section(verdicts: Dict[str, Any]) -> List[str]:
    verdict = verdicts.get("verdict")
    if not verdict:
        return []
    lines = ["## Verdict", "", f"Scenario: **{verdict['scenario']}**", ""]
    if verdict.get("eps_p1_sigma2") is not None or verdict.get("eps_p2_sigma1") is not None:
        lines += [f"eps(p1, sigma2) = {fmt(verdict.get('eps_p1_sigma2'))}, "
                  f"eps(p2, sigma1) = {fmt(verdict.get('eps_p2_sigma1'))}", ""]
    for note in verdict.get("notes", []):
        lines.append(f"> {note}")
    entries = verdict.get("report", {}).get("entries", [])
    if entries:
        lines += ["", "### Conditions", ""]
        lines += _table(
            ("id", "lhs", "rhs", "holds", "note"),
            [(e["condition_id"], e.get("lhs"), e.get("rhs"), e["satisfied"], e.get("note") or "") for e in entries],
        )
    constants = verdicts.get("constants")
    if constants:
        keys = ("half_n", "alpha", "beta", "gamma", "kappa1", "kappa2", "r", "threshold1", "threshold2")
        lines += ["", "### Derived constants", ""] + _table(keys, [[constants.get(k) for k in keys]])
    rates = verdicts.get("rates")
    if rates:
        lines += ["", "### Predicted decay exponents", ""]
        lines += _table(
            ("component", "L^q", "|D|^sigma and d/dt", "|D|^{2 sigma}"),
            [(name, rates[name]["rate_lq"], rates[name]["rate_mid"], rates[name]["rate_top"]) for name in ("u", "v")],
        )
    return lines + [""]


def _run_section(verdicts: Dict[str, Any]) -> List[str]:
    lines: List[str] = []
    if "x_norm" in verdicts:
        x = verdicts["x_norm"]
        lines += ["## X(t) norm", ""]
        lines += _table(("X(T)", "X(T/10)", "X(T) <= 2 X(T/10)"), [(x.get("at_horizon"), x.get("at_tenth"), x.get("bounded"))])
        lines.append("")
    if verdicts.get("envelopes"):
        lines += ["## Weighted envelopes", ""] + _envelope_table(verdicts["envelopes"]) + [""]
    if verdicts.get("gn_envelopes"):
        lines += ["## Nonlinearity envelopes", ""] + _envelope_table(verdicts["gn_envelopes"]) + [""]
    if verdicts.get("duhamel_split"):
        lines += ["## Duhamel split exponents", ""]
        split = verdicts["duhamel_split"]
        keys = list(split[0])
        lines += _table(keys, [[row.get(k) for k in keys] for row in split]) + [""]
    if "blow_up" in verdicts:
        lines += [
            f"Blow-up observed: {'yes at t=' + fmt(verdicts.get('blow_up_time')) if verdicts['blow_up'] else 'no'}",
            f"Max relative boundary mass: {fmt(verdicts.get('max_boundary_mass'))}",
            "",
        ]
    for warning in verdicts.get("warnings", []):
        lines.append(f"> warning: {warning}")
    return lines


def _suite_sections(verdicts: Dict[str, Any]) -> List[str]:
    lines: List[str] = []
    kernel = verdicts.get("kernel")
    if kernel:
        lines += ["## Kernel norms", ""]
        lines += _table(
            ("kernel", "a", "r", "exponent", "constant C", "fitted slope", "envelope", "majorant slope"),
            [
                (
                    k["kernel"], k["a"], k["r"], k["envelope"]["exponent"], k["envelope"].get("constant"),
                    k["envelope"].get("slope"), k["envelope"]["passed"], k.get("majorant_slope"),
                )
                for k in kernel
            ],
        )
        lines.append("")
    linear = verdicts.get("linear")
    if linear:
        for block in linear:
            lines += [f"## Linear estimates, sigma = {fmt(block['sigma'])}", ""]
            lines += _table(
                ("column", "exponent", "constant C", "data norm", "C / data norm", "fitted slope", "envelope"),
                [
                    (
                        e["column"], e["exponent"], e.get("constant"), e.get("data_norm"),
                        e.get("relative_constant"), e.get("slope"), e["passed"],
                    )
                    for e in block["envelopes"]
                ],
            )
            lines.append("")
    picard = verdicts.get("picard")
    if picard:
        lines += ["## Picard iteration", ""]
        lines += _table(
            ("k", "d_k", "d_k / d_{k-1}", "sup ||z_u||", "sup ||z_v||"),
            [
                (k + 1, d, picard["ratios"][k], picard["u_correction"][k], picard["v_correction"][k])
                for k, d in enumerate(picard["distances"])
            ],
        )
        state = "converged" if picard["converged"] else "diverged" if picard["diverged"] else "iteration budget reached"
        lines += ["", f"Status: {state} after {picard['iterations']} iterates", ""]
    scan = verdicts.get("scan")
    if scan:
        lines += ["## Region scan", "", f"Tuples classified: {scan['total']}", ""]
        lines += _table(("scenario", "count"), sorted(scan["counts"].items())) + [""]
    return lines


def _series_section(series: NormSeries) -> List[str]:
    lines = ["## Recorded norms", ""]
    if len(series) == 0 or not series.column_names:
        return lines + ["no data", ""]
    rows = []
    for column in series.column_names:
        try:
            fit = decay_service.fit_rate(series, column)
            slope, stderr = fit.slope, fit.stderr
        except FitError:
            slope = stderr = None
        rows.append((column, series.columns[column][-1], slope, stderr))
    lines.append(f"{len(series)} samples on [{fmt(series.times[0])}, {fmt(series.times[-1])}]")
    lines.append("")
    lines += _table(("column", "value at T", "fitted slope on [T/10, T]", "stderr"), rows)
    return lines + [""]


def render_report(
    meta: Dict[str, Any],
    verdicts: Dict[str, Any],
    series: NormSeries,
    generated_at: Optional[str] = None,
) -> str:
    """Markdown report; the first line is the only one that may differ between identical runs."""
    command = meta.get("command", verdicts.get("command", "run"))
    lines = [f"# {command} report (generated {generated_at or 'n/a'})", ""]
    lines += _params_section(meta)
    lines += _verdict_section(verdicts)
    lines += _run_section(verdicts)
    lines += _suite_sections(verdicts)
    lines += _series_section(series)
    lines += ["---", "", f"Note: {YOUNG_INDEX_FOOTNOTE}", ""]
    if "blow_up" in verdicts:
        lines += [f"Note: {DATA_DECAY_FOOTNOTE}", ""]
    logger.info("Rendered %s report", command)
    return "\n".join(lines)


def render_plots(series: NormSeries, data_file: str = "series.csv") -> str:
    """gnuplot script plotting every recorded column against 1+t on log-log axes."""
    lines = [f"# plots for {data_file}", 'set datafile separator ","', "set logscale xy", 'set xlabel "1 + t"']
    if len(series) == 0 or not series.column_names:
        return "\n".join(lines + ["# no data"]) + "\n"
    plots = [
        f'"{data_file}" using (1+$1):{i + 2} with linespoints title "{name}"'
        for i, name in enumerate(series.column_names)
    ]
    lines += [
        "set key outside right",
        'set terminal pngcairo size 1200,800',
        'set output "series.png"',
        "plot " + ", \\\n     ".join(plots),
    ]
    return "\n".join(lines) + "\n"

