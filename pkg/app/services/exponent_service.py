"""Admissibility conditions, loss exponents and predicted decay rates of the coupled system.

Everything here is closed-form double-precision arithmetic on a ProblemParams
tuple. Inequalities keep their stated strictness; each ConditionEntry carries
both sides so near-boundary tuples can be audited.
"""
import itertools
import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from ..core.exceptions import InvalidParametersError
from ..schemas.params import (
    ComponentRates,
    ConditionEntry,
    ConditionReport,
    DecayRateTable,
    DerivedConstants,
    EpsilonVariant,
    ProblemParams,
    Scenario,
    TheoremVerdict,
)
from ..schemas.run import ScanRanges

logger = logging.getLogger(__name__)

COINCIDING_BRANCHES_NOTE = "branches coincide when sigma1 == sigma2; reporting the sigma1 >= sigma2 family"

GN_IDS = {1: ("GN11A1", "GN11A2", "GN11A3"), 2: ("GN12A1", "GN12A2", "GN12A3")}

# ids each scenario needs besides one GN entry of its block
REQUIRED: Dict[Scenario, Tuple[str, ...]] = {
    Scenario.THM11_LOSS: ("DIM", "ORD-11", "THRESH-DENOM-11", "EXP11A-part1", "EXP11A-threshold"),
    Scenario.THM12_LOSS: ("DIM", "ORD-12", "THRESH-DENOM-12", "EXP12A-part1", "EXP12A-threshold"),
    Scenario.THM11B_NOLOSS: ("DIM", "ORD-11", "THRESH-DENOM-11", "EXP11B"),
    Scenario.THM12B_NOLOSS: ("DIM", "ORD-12", "THRESH-DENOM-12", "EXP12B"),
}

CLASSIFICATION_ORDER = (
    Scenario.THM11B_NOLOSS,
    Scenario.THM12B_NOLOSS,
    Scenario.THM11_LOSS,
    Scenario.THM12_LOSS,
)


def validate_params(data: dict) -> ProblemParams:
    """ProblemParams from raw input; the error names every violated field."""
    try:
        return ProblemParams(**data)
    except ValidationError as exc:
        problems = []
        for error in exc.errors():
            field = ".".join(str(part) for part in error["loc"]) or "params"
            problems.append(f"{field}: {error['msg']}")
        raise InvalidParametersError(f"invalid-parameters: {'; '.join(problems)}") from exc


def derived_constants(p: ProblemParams) -> DerivedConstants:
    if not (1 <= p.m < p.q < float("inf")):
        raise InvalidParametersError(f"invalid-parameters: require 1 <= m < q < inf (got m={p.m}, q={p.q})")
    n, m, q = p.n, p.m, p.q
    half_n = n // 2
    lebesgue_gap = 1.0 / m - 1.0 / q
    alpha = lebesgue_gap * (2 + half_n + n * (1.0 / p.sigma2 - 1.0 / p.sigma1))
    beta = lebesgue_gap * (2 + half_n + n * (1.0 / p.sigma1 - 1.0 / p.sigma2))
    inv_r = 1.0 + 1.0 / q - 1.0 / m
    gamma = inv_r * (2 + half_n)
    kappa1 = (1.0 + gamma + alpha) / 2.0
    kappa2 = (1.0 + gamma + beta) / 2.0

    return DerivedConstants(
        half_n=half_n,
        alpha=alpha,
        beta=beta,
        gamma=gamma,
        kappa1=kappa1,
        kappa2=kappa2,
        r=1.0 / inv_r,
        threshold1=_threshold(n, m, p.sigma2, kappa1),
        threshold2=_threshold(n, m, p.sigma1, kappa2),
    )


def threshold_denominator(n: int, m: float, sigma: float, kappa: float) -> float:
    return n - 2.0 * m * sigma * kappa


def _threshold(n: int, m: float, sigma: float, kappa: float) -> Optional[float]:
    denominator = threshold_denominator(n, m, sigma, kappa)
    if denominator <= 0:
        return None
    return 1.0 + 2.0 * m * sigma * (1.0 + kappa) / denominator


def epsilon_loss(
    p_exp: float,
    sigma_other: float,
    p: ProblemParams,
    c: DerivedConstants,
    variant: EpsilonVariant = EpsilonVariant.PAPER,
    branch: int = 1,
) -> float:
    """Loss exponent 1 - n (p-1) / (2 m sigma) + p kappa (p kappa / 2 for gn_derived).

    branch 1 pairs with (p1, sigma2, kappa1), branch 2 with (p2, sigma1, kappa2).
    """
    kappa = c.kappa(branch)
    kappa_term = p_exp * kappa if EpsilonVariant(variant) is EpsilonVariant.PAPER else p_exp * kappa / 2.0
    return 1.0 - p.n * (p_exp - 1.0) / (2.0 * p.m * sigma_other) + kappa_term


def _entry(condition_id: str, satisfied: bool, lhs=None, rhs=None, note: str = "") -> ConditionEntry:
    return ConditionEntry(condition_id=condition_id, satisfied=bool(satisfied), lhs=lhs, rhs=rhs, note=note)


def _gagliardo_nirenberg_block(p: ProblemParams, branch: int) -> List[ConditionEntry]:
    """The three dimension regimes of one family; lhs = n, rhs = upper end of the regime."""
    n, q, m = p.n, p.q, p.m
    lower = q / m
    both_low = lower <= p.p1 and lower <= p.p2
    # in each family the "near" sigma bounds the first regime
    near, far = (p.sigma2, p.sigma1) if branch == 1 else (p.sigma1, p.sigma2)
    ids = GN_IDS[branch]

    def cap(sigma: float) -> float:
        denominator = n - 2.0 * q * sigma
        return n / denominator if denominator > 0 else float("inf")

    p1_cap, p2_cap = cap(p.sigma2), cap(p.sigma1)
    first_edge = 2.0 * q * near
    second_edge = 2.0 * q * far
    top_edge = 2.0 * q * q * near / (q - m)

    regime1 = n <= first_edge
    regime2 = first_edge < n <= second_edge
    regime3 = second_edge < n <= top_edge

    if branch == 1:
        second_bounds = p.p1 <= p1_cap
        second_note = f"q/m <= p1 <= n/(n-2q sigma2) = {p1_cap:g}, q/m <= p2"
    else:
        second_bounds = p.p2 <= p2_cap
        second_note = f"q/m <= p2 <= n/(n-2q sigma1) = {p2_cap:g}, q/m <= p1"
    third_bounds = p.p1 <= p1_cap and p.p2 <= p2_cap

    return [
        _entry(ids[0], regime1 and both_low, n, first_edge, f"n <= {first_edge:g}; q/m = {lower:g} <= p1, p2"),
        _entry(
            ids[1],
            regime2 and both_low and second_bounds,
            n,
            second_edge,
            f"{first_edge:g} < n <= {second_edge:g}; {second_note}",
        ),
        _entry(
            ids[2],
            regime3 and both_low and third_bounds,
            n,
            top_edge,
            f"{second_edge:g} < n <= {top_edge:g}; p1 <= {p1_cap:g}, p2 <= {p2_cap:g}",
        ),
    ]


def _exponent_block(p: ProblemParams, c: DerivedConstants, branch: int) -> List[ConditionEntry]:
    n, m = p.n, p.m
    if branch == 1:
        lead, other, kappa, threshold = p.p1, p.p2, c.kappa1, c.threshold1
        sigma_lead, sigma_other = p.sigma2, p.sigma1
        tag = "11"
    else:
        lead, other, kappa, threshold = p.p2, p.p1, c.kappa2, c.threshold2
        sigma_lead, sigma_other = p.sigma1, p.sigma2
        tag = "12"

    numerator = 1.0 + other + other * (1.0 + lead) * kappa
    denominator = (other - 1.0) / sigma_other + other * (lead - 1.0) / sigma_lead
    part1 = m * numerator / denominator
    entries = [_entry(f"EXP{tag}A-part1", part1 < n / 2.0, part1, n / 2.0, "strict <")]

    if threshold is None:
        entries.append(_entry(f"EXP{tag}A-threshold", False, lead, None, "threshold undefined"))
        entries.append(_entry(f"EXP{tag}B", False, min(p.p1, p.p2), None, "threshold undefined"))
    else:
        entries.append(
            _entry(
                f"EXP{tag}A-threshold",
                lead <= threshold < other,
                lead,
                threshold,
                f"{'p1' if branch == 1 else 'p2'} <= threshold < {'p2' if branch == 1 else 'p1'}",
            )
        )
        low = min(p.p1, p.p2)
        entries.append(_entry(f"EXP{tag}B", low > threshold, low, threshold, "min(p1, p2) > threshold"))
    return entries


def check_conditions(p: ProblemParams, c: DerivedConstants) -> ConditionReport:
    n = p.n
    top_sigma = max(p.sigma1, p.sigma2)
    denominator1 = threshold_denominator(n, p.m, p.sigma2, c.kappa1)
    denominator2 = threshold_denominator(n, p.m, p.sigma1, c.kappa2)

    entries = [
        _entry("DIM", n > top_sigma, n, top_sigma, "n > max(sigma1, sigma2)"),
        _entry("ORD-11", p.sigma1 >= p.sigma2, p.sigma1, p.sigma2, "sigma1 >= sigma2"),
        _entry("ORD-12", p.sigma2 >= p.sigma1, p.sigma2, p.sigma1, "sigma2 >= sigma1"),
        _entry("THRESH-DENOM-11", denominator1 > 0, denominator1, 0.0, "n - 2 m sigma2 kappa1 > 0"),
        _entry("THRESH-DENOM-12", denominator2 > 0, denominator2, 0.0, "n - 2 m sigma1 kappa2 > 0"),
    ]
    entries.extend(_gagliardo_nirenberg_block(p, 1))
    entries.extend(_gagliardo_nirenberg_block(p, 2))
    entries.extend(_exponent_block(p, c, 1))
    entries.extend(_exponent_block(p, c, 2))
    return ConditionReport(entries=entries)


def scenario_holds(scenario: Scenario, report: ConditionReport) -> bool:
    if scenario is Scenario.NONE:
        return False
    if not all(report.holds(cid) for cid in REQUIRED[scenario]):
        return False
    return any(report.holds(cid) for cid in GN_IDS[scenario.branch])


def classify(p: ProblemParams, c: Optional[DerivedConstants] = None) -> TheoremVerdict:
    c = c or derived_constants(p)
    report = check_conditions(p, c)
    holding = [s for s in CLASSIFICATION_ORDER if scenario_holds(s, report)]
    if not holding:
        return TheoremVerdict(scenario=Scenario.NONE, report=report)

    scenario = holding[0]
    notes = []
    if p.sigma1 == p.sigma2 and len(holding) > 1 and {s.branch for s in holding} == {1, 2}:
        notes.append(COINCIDING_BRANCHES_NOTE)

    verdict = TheoremVerdict(scenario=scenario, report=report, notes=notes)
    if scenario is Scenario.THM11_LOSS:
        verdict.eps_p1_sigma2 = epsilon_loss(p.p1, p.sigma2, p, c, branch=1)
    elif scenario is Scenario.THM12_LOSS:
        verdict.eps_p2_sigma1 = epsilon_loss(p.p2, p.sigma1, p, c, branch=2)
    return verdict


def linear_base(n: int, sigma: float, r: float) -> float:
    """-n/(2 sigma) (1 - 1/r), the L^m -> L^q heat-type part of every rate."""
    return -n / (2.0 * sigma) * (1.0 - 1.0 / r)


def _family(rate_lq: float) -> ComponentRates:
    return ComponentRates(rate_lq=rate_lq, rate_mid=rate_lq - 0.5, rate_top=rate_lq - 1.0)


def predicted_rates(
    p: ProblemParams,
    v: TheoremVerdict,
    c: DerivedConstants,
    variant: EpsilonVariant = EpsilonVariant.PAPER,
) -> DecayRateTable:
    scenario = v.scenario
    if scenario is Scenario.NONE:
        raise InvalidParametersError("no decay rates: no admissibility result applies")

    base_u = linear_base(p.n, p.sigma1, c.r)
    base_v = linear_base(p.n, p.sigma2, c.r)
    if scenario is Scenario.THM11_LOSS:
        eps = epsilon_loss(p.p1, p.sigma2, p, c, variant, branch=1)
        u_rate = base_u + eps + c.kappa1 / 2.0
        v_rate = base_v + c.kappa1 / 2.0
    elif scenario is Scenario.THM12_LOSS:
        eps = epsilon_loss(p.p2, p.sigma1, p, c, variant, branch=2)
        u_rate = base_u + c.kappa2 / 2.0
        v_rate = base_v + eps + c.kappa2 / 2.0
    else:
        u_rate = base_u + (c.gamma + 1.0) / 2.0
        v_rate = base_v + (c.gamma + 1.0) / 2.0

    return DecayRateTable(scenario=scenario, u=_family(u_rate), v=_family(v_rate), epsilon_variant=variant)


def gn_source_exponent(
    p_exp: float, sigma: float, kappa: float, p: ProblemParams, inner: float
) -> float:
    """p (-n/(2 sigma) (1/m - 1/(inner p)) + kappa/2); inner = m or q."""
    return p_exp * (-p.n / (2.0 * sigma) * (1.0 / p.m - 1.0 / (inner * p_exp)) + kappa / 2.0)


def nonintegrability_flag(
    p_exp: float, sigma_other: float, p: ProblemParams, c: DerivedConstants, branch: int = 1
) -> bool:
    """True when (1+tau)^e with the L^m cap L^q source exponent e is not integrable on [0, inf)."""
    return gn_source_exponent(p_exp, sigma_other, c.kappa(branch), p, p.m) >= -1.0


def branch_of(scenario: Scenario) -> int:
    if scenario.branch is None:
        raise InvalidParametersError("no admissibility result applies")
    return scenario.branch


def gn_envelope_exponents(p: ProblemParams, c: DerivedConstants, scenario: Scenario) -> Dict[str, float]:
    """Envelopes for ||v||^p1 and ||u||^p2 in L^{m p} and L^{q p}, keyed by NormSeries column.

    The 11 family uses (sigma2, kappa1), the 12 family (sigma1, kappa2), for both sources.
    """
    branch = branch_of(scenario)
    sigma = p.sigma2 if branch == 1 else p.sigma1
    kappa = c.kappa(branch)
    return {
        "v_lmp1": gn_source_exponent(p.p1, sigma, kappa, p, p.m),
        "v_lqp1": gn_source_exponent(p.p1, sigma, kappa, p, p.q),
        "u_lmp2": gn_source_exponent(p.p2, sigma, kappa, p, p.m),
        "u_lqp2": gn_source_exponent(p.p2, sigma, kappa, p, p.q),
    }


def duhamel_split_exponents(p: ProblemParams, c: DerivedConstants, scenario: Scenario) -> List[Dict[str, float]]:
    """Kernel exponents of the two halves of the Duhamel integral for u, k = 0, 1, 2.

    On [0, t/2] the (L^m cap L^q) -> L^q kernel exponent multiplies the
    integral of the L^m cap L^q source envelope; on [t/2, t] the L^q -> L^q
    kernel exponent is integrated against the L^q source envelope.
    """
    sources = gn_envelope_exponents(p, c, scenario)
    base = linear_base(p.n, p.sigma1, c.r)
    rows = []
    for k in range(3):
        rows.append(
            {
                "k": float(k),
                "early_kernel": (c.gamma + 1.0) / 2.0 + base - k / 2.0,
                "late_kernel": (3.0 + c.half_n) / 2.0 - k / 2.0,
                "early_source": sources["v_lmp1"],
                "late_source": sources["v_lqp1"],
                "early_integrable": float(sources["v_lmp1"] < -1.0),
            }
        )
    return rows


def reference_linear_exponent(
    n: int,
    sigma: float,
    q: float,
    m: float,
    quantity: str = "w",
    slot: int = 0,
    a: float = 0.0,
    sharp: bool = True,
    mixed: bool = True,
) -> float:
    """Exponent of (1+t) bounding ||  |D|^a w ||_{L^q} (quantity "w") or ||  |D|^a w_t || ("wt").

    slot 0 is data in w0, slot 1 in w1. mixed selects the (L^m cap L^q) -> L^q
    estimates, otherwise L^q -> L^q. sharp=False gives the weaker family
    valid in every dimension, kept for reference only.
    """
    half_n = n // 2
    inv_r = 1.0 + 1.0 / q - 1.0 / m
    derivative = a / (2.0 * sigma)
    if quantity not in ("w", "wt") or slot not in (0, 1):
        raise InvalidParametersError(f"unknown quantity/slot: {quantity!r}, {slot!r}")

    if mixed:
        base = -n / (2.0 * sigma) * (1.0 - inv_r) - derivative
        two, one = 0.5 * (2 + half_n) * inv_r, 0.5 * (1 + half_n) * inv_r
        if sharp:
            table = {("w", 0): two, ("w", 1): 0.5 + two, ("wt", 0): two - 0.5, ("wt", 1): two}
        else:
            table = {("w", 0): two, ("w", 1): 1.0 + one, ("wt", 0): one, ("wt", 1): two}
        return table[(quantity, slot)] + base

    two, one, three = 0.5 * (2 + half_n), 0.5 * (1 + half_n), 0.5 * (3 + half_n)
    if sharp:
        table = {("w", 0): two, ("w", 1): three, ("wt", 0): one, ("wt", 1): two}
    else:
        table = {("w", 0): two, ("w", 1): 1.0 + one, ("wt", 0): one, ("wt", 1): two}
    return table[(quantity, slot)] - derivative


def _grid_tuples(ranges: ScanRanges) -> Iterable[Tuple]:
    return itertools.product(ranges.n, ranges.sigma1, ranges.sigma2, ranges.p1, ranges.p2, ranges.q, ranges.m)


def _classify_chunk(chunk: Sequence[Tuple]) -> List[Tuple[ProblemParams, TheoremVerdict]]:
    results = []
    for n, s1, s2, p1, p2, q, m in chunk:
        try:
            params = ProblemParams(n=n, sigma1=s1, sigma2=s2, p1=p1, p2=p2, q=q, m=m)
        except ValidationError:
            logger.debug("Skipping invalid tuple n=%s m=%s q=%s", n, m, q)
            continue
        results.append((params, classify(params)))
    return results


def region_scan(ranges: ScanRanges, jobs: int = 1, chunk_size: int = 512) -> List[Tuple[ProblemParams, TheoremVerdict]]:
    """Classify every tuple of the product grid; output order follows the grid regardless of jobs."""
    tuples = list(_grid_tuples(ranges))
    if not tuples:
        return []
    logger.info("Scanning %d parameter tuples with %d worker(s)", len(tuples), jobs)
    chunks = [tuples[i : i + chunk_size] for i in range(0, len(tuples), chunk_size)]
    if jobs <= 1 or len(chunks) == 1:
        parts = [_classify_chunk(chunk) for chunk in chunks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            parts = list(executor.map(_classify_chunk, chunks))
    results = [row for part in parts for row in part]
    skipped = len(tuples) - len(results)
    if skipped:
        logger.warning("Skipped %d invalid tuples (require 1 <= m < q)", skipped)
    return results


def summarize(results: Iterable[Tuple[ProblemParams, TheoremVerdict]]) -> Dict[str, int]:
    counts = Counter(verdict.scenario.value for _, verdict in results)
    return {scenario.value: counts.get(scenario.value, 0) for scenario in Scenario}
