import logging
from typing import Dict

from fastapi import APIRouter, HTTPException, status

from ...core.config import get_settings
from ...core.exceptions import InvalidParametersError
from ...schemas.api import CheckResponse, HealthResponse, ScanRequest, ScanResponse, ScanRow
from ...schemas.params import DecayRateTable, EpsilonVariant, ProblemParams
from ...services import exponent_service
from ...services.suite_service import suite_service

logger = logging.getLogger(__name__)
settings = get_settings()

router = APIRouter(prefix="/api/v1", tags=["admissibility"])


@router.get("/health", response_model=HealthResponse, summary="Health check")
async def health_check() -> Dict[str, str]:
    return {"status": "ok"}


@router.post(
    "/params/check",
    response_model=CheckResponse,
    summary="Classify a parameter tuple",
    description="Evaluate every admissibility condition and return the verdict, derived constants, "
    "predicted decay exponents and X(t) weight exponents.",
)
async def check_params(params: ProblemParams, variant: EpsilonVariant = EpsilonVariant.PAPER) -> CheckResponse:
    logger.info("Checking params: %s", params.as_tuple())
    try:
        response, _ = suite_service.admissibility(params, variant)
    except InvalidParametersError as exc:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(exc)) from exc
    return response


@router.post(
    "/params/rates",
    response_model=DecayRateTable,
    summary="Predicted decay exponents",
    description="Decay exponents of the applicable result; 422 when no result applies.",
)
async def predicted_rates(params: ProblemParams, variant: EpsilonVariant = EpsilonVariant.PAPER) -> DecayRateTable:
    consts = exponent_service.derived_constants(params)
    verdict = exponent_service.classify(params, consts)
    try:
        return exponent_service.predicted_rates(params, verdict, consts, variant)
    except InvalidParametersError as exc:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(exc)) from exc


@router.post(
    "/params/scan",
    response_model=ScanResponse,
    summary="Classify a parameter grid",
    description="Classify every tuple of the Cartesian product of the given ranges.",
)
def scan_params(request: ScanRequest) -> ScanResponse:
    size = request.ranges.cardinality()
    if size > settings.max_scan_points:
        raise HTTPException(
            status_code=status.HTTP_413_REQUEST_ENTITY_TOO_LARGE,
            detail=f"Grid has {size} points; the limit is {settings.max_scan_points}",
        )

    logger.info("Scanning %d tuples", size)
    try:
        results = exponent_service.region_scan(request.ranges, jobs=1)
    except Exception as exc:
        logger.exception("Scan failed: %s", exc)
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail="Scan failed",
        ) from exc

    rows = []
    if request.include_rows:
        rows = [ScanRow(params=params, scenario=verdict.scenario.value) for params, verdict in results]
    return ScanResponse(total=len(results), counts=exponent_service.summarize(results), rows=rows)
