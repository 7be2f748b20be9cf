"""FastAPI application serving the read-only admissibility API."""
import logging

from fastapi import FastAPI, Request, status
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import __version__
from .api.v1.routes import router as v1_router
from .core.config import get_settings
from .core.exceptions import InvalidParametersError, SigmaEvolutionError

settings = get_settings()

logging.basicConfig(
    level=settings.log_level,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger("sigma_evolution")

try:
    settings.validate()
except RuntimeError as exc:
    logger.error("Configuration validation failed: %s", exc)
    raise

app = FastAPI(
    title="Sigma-Evolution Decay Verifier API",
    version=__version__,
    description="Admissibility checks, predicted decay rates and region scans for weakly coupled "
    "sigma-evolution systems. Simulations run through the command line only.",
    docs_url="/docs",
    redoc_url="/redoc",
)

# Read-only and unauthenticated: no credentials, no mutating verbs
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)

app.include_router(v1_router)


@app.exception_handler(SigmaEvolutionError)
async def domain_error_handler(request: Request, exc: SigmaEvolutionError) -> JSONResponse:
    """Domain errors that escape a route handler."""
    if isinstance(exc, InvalidParametersError):
        return JSONResponse(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, content={"detail": str(exc)})
    logger.error("Unhandled %s on %s: %s", type(exc).__name__, request.url.path, exc)
    return JSONResponse(status_code=status.HTTP_500_INTERNAL_SERVER_ERROR, content={"detail": "internal error"})


@app.get("/", tags=["root"])
async def root():
    return {
        "message": "Sigma-Evolution Decay Verifier API",
        "version": __version__,
        "environment": settings.environment,
        "docs": "/docs",
    }


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(app, host="0.0.0.0", port=8000)
