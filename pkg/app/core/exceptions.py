from fastapi import Request
from fastapi.encoders import jsonable_encoder
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse


class SimulationError(Exception):
    """Base class for every error raised by the simulator."""
    pass


class InvalidDistributionError(SimulationError, ValueError):
    """Raised when a vector is not a point on the probability simplex."""
    pass


class DimensionMismatchError(SimulationError, ValueError):
    """Raised when two inputs disagree on class count or length."""
    pass


class ConfigurationError(SimulationError, ValueError):
    """Raised when a config or call precondition is violated."""
    pass


class ClusteringError(SimulationError, ValueError):
    """Raised when a grouping request cannot be satisfied."""
    pass


class InstanceTooLargeError(SimulationError, ValueError):
    """Raised when the exact grouping oracle would enumerate too many partitions."""
    pass


class TraceFormatError(SimulationError, ValueError):
    """Raised when a power trace is malformed or holds negative samples."""
    pass


async def simulation_error_handler(request: Request, exc: SimulationError):
    """Handles simulator precondition failures."""
    # local import keeps core.logger -> core.config -> core.exceptions acyclic
    from app.core.logger import logger

    logger.warning(f"Simulation rejected request: {exc}")
    return JSONResponse(
        status_code=422,
        content={"error": type(exc).__name__, "details": str(exc)},
    )


async def generic_exception_handler(request: Request, exc: Exception):
    """Handles unexpected server errors."""
    from app.core.logger import logger

    logger.error(f"Unexpected error: {exc}")
    return JSONResponse(
        status_code=500,
        content={"error": "Internal server error", "details": str(exc)},
    )


async def validation_exception_handler(request: Request, exc: RequestValidationError):
    """Handles validation errors from FastAPI."""
    from app.core.logger import logger

    logger.warning(f"Validation failed: {exc.errors()}")
    return JSONResponse(
        status_code=422,
        content={"error": "Validation error", "details": jsonable_encoder(exc.errors())},
    )
