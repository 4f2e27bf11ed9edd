from fastapi import APIRouter
from starlette.concurrency import run_in_threadpool

from app.core.logger import logger
from app.models.api_model import AriRequest, AriResponse, AriRow
from app.models.run_model import DpSweepConfig
from app.services.experiment_service import dp_ari_sweep
from app.services.report_service import summarize_ari

router = APIRouter()


@router.post("/ari", response_model=AriResponse)
async def ari_sweep(request: AriRequest):
    """
    Clustering quality (ARI) versus privacy level gamma on the homogeneous planted scenario.
    """
    logger.info(f"Received ARI sweep: gammas={request.gammas} seeds={len(request.seeds)}")
    dp = DpSweepConfig(**request.model_dump(include=set(DpSweepConfig.model_fields)))
    df = await run_in_threadpool(dp_ari_sweep, dp, request.search_width, request.max_iters)
    rows = [AriRow(**row) for row in df.to_dict(orient="records")]
    return AriResponse(rows=rows, summary=summarize_ari(df))
