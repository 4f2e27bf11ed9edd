from fastapi import APIRouter
from starlette.concurrency import run_in_threadpool

from app.core.logger import logger
from app.models.api_model import RunRequest, RunSummary
from app.services.experiment_service import run_experiment
from app.services.report_service import energy_to_sustained_accuracy

router = APIRouter()


@router.post("/", response_model=RunSummary)
async def submit_run(request: RunRequest):
    """
    Run one experiment synchronously and return its energy/accuracy summary.
    """
    cfg = request.config
    logger.info(f"Received run request: {cfg.label} seed={request.seed} rounds={cfg.rounds}")

    # CPU-bound; keep the event loop free
    result = await run_in_threadpool(run_experiment, cfg, request.seed)

    totals = result.ledger.totals()
    final = result.records[-1]
    sustained = [
        hit
        for target in cfg.report.accuracy_targets
        if (hit := energy_to_sustained_accuracy(result.records, target, cfg.report.sustain_window)) is not None
    ]
    return RunSummary(
        strategy=result.label,
        seed=result.seed,
        rounds=len(result.records),
        param_count=result.param_count,
        final_accuracy=final.accuracy,
        final_loss=final.loss,
        pre_j=totals.pre_j,
        train_j=totals.train_j,
        comm_j=totals.comm_j,
        total_j=totals.total_j,
        clustering_flops=result.clustering_flops,
        sustained=sustained,
        records=result.records if request.include_rounds else None,
    )
