from fastapi import APIRouter
from app.routes.run_routes import router as run_router
from app.routes.privacy_routes import router as privacy_router

# Main API Router
api_router = APIRouter()

# Register sub-routers
api_router.include_router(run_router, prefix="/api/runs", tags=["Runs"])
api_router.include_router(privacy_router, prefix="/api/privacy", tags=["Privacy"])
