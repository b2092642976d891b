"""
FastAPI application entry point for the ED simulation service.
"""
from fastapi import FastAPI  # type: ignore[import]

from app.api.routes import router  # type: ignore[import]


app = FastAPI(title="ED Simulation with Admission Prediction", version="0.1.0")

app.include_router(router)


@app.get("/health")
def health():
    """Health check endpoint."""
    return {"status": "ok"}
