"""HTTP front end for the scoring model.

Endpoints:
  POST /v1/score   {"tokens", "mask_index", "candidates"} -> {"scores"}
  POST /v1/topn    {"tokens", "mask_index", "topn"} -> {"candidates", "scores"}
  GET  /v1/health  200 once the model is ready

Every error response carries {"error": "..."}: 400 for malformed requests
(including candidates the model cannot accommodate), 422 for a mask_index
outside the token list, 503 while the model is loading or failed to load.
The model lock serializes inference, so concurrent requests are safe.
"""

from __future__ import annotations

import threading
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from lm_service.config import ServiceConfig
from lm_service.model import (
    MaskedLanguageModel,
    ModelError,
    NotReadyError,
    RequestError,
)


class MaskIndexError(ValueError):
    pass


class ScoreRequest(BaseModel):
    tokens: list[str] = Field(min_length=1)
    mask_index: int
    candidates: list[str] = Field(min_length=1)


class TopnRequest(BaseModel):
    tokens: list[str] = Field(min_length=1)
    mask_index: int
    topn: int = Field(ge=1)


def _check_mask_index(tokens: list[str], mask_index: int) -> None:
    if not 0 <= mask_index < len(tokens):
        raise MaskIndexError(
            f"mask_index {mask_index} out of range for {len(tokens)} tokens"
        )


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(
    config: ServiceConfig | None = None,
    model: MaskedLanguageModel | None = None,
) -> FastAPI:
    """Build the application; loads the model in the background on startup.

    Pass an already loaded `model` to serve immediately (the CLI does this
    so a broken model kills the process instead of a half-up server).
    """
    if model is None:
        if config is None:
            raise ValueError("either a config or a model is required")
        model = MaskedLanguageModel(config)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if not model.ready and model.load_error is None:
            def load() -> None:
                try:
                    model.load()
                except ModelError:
                    pass  # surfaced through load_error on every endpoint

            threading.Thread(target=load, daemon=True).start()
        yield

    app = FastAPI(lifespan=lifespan)
    app.state.model = model

    @app.exception_handler(RequestValidationError)
    async def on_invalid(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        where = ".".join(str(p) for p in first.get("loc", ()) if p != "body")
        msg = first.get("msg", "invalid request")
        return _error(400, f"{where}: {msg}" if where else msg)

    @app.exception_handler(RequestError)
    async def on_bad_request(request: Request, exc: RequestError):
        return _error(400, str(exc))

    @app.exception_handler(MaskIndexError)
    async def on_bad_mask(request: Request, exc: MaskIndexError):
        return _error(422, str(exc))

    @app.exception_handler(NotReadyError)
    async def on_not_ready(request: Request, exc: NotReadyError):
        return _error(503, str(exc))

    @app.get("/v1/health")
    def health():
        if model.ready:
            return {"status": "ok"}
        return _error(503, model.load_error or "model is still loading")

    @app.post("/v1/score")
    def score(request: ScoreRequest):
        _check_mask_index(request.tokens, request.mask_index)
        scores = model.score(request.tokens, request.mask_index, request.candidates)
        return {"scores": scores}

    @app.post("/v1/topn")
    def topn(request: TopnRequest):
        _check_mask_index(request.tokens, request.mask_index)
        words, scores = model.topn(request.tokens, request.mask_index, request.topn)
        return {"candidates": words, "scores": scores}

    return app
