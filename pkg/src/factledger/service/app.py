"""REST facade.

All routes live under ``/v1``. ``POST /v1/login`` exchanges credentials for
a bearer token. Audit-oriented reads (health, check-news, the suspicious
list, dashboard, blocks, chain verification) are public so third parties
can query the platform; everything else requires ``Authorization: Bearer
<token>``, and mutations return the transaction id and block location
alongside the domain view.

Each request is appended to a JSON-line request log with its latency, and a
run report (per-route count and p95 latency) is written on shutdown.
"""

from __future__ import annotations

import base64
import json
import math
import os
import threading
import time
from contextlib import asynccontextmanager
from typing import Optional

from fastapi import Depends, FastAPI, Header, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from ..codec import is_hex_digest
from ..errors import AuthFailed, BadRequest, FactledgerError, NotAuthorized
from ..node import FactledgerNode
from .auth import Session, SessionStore
from .external import ExternalRepositories, NoExternalRepositories

_STATUS_BY_CODE = {
    "AUTH_FAILED": 401,
    "NOT_AUTHORIZED": 403,
    "INACTIVE_CHECKER": 403,
    "NOT_FOUND": 404,
    "UNKNOWN_CHECKER": 404,
    "CHECKER_EXISTS": 409,
    "ALREADY_VOTED": 409,
    "NEWS_ALREADY_LABELED": 409,
    "TX_CONFLICT": 409,
    "QUORUM_NOT_REACHED": 409,
    "BAD_REQUEST": 400,
    "EMPTY_CONTENT": 400,
    "UNKNOWN_VERDICT": 400,
    "COMMITMENT_MISMATCH": 400,
    "EMPTY_VOTES": 400,
    "CODEC": 400,
    "CONFIG": 400,
    "UNKNOWN_OPERATION": 400,
}


class RequestStats:
    """Per-route latency accumulator feeding the run report."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._latencies: dict[str, list[float]] = {}

    def record(self, route: str, latency_ms: float) -> None:
        with self._lock:
            self._latencies.setdefault(route, []).append(latency_ms)

    @staticmethod
    def _p95(values: list[float]) -> float:
        # Nearest-rank percentile.
        ordered = sorted(values)
        index = max(0, math.ceil(0.95 * len(ordered)) - 1)
        return ordered[index]

    def report(self) -> dict:
        with self._lock:
            routes = {}
            for route, values in sorted(self._latencies.items()):
                routes[route] = {
                    "count": len(values),
                    "p95_ms": round(self._p95(values), 3),
                    "mean_ms": round(sum(values) / len(values), 3),
                }
            return {"routes": routes,
                    "total_requests": sum(len(v) for v in self._latencies.values())}


# --- request bodies -----------------------------------------------------------

class LoginBody(BaseModel):
    username: str = Field(min_length=1)
    credential: str


class NewsBody(BaseModel):
    content: str = Field(min_length=0)
    content_encoding: str = "utf-8"      # "utf-8" or "base64"
    content_format: str = "text"
    created_at: str = ""
    author: str = ""
    platform: str = ""
    excerpt: str = ""

    def content_bytes(self) -> bytes:
        if self.content_encoding == "utf-8":
            return self.content.encode("utf-8")
        if self.content_encoding == "base64":
            try:
                return base64.b64decode(self.content, validate=True)
            except Exception as exc:
                raise BadRequest("content is not valid base64") from exc
        raise BadRequest(
            f"unknown content_encoding {self.content_encoding!r}")


class VoteBody(BaseModel):
    verdict: str
    rationale: str = ""


class CheckerBody(BaseModel):
    checker_id: str = Field(min_length=1)
    display_name: str = Field(min_length=1)
    credential: str = Field(min_length=1)
    role: str = "checker"


class CheckerPatch(BaseModel):
    display_name: Optional[str] = None
    credential: Optional[str] = None


def create_app(node: FactledgerNode,
               external: Optional[ExternalRepositories] = None) -> FastAPI:
    sessions = SessionStore(node.cfg.session_ttl_hours)
    stats = RequestStats()
    if external is None:
        external = NoExternalRepositories()

    log_path = (os.path.join(node.cfg.data_dir, "requests.log")
                if (node.cfg.data_dir and node.cfg.request_log) else None)
    log_lock = threading.Lock()
    log_fh = open(log_path, "a", encoding="utf-8") if log_path else None

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        write_run_report(app)
        if log_fh is not None:
            log_fh.close()
        # Runs inside the server's graceful-shutdown window, which is the
        # only code guaranteed to execute when the process is stopped by a
        # signal; anything after the serve loop may never run.
        node.flush()

    app = FastAPI(title="factledger", version="0.1.0", docs_url=None,
                  redoc_url=None, openapi_url=None, lifespan=lifespan)
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    app.state.node = node
    app.state.sessions = sessions
    app.state.stats = stats

    def require_session(authorization: Optional[str] = Header(default=None)) -> Session:
        if not authorization or not authorization.startswith("Bearer "):
            raise AuthFailed("missing bearer token")
        session = sessions.resolve(authorization[len("Bearer "):])
        if session is None:
            raise AuthFailed("invalid or expired token")
        return session

    def require_curator(session: Session = Depends(require_session)) -> Session:
        # Role is re-read from the ledger so revocations apply immediately.
        checker = node.queries.get_checker(session.checker_id)
        if checker["role"] != "curator" or not checker["active"]:
            raise NotAuthorized("curator role required",
                                checker_id=session.checker_id)
        return session

    @app.exception_handler(FactledgerError)
    async def handle_domain_error(_request: Request, exc: FactledgerError):
        status = _STATUS_BY_CODE.get(exc.code, 500)
        payload = {"error": {"code": exc.code, "message": str(exc),
                             "details": exc.details}}
        headers = {"WWW-Authenticate": "Bearer"} if status == 401 else None
        return JSONResponse(payload, status_code=status, headers=headers)

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(_request: Request,
                                      exc: RequestValidationError):
        return JSONResponse(
            {"error": {"code": "BAD_REQUEST", "message": "invalid request body",
                       "details": {"errors": exc.errors()}}},
            status_code=400)

    @app.middleware("http")
    async def log_requests(request: Request, call_next):
        start = time.perf_counter()
        response = await call_next(request)
        latency_ms = (time.perf_counter() - start) * 1000.0
        route = request.scope.get("route")
        pattern = getattr(route, "path", request.url.path)
        stats.record(pattern, latency_ms)
        if log_fh is not None:
            line = json.dumps({
                "ts": time.time(),
                "method": request.method,
                "path": request.url.path,
                "route": pattern,
                "status": response.status_code,
                "latency_ms": round(latency_ms, 3),
            }, sort_keys=True)
            with log_lock:
                log_fh.write(line + "\n")
                log_fh.flush()
        return response

    # --- public ----------------------------------------------------------------

    @app.get("/v1/health")
    def health():
        return {"status": "ok",
                "chain_height": node.network.primary.ledger.height}

    @app.post("/v1/login")
    def login(body: LoginBody):
        checker = node.verify_credential(body.username, body.credential)
        session = sessions.issue(body.username, checker["role"])
        return {"token": session.token, "checker": checker}

    # --- news ------------------------------------------------------------------

    @app.post("/v1/news", status_code=201)
    def register_news(body: NewsBody,
                      session: Session = Depends(require_session)):
        result = node.register_news(
            submitter=session.checker_id,
            content=body.content_bytes(),
            content_format=body.content_format,
            created_at=body.created_at,
            author=body.author,
            platform=body.platform,
            excerpt=body.excerpt,
        )
        payload = dict(result.response)
        payload.update(result.location())
        if payload.get("duplicate"):
            return JSONResponse(payload, status_code=200)
        return payload

    @app.get("/v1/news")
    def list_news(session: Session = Depends(require_session)):
        return {"news": node.queries.list_news()}

    @app.get("/v1/news/suspicious")
    def list_suspicious():
        return {"news": node.queries.list_suspicious(),
                "threshold": node.cfg.suspicion_threshold}

    @app.get("/v1/check-news/{news_id}")
    def check_news(news_id: str):
        # Public on purpose: third parties may audit any asset by digest.
        _check_id(news_id)
        view = node.queries.check_news(news_id)
        view["external_match"] = external.lookup(news_id)
        return view

    @app.get("/v1/news/{news_id}/votes")
    def list_votes(news_id: str, session: Session = Depends(require_session)):
        _check_id(news_id)
        node.queries.check_news(news_id)  # 404 on unknown asset
        return {"votes": node.queries.votes_for(news_id)}

    @app.post("/v1/news/{news_id}/votes", status_code=201)
    def cast_vote(news_id: str, body: VoteBody,
                  session: Session = Depends(require_session)):
        _check_id(news_id)
        result = node.cast_vote(session.checker_id, news_id,
                                body.verdict, body.rationale)
        payload = dict(result.response)
        payload.update(result.location())
        return payload

    @app.post("/v1/news/{news_id}/finalize")
    def finalize(news_id: str, session: Session = Depends(require_curator)):
        _check_id(news_id)
        result = node.finalize_consensus(session.checker_id, news_id)
        payload = dict(result.response)
        payload.update(result.location())
        return payload

    @app.get("/v1/news/{news_id}/classification-order")
    def classification_order(news_id: str,
                             session: Session = Depends(require_curator)):
        _check_id(news_id)
        return {"orders": node.queries.classification_order(news_id)}

    @app.get("/v1/notifications")
    def notifications(session: Session = Depends(require_session)):
        return {"notifications":
                node.queries.notifications(session.checker_id)}

    # --- fact-checkers -------------------------------------------------------------

    @app.get("/v1/fact-checkers")
    def list_checkers(session: Session = Depends(require_session)):
        return {"checkers": node.queries.list_checkers()}

    @app.post("/v1/fact-checkers", status_code=201)
    def create_checker(body: CheckerBody,
                       session: Session = Depends(require_curator)):
        result = node.create_checker(session.checker_id, body.checker_id,
                                     body.display_name, body.credential,
                                     role=body.role)
        payload = dict(result.response)
        payload.update(result.location())
        return payload

    @app.get("/v1/fact-checkers/{checker_id}")
    def get_checker(checker_id: str,
                    session: Session = Depends(require_session)):
        return node.queries.get_checker(checker_id)

    @app.patch("/v1/fact-checkers/{checker_id}")
    def update_checker(checker_id: str, body: CheckerPatch,
                       session: Session = Depends(require_session)):
        result = node.update_checker(session.checker_id, checker_id,
                                     display_name=body.display_name,
                                     credential=body.credential)
        payload = dict(result.response)
        payload.update(result.location())
        return payload

    @app.delete("/v1/fact-checkers/{checker_id}")
    def deactivate_checker(checker_id: str,
                           session: Session = Depends(require_curator)):
        result = node.deactivate_checker(session.checker_id, checker_id)
        payload = dict(result.response)
        payload.update(result.location())
        return payload

    # --- chain -----------------------------------------------------------------

    @app.get("/v1/dashboard")
    def dashboard():
        return node.queries.dashboard()

    @app.get("/v1/rewards/total")
    def rewards_total(session: Session = Depends(require_session)):
        return {"total": node.queries.reward_total(),
                "reward_per_aligned_vote": node.cfg.reward_per_aligned_vote}

    @app.get("/v1/blocks/{height}")
    def get_block(height: int):
        return node.get_block(height)

    @app.get("/v1/chain/verify")
    def verify_chain():
        return node.verify_chain().to_json()

    if node.cfg.ui_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=node.cfg.ui_dir, html=True),
                  name="ui")

    return app


def write_run_report(app: FastAPI) -> Optional[str]:
    """Dump per-route latency stats; returns the report path."""
    node: FactledgerNode = app.state.node
    stats: RequestStats = app.state.stats
    if not node.cfg.data_dir:
        return None
    report = stats.report()
    report["dashboard"] = node.queries.dashboard()
    path = os.path.join(node.cfg.data_dir, "run_report.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
    return path


def _check_id(news_id: str) -> None:
    if not is_hex_digest(news_id):
        raise BadRequest("news_id must be a 64-char lowercase hex digest")
