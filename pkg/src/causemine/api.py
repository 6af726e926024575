"""HTTP service over run directories: review candidates, collect feedback,
trigger evolution, read metrics and the blocklist.

The service is stateless between requests except for the per-run evolve
locks: evolve is exclusive per run, and a second concurrent call gets 409
instead of queueing. An optional static bearer token guards everything
except /health.
"""
from __future__ import annotations

import json
import threading
from datetime import datetime, timezone
from pathlib import Path

from fastapi import Body, Depends, FastAPI, HTTPException, Query, Request

from . import pipeline
from .errors import CauseMineError, NotFoundError
from .feedback import VerdictRecord, append_verdict, load_verdicts

MAX_PAGE = 500


def _read_jsonl(path: Path) -> list[dict]:
    if not path.exists():
        return []
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


def create_app(runs_root: str | Path, api_token: str | None = None) -> FastAPI:
    app = FastAPI(title="causemine", version="1.0")
    app.state.runs_root = Path(runs_root)
    app.state.api_token = api_token
    app.state.evolve_locks: dict[str, threading.Lock] = {}
    app.state.locks_guard = threading.Lock()

    def check_token(request: Request) -> None:
        token = app.state.api_token
        if token is None:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="missing or invalid token")

    def run_dir_for(run_id: str) -> Path:
        run_dir = app.state.runs_root / run_id
        if not (run_dir / "run.json").exists():
            raise HTTPException(status_code=404, detail=f"no run named {run_id!r}")
        return run_dir

    def evolve_lock(run_id: str) -> threading.Lock:
        with app.state.locks_guard:
            return app.state.evolve_locks.setdefault(run_id, threading.Lock())

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/runs", dependencies=[Depends(check_token)])
    def list_runs() -> list[dict]:
        root = app.state.runs_root
        out = []
        if root.exists():
            for child in sorted(root.iterdir()):
                if (child / "run.json").exists():
                    state = pipeline.load_state(child)
                    out.append({
                        "run_id": state.run_id,
                        "stage": state.stage,
                        "status": state.status,
                        "iteration": state.iteration,
                        "model_ids": state.model_ids,
                        "created_at": state.created_at,
                    })
        return out

    @app.get("/runs/{run_id}/candidates", dependencies=[Depends(check_token)])
    def candidates(
        run_id: str,
        status: str | None = Query(default=None),
        offset: int = Query(default=0, ge=0),
        limit: int = Query(default=50, ge=1, le=MAX_PAGE),
    ) -> dict:
        run_dir = run_dir_for(run_id)
        state = pipeline.load_state(run_dir)
        rows = _read_jsonl(pipeline.iter_dir(run_dir, state.iteration) / "candidates.jsonl")
        reviewed = {r.quad_id for r in load_verdicts(run_dir / "verdicts.jsonl")}
        for row in rows:
            row["status"] = "reviewed" if row["quad_id"] in reviewed else "pending"
        if status is not None:
            if status not in ("pending", "reviewed"):
                raise HTTPException(status_code=400, detail="status must be pending or reviewed")
            rows = [r for r in rows if r["status"] == status]
        return {
            "items": rows[offset:offset + limit],
            "total": len(rows),
            "offset": offset,
            "limit": limit,
        }

    def known_triples(run_dir: Path) -> dict[str, dict]:
        """quad_id -> prediction row, across every iteration of the run.

        The triple universe is fixed by the test split, so any iteration
        resolves a quad id; later iterations just overwrite equal rows.
        """
        state = pipeline.load_state(run_dir)
        out: dict[str, dict] = {}
        for n in range(state.iteration + 1):
            path = pipeline.iter_dir(run_dir, n) / "predictions.jsonl"
            for row in _read_jsonl(path):
                if row.get("kind") == "triple":
                    out[row["item_id"]] = row
        return out

    @app.post("/runs/{run_id}/feedback", dependencies=[Depends(check_token)])
    def post_feedback(run_id: str, body: dict = Body(...)) -> dict:
        run_dir = run_dir_for(run_id)
        for field in ("quad_id", "verdict", "expert_id"):
            value = body.get(field)
            if not isinstance(value, str) or not value.strip():
                raise HTTPException(status_code=400, detail=f"{field} must be a non-empty string")
        if body["verdict"] not in ("causal", "non_causal"):
            raise HTTPException(status_code=400, detail="verdict must be causal or non_causal")
        note = body.get("note")
        if note is not None and not isinstance(note, str):
            raise HTTPException(status_code=400, detail="note must be a string")
        override = body.get("confidence_override")
        if override is not None and not isinstance(override, (int, float)):
            raise HTTPException(status_code=400, detail="confidence_override must be a number")
        triple = known_triples(run_dir).get(body["quad_id"])
        if triple is None:
            raise HTTPException(
                status_code=404,
                detail=f"no candidate quad {body['quad_id']!r} in run {run_id!r}",
            )
        record = VerdictRecord(
            quad_id=body["quad_id"],
            verdict=body["verdict"],
            expert_id=body["expert_id"],
            timestamp=datetime.now(timezone.utc).isoformat(),
            note=note,
            confidence_override=float(override) if override is not None else None,
            subject=triple["subject"],
            trigger=triple["trigger"],
            object=triple["object"],
        )
        append_verdict(run_dir / "verdicts.jsonl", record)
        return {"accepted": True, "quad_id": record.quad_id}

    @app.post("/runs/{run_id}/evolve", dependencies=[Depends(check_token)])
    def post_evolve(run_id: str) -> dict:
        run_dir = run_dir_for(run_id)
        lock = evolve_lock(run_id)
        if not lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail=f"evolve already running for {run_id!r}")
        try:
            return pipeline.evolve(run_dir)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except CauseMineError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        finally:
            lock.release()

    @app.get("/runs/{run_id}/metrics", dependencies=[Depends(check_token)])
    def metrics(run_id: str) -> dict:
        run_dir = run_dir_for(run_id)
        state = pipeline.load_state(run_dir)
        report_path = pipeline.iter_dir(run_dir, state.iteration) / "report.json"
        if not report_path.exists():
            raise HTTPException(status_code=404, detail="run has no evaluated iteration yet")
        with open(report_path, encoding="utf-8") as fh:
            return json.load(fh)

    @app.get("/runs/{run_id}/blocklist", dependencies=[Depends(check_token)])
    def blocklist(run_id: str) -> dict:
        run_dir = run_dir_for(run_id)
        rows = _read_jsonl(run_dir / "blocklist.jsonl")
        return {
            "entries": [
                {
                    "phrase": r["phrase"],
                    "subject": r.get("subject", ""),
                    "trigger": r.get("trigger", ""),
                    "object": r.get("object", ""),
                    "added_at": r.get("added_at", ""),
                }
                for r in rows
            ],
            "total": len(rows),
        }

    return app
