"""HTTP + WebSocket session service for interactive play and analysis.

Commands are request/response over HTTP; state changes, AI replies and
analysis progress are also pushed over a per-session WebSocket.  The
service layer contains no game logic beyond delegation to the engine, so
everything here is replaceable by the CLI.

Endpoints:
  POST /sessions                create a session from rule text
  GET  /sessions/{id}           session state snapshot
  GET  /sessions/{id}/moves     legal moves for the current position
  POST /sessions/{id}/moves     play the human move; AI replies if seated
  POST /analysis                start a background analysis job
  GET  /analysis/{id}           poll progress or fetch the report
  WS   /sessions/{id}/events    server-push message stream

Each session is single-writer: its commands are serialized by a lock, and
AI computation runs in a worker thread so other sessions stay responsive.
Sessions are in-memory with a two-hour idle eviction.
"""

from __future__ import annotations

import asyncio
import datetime
import random
import secrets
import time
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .agents import AgentConfig, make_agent
from .catalog import v1_catalog, validate
from .engine import (
    CompileError,
    GameModel,
    GameState,
    Move,
    OFF_BOARD,
    apply_move,
    compile_game,
    initial_state,
)
from .grammar import LudemeTree, ParseError, parse
from .metrics import AnalysisJob, run_analysis

SESSION_IDLE_SECONDS = 2 * 60 * 60


# ---------------------------------------------------------------------------
# Wire helpers
# ---------------------------------------------------------------------------

def _seat_name(player: Optional[int]) -> Optional[str]:
    return None if player is None else f"P{player}"


def _seat_number(name: Optional[str]) -> Optional[int]:
    if name in (None, "", "None"):
        return None
    if name in ("P1", "P2"):
        return int(name[1])
    raise ValueError(f"bad seat {name!r}")


def move_payload(move: Move) -> dict:
    return {
        "kind": move.kind_name,
        "from": None if move.frm == OFF_BOARD else move.frm,
        "to": None if move.to == OFF_BOARD else move.to,
        "captures": list(move.captures),
    }


_KIND_BY_NAME = {"Place": 0, "Step": 1, "Leap": 2, "TrackMove": 3, "Pass": 4}


def move_from_payload(data: dict) -> Move:
    kind = _KIND_BY_NAME.get(str(data.get("kind")))
    if kind is None:
        raise ValueError(f"bad move kind {data.get('kind')!r}")
    frm = data.get("from")
    to = data.get("to")
    return Move(
        kind,
        OFF_BOARD if frm is None else int(frm),
        OFF_BOARD if to is None else int(to),
        tuple(int(c) for c in data.get("captures", [])),
    )


def board_meta(model: GameModel) -> dict:
    tracks = {}
    for track in model.board.tracks:
        if track is not None:
            tracks[f"P{track.owner}"] = {
                "sites": list(track.sites),
                "bearOff": track.has_off,
            }
    return {
        "rows": model.board.rows,
        "cols": model.board.cols,
        "siteCount": model.board.site_count,
        "tracks": tracks,
    }


def state_payload(model: GameModel, state: GameState) -> dict:
    sites = []
    for occ in state.sites:
        if not occ:
            sites.append(None)
        else:
            player, t = occ >> 3, occ & 7
            sites.append({"player": f"P{player}", "piece": model.type_name(player, t)})
    outcome = state.outcome
    return {
        "moveNumber": state.move_number,
        "mover": _seat_name(state.mover),
        "status": "ongoing" if outcome is None else outcome.kind,
        "winner": _seat_name(outcome.winner) if outcome else None,
        "pendingDice": state.pending_dice,
        "sites": sites,
        "pools": {
            f"P{p}": {
                model.type_name(p, t): count
                for t, count in enumerate(state.pools[p - 1])
                if count is not None
            }
            for p in (1, 2)
        },
        "borneOff": {"P1": state.off[0], "P2": state.off[1]},
        "legalMoves": [move_payload(m) for m in state.legal],
    }


def _error(status: int, code: str, message: str, **extra) -> JSONResponse:
    return JSONResponse({"code": code, "message": message, **extra}, status_code=status)


# ---------------------------------------------------------------------------
# Sessions and jobs
# ---------------------------------------------------------------------------

@dataclass
class Session:
    id: str
    lud_text: str
    tree: LudemeTree
    model: GameModel
    state: GameState
    human_seat: Optional[int]
    ai_config: Optional[AgentConfig]
    dice_seed: int
    dice_rng: random.Random
    ai_rng: random.Random
    created_at: str
    history: list[Move] = field(default_factory=list)
    seq: int = 0
    last_touched: float = field(default_factory=time.monotonic)
    subscribers: list[asyncio.Queue] = field(default_factory=list)
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)

    def next_seq(self) -> int:
        self.seq += 1
        return self.seq

    def check_replay(self) -> None:
        """Debug invariant: folding history over the initial state must
        reproduce the current state exactly."""
        rng = random.Random(self.dice_seed)
        state = initial_state(self.model, rng)
        for move in self.history:
            state = apply_move(self.model, state, move, rng)
        assert state == self.state, "session history replay diverged"


@dataclass
class AnalysisJobState:
    id: str
    total: int
    done: int = 0
    report: Optional[dict] = None
    error: Optional[str] = None
    session_id: Optional[str] = None


class CreateSessionBody(BaseModel):
    ludText: str
    humanSeat: Optional[str] = "P1"
    aiConfig: Optional[dict] = None


class MoveBody(BaseModel):
    move: dict


class AnalysisBody(BaseModel):
    job: dict
    sessionId: Optional[str] = None


def create_app(ui_dir: Optional[str] = None, debug_checks: bool = True) -> FastAPI:
    app = FastAPI(title="ludekit service")
    sessions: dict[str, Session] = {}
    jobs: dict[str, AnalysisJobState] = {}
    app.state.sessions = sessions
    app.state.jobs = jobs

    def evict_idle() -> None:
        now = time.monotonic()
        for sid in [s for s, sess in sessions.items() if now - sess.last_touched > SESSION_IDLE_SECONDS]:
            del sessions[sid]

    def get_session(session_id: str) -> Optional[Session]:
        evict_idle()
        sess = sessions.get(session_id)
        if sess:
            sess.last_touched = time.monotonic()
        return sess

    async def publish(sess: Session, message: dict) -> None:
        for queue in list(sess.subscribers):
            await queue.put(message)

    def session_message(sess: Session, type_tag: str, **payload) -> dict:
        return {
            "type": type_tag,
            "sessionId": sess.id,
            "seq": sess.next_seq(),
            **payload,
        }

    @app.post("/sessions", status_code=201)
    async def create_session(body: CreateSessionBody):
        evict_idle()
        try:
            tree = parse(body.ludText)
        except ParseError as err:
            return _error(
                400,
                "parse-error",
                "rule text does not parse",
                errors=[
                    {"code": i.code, "message": i.message, "line": i.line, "col": i.col}
                    for i in err.issues
                ],
            )
        report = validate(tree, v1_catalog())
        if report.hole_count > 0:
            return _error(
                422,
                "partial-game",
                f"partial game with {report.hole_count} hole(s); use the reconstruction workflow",
                holeCount=report.hole_count,
            )
        if report.issues:
            return _error(400, "invalid-game", "; ".join(report.messages()))
        try:
            model = compile_game(tree)
        except CompileError as err:
            return _error(400, "compile-error", str(err))

        try:
            human_seat = _seat_number(body.humanSeat)
        except ValueError as err:
            return _error(400, "bad-seat", str(err))
        ai_config = None
        if body.aiConfig is not None:
            try:
                ai_config = AgentConfig.from_dict(body.aiConfig)
            except (KeyError, ValueError) as err:
                return _error(400, "bad-agent", f"bad aiConfig: {err}")
        elif human_seat is not None:
            ai_config = AgentConfig("uct", 1000)

        dice_seed = secrets.randbits(32)
        dice_rng = random.Random(dice_seed)
        sess = Session(
            id=secrets.token_hex(16),
            lud_text=body.ludText,
            tree=tree,
            model=model,
            state=initial_state(model, dice_rng),
            human_seat=human_seat,
            ai_config=ai_config,
            dice_seed=dice_seed,
            dice_rng=dice_rng,
            ai_rng=random.Random((ai_config.seed if ai_config else 0) ^ dice_seed),
            created_at=datetime.datetime.now(datetime.timezone.utc).isoformat(),
        )
        sessions[sess.id] = sess
        return {
            "sessionId": sess.id,
            "createdAt": sess.created_at,
            "humanSeat": _seat_name(sess.human_seat),
            "aiConfig": sess.ai_config.to_dict() if sess.ai_config else None,
            "board": board_meta(model),
            "name": model.name,
            "state": session_message(sess, "state", state=state_payload(model, sess.state)),
        }

    @app.get("/sessions/{session_id}")
    async def get_session_state(session_id: str):
        sess = get_session(session_id)
        if sess is None:
            return _error(404, "unknown-session", f"no session {session_id}")
        return {
            "sessionId": sess.id,
            "createdAt": sess.created_at,
            "humanSeat": _seat_name(sess.human_seat),
            "board": board_meta(sess.model),
            "name": sess.model.name,
            "moveCount": len(sess.history),
            "state": session_message(sess, "state", state=state_payload(sess.model, sess.state)),
        }

    @app.get("/sessions/{session_id}/moves")
    async def get_legal_moves(session_id: str):
        sess = get_session(session_id)
        if sess is None:
            return _error(404, "unknown-session", f"no session {session_id}")
        return {
            "sessionId": sess.id,
            "legalMoves": [move_payload(m) for m in sess.state.legal],
        }

    @app.post("/sessions/{session_id}/moves")
    async def submit_move(session_id: str, body: MoveBody):
        sess = get_session(session_id)
        if sess is None:
            return _error(404, "unknown-session", f"no session {session_id}")
        async with sess.lock:
            state = sess.state
            if state.outcome is not None:
                return _error(409, "game-over", "the game has ended")
            if sess.human_seat is not None and state.mover != sess.human_seat:
                return _error(409, "not-your-turn", f"it is {_seat_name(state.mover)}'s turn")
            try:
                move = move_from_payload(body.move)
            except ValueError as err:
                return _error(422, "bad-move", str(err))
            if move not in state.legal:
                return _error(
                    422,
                    "illegal-move",
                    "move is not legal in the current position",
                    legalMoves=[move_payload(m) for m in state.legal],
                )

            messages = []
            moved_by = state.mover
            sess.state = apply_move(sess.model, state, move, sess.dice_rng)
            sess.history.append(move)
            if debug_checks:
                sess.check_replay()
            msg = session_message(
                sess,
                "movePlayed",
                move=move_payload(move),
                by=_seat_name(moved_by),
                state=state_payload(sess.model, sess.state),
            )
            messages.append(msg)
            await publish(sess, msg)

            # AI reply, off the event loop so other sessions stay live.
            if (
                sess.ai_config is not None
                and sess.human_seat is not None
                and sess.state.outcome is None
                and sess.state.mover != sess.human_seat
            ):
                model = sess.model
                ai_state = sess.state
                ai_seat = ai_state.mover
                agent = make_agent(sess.ai_config)
                loop = asyncio.get_running_loop()
                ai_move, _stats = await loop.run_in_executor(
                    None, lambda: agent.select(model, ai_state, sess.ai_rng)
                )
                sess.state = apply_move(model, sess.state, ai_move, sess.dice_rng)
                sess.history.append(ai_move)
                if debug_checks:
                    sess.check_replay()
                ai_msg = session_message(
                    sess,
                    "movePlayed",
                    move=move_payload(ai_move),
                    by=_seat_name(ai_seat),
                    state=state_payload(model, sess.state),
                )
                messages.append(ai_msg)
                await publish(sess, ai_msg)

            return {"sessionId": sess.id, "messages": messages}

    # -- analysis ----------------------------------------------------------

    @app.post("/analysis")
    async def start_analysis(body: AnalysisBody):
        try:
            job = AnalysisJob.from_dict(body.job)
        except (KeyError, ValueError) as err:
            return _error(400, "bad-job", f"invalid job config: {err}")
        try:
            tree = parse(job.lud_text)
            report = validate(tree, v1_catalog())
            if not report.is_complete:
                return _error(400, "bad-job", "job game is not complete/valid")
            compile_game(tree)
        except (ParseError, CompileError) as err:
            return _error(400, "bad-job", str(err))

        job_id = secrets.token_hex(8)
        job_state = AnalysisJobState(id=job_id, total=job.total_trials(), session_id=body.sessionId)
        jobs[job_id] = job_state
        sess = sessions.get(body.sessionId) if body.sessionId else None
        loop = asyncio.get_running_loop()

        def on_progress(done: int, total: int) -> None:
            job_state.done = done
            if sess is not None and (done % 25 == 0 or done == total):
                msg = session_message(
                    sess, "analysisProgress", jobId=job_id, done=done, total=total
                )
                asyncio.run_coroutine_threadsafe(publish(sess, msg), loop)

        async def run() -> None:
            try:
                result = await loop.run_in_executor(
                    None, lambda: run_analysis(job, progress=on_progress)
                )
                job_state.report = result.to_dict()
                if sess is not None:
                    msg = session_message(
                        sess, "analysisDone", jobId=job_id, report=job_state.report
                    )
                    await publish(sess, msg)
            except Exception as err:  # surfaced through polling
                job_state.error = f"{type(err).__name__}: {err}"

        asyncio.create_task(run())
        return {"jobId": job_id, "total": job_state.total}

    @app.get("/analysis/{job_id}")
    async def poll_analysis(job_id: str):
        job_state = jobs.get(job_id)
        if job_state is None:
            return _error(404, "unknown-job", f"no analysis job {job_id}")
        if job_state.error:
            return {"jobId": job_id, "status": "error", "message": job_state.error}
        if job_state.report is not None:
            return {"jobId": job_id, "status": "done", "report": job_state.report}
        total = max(1, job_state.total)
        return {
            "jobId": job_id,
            "status": "running",
            "done": job_state.done,
            "total": job_state.total,
            "progress": job_state.done / total,
        }

    # -- events ------------------------------------------------------------

    @app.websocket("/sessions/{session_id}/events")
    async def events(websocket: WebSocket, session_id: str):
        sess = sessions.get(session_id)
        if sess is None:
            await websocket.close(code=4404)
            return
        await websocket.accept()
        queue: asyncio.Queue = asyncio.Queue()
        sess.subscribers.append(queue)
        try:
            await websocket.send_json(
                session_message(sess, "state", state=state_payload(sess.model, sess.state))
            )
            while True:
                message = await queue.get()
                await websocket.send_json(message)
        except WebSocketDisconnect:
            pass
        finally:
            if queue in sess.subscribers:
                sess.subscribers.remove(queue)

    if ui_dir:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
