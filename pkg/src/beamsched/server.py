"""Newline-delimited message protocol exposing the scheduling environment.

One JSON object per line, one reply per request, request ids echoed back.
Message types and payloads (full field-by-field reference in
docs/protocol.md, golden transcript in docs/golden_transcript.txt):

  client -> server                server -> client
  ----------------                ----------------
  hello {id}                      hello {id, protocol, k, horizon}
  reset {id, episode?}            reset_ok {id, episode, state, r_star,
                                            horizon, paths, pct_paths_blocked}
  step {id, action}               step_ok {id, state, reward, done,
                                           accepted, delivered_rate}
  reselect {id}                   reselect_ok {id, state, paths}
  bye {id}                        bye {id}
  (anything malformed/misplaced)  error {id, code, message}

Error codes: parse, ordering, bad_action, unknown_type, internal.  The
session survives every error and stays usable.  Numbers are serialized via
Python float repr (17 significant digits, exact round trip).

Transports: a TCP listener (one independent session per connection, fresh
environment each) and standard streams.  Training is strictly
request-reply; no pipelining is offered.
"""

from __future__ import annotations

import json
import socket
import socketserver
import sys
import threading
from typing import Callable

from .env import EnvConfig, MalformedActionError, RateEnv

PROTOCOL_VERSION = 1


def encode(message: dict) -> str:
    """Canonical one-line serialization (stable key order, repr floats)."""
    return json.dumps(message, sort_keys=True, separators=(",", ":"), allow_nan=False)


class ProtocolSession:
    """State machine for one connection: hello, then reset/step/reselect
    freely, then bye.  Every handled line yields exactly one reply line."""

    def __init__(self, config: EnvConfig):
        self.env = RateEnv(config)
        self.greeted = False
        self.closed = False
        self.has_episode = False
        self._next_episode = 0

    # -- helpers -----------------------------------------------------------

    @staticmethod
    def _error(msg_id, code: str, message: str) -> str:
        return encode({"type": "error", "id": msg_id, "code": code, "message": message})

    def _paths_payload(self) -> list[dict]:
        return [
            {"id": info.id, "capacity": info.capacity, "success_prob": info.success_prob}
            for info in self.env.path_metadata()
        ]

    # -- dispatch ----------------------------------------------------------

    def handle_line(self, line: str) -> str:
        try:
            message = json.loads(line)
        except (json.JSONDecodeError, UnicodeDecodeError, RecursionError):
            return self._error(None, "parse", "line is not a JSON object")
        if not isinstance(message, dict) or not isinstance(message.get("type"), str):
            return self._error(None, "parse", "message must be an object with a type field")
        msg_id = message.get("id")
        kind = message["type"]
        try:
            return self._dispatch(kind, msg_id, message)
        except MalformedActionError as exc:
            return self._error(msg_id, "bad_action", str(exc))
        except Exception as exc:  # session must survive anything
            return self._error(msg_id, "internal", f"{type(exc).__name__}: {exc}")

    def _dispatch(self, kind: str, msg_id, message: dict) -> str:
        if kind == "bye":
            self.closed = True
            return encode({"type": "bye", "id": msg_id})
        if self.closed:
            return self._error(msg_id, "ordering", "session already said bye")
        if kind == "hello":
            self.greeted = True
            return encode(
                {
                    "type": "hello",
                    "id": msg_id,
                    "protocol": PROTOCOL_VERSION,
                    "k": self.env.k,
                    "horizon": self.env.config.horizon,
                }
            )
        if not self.greeted:
            return self._error(msg_id, "ordering", "say hello first")
        if kind == "reset":
            episode = message.get("episode")
            if episode is not None and (not isinstance(episode, int) or episode < 0):
                return self._error(msg_id, "ordering", "episode must be a nonnegative integer")
            if episode is None:
                episode = self._next_episode
            state, _ = self.env.reset(episode)
            self._next_episode = episode + 1
            self.has_episode = True
            return encode(
                {
                    "type": "reset_ok",
                    "id": msg_id,
                    "episode": episode,
                    "state": [float(v) for v in state],
                    "r_star": self.env.target_rate,
                    "horizon": self.env.config.horizon,
                    "paths": self._paths_payload(),
                    "pct_paths_blocked": self.env.pct_paths_blocked(),
                }
            )
        if kind == "step":
            if not self.has_episode:
                return self._error(msg_id, "ordering", "reset before stepping")
            if self.env.done:
                return self._error(msg_id, "ordering", "episode is over; reset first")
            action = message.get("action")
            if not isinstance(action, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in action
            ):
                raise MalformedActionError("action must be a list of numbers")
            outcome = self.env.step(action)
            return encode(
                {
                    "type": "step_ok",
                    "id": msg_id,
                    "state": list(outcome.state),
                    "reward": outcome.reward,
                    "done": outcome.done,
                    "accepted": outcome.accepted,
                    "delivered_rate": outcome.delivered_rate,
                }
            )
        if kind == "reselect":
            if not self.has_episode:
                return self._error(msg_id, "ordering", "reset before reselecting")
            state, _ = self.env.reselect()
            return encode(
                {
                    "type": "reselect_ok",
                    "id": msg_id,
                    "state": [float(v) for v in state],
                    "paths": self._paths_payload(),
                }
            )
        return self._error(msg_id, "unknown_type", f"unknown message type {kind!r}")


def run_session(config: EnvConfig, recv_line: Callable[[], str | None], send_line: Callable[[str], None]) -> None:
    """Drive one session over line callbacks until EOF or bye."""
    session = ProtocolSession(config)
    while True:
        line = recv_line()
        if line is None:
            return
        line = line.strip("\r\n")
        if not line:
            continue
        send_line(session.handle_line(line))
        if session.closed:
            return


class _Handler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        def recv() -> str | None:
            raw = self.rfile.readline()
            if not raw:
                return None
            return raw.decode("utf-8", errors="replace")

        def send(reply: str) -> None:
            self.wfile.write((reply + "\n").encode("utf-8"))
            self.wfile.flush()

        run_session(self.server.env_config, recv, send)  # type: ignore[attr-defined]


class EnvServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, config: EnvConfig, host: str = "127.0.0.1", port: int = 0):
        super().__init__((host, port), _Handler)
        self.env_config = config

    @property
    def endpoint(self) -> tuple[str, int]:
        return self.server_address[0], self.server_address[1]


def serve_tcp(config: EnvConfig, host: str = "127.0.0.1", port: int = 5555) -> None:
    """Serve sessions until interrupted (one environment per connection)."""
    with EnvServer(config, host, port) as server:
        addr = server.endpoint
        print(f"serving on tcp:{addr[0]}:{addr[1]}", file=sys.stderr, flush=True)
        server.serve_forever()


def start_server_thread(config: EnvConfig, host: str = "127.0.0.1", port: int = 0) -> EnvServer:
    """Background listener for tests and embedding; caller shuts it down."""
    server = EnvServer(config, host, port)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server


def serve_stdio(config: EnvConfig) -> None:
    """One session over standard streams."""

    def recv() -> str | None:
        line = sys.stdin.readline()
        return line if line else None

    def send(reply: str) -> None:
        sys.stdout.write(reply + "\n")
        sys.stdout.flush()

    run_session(config, recv, send)
