"""Line-based TCP protocol for driving a SUL session on another host.

Requests and responses are single ASCII lines terminated by LF, tokens
separated by spaces::

    HELLO           -> OK midlearn-sul 1
    ALPHABET        -> IN write read / OUT refused rok
    RESET           -> OK
    STEP <symbol>   -> OUT <symbol> | QUIESCENT
    BYE             -> OK bye

Anything else is answered with ``ERR <reason>``. The client never pipelines:
each request waits for its response.
"""

from __future__ import annotations

import logging
import socket
import threading
from typing import Optional, Tuple

from .automata import QUIESCENCE
from .errors import AlphabetError, QueryTransportError, SessionStateError
from .teacher import SulSession

log = logging.getLogger(__name__)

PROTOCOL = "midlearn-sul"
PROTOCOL_VERSION = 1


def handle_line(session: SulSession, line: str, state: dict) -> str:
    """Response for one request line; ``state`` tracks whether RESET was seen."""
    parts = line.split()
    if not parts:
        return "ERR malformed"
    verb, args = parts[0], parts[1:]
    if verb == "HELLO" and not args:
        return f"OK {PROTOCOL} {PROTOCOL_VERSION}"
    if verb == "ALPHABET" and not args:
        outs = sorted(o for o in session.outputs if o != QUIESCENCE)
        return "IN " + " ".join(session.inputs) + " / OUT " + " ".join(outs)
    if verb == "RESET" and not args:
        session.reset()
        state["reset"] = True
        return "OK"
    if verb == "STEP":
        if len(args) != 1:
            return "ERR malformed"
        if args[0] not in session.inputs:
            return "ERR unknown-symbol"
        if not state.get("reset"):
            return "ERR no-reset"
        out = session.step(args[0])
        return "QUIESCENT" if out == QUIESCENCE else f"OUT {out}"
    if verb == "BYE" and not args:
        return "OK bye"
    if verb in ("HELLO", "ALPHABET", "RESET", "BYE"):
        return "ERR malformed"
    return "ERR unknown-verb"


class SulServer:
    """Serves one client at a time; further connections wait in the listen backlog."""

    def __init__(self, session: SulSession, host: str = "127.0.0.1", port: int = 0):
        self.session = session
        self.sock = socket.create_server((host, port), backlog=8)
        self._stop = threading.Event()

    @property
    def address(self) -> Tuple[str, int]:
        return self.sock.getsockname()[:2]

    def serve_client(self, conn: socket.socket) -> bool:
        """Handle one connection; True if it ended with BYE."""
        state: dict = {}
        with conn, conn.makefile("rb") as rfile:
            try:
                for raw in rfile:
                    try:
                        line = raw.decode("ascii").rstrip("\n").rstrip("\r")
                    except UnicodeDecodeError:
                        conn.sendall(b"ERR malformed\n")
                        continue
                    reply = handle_line(self.session, line, state)
                    conn.sendall(reply.encode("ascii") + b"\n")
                    if reply == "OK bye":
                        return True
            except OSError as exc:
                log.warning("client dropped: %s", exc)
            finally:
                self.session.reset()
        return False

    def serve(self, once: bool = False) -> None:
        """Accept clients until :meth:`close`, or after the first client if ``once``."""
        self.sock.settimeout(0.2)
        try:
            while not self._stop.is_set():
                try:
                    conn, _ = self.sock.accept()
                except socket.timeout:
                    continue
                except OSError:
                    break
                conn.settimeout(None)
                self.serve_client(conn)
                if once:
                    break
        finally:
            self.sock.close()

    def close(self) -> None:
        self._stop.set()

    def start(self) -> threading.Thread:
        t = threading.Thread(target=self.serve, daemon=True)
        t.start()
        return t


def serve(session: SulSession, host: str = "127.0.0.1", port: int = 0, once: bool = False) -> None:
    SulServer(session, host, port).serve(once=once)


class RemoteSul:
    """Client-side proxy with the same reset/step surface as a local session."""

    def __init__(self, host: str, port: int, timeout: Optional[float] = 10.0):
        try:
            self._sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise QueryTransportError(f"cannot reach {host}:{port}: {exc}") from exc
        self._rfile = self._sock.makefile("rb")
        hello = self._request("HELLO").split()
        if hello[:2] != ["OK", PROTOCOL]:
            raise QueryTransportError(f"unexpected greeting {' '.join(hello)!r}")
        self.version = int(hello[2])
        alpha = self._request("ALPHABET").split()
        if not alpha or alpha[0] != "IN" or "/" not in alpha:
            raise QueryTransportError(f"bad alphabet reply {' '.join(alpha)!r}")
        cut = alpha.index("/")
        self.inputs = tuple(alpha[1:cut])
        self.outputs = frozenset(alpha[cut + 2:]) | {QUIESCENCE}

    def _request(self, line: str) -> str:
        try:
            self._sock.sendall(line.encode("ascii") + b"\n")
            raw = self._rfile.readline()
        except OSError as exc:
            raise QueryTransportError(f"transport failure on {line!r}: {exc}") from exc
        if not raw:
            raise QueryTransportError(f"connection closed during {line!r}")
        return raw.decode("ascii").rstrip("\n")

    def reset(self) -> None:
        reply = self._request("RESET")
        if reply != "OK":
            raise QueryTransportError(f"RESET answered {reply!r}")

    def step(self, symbol: str) -> str:
        reply = self._request(f"STEP {symbol}")
        if reply == "QUIESCENT":
            return QUIESCENCE
        if reply.startswith("OUT "):
            return reply[4:]
        if reply == "ERR unknown-symbol":
            raise AlphabetError(f"remote rejected {symbol!r}")
        if reply == "ERR no-reset":
            raise SessionStateError("step before reset")
        raise QueryTransportError(f"STEP answered {reply!r}")

    def close(self) -> None:
        try:
            self._request("BYE")
        except QueryTransportError:
            pass
        finally:
            self._rfile.close()
            self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def connect(host: str, port: int, timeout: Optional[float] = 10.0) -> RemoteSul:
    return RemoteSul(host, port, timeout)
