"""Request/answer contract for external cubing heuristics.

An external heuristic (typically a model server adapter) receives one JSON
document per line and replies with one JSON document per line:

    request:  {"id", "dimacs", "num_vars", "num_clauses", "attempt"}
    reply:    {"id", "raw_text"}  or  {"id", "error"}

`raw_text` is the responder's full tagged output; parsing and validation stay
on this side so retry accounting is uniform. An invalid or error reply is
retried with a fresh, identical request; after `max_attempts` total failures
the node is abandoned rather than the run.
"""

from __future__ import annotations

import json
import re
import subprocess
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable

from .cnf import CnfFormula, serialize_dimacs

MAX_ATTEMPTS = 10

_ANSWER_RE = re.compile(r"<answer>(.*?)</answer>", re.DOTALL)
_REASONING_RE = re.compile(r"<reasoning>(.*?)</reasoning>", re.DOTALL)
_PAIR_RE = re.compile(r"^\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)$")


def load_prompt(name: str) -> str:
    """Read a prompt template shipped with the package (UTF-8 asset file)."""
    return (resources.files("cubekit") / "assets" / f"{name}.txt").read_text("utf-8")


@dataclass(frozen=True)
class PromptBundle:
    system_text: str
    task_text: str
    dimacs_text: str


def build_prompt(
    formula: CnfFormula,
    system_template: str | None = None,
    task_template: str | None = None,
) -> PromptBundle:
    """Compose the prompts for one cubing request; the DIMACS body is appended
    after the task text. Byte-stable for structurally equal formulas."""
    system_text = system_template if system_template is not None else load_prompt("system_prompt")
    task_template = task_template if task_template is not None else load_prompt("task_prompt")
    dimacs_text = serialize_dimacs(formula)
    task_text = task_template.rstrip("\n") + "\n\n" + dimacs_text
    return PromptBundle(system_text=system_text, task_text=task_text, dimacs_text=dimacs_text)


class AnswerParseError(ValueError):
    """The responder's text did not contain a usable cube."""


class MissingAnswerTag(AnswerParseError):
    pass


class MalformedPair(AnswerParseError):
    pass


class NotOppositePair(AnswerParseError):
    pass


class OutOfRange(AnswerParseError):
    pass


@dataclass(frozen=True)
class CubeAnswer:
    """A parsed cube: two opposite literals, polarity order as answered."""

    reasoning: str
    first: int
    second: int

    @property
    def variable(self) -> int:
        return abs(self.first)


def parse_answer(text: str, num_vars: int) -> CubeAnswer:
    """Extract the cube from tagged responder output.

    The last <answer> block wins (responders often restate); the pair must be
    two opposite integers within 1..num_vars. Reasoning comes from the last
    <reasoning> block when present.
    """
    answers = _ANSWER_RE.findall(text)
    if not answers:
        raise MissingAnswerTag("no <answer>...</answer> block found")
    match = _PAIR_RE.match(answers[-1].strip())
    if not match:
        raise MalformedPair(f"answer is not a pair of integers: {answers[-1].strip()!r}")
    first, second = int(match.group(1)), int(match.group(2))
    if first == 0 or second != -first:
        raise NotOppositePair(f"({first}, {second}) is not a variable with its negation")
    if abs(first) > num_vars:
        raise OutOfRange(f"variable {abs(first)} exceeds num_vars={num_vars}")
    reasonings = _REASONING_RE.findall(text)
    reasoning = reasonings[-1].strip() if reasonings else ""
    return CubeAnswer(reasoning=reasoning, first=first, second=second)


def render_answer(reasoning: str, first: int, second: int | None = None) -> str:
    """Render a cube in the tag template; inverse of parse_answer."""
    if second is None:
        second = -first
    return f"<reasoning>{reasoning}</reasoning>\n<answer>\n({first}, {second})\n</answer>"


class TransportClosed(ConnectionError):
    """The external process or connection went away mid-session."""


class Transport:
    """One line-delimited message stream; subclasses supply the byte plumbing."""

    def send_line(self, line: str) -> None:
        raise NotImplementedError

    def recv_line(self) -> str:
        raise NotImplementedError

    def close(self) -> None:
        pass


class SubprocessTransport(Transport):
    """Spawn a responder command and exchange JSON lines over its stdio."""

    def __init__(self, command: list[str], env: dict[str, str] | None = None) -> None:
        self.proc = subprocess.Popen(
            command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
            env=env,
        )

    def send_line(self, line: str) -> None:
        if self.proc.poll() is not None or self.proc.stdin is None:
            raise TransportClosed("responder process has exited")
        try:
            self.proc.stdin.write(line + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise TransportClosed("responder stdin closed") from exc

    def recv_line(self) -> str:
        if self.proc.stdout is None:
            raise TransportClosed("responder has no stdout")
        line = self.proc.stdout.readline()
        if line == "":
            raise TransportClosed("responder stdout closed")
        return line.rstrip("\n")

    def close(self) -> None:
        for stream in (self.proc.stdin, self.proc.stdout):
            if stream is not None:
                try:
                    stream.close()
                except OSError:
                    pass
        self.proc.terminate()
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self.proc.kill()


class CallableTransport(Transport):
    """In-process transport for tests: a function maps request dicts to reply
    dicts (or to raw strings, returned verbatim)."""

    def __init__(self, responder: Callable[[dict], dict | str]) -> None:
        self.responder = responder
        self._pending: list[str] = []

    def send_line(self, line: str) -> None:
        reply = self.responder(json.loads(line))
        self._pending.append(reply if isinstance(reply, str) else json.dumps(reply))

    def recv_line(self) -> str:
        if not self._pending:
            raise TransportClosed("no reply pending")
        return self._pending.pop(0)


@dataclass
class NodeAborted:
    """All attempts for one node failed; the search should skip the subtree."""

    attempts: int
    last_error: str = ""


class HeuristicSession:
    """One serialized request pipeline to an external heuristic.

    Each cubing request is retried with identical content up to
    `max_attempts` times; wall-clock spent across all attempts accumulates in
    `decision_time`.
    """

    def __init__(self, transport: Transport, max_attempts: int = MAX_ATTEMPTS) -> None:
        if max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        self.transport = transport
        self.max_attempts = max_attempts
        self.decision_time = 0.0
        self._next_id = 0

    def request_cube(self, formula: CnfFormula) -> CubeAnswer | NodeAborted:
        bundle = build_prompt(formula)
        started = time.monotonic()
        last_error = ""
        try:
            for attempt in range(1, self.max_attempts + 1):
                self._next_id += 1
                request = {
                    "id": self._next_id,
                    "dimacs": bundle.dimacs_text,
                    "num_vars": formula.num_vars,
                    "num_clauses": formula.num_clauses,
                    "attempt": attempt,
                }
                self.transport.send_line(json.dumps(request))
                raw = self.transport.recv_line()
                try:
                    reply = json.loads(raw)
                except json.JSONDecodeError:
                    last_error = "reply is not valid JSON"
                    continue
                if not isinstance(reply, dict) or reply.get("id") != request["id"]:
                    last_error = "reply id does not match request"
                    continue
                if "error" in reply:
                    last_error = str(reply["error"])
                    continue
                try:
                    return parse_answer(str(reply.get("raw_text", "")), formula.num_vars)
                except AnswerParseError as exc:
                    last_error = str(exc)
                    continue
            return NodeAborted(attempts=self.max_attempts, last_error=last_error)
        finally:
            self.decision_time += time.monotonic() - started

    def close(self) -> None:
        self.transport.close()


def request_cube(session: HeuristicSession, formula: CnfFormula) -> CubeAnswer | NodeAborted:
    return session.request_cube(formula)


class ReasoningClient:
    """Ask an external adapter to justify a given cube (the dataset
    augmentation hook). Requests ride the same line protocol with
    kind="explain"."""

    def __init__(self, transport: Transport) -> None:
        self.transport = transport
        self._next_id = 0

    def explain(self, dimacs_text: str, cube_text: str) -> str:
        self._next_id += 1
        request = {
            "id": self._next_id,
            "kind": "explain",
            "dimacs": dimacs_text,
            "cube": cube_text,
        }
        self.transport.send_line(json.dumps(request))
        reply = json.loads(self.transport.recv_line())
        if not isinstance(reply, dict) or reply.get("id") != request["id"]:
            raise RuntimeError("explain reply id does not match request")
        if "error" in reply:
            raise RuntimeError(str(reply["error"]))
        return str(reply.get("raw_text", ""))

    def __call__(self, dimacs_text: str, cube_text: str) -> str:
        return self.explain(dimacs_text, cube_text)
