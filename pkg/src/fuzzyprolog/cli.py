"""``fpl``: load a program, run queries one-shot or interactively."""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, replace
from typing import TextIO

from .engine import (
    DEFAULT_DEPTH,
    Answer,
    EngineError,
    Options,
    success_set,
)
from .fixpoint import GroundingError, NonConvergence, ground, lfp, materialize
from .syntax import FplSyntaxError, Program, ProgramError, parse_program
from .syntax.parser import parse_term
from .terms import render

EXIT_OK, EXIT_DIAGNOSTICS, EXIT_RUNTIME = 0, 1, 2


@dataclass(frozen=True)
class SessionConfig:
    engine: str = "topdown"
    strategy: str = "df"
    depth_limit: int = DEFAULT_DEPTH
    eps: float = 1e-9
    max_iters: int = 1000
    trace: bool = False

    def __post_init__(self):
        if self.engine not in ("topdown", "fixpoint"):
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.strategy not in ("df", "bf"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.depth_limit <= 0:
            raise ValueError("depth limit must be positive")


def env_depth() -> int:
    raw = os.environ.get("FPL_DEPTH")
    if raw is None:
        return DEFAULT_DEPTH
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"FPL_DEPTH must be an integer, got {raw!r}") from None
    if value <= 0:
        raise ValueError("FPL_DEPTH must be positive")
    return value


# -- formatting -----------------------------------------------------------------------

def format_answer(ans: Answer) -> str:
    parts = [f"{name} = {render(value, 699)}" for name, value in ans.subst.items()]
    parts += [f"{name} = {truth}" for name, truth in ans.truths.items()]
    return ", ".join(parts) if parts else "yes"


class Session:
    """A loaded program plus configuration; shared by one-shot runs and the REPL."""

    def __init__(self, config: SessionConfig, out: TextIO, err: TextIO):
        self.config = config
        self.out = out
        self.err = err
        self.program = Program()
        self._fixpoint: Program | None = None

    def load_text(self, text: str, origin: str) -> bool:
        try:
            program = parse_program(text)
        except ProgramError as e:
            for d in e.diagnostics:
                print(f"{origin}:{d}", file=self.err)
            return False
        for d in program.warnings:
            print(f"{origin}:{d}", file=self.err)
        self.program = program
        self._fixpoint = None
        return True

    def load(self, path: str) -> bool:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            print(f"{path}: cannot read: {e.strerror or e}", file=self.err)
            return False
        return self.load_text(text, path)

    def options(self) -> Options:
        trace = (lambda line: print(line, file=self.err)) if self.config.trace else None
        return Options(strategy=self.config.strategy, depth_limit=self.config.depth_limit,
                       trace=trace)

    def fixpoint_program(self) -> Program:
        if self._fixpoint is None:
            gp = ground(self.program)
            interp, _ = lfp(gp, self.config.eps, self.config.max_iters)
            self._fixpoint = materialize(self.program, interp)
        return self._fixpoint

    def answers(self, goal) -> list[Answer]:
        """The grouped answers; raises on runtime errors."""
        program = self.program
        if self.config.engine == "fixpoint":
            program = self.fixpoint_program()
        return success_set(program, goal, self.options())

    def print_interpretation(self) -> None:
        gp = ground(self.program)
        interp, _ = lfp(gp, self.config.eps, self.config.max_iters)
        for line in interp.render():
            print(line, file=self.out)

    def report(self, e: Exception) -> None:
        if isinstance(e, NonConvergence):
            print(f"error: {e}", file=self.err)
            for line in e.last.render():
                print(f"  {line}", file=self.err)
        else:
            print(f"error: {e}", file=self.err)


RUNTIME_ERRORS = (EngineError, NonConvergence, GroundingError, RecursionError)


def run_file(path: str, query: str | None = None, config: SessionConfig | None = None,
             out: TextIO | None = None, err: TextIO | None = None) -> int:
    """Load ``path``, optionally answer ``query``; returns the exit status."""
    out = out or sys.stdout
    err = err or sys.stderr
    session = Session(config or SessionConfig(), out, err)
    if not session.load(path):
        return EXIT_DIAGNOSTICS
    try:
        if query is None:
            if session.config.engine == "fixpoint":
                session.print_interpretation()
            return EXIT_OK
        try:
            goal, _ = parse_term(query)
        except FplSyntaxError as e:
            print(f"query:{e.line}:{e.col}: error: {e.message}", file=err)
            return EXIT_DIAGNOSTICS
        answers = session.answers(goal)
    except RUNTIME_ERRORS as e:
        session.report(e)
        return EXIT_RUNTIME
    if not answers:
        print("no", file=out)
    for ans in answers:
        print(format_answer(ans), file=out)
    return EXIT_OK


HELP = """commands:
  ?- goal.            run a query (';' for the next answer)
  :load FILE          load a program
  :engine NAME        topdown or fixpoint
  :strategy NAME      df or bf
  :trace [on|off]     toggle transition tracing
  :quit               leave"""


def repl(config: SessionConfig | None = None, stdin: TextIO | None = None,
         out: TextIO | None = None, err: TextIO | None = None,
         path: str | None = None) -> int:
    stdin = stdin or sys.stdin
    out = out or sys.stdout
    err = err or sys.stderr
    session = Session(config or SessionConfig(), out, err)
    interactive = stdin.isatty()
    if path is not None:
        session.load(path)

    def readline(prompt: str) -> str | None:
        if interactive:
            out.write(prompt)
            out.flush()
        line = stdin.readline()
        return None if line == "" else line

    pending: str | None = None
    while True:
        line = pending if pending is not None else readline("?- ")
        pending = None
        if line is None:
            return EXIT_OK
        text = line.strip()
        if not text or text.startswith("%"):
            continue
        if text.startswith(":"):
            if not meta_command(session, text):
                return EXIT_OK
            continue
        while not text.rstrip().endswith("."):
            more = readline("|  ")
            if more is None:
                break
            text += " " + more.strip()
        try:
            goal, _ = parse_term(text)
        except FplSyntaxError as e:
            print(f"error: {e.line}:{e.col}: {e.message}", file=err)
            continue
        try:
            answers = session.answers(goal)
        except RUNTIME_ERRORS as e:
            session.report(e)
            continue
        if not answers:
            print("no", file=out)
            continue
        for k, ans in enumerate(answers):
            print(format_answer(ans), file=out)
            if k == len(answers) - 1:
                break
            reply = readline("")
            if reply is None:
                return EXIT_OK
            if reply.strip() != ";":
                pending = reply if reply.strip() else None
                break


def meta_command(session: Session, text: str) -> bool:
    """Run a ``:command``; returns False on ``:quit``."""
    cmd, _, arg = text.partition(" ")
    arg = arg.strip()
    out, err = session.out, session.err
    try:
        if cmd in (":quit", ":q", ":halt"):
            return False
        if cmd == ":load":
            if session.load(arg):
                print(f"loaded {arg}", file=out)
        elif cmd == ":engine":
            session.config = replace(session.config, engine=arg)
            session._fixpoint = None
            print(f"engine {arg}", file=out)
        elif cmd == ":strategy":
            session.config = replace(session.config, strategy=arg)
            print(f"strategy {arg}", file=out)
        elif cmd == ":trace":
            on = {"on": True, "off": False, "": not session.config.trace}.get(arg)
            if on is None:
                raise ValueError(":trace expects on or off")
            session.config = replace(session.config, trace=on)
            print(f"trace {'on' if on else 'off'}", file=out)
        elif cmd == ":help":
            print(HELP, file=out)
        else:
            print(f"error: unknown command {cmd} (try :help)", file=err)
    except ValueError as e:
        print(f"error: {e}", file=err)
    return True


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fpl", description="Fuzzy Prolog with default knowledge")
    ap.add_argument("file", nargs="?", help="program to load (.fpl)")
    ap.add_argument("-q", "--query", help="run one query and exit")
    ap.add_argument("--engine", choices=["topdown", "fixpoint"], default="topdown")
    ap.add_argument("--strategy", choices=["df", "bf"], default="df")
    ap.add_argument("--depth", type=int, help="transition limit per derivation")
    ap.add_argument("--eps", type=float, default=1e-9, help="fixpoint convergence tolerance")
    ap.add_argument("--max-iters", type=int, default=1000)
    ap.add_argument("--trace", action="store_true", help="print transitions to stderr")
    ap.add_argument("-i", "--interactive", action="store_true",
                    help="start the REPL after loading FILE")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        depth = args.depth if args.depth is not None else env_depth()
        config = SessionConfig(args.engine, args.strategy, depth, args.eps, args.max_iters,
                               args.trace)
    except ValueError as e:
        print(f"fpl: {e}", file=sys.stderr)
        return EXIT_DIAGNOSTICS
    if args.file is None or args.interactive:
        if args.query is not None:
            ap.error("--query needs a FILE")
        return repl(config, path=args.file)
    return run_file(args.file, args.query, config)
