"""Line-oriented scenario language.

One command per line: a verb, whitespace-separated positional arguments,
and ``key:value`` options. Double quotes group text containing spaces
(``q:"What is my name?"``). ``#`` starts a comment; blank lines are
skipped. Unknown verbs are parse errors, not warnings, so a typo cannot
silently drop a step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import SimulationError


class ScenarioParseError(SimulationError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


VERBS = frozenset({
    # world setup
    "declare-fi", "declare-customer", "declare-email", "declare-phone",
    "declare-account", "mint", "advance-clock", "set-tls",
    "compromise-endpoint",
    # legacy operations
    "send-standard", "open-deposit", "answer-deposit", "reject-standard",
    "register-autodeposit", "lookup-autodeposit", "send-autodeposit",
    "request-money", "fulfil-request", "decline-request", "expire-sweep",
    # directed operations
    "register-id", "verify-id", "send-directed", "select-account",
    "reject-directed", "return-autodeposit", "request-directed",
    "fulfil-directed", "decline-directed", "change-device", "set-relay",
    # adversary operations
    "declare-observer", "observe", "leakage", "select-targets",
    "run-attack", "snoop-names", "declare-knowledge", "shareable-questions",
    # analysis
    "check-requirements",
})


@dataclass(frozen=True)
class ScenarioCommand:
    verb: str
    args: tuple[str, ...]
    opts: dict[str, str]
    line_no: int

    def opt(self, key: str, default: str | None = None) -> str | None:
        return self.opts.get(key, default)


@dataclass
class Scenario:
    name: str = ""
    seed: int = 0
    commands: list[ScenarioCommand] = field(default_factory=list)


def _tokenize(line: str, line_no: int) -> list[str]:
    tokens: list[str] = []
    current: list[str] = []
    in_quotes = False
    has_content = False
    for ch in line:
        if ch == '"':
            in_quotes = not in_quotes
            has_content = True
            current.append(ch)
        elif ch == "#" and not in_quotes:
            break
        elif ch.isspace() and not in_quotes:
            if has_content:
                tokens.append("".join(current))
                current, has_content = [], False
        else:
            current.append(ch)
            has_content = True
    if in_quotes:
        raise ScenarioParseError(line_no, f"unterminated quote in {line.strip()!r}")
    if has_content:
        tokens.append("".join(current))
    return tokens


def _strip_quotes(text: str) -> str:
    if len(text) >= 2 and text.startswith('"') and text.endswith('"'):
        return text[1:-1]
    return text


def _split_token(token: str, line_no: int) -> tuple[str | None, str]:
    """Return (key, value) for key:value tokens, (None, token) otherwise."""
    if token.startswith('"'):
        return None, _strip_quotes(token)
    head, sep, tail = token.partition(":")
    if sep and head and head.replace("-", "").replace("_", "").isalnum() \
            and not head.isdigit():
        return head, _strip_quotes(tail)
    return None, token


def parse_scenario(text: str, name: str = "") -> Scenario:
    scenario = Scenario(name=name)
    for line_no, line in enumerate(text.splitlines(), start=1):
        tokens = _tokenize(line, line_no)
        if not tokens:
            continue
        verb = tokens[0]
        if verb not in VERBS:
            raise ScenarioParseError(line_no, f"unknown verb {verb!r}")
        args: list[str] = []
        opts: dict[str, str] = {}
        for token in tokens[1:]:
            key, value = _split_token(token, line_no)
            if key is None:
                args.append(value)
            else:
                if key in opts:
                    raise ScenarioParseError(line_no, f"duplicate option {key!r}")
                opts[key] = value
        scenario.commands.append(ScenarioCommand(verb, tuple(args), opts, line_no))
    return scenario


def load_scenario(path) -> Scenario:
    from pathlib import Path
    p = Path(path)
    return parse_scenario(p.read_text(encoding="utf-8"), name=p.stem)
