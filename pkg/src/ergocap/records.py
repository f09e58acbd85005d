"""Verdicts and the line-oriented ``key=value`` record format."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any


@dataclass(frozen=True)
class Verdict:
    """A yes/no answer; a "no" usually carries a witness that re-verifies."""

    ok: bool
    witness: Any = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def fmt_value(value: Any) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if value is None:
        return "-"
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return "[" + ",".join(fmt_value(v) for v in value) + "]"
    text = str(value)
    if any(c.isspace() for c in text) or "=" in text:
        raise ValueError(f"record value {text!r} must not contain spaces or '='")
    return text


def format_record(**fields: Any) -> str:
    """One record line; keys keep the order given."""
    return " ".join(f"{k}={fmt_value(v)}" for k, v in fields.items())


def parse_record(line: str) -> dict[str, str]:
    out = {}
    for token in line.split():
        key, sep, value = token.partition("=")
        if not sep:
            raise ValueError(f"malformed record token {token!r}")
        out[key] = value
    return out


def parse_value(text: str) -> Any:
    """Inverse of :func:`fmt_value` for scalars and flat lists."""
    if text == "yes":
        return True
    if text == "no":
        return False
    if text == "-":
        return None
    if text.startswith("[") and text.endswith("]"):
        inner = text[1:-1]
        return [parse_value(t) for t in inner.split(",")] if inner else []
    try:
        return Fraction(text)
    except ValueError:
        return text


@dataclass
class RecordSink:
    """Collects machine records and human report lines for one run."""

    records: list[str] = field(default_factory=list)
    report: list[str] = field(default_factory=list)

    def record(self, **fields: Any) -> None:
        self.records.append(format_record(**fields))

    def say(self, text: str = "") -> None:
        self.report.append(text)
