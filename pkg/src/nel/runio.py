"""Run configuration and result persistence for the command line.

Configs are flat ``key = value`` text: one assignment per line, ``#`` starts
a comment, blank lines ignored.  Serialization is canonical (keys sorted,
single space around ``=``), so parse -> serialize -> parse is the identity
and serialized files are byte-stable.

Every output file starts with one OutputRecord header line (JSON) carrying
the schema version, the command echo with its fully resolved parameters, a
build identifier, and the wall-clock duration.  Payload lines follow.  The
header is the only place timing lives, which keeps payloads byte-identical
across reruns of the same config and seed.

Files are written to ``<path>.partial`` and renamed onto the target only
after a successful flush, so a crash never leaves a truncated file under the
requested name.
"""

from __future__ import annotations

import json
import os
import re
import subprocess
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import ValidationError

SCHEMA_VERSION = 1
CONFIG_SCHEMA_VERSION = 1

_KEY_RE = re.compile(r"^[a-z][a-z0-9_]*$")


def parse_config_lines(text: str) -> tuple[dict[str, str], dict[str, int]]:
    """Flat key = value lines -> (raw mapping, key -> line number)."""
    out: dict[str, str] = {}
    lines_seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not _KEY_RE.match(key):
            raise ValidationError(f"line {lineno}: bad key {key!r}")
        if key in out:
            raise ValidationError(
                f"line {lineno}: duplicate key {key!r} (first set on line {lines_seen[key]})"
            )
        if not value:
            raise ValidationError(f"line {lineno}: empty value for {key!r}")
        out[key] = value
        lines_seen[key] = lineno
    return out, lines_seen


def parse_config_text(text: str) -> dict[str, str]:
    return parse_config_lines(text)[0]


def parse_config_file(path: str) -> dict[str, str]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def serialize_config(params: dict) -> str:
    """Canonical form: alphabetical keys, 'key = value' lines."""
    return "".join(f"{k} = {params[k]}\n" for k in sorted(params))


def config_roundtrip(path: str) -> dict[str, str]:
    """Parse, canonicalize, reparse; returns the mapping, guarantees identity."""
    first = parse_config_file(path)
    canon = serialize_config(first)
    again = parse_config_text(canon)
    if again != first:
        raise ValidationError("config round-trip changed the mapping")  # pragma: no cover
    return first


def coerce_params(raw: dict[str, str], schema: dict, lines: dict[str, int] | None = None) -> dict:
    """Apply a command's type schema to raw strings; unknown keys rejected.

    When a line map is given (config-file input) errors name the line.
    """

    def where(key):
        return f"line {lines[key]}: " if lines and key in lines else ""

    out = {}
    for key, text in raw.items():
        if key not in schema:
            raise ValidationError(f"{where(key)}unknown key {key!r}")
        caster = schema[key]
        try:
            out[key] = caster(text)
        except ValidationError as exc:
            raise ValidationError(f"{where(key)}{key}: {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"{where(key)}bad value for {key!r}: {text!r} ({exc})") from exc
    return out


def enum_of(*choices: str):
    def cast(text: str) -> str:
        if text not in choices:
            raise ValidationError(f"must be one of {', '.join(choices)}; got {text!r}")
        return text

    return cast


def uint64(text) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise ValidationError(f"seed must be a 64-bit unsigned integer, got {v}")
    return v


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: dict
    seed: int = 0
    out: str | None = None
    fmt: str = "jsonl"

    def __post_init__(self):
        uint64(self.seed)
        if self.fmt not in ("csv", "jsonl"):
            raise ValidationError(f"format must be csv or jsonl, got {self.fmt!r}")


_BUILD_ID: str | None = None


def build_id() -> str:
    global _BUILD_ID
    if _BUILD_ID is None:
        try:
            _BUILD_ID = (
                subprocess.run(
                    ["git", "rev-parse", "--short", "HEAD"],
                    cwd=os.path.dirname(os.path.abspath(__file__)),
                    capture_output=True,
                    text=True,
                    check=True,
                    timeout=5,
                ).stdout.strip()
                or f"pkg-{__version__}"
            )
        except Exception:
            _BUILD_ID = f"pkg-{__version__}"
    return _BUILD_ID


def output_record(cfg: RunConfig, duration_s: float, summary: dict | None = None) -> dict:
    rec = {
        "schema_version": SCHEMA_VERSION,
        "command": cfg.command,
        "params": cfg.params,
        "seed": cfg.seed,
        "format": cfg.fmt,
        "build": build_id(),
        "duration_s": round(duration_s, 6),
    }
    if summary is not None:
        rec["summary"] = summary
    return rec


def _json_line(obj) -> str:
    def scrub(o):
        if isinstance(o, np.generic):
            return o.item()
        raise TypeError(f"not JSON serializable: {type(o).__name__}")

    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True, default=scrub)


def write_result(cfg: RunConfig, payload_lines: list[str], duration_s: float, summary: dict | None = None) -> None:
    """Emit header + payload atomically to cfg.out, or to stdout when unset."""
    header = _json_line(output_record(cfg, duration_s, summary))
    if cfg.fmt == "csv":
        header = "# " + header
    body = header + "\n" + "".join(line + "\n" for line in payload_lines)
    if cfg.out is None:
        print(body, end="")
        return
    partial = cfg.out + ".partial"
    with open(partial, "w", encoding="utf-8") as fh:
        fh.write(body)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(partial, cfg.out)


def csv_line(*cells) -> str:
    return ",".join(_fmt_cell(c) for c in cells)


def _fmt_cell(c) -> str:
    if isinstance(c, np.generic):
        c = c.item()
    if isinstance(c, float):
        return repr(c)  # shortest round-trip decimal
    return str(c)


def json_payload_line(obj) -> str:
    return _json_line(obj)


def worker_count(n_tasks: int) -> int:
    """Worker cap: min(tasks, cpu count); NEL_THREADS overrides the cpu cap."""
    cap = os.cpu_count() or 1
    env = os.environ.get("NEL_THREADS")
    if env is not None:
        try:
            cap = int(env)
        except ValueError as exc:
            raise ValidationError(f"NEL_THREADS must be an integer, got {env!r}") from exc
        if cap < 1:
            raise ValidationError(f"NEL_THREADS must be >= 1, got {env!r}")
    return max(1, min(n_tasks, cap))
