"""Line-oriented spec files: parsing, eager validation, and export.

Format (UTF-8, full-line ``#`` comments allowed)::

    [manifold]
    name = kaehler_r4
    dim = 4
    mu = +1
    domain = [-1,1] [-1,1] [-1,1] [-1,1]
    metric = row("1","0","0","0") row("0","1","0","0") ...
    affinor = row("0","-1","0","0") row("1","0","0","0") ...

    [submanifold]
    name = flat_cr
    dim = 3
    domain = [-1,1] [-1,1] [-1,1]
    embedding = "u1" "u2" "u3" "0"
    # optional: frame_D = row("1","0","0") row("0","1","0")

Affinor rows are indexed by the upper index (row i holds the components of
the image of the i-th coordinate direction).  Structural invariants are
validated eagerly on a deterministic 10-point probe.
"""

from __future__ import annotations

import re

import numpy as np

from .chart_calculus import (
    ManifoldSpec,
    StructuralError,
    VectorField,
    affinor_at,
    metric_at,
)
from .expr_dsl import EvalError, Expression, ParseError, parse
from .sampling import sample_domain
from .submanifold_geometry import SubmanifoldSpec, frames_at

__all__ = ["SpecFileError", "load_spec", "format_spec"]

PROBE_POINTS = 10
PROBE_SEED = 24245

_INTERVAL_RE = re.compile(r"\[\s*([^\s,\]]+)\s*,\s*([^\s,\]]+)\s*\]")
_STRING_RE = re.compile(r'"([^"]*)"')
_ROW_RE = re.compile(r'row\(\s*"[^"]*"(?:\s*,\s*"[^"]*")*\s*\)')

_MANIFOLD_KEYS = {"name", "dim", "mu", "domain", "metric", "affinor"}
_SUBMANIFOLD_KEYS = {"name", "dim", "domain", "embedding", "frame_d"}


class SpecFileError(ValueError):
    """Malformed spec file; carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _parse_sections(text: str) -> dict[str, dict[str, tuple[str, int]]]:
    sections: dict[str, dict[str, tuple[str, int]]] = {}
    current: dict[str, tuple[str, int]] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if name not in ("manifold", "submanifold"):
                raise SpecFileError(f"unknown section [{name}]", lineno)
            if name in sections:
                raise SpecFileError(f"duplicate section [{name}]", lineno)
            sections[name] = {}
            current = sections[name]
            continue
        if current is None:
            raise SpecFileError("content before any section header", lineno)
        if "=" not in line:
            raise SpecFileError("expected 'key = value'", lineno)
        key, _, value = line.partition("=")
        key = key.strip().lower()
        if key in current:
            raise SpecFileError(f"duplicate key '{key}'", lineno)
        current[key] = (value.strip(), lineno)
    if not sections:
        raise SpecFileError("no sections found", 1)
    return sections


def _require(section: dict, keys, section_name: str, allowed) -> None:
    for key in section:
        if key not in allowed:
            raise SpecFileError(
                f"unknown key '{key}' in [{section_name}]", section[key][1]
            )
    for key in keys:
        if key not in section:
            raise SpecFileError(f"[{section_name}] is missing '{key}'", 1)


def _parse_int(section, key) -> int:
    value, lineno = section[key]
    try:
        out = int(value)
    except ValueError:
        raise SpecFileError(f"'{key}' must be an integer, got {value!r}", lineno)
    if out < 1:
        raise SpecFileError(f"'{key}' must be positive", lineno)
    return out


def _parse_mu(section) -> int:
    value, lineno = section["mu"]
    if value in ("+1", "1"):
        return 1
    if value == "-1":
        return -1
    raise SpecFileError("mu must be -1 or +1", lineno)


def _parse_domain(section, expected_len: int) -> list[tuple[float, float]]:
    value, lineno = section["domain"]
    rest = _INTERVAL_RE.sub(" ", value)
    if rest.strip():
        raise SpecFileError(f"malformed domain near {rest.strip()!r}", lineno)
    intervals = []
    for lo, hi in _INTERVAL_RE.findall(value):
        try:
            a, b = float(lo), float(hi)
        except ValueError:
            raise SpecFileError(f"bad interval [{lo},{hi}]", lineno)
        if b <= a:
            raise SpecFileError(f"interval [{lo},{hi}] has non-positive length", lineno)
        intervals.append((a, b))
    if len(intervals) != expected_len:
        raise SpecFileError(
            f"domain has {len(intervals)} intervals, expected {expected_len}", lineno
        )
    return intervals


def _parse_expr(source: str, arity: int, lineno: int) -> Expression:
    try:
        return parse(source, arity)
    except ParseError as exc:
        raise SpecFileError(f"in expression {source!r}: {exc}", lineno) from None


def _parse_rows(section, key, arity: int):
    """``row("...", ...)`` groups as a list of lists of expressions."""
    value, lineno = section[key]
    leftovers = _ROW_RE.sub(" ", value)
    if leftovers.strip():
        raise SpecFileError(
            f"malformed '{key}' near {leftovers.strip()!r}", lineno
        )
    rows = []
    for group in _ROW_RE.findall(value):
        rows.append(
            [_parse_expr(src, arity, lineno) for src in _STRING_RE.findall(group)]
        )
    if not rows:
        raise SpecFileError(f"'{key}' has no rows", lineno)
    return rows, lineno


def _parse_strings(section, key, arity: int):
    value, lineno = section[key]
    leftovers = _STRING_RE.sub(" ", value)
    if leftovers.strip():
        raise SpecFileError(f"malformed '{key}' near {leftovers.strip()!r}", lineno)
    sources = _STRING_RE.findall(value)
    if not sources:
        raise SpecFileError(f"'{key}' has no entries", lineno)
    return [_parse_expr(src, arity, lineno) for src in sources], lineno


def _build_manifold(section) -> ManifoldSpec:
    _require(section, ("name", "dim", "mu", "domain", "metric", "affinor"),
             "manifold", _MANIFOLD_KEYS)
    dim = _parse_int(section, "dim")
    mu = _parse_mu(section)
    domain = _parse_domain(section, dim)
    metric, metric_line = _parse_rows(section, "metric", dim)
    affinor, affinor_line = _parse_rows(section, "affinor", dim)
    for rows, label, lineno in ((metric, "metric", metric_line),
                                (affinor, "affinor", affinor_line)):
        if len(rows) != dim or any(len(r) != dim for r in rows):
            raise SpecFileError(f"{label} must be a {dim}x{dim} matrix", lineno)
    try:
        return ManifoldSpec(
            name=section["name"][0],
            dim=dim,
            mu=mu,
            metric=metric,
            affinor=affinor,
            domain=domain,
        )
    except (ValueError, TypeError) as exc:
        raise SpecFileError(str(exc)) from None


def _build_submanifold(section, ambient: ManifoldSpec) -> SubmanifoldSpec:
    _require(section, ("name", "dim", "domain", "embedding"),
             "submanifold", _SUBMANIFOLD_KEYS)
    dim = _parse_int(section, "dim")
    domain = _parse_domain(section, dim)
    embedding, emb_line = _parse_strings(section, "embedding", dim)
    if len(embedding) != ambient.dim:
        raise SpecFileError(
            f"embedding has {len(embedding)} components, ambient dimension is "
            f"{ambient.dim}", emb_line
        )
    frame_d = None
    if "frame_d" in section:
        rows, frame_line = _parse_rows(section, "frame_d", dim)
        for row in rows:
            if len(row) != dim:
                raise SpecFileError(
                    f"frame_D rows must have {dim} entries", frame_line
                )
        frame_d = tuple(VectorField.from_expressions(row) for row in rows)
    try:
        return SubmanifoldSpec(
            name=section["name"][0],
            dim=dim,
            embedding=embedding,
            ambient=ambient,
            domain=domain,
            frame_d=frame_d,
        )
    except (ValueError, TypeError) as exc:
        raise SpecFileError(str(exc)) from None


def _probe_manifold(spec: ManifoldSpec) -> None:
    for x in sample_domain(spec.domain, PROBE_POINTS, PROBE_SEED):
        try:
            g = metric_at(spec, x)
            affinor_at(spec, x)
        except StructuralError as exc:
            raise SpecFileError(f"invariant violated at probe point: {exc}") from None
        except EvalError as exc:
            raise SpecFileError(f"expression error at probe point {tuple(x)}: {exc}") from None
        asym = float(np.max(np.abs(g - g.T)))
        if asym > 1e-10:
            raise SpecFileError(f"metric not symmetric at probe point {tuple(x)}")


def _probe_submanifold(spec: SubmanifoldSpec) -> None:
    for u in sample_domain(spec.domain, PROBE_POINTS, PROBE_SEED):
        try:
            frames_at(spec, u)
        except StructuralError as exc:
            raise SpecFileError(f"invariant violated at probe point: {exc}") from None
        except EvalError as exc:
            raise SpecFileError(f"expression error at probe point {tuple(u)}: {exc}") from None


def load_spec(path, ambient: ManifoldSpec | None = None):
    """Parse and validate a spec file.

    Returns ``(manifold, submanifold)``; either may be ``None`` depending on
    the sections present.  A ``[submanifold]`` section needs an ambient
    manifold, either from the same file or via the ``ambient`` argument.
    """
    with open(path, "r", encoding="utf-8") as handle:
        sections = _parse_sections(handle.read())
    manifold = None
    if "manifold" in sections:
        manifold = _build_manifold(sections["manifold"])
        _probe_manifold(manifold)
    submanifold = None
    if "submanifold" in sections:
        base = manifold if manifold is not None else ambient
        if base is None:
            raise SpecFileError(
                "[submanifold] needs a [manifold] section or an ambient spec"
            )
        submanifold = _build_submanifold(sections["submanifold"], base)
        _probe_submanifold(submanifold)
    return manifold, submanifold


def _format_interval(interval) -> str:
    a, b = interval
    return f"[{a!r},{b!r}]"


def _format_rows(rows) -> str:
    return " ".join(
        "row(" + ",".join(f'"{e.source}"' for e in row) + ")" for row in rows
    )


def format_spec(manifold: ManifoldSpec | None,
                submanifold: SubmanifoldSpec | None = None) -> str:
    """Render specs in the file format; inverse of ``load_spec`` up to
    whitespace (expression sources are preserved verbatim)."""
    blocks = []
    if manifold is not None:
        blocks.append(
            "\n".join(
                [
                    "[manifold]",
                    f"name = {manifold.name}",
                    f"dim = {manifold.dim}",
                    f"mu = {'+1' if manifold.mu == 1 else '-1'}",
                    "domain = " + " ".join(_format_interval(i) for i in manifold.domain),
                    "metric = " + _format_rows(manifold.metric),
                    "affinor = " + _format_rows(manifold.affinor),
                ]
            )
        )
    if submanifold is not None:
        lines = [
            "[submanifold]",
            f"name = {submanifold.name}",
            f"dim = {submanifold.dim}",
            "domain = " + " ".join(_format_interval(i) for i in submanifold.domain),
            "embedding = " + " ".join(f'"{e.source}"' for e in submanifold.embedding),
        ]
        if submanifold.frame_d:
            rows = []
            for fd in submanifold.frame_d:
                if fd._components is None:
                    raise ValueError(
                        "only expression-backed frame_D fields can be exported"
                    )
                rows.append(fd._components)
            lines.append("frame_D = " + _format_rows(rows))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"
