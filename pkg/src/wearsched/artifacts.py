"""Artifact readers/writers: policy, value and Q-factor grids as CSV, plus
JSON summaries.

CSV grids are written in row-major order (channel age outer, information age
inner) with unix newlines; values use 17 significant digits so doubles
round-trip exactly. Writers are deterministic: identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ArtifactParseError, MissingArtifactError
from .solvers import Policy

POLICY_HEADER = "tau,delta,action"
VALUE_HEADER = "tau,delta,value"
Q_HEADER = "tau,delta,q_idle,q_transmit,q_renew"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_policy_csv(path: str | Path, policy: Policy) -> None:
    t_max, d_max = policy.shape
    lines = [POLICY_HEADER]
    acts = policy.actions
    for ti in range(t_max):
        for dj in range(d_max):
            lines.append(f"{ti + 1},{dj + 1},{int(acts[ti, dj])}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_value_csv(path: str | Path, v: np.ndarray) -> None:
    t_max, d_max = v.shape
    lines = [VALUE_HEADER]
    for ti in range(t_max):
        for dj in range(d_max):
            lines.append(f"{ti + 1},{dj + 1},{_fmt(v[ti, dj])}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_q_csv(path: str | Path, q: np.ndarray) -> None:
    t_max, d_max, _ = q.shape
    lines = [Q_HEADER]
    for ti in range(t_max):
        for dj in range(d_max):
            row = q[ti, dj]
            lines.append(f"{ti + 1},{dj + 1},{_fmt(row[0])},{_fmt(row[1])},{_fmt(row[2])}")
    Path(path).write_text("\n".join(lines) + "\n")


def _read_grid_rows(path: str | Path, header: str, n_fields: int) -> list[tuple[int, int, list[str]]]:
    p = Path(path)
    if not p.exists():
        raise MissingArtifactError(f"artifact not found: {p}")
    text = p.read_text()
    lines = text.splitlines()
    if not lines or lines[0].strip() != header:
        raise ArtifactParseError(f"{p}: expected header {header!r}")
    rows = []
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != n_fields:
            raise ArtifactParseError(f"{p}:{ln}: expected {n_fields} fields, got {len(parts)}")
        try:
            tau, delta = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ArtifactParseError(f"{p}:{ln}: bad state coordinates") from exc
        rows.append((tau, delta, parts[2:]))
    if not rows:
        raise ArtifactParseError(f"{p}: no data rows")
    return rows


def _grid_shape(path, rows) -> tuple[int, int]:
    t_max = max(r[0] for r in rows)
    d_max = max(r[1] for r in rows)
    if len(rows) != t_max * d_max:
        raise ArtifactParseError(
            f"{path}: expected {t_max * d_max} rows for a {t_max}x{d_max} grid, got {len(rows)}"
        )
    return t_max, d_max


def read_policy_csv(path: str | Path) -> Policy:
    rows = _read_grid_rows(path, POLICY_HEADER, 3)
    t_max, d_max = _grid_shape(path, rows)
    acts = np.full((t_max, d_max), -1, dtype=np.int8)
    for tau, delta, rest in rows:
        try:
            a = int(rest[0])
        except ValueError as exc:
            raise ArtifactParseError(f"{path}: bad action {rest[0]!r} at ({tau},{delta})") from exc
        if not (1 <= tau <= t_max and 1 <= delta <= d_max):
            raise ArtifactParseError(f"{path}: state ({tau},{delta}) outside grid")
        acts[tau - 1, delta - 1] = a
    if (acts < 0).any():
        missing = np.argwhere(acts < 0)[0]
        raise ArtifactParseError(
            f"{path}: missing state ({missing[0] + 1},{missing[1] + 1})"
        )
    if not np.isin(acts, (0, 1, 2)).all():
        raise ArtifactParseError(f"{path}: actions must be 0, 1 or 2")
    return Policy(actions=acts)


def read_value_csv(path: str | Path) -> np.ndarray:
    rows = _read_grid_rows(path, VALUE_HEADER, 3)
    t_max, d_max = _grid_shape(path, rows)
    v = np.full((t_max, d_max), np.nan)
    for tau, delta, rest in rows:
        try:
            v[tau - 1, delta - 1] = float(rest[0])
        except ValueError as exc:
            raise ArtifactParseError(f"{path}: bad value {rest[0]!r} at ({tau},{delta})") from exc
    if np.isnan(v).any():
        missing = np.argwhere(np.isnan(v))[0]
        raise ArtifactParseError(f"{path}: missing state ({missing[0] + 1},{missing[1] + 1})")
    return v


def read_q_csv(path: str | Path) -> np.ndarray:
    rows = _read_grid_rows(path, Q_HEADER, 5)
    t_max, d_max = _grid_shape(path, rows)
    q = np.full((t_max, d_max, 3), np.nan)
    for tau, delta, rest in rows:
        try:
            q[tau - 1, delta - 1] = [float(x) for x in rest]
        except ValueError as exc:
            raise ArtifactParseError(f"{path}: bad Q row at ({tau},{delta})") from exc
    if np.isnan(q).any():
        missing = np.argwhere(np.isnan(q).any(axis=2))[0]
        raise ArtifactParseError(f"{path}: missing state ({missing[0] + 1},{missing[1] + 1})")
    return q


def write_json(path: str | Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n")
