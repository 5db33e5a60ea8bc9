"""Net files, OBJ export and JSON reports.

Net file layout::

    bezier-net v1
    degrees n m
    closed true|false
    x y z          # (n + 1) * (m + 1) lines, row-major in i

Blank lines and ``#`` comments are ignored. Coordinates are written with 17
significant digits, so a save/load round trip is bit-exact.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
from pathlib import Path

import numpy as np

from .bezier import ControlNet, as_points, classify_closedness
from .errors import ClosednessMismatch, CountMismatch, NetFormatError, UnsupportedTopology
from .mesh import TriMesh

MAGIC = "bezier-net v1"
REPORT_FORMAT = "bezier-isotopy-report"
REPORT_VERSION = 1


# -- net files -----------------------------------------------------------------------

def _lines(text):
    for number, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if body.strip():
            yield number, body


def _tokens(body):
    """Whitespace tokens with their 1-based columns."""
    col = 0
    for token in body.split():
        col = body.index(token, col)
        yield token, col + 1
        col += len(token)


def _expect(entry, keyword, count):
    if entry is None:
        raise NetFormatError(f"missing '{keyword}' line")
    number, body = entry
    toks = list(_tokens(body))
    if toks[0][0] != keyword:
        raise NetFormatError(f"expected '{keyword}', found '{toks[0][0]}'", number, toks[0][1])
    if len(toks) != count + 1:
        raise NetFormatError(f"'{keyword}' takes {count} value(s)", number, toks[0][1])
    return number, toks[1:]


def parse_net(text: str) -> ControlNet:
    lines = _lines(text)
    first = next(lines, None)
    if first is None or first[1].strip() != MAGIC:
        raise NetFormatError(f"first line must be '{MAGIC}'", first[0] if first else 1, 1)
    number, toks = _expect(next(lines, None), "degrees", 2)
    degrees = []
    for tok, col in toks:
        try:
            value = int(tok)
        except ValueError:
            raise NetFormatError(f"degree '{tok}' is not an integer", number, col) from None
        if value < 1:
            raise NetFormatError(f"degree must be at least 1, got {value}", number, col)
        degrees.append(value)
    n, m = degrees
    closed_line, toks = _expect(next(lines, None), "closed", 1)
    flag, flag_col = toks[0]
    if flag not in ("true", "false"):
        raise NetFormatError(f"'closed' must be true or false, got '{flag}'", closed_line, flag_col)
    declared_closed = flag == "true"

    expected = (n + 1) * (m + 1)
    rows = []
    last_line = closed_line
    for number, body in lines:
        last_line = number
        if len(rows) == expected:
            raise CountMismatch(f"more than the {expected} points declared by degrees {n} {m}", number, 1)
        toks = list(_tokens(body))
        if len(toks) != 3:
            raise NetFormatError(f"expected 3 coordinates, found {len(toks)}", number, 1)
        row = []
        for tok, col in toks:
            try:
                value = float(tok)
            except ValueError:
                raise NetFormatError(f"'{tok}' is not a number", number, col) from None
            if not math.isfinite(value):
                raise NetFormatError(f"coordinate '{tok}' is not finite", number, col)
            row.append(value)
        rows.append(row)
    if len(rows) != expected:
        raise CountMismatch(f"found {len(rows)} points, degrees {n} {m} need {expected}", last_line)

    points = np.array(rows).reshape(n + 1, m + 1, 3)
    try:
        actual_closed = classify_closedness(points).closed
    except UnsupportedTopology as exc:
        if declared_closed:
            raise ClosednessMismatch(f"declared closed but {exc}", closed_line, flag_col) from None
        raise
    if actual_closed != declared_closed:
        state = "closed" if actual_closed else "open"
        raise ClosednessMismatch(f"declared closed {flag} but the points form an {state} net",
                                 closed_line, flag_col)
    return ControlNet(points)


def load_net(path) -> ControlNet:
    return parse_net(Path(path).read_text())


def dump_net(net) -> str:
    pts = as_points(net)
    closed = classify_closedness(pts).closed
    lines = [MAGIC, f"degrees {pts.shape[0] - 1} {pts.shape[1] - 1}", f"closed {'true' if closed else 'false'}"]
    lines += [" ".join(format(float(c), ".17g") for c in p) for p in pts.reshape(-1, 3)]
    return "\n".join(lines) + "\n"


def save_net(path, net) -> None:
    Path(path).write_text(dump_net(net))


# -- meshes ----------------------------------------------------------------------------

class MeshFormat(str, enum.Enum):
    OBJ = "obj"


def export_mesh(mesh: TriMesh, fmt: str | MeshFormat = MeshFormat.OBJ) -> bytes:
    """ASCII OBJ with ``v`` and 1-based ``f`` records in mesh order."""
    if MeshFormat(fmt) is not MeshFormat.OBJ:  # pragma: no cover - single format today
        raise ValueError(f"unsupported format {fmt!r}")
    out = [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in mesh.positions.tolist()]
    out += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.triangles.tolist()]
    return ("\n".join(out) + "\n").encode("ascii")


def parse_obj(data: bytes | str) -> TriMesh:
    """Read ``v`` and triangular ``f`` records; other record types are skipped."""
    text = data.decode("ascii") if isinstance(data, bytes) else data
    verts, faces = [], []
    for number, body in _lines(text):
        toks = body.split()
        if toks[0] == "v":
            verts.append([float(t) for t in toks[1:4]])
        elif toks[0] == "f":
            if len(toks) != 4:
                raise NetFormatError("only triangular faces are supported", number, 1)
            faces.append([int(t.split("/")[0]) - 1 for t in toks[1:]])
    return TriMesh(np.array(verts, dtype=float).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3))


# -- reports -----------------------------------------------------------------------------

def _plain(value):
    """Recursively convert dataclasses, enums and numpy scalars to JSON values."""
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: _plain(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isfinite(value):
            return value
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def report_dict(net, records, config, summary=None) -> dict:
    pts = as_points(net)
    levels = []
    for r in records:
        entry = _plain(r)
        entry["max_cone_spans"] = dict(zip(("theta_n", "theta_u", "theta_v"), entry["max_cone_spans"]))
        levels.append(entry)
    out = {
        "format": REPORT_FORMAT,
        "version": REPORT_VERSION,
        "net": {"n": pts.shape[0] - 1, "m": pts.shape[1] - 1, "closed": classify_closedness(pts).closed},
        "config": _plain(config),
        "levels": levels,
    }
    if summary is not None:
        out["summary"] = _plain(summary)
    return out


def dumps_report(net, records, config, summary=None) -> str:
    """Deterministic JSON: sorted keys and shortest round-trip float repr."""
    return json.dumps(report_dict(net, records, config, summary), sort_keys=True, indent=2,
                      allow_nan=False) + "\n"
