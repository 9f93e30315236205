"""Plain-text boundary files.

Layout::

    NV NE
    x y            (NV lines)
    i j [D|N]      (NE lines, 0-based directed edges, optional tag)

Blank lines and anything after ``#`` are ignored.
"""

import logging
from pathlib import Path

import numpy as np

from ..exceptions import BoundaryFormatError, SpaceTimeError
from ..geometry.boundary import OrientedBoundary
from ..models import BoundaryTag

logger = logging.getLogger(__name__)


def _content_lines(text: str) -> list[tuple[int, list[str]]]:
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if tokens:
            lines.append((number, tokens))
    return lines


def _number(token: str, kind: type, line: int, what: str):
    try:
        return kind(token)
    except ValueError:
        raise BoundaryFormatError(f"{what} '{token}' is not a valid {kind.__name__}", line=line) from None


def parse_boundary(text: str) -> OrientedBoundary:
    """Parse boundary file contents.

    Raises:
        BoundaryFormatError: On malformed input, with the 1-based line number.
    """
    lines = _content_lines(text)
    if not lines:
        raise BoundaryFormatError("boundary file is empty", line=1)
    line, header = lines[0]
    if len(header) != 2:
        raise BoundaryFormatError("header must be 'NV NE'", line=line)
    nv = _number(header[0], int, line, "vertex count")
    ne = _number(header[1], int, line, "edge count")
    if nv < 3 or ne < 3:
        raise BoundaryFormatError(f"need at least 3 vertices and 3 edges, got {nv} and {ne}", line=line)
    body = lines[1:]
    if len(body) < nv + ne:
        last = body[-1][0] if body else line
        raise BoundaryFormatError(f"expected {nv} vertex and {ne} edge lines, found {len(body)}", line=last + 1)
    if len(body) > nv + ne:
        raise BoundaryFormatError("unexpected content after the last edge", line=body[nv + ne][0])

    vertices = np.zeros((nv, 2))
    for k, (line, tokens) in enumerate(body[:nv]):
        if len(tokens) != 2:
            raise BoundaryFormatError("vertex line must be 'x y'", line=line)
        vertices[k] = [_number(tokens[0], float, line, "coordinate"), _number(tokens[1], float, line, "coordinate")]

    edges = np.zeros((ne, 2), dtype=int)
    neumann = np.zeros(ne, dtype=bool)
    for k, (line, tokens) in enumerate(body[nv:]):
        if len(tokens) not in (2, 3):
            raise BoundaryFormatError("edge line must be 'i j' or 'i j D|N'", line=line)
        i, j = (_number(t, int, line, "vertex index") for t in tokens[:2])
        if not (0 <= i < nv and 0 <= j < nv):
            raise BoundaryFormatError(f"edge ({i}, {j}) refers to a vertex outside 0..{nv - 1}", line=line)
        edges[k] = i, j
        if len(tokens) == 3:
            tag = BoundaryTag.from_string(tokens[2])
            if tag is None:
                raise BoundaryFormatError(f"unknown boundary tag '{tokens[2]}' (expected D or N)", line=line)
            neumann[k] = tag == BoundaryTag.NEUMANN

    try:
        return OrientedBoundary(vertices, edges, neumann)
    except SpaceTimeError as e:
        raise BoundaryFormatError(f"invalid boundary: {e.detail}") from e


def read_boundary(path: str | Path) -> OrientedBoundary:
    """Read a boundary file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise BoundaryFormatError(f"cannot read boundary file {path}: {e}") from e
    boundary = parse_boundary(text)
    logger.info(f"Read boundary {path.name}: {len(boundary.vertices)} vertices, {len(boundary.loops)} loops")
    return boundary


def format_boundary(boundary: OrientedBoundary) -> str:
    """Serialise a boundary; tags are written only when a Neumann edge exists."""
    tagged = bool(np.any(boundary.neumann))
    lines = [f"{len(boundary.vertices)} {len(boundary.edges)}"]
    lines += [f"{x!r} {y!r}" for x, y in boundary.vertices.tolist()]
    for k, (i, j) in enumerate(boundary.edges.tolist()):
        suffix = f" {boundary.tag(k).value}" if tagged else ""
        lines.append(f"{i} {j}{suffix}")
    return "\n".join(lines) + "\n"


def write_boundary(boundary: OrientedBoundary, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_boundary(boundary))
    return path
