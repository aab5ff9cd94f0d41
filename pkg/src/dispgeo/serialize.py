"""Text formats: exact rationals, matrix documents, certificates.

Matrices parse from JSON arrays of rows; entries may be integers,
decimals, or exact rationals written "p/q".  Certificates render to flat
key = value documents with rationals kept exact and reals printed with 12
significant digits, so identical inputs always produce identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import fields, is_dataclass
from fractions import Fraction

from .errors import ParseError
from .words import Word

__all__ = [
    "render_rational",
    "parse_rational",
    "render_real",
    "parse_matrix_text",
    "parse_int_matrix_text",
    "load_matrix_file",
    "certificate_document",
    "write_atomic",
]


def render_rational(x) -> str:
    f = Fraction(x)
    if f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator}"


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"invalid rational {text!r}") from exc


def render_real(x: float) -> str:
    return format(float(x), ".12g")


def _entry_value(entry, row_index: int):
    if isinstance(entry, bool):
        raise ParseError(f"row {row_index}: boolean entry")
    if isinstance(entry, (int, float)):
        return entry
    if isinstance(entry, str):
        return parse_rational(entry)
    raise ParseError(f"row {row_index}: unsupported entry {entry!r}")


def parse_matrix_text(text: str) -> list[list]:
    """One matrix from a JSON array of rows; entries int, float or 'p/q'."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return _matrix_from_data(data)


def _matrix_from_data(data) -> list[list]:
    if not isinstance(data, list) or not data:
        raise ParseError("matrix document must be a nonempty array of rows")
    rows = []
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != len(data):
            raise ParseError(f"row {i}: matrix must be square")
        rows.append([_entry_value(x, i) for x in row])
    return rows


def parse_int_matrix_text(text: str) -> tuple[tuple[int, ...], ...]:
    """Like parse_matrix_text but entries must be exact integers."""
    rows = parse_matrix_text(text)
    out = []
    for i, row in enumerate(rows):
        clean = []
        for x in row:
            if isinstance(x, float) and x != int(x):
                raise ParseError(f"row {i}: entry {x} is not an integer")
            f = Fraction(x)
            if f.denominator != 1:
                raise ParseError(f"row {i}: entry {x} is not an integer")
            clean.append(int(f))
        out.append(tuple(clean))
    return tuple(out)


def load_matrix_file(path: str, integer: bool = False) -> list:
    """A file holding one matrix or an array of matrices (JSON).

    Returns a list of matrices either way.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: line {exc.lineno}, column "
                             f"{exc.colno}: {exc.msg}") from exc
    if (not isinstance(data, list) or not data
            or not isinstance(data[0], list) or not data[0]):
        raise ParseError(f"{path}: expected a matrix or array of matrices")
    batch = data if isinstance(data[0][0], list) else [data]
    matrices = []
    for m in batch:
        rows = _matrix_from_data(m)
        if integer:
            matrices.append(parse_int_matrix_text(json.dumps(m)))
        else:
            matrices.append([[float(x) for x in row] for row in rows])
    return matrices


def _render_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return render_rational(v)
    if isinstance(v, float):
        return render_real(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Word):
        return v.to_str() if len(v) else "<identity>"
    if v is None:
        return "none"
    if isinstance(v, str):
        return v
    if isinstance(v, (tuple, list)):
        return "[" + ", ".join(_render_value(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_render_value(x)}"
                               for k, x in sorted(v.items())) + "}"
    return str(v)


def certificate_document(cert, kind: str | None = None) -> str:
    """Flat ``key = value`` document for any certificate dataclass.

    The first line carries the certificate type; field order follows the
    dataclass definition, so output is deterministic.
    """
    if not is_dataclass(cert):
        raise TypeError(f"expected a dataclass, got {type(cert)}")
    name = kind or type(cert).__name__
    lines = [f"type = {name}"]
    for f in fields(cert):
        lines.append(f"{f.name} = {_render_value(getattr(cert, f.name))}")
    return "\n".join(lines) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write via a temp file in the same directory plus rename."""
    import os
    import tempfile

    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
