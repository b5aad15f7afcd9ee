"""Deterministic JSON reports.

Identical inputs must produce byte-identical files, so floats are always
rendered with 17 significant digits, dict order is insertion order, and the
serializer below is used instead of ``json.dumps`` (which ties float text to
``repr`` and version-dependent whitespace).  Non-finite floats become the
strings "inf", "-inf", "nan" since JSON has no literals for them.
"""

from __future__ import annotations

import math

SCHEMA = "weightlab-report/1"

__all__ = ["SCHEMA", "canonical_json", "write_report", "format_float"]


def format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(float(x), ".17g")


def _escape(s: str) -> str:
    out = []
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ord(ch) < 0x20:
            out.append("\\u%04x" % ord(ch))
        else:
            out.append(ch)
    return "".join(out)


def _serialize(obj, indent: int, pieces: list) -> None:
    pad = "  " * indent
    if obj is None:
        pieces.append("null")
    elif obj is True:
        pieces.append("true")
    elif obj is False:
        pieces.append("false")
    elif isinstance(obj, str):
        pieces.append('"' + _escape(obj) + '"')
    elif isinstance(obj, int):
        pieces.append(str(obj))
    elif isinstance(obj, float):
        pieces.append(format_float(obj))
    elif isinstance(obj, dict):
        if not obj:
            pieces.append("{}")
            return
        pieces.append("{\n")
        items = list(obj.items())
        for i, (k, v) in enumerate(items):
            pieces.append(pad + '  "' + _escape(str(k)) + '": ')
            _serialize(v, indent + 1, pieces)
            pieces.append(",\n" if i + 1 < len(items) else "\n")
        pieces.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            pieces.append("[]")
            return
        pieces.append("[\n")
        for i, v in enumerate(seq):
            pieces.append(pad + "  ")
            _serialize(v, indent + 1, pieces)
            pieces.append(",\n" if i + 1 < len(seq) else "\n")
        pieces.append(pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} deterministically")


def canonical_json(doc) -> str:
    pieces: list = []
    _serialize(doc, 0, pieces)
    pieces.append("\n")
    return "".join(pieces)


def write_report(path: str, doc: dict) -> None:
    if "schema" not in doc:
        doc = {"schema": SCHEMA, **doc}
    with open(path, "w") as fh:
        fh.write(canonical_json(doc))
