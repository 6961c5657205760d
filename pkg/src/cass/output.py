"""Rendering of analysis results as plain text, XML or JSON lines."""

from __future__ import annotations

import json
from enum import Enum
from typing import Any, Iterable
from xml.sax.saxutils import escape

from cass.framework import Analysis
from cass.ir import QName


class OutputFormat(str, Enum):
    PLAIN = "plain"
    XML = "xml"
    JSON = "json"

    @classmethod
    def parse(cls, text: str) -> OutputFormat:
        try:
            return cls(text.lower())
        except ValueError:
            raise ValueError(f"unknown format {text!r} (expected plain, xml or json)") from None


def _attr(s: str) -> str:
    return '"' + escape(s, {'"': "&quot;"}) + '"'


def _value_text(analysis: Analysis, v: Any) -> str:
    return json.dumps(analysis.encode(v), ensure_ascii=False, separators=(",", ":"))


def render(
    analysis: Analysis, module: str, results: Iterable[tuple[QName, Any]], fmt: OutputFormat
) -> list[str]:
    """Output lines for ``results``; always sorted by qualified name."""
    results = sorted(results, key=lambda r: r[0])
    if fmt is OutputFormat.PLAIN:
        return [f"{q} : {analysis.show(v)}" for q, v in results]
    if fmt is OutputFormat.XML:
        lines = [f"<analysisresult analysis={_attr(analysis.name)} module={_attr(module)}>"]
        for q, v in results:
            lines.append(
                f"<entity name={_attr(str(q))} value={_attr(_value_text(analysis, v))}>"
                f"{escape(analysis.show(v))}</entity>"
            )
        lines.append("</analysisresult>")
        return lines
    doc = {
        "analysis": analysis.name,
        "module": module,
        "results": [
            {"name": str(q), "value": analysis.encode(v), "shown": analysis.show(v)} for q, v in results
        ],
    }
    return [json.dumps(doc, ensure_ascii=False)]
