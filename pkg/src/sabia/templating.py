"""Single-pass placeholder substitution for prompt templates."""

from __future__ import annotations


class TemplateError(Exception):
    """Raised when a template is missing a required placeholder."""


def placeholder_count(template: str, name: str) -> int:
    return template.count("{" + name + "}")


def substitute_once(template: str, values: dict[str, str]) -> str:
    """Replace the first `{name}` occurrence of each placeholder, in one pass.

    Substituted values are never rescanned, so a value that itself contains
    placeholder-looking text survives verbatim.
    """
    spans: list[tuple[int, int, str]] = []
    for name, value in values.items():
        marker = "{" + name + "}"
        idx = template.find(marker)
        if idx < 0:
            raise TemplateError(f"placeholder {marker} missing from template")
        spans.append((idx, idx + len(marker), value))
    spans.sort()
    pieces: list[str] = []
    cursor = 0
    for start, end, value in spans:
        pieces.append(template[cursor:start])
        pieces.append(value)
        cursor = end
    pieces.append(template[cursor:])
    return "".join(pieces)
