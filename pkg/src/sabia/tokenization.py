"""Word tokenization shared by the lexical metrics and the local embedder."""

from __future__ import annotations

import re
import unicodedata

# Maximal runs of alphanumeric characters (unicode letters incl. accented
# Portuguese letters, plus digits); underscore counts as a separator.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercased NFC word tokens; punctuation and whitespace discarded."""
    normalized = unicodedata.normalize("NFC", text).lower()
    return _TOKEN_RE.findall(normalized)
