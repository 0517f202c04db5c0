"""Corpus file reading and writing.

Format: one token per line, tab-separated columns
``surface<TAB>pos[<TAB>phrase-label][<TAB>edu-label][<TAB>B|I]``.
A blank line terminates a sequence. ``# key=value`` header lines carry
metadata; ``# doc=<id>`` starts a new document. Files are UTF-8.
"""

from __future__ import annotations

import io

from .errors import DataError, ParseError
from .types import (
    Document,
    EDU_ROLES,
    PHRASE_LABELS,
    TagAlphabet,
    TaggedSequence,
    TaggedToken,
)

_VALID_BOUNDARIES = ("B", "I")


def parse_corpus(stream, alphabet: TagAlphabet | None = None) -> list[Document]:
    """Parse a corpus file into documents of tagged sequences.

    ``stream`` may be a text string or a file-like object. POS tags are
    validated against ``alphabet`` (the bundled default when omitted).
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    if alphabet is None:
        alphabet = TagAlphabet.default()

    documents: list[Document] = []
    meta: list[tuple[str, str]] = []
    sequences: list[TaggedSequence] = []
    rows: list[tuple[str, str, str, str, str]] = []
    saw_content = False

    def flush_sequence() -> None:
        nonlocal rows
        if not rows:
            return
        tokens = tuple(
            TaggedToken(surface=r[0], tag=r[1], index=i) for i, r in enumerate(rows)
        )
        phrase = tuple(r[2] for r in rows)
        edu = tuple(r[3] for r in rows)
        bnd = tuple(r[4] for r in rows)
        sequences.append(
            TaggedSequence(
                tokens=tokens,
                phrase_labels=phrase if any(phrase) else None,
                edu_labels=edu if any(edu) else None,
                boundaries=bnd if any(bnd) else None,
            )
        )
        rows = []

    def flush_document() -> None:
        nonlocal meta, sequences, saw_content
        flush_sequence()
        if sequences or meta:
            if not any(k == "doc" for k, _ in meta):
                meta.insert(0, ("doc", str(len(documents))))
            documents.append(Document(sequences=tuple(sequences), meta=tuple(meta)))
        meta = []
        sequences = []

    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            flush_sequence()
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" not in body:
                raise ParseError(f"malformed header (expected key=value): {line!r}", lineno)
            key, value = body.split("=", 1)
            key, value = key.strip(), value.strip()
            if key == "doc" and (saw_content or sequences or rows):
                flush_document()
            meta.append((key, value))
            saw_content = True
            continue
        fields = line.split("\t")
        if len(fields) < 2 or len(fields) > 5:
            raise ParseError(
                f"expected 2-5 tab-separated columns, got {len(fields)}", lineno
            )
        surface, tag = fields[0], fields[1]
        if not surface:
            raise ParseError("empty token surface", lineno)
        if tag not in alphabet:
            raise ParseError(f"unknown POS tag: {tag!r}", lineno)
        phrase = fields[2] if len(fields) > 2 else ""
        edu = fields[3] if len(fields) > 3 else ""
        bnd = fields[4] if len(fields) > 4 else ""
        if phrase and phrase not in PHRASE_LABELS:
            raise ParseError(f"unknown phrase label: {phrase!r}", lineno)
        if edu and edu not in EDU_ROLES:
            raise ParseError(f"unknown EDU label: {edu!r}", lineno)
        if bnd and bnd not in _VALID_BOUNDARIES:
            raise ParseError(f"boundary flag must be B or I, got {bnd!r}", lineno)
        rows.append((surface, tag, phrase, edu, bnd))
        saw_content = True

    flush_document()
    return documents


def write_corpus(documents: list[Document]) -> str:
    """Render documents back into corpus-file text (inverse of parse_corpus)."""
    out: list[str] = []
    for idx, doc in enumerate(documents):
        meta = list(doc.meta)
        if not any(k == "doc" for k, _ in meta):
            meta.insert(0, ("doc", str(idx)))
        for key, value in meta:
            out.append(f"# {key}={value}")
        for seq in doc.sequences:
            ncols = 2
            if seq.boundaries is not None:
                ncols = 5
            elif seq.edu_labels is not None:
                ncols = 4
            elif seq.phrase_labels is not None:
                ncols = 3
            for i, tok in enumerate(seq.tokens):
                row = [tok.surface, tok.tag]
                if ncols >= 3:
                    row.append(seq.phrase_labels[i] if seq.phrase_labels else "")
                if ncols >= 4:
                    row.append(seq.edu_labels[i] if seq.edu_labels else "")
                if ncols >= 5:
                    row.append(seq.boundaries[i] if seq.boundaries else "")
                out.append("\t".join(row))
            out.append("")
    return "\n".join(out) + ("\n" if out else "")


def load_corpus(path, alphabet: TagAlphabet | None = None) -> list[Document]:
    with open(path, encoding="utf-8") as fh:
        return parse_corpus(fh, alphabet=alphabet)


def save_corpus(documents: list[Document], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_corpus(documents))


def lexicon_from_file(path) -> tuple[str, ...]:
    """Load a one-entry-per-line lexicon file (``#`` comments ignored)."""
    with open(path, encoding="utf-8") as fh:
        return tuple(
            ln.strip() for ln in fh if ln.strip() and not ln.strip().startswith("#")
        )


def default_markers() -> tuple[str, ...]:
    from importlib import resources

    text = resources.files("thairst.data").joinpath("markers.txt").read_text("utf-8")
    return tuple(
        ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")
    )


def default_key_phrases() -> tuple[str, ...]:
    from importlib import resources

    text = resources.files("thairst.data").joinpath("key_phrases.txt").read_text("utf-8")
    return tuple(
        ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")
    )
