"""Stage 1 of the pipeline: POS tags -> phrases -> EDU boundaries -> grouped EDUs.

Phrase identification decodes per-token phrase-constituent labels with the
phrase HMM, then chunks maximal label runs into NP/VP/Marker phrases by
longest match against the arrangement table. EDU segmentation decodes the
chunk-tag sequence with the EDU HMM whose hidden states carry a
segment-initial flag (``B-``/``I-``), so boundaries fall out of the state
path. Grouping merges adjacent same-role tokens and assigns the best
arrangement; the ambiguous double-transitive pair is resolved with the Vtt
probability table.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import DataError
from .grammar import GrammarRuleTable
from .hmm import HmmModel, estimate_supervised, viterbi
from .types import (
    Constituent,
    Edu,
    EduToken,
    NP_PHRASE_LABELS,
    NP_ROLES,
    TaggedSequence,
    VERB_ROLES,
)

_NP_FAMILY = frozenset(NP_PHRASE_LABELS)
_VP_FAMILY = frozenset({"Nuc", "Aux1", "Aux2", "M"})

CHUNK_TAGS = ("NP", "VP", "Marker")


@dataclass(frozen=True)
class PhraseChunk:
    """A chunked phrase: its kind, tokens, and per-token phrase labels."""

    kind: str
    tokens: tuple[EduToken, ...]
    arrangement: str | None = None
    matched: bool = True
    diagnostic: str | None = None

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(t.phrase_label for t in self.tokens)

    @property
    def surfaces(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)


@dataclass(frozen=True)
class PhraseResult:
    labels: tuple[str, ...]
    chunks: tuple[PhraseChunk, ...]


def identify_phrases(
    model: HmmModel, sentence: TaggedSequence, table: GrammarRuleTable
) -> PhraseResult:
    """Label each token with its phrase constituent and chunk the result."""
    labels, _ = viterbi(model, sentence.tags)
    tokens = tuple(
        EduToken(surface=t.surface, tag=t.tag, phrase_label=lab)
        for t, lab in zip(sentence.tokens, labels)
    )
    return PhraseResult(labels=labels, chunks=chunk_phrases(tokens, table))


def chunk_phrases(tokens: tuple[EduToken, ...], table: GrammarRuleTable) -> tuple[PhraseChunk, ...]:
    """Chunk labeled tokens into phrases.

    Consecutive identical labels collapse into a single run (repeated
    determiners, stacked auxiliaries); the run-label sequence is then
    matched longest-first against the NP/VP arrangement tables.
    """
    runs: list[tuple[str, list[EduToken]]] = []
    for tok in tokens:
        if runs and runs[-1][0] == tok.phrase_label:
            runs[-1][1].append(tok)
        else:
            runs.append((tok.phrase_label, [tok]))

    chunks: list[PhraseChunk] = []
    i = 0
    while i < len(runs):
        label = runs[i][0]
        if label == "Marker":
            chunks.append(
                PhraseChunk(kind="Marker", tokens=tuple(runs[i][1]), arrangement="Marker")
            )
            i += 1
            continue
        kind = "NP" if label in _NP_FAMILY else "VP" if label in _VP_FAMILY else None
        if kind is None:
            chunks.append(
                PhraseChunk(
                    kind="NP",
                    tokens=tuple(runs[i][1]),
                    matched=False,
                    diagnostic=f"label {label!r} belongs to no phrase family",
                )
            )
            i += 1
            continue
        best_len = 0
        best_pattern: tuple[str, ...] | None = None
        for pattern in table.phrase_arrangements(kind):
            k = len(pattern)
            if k <= best_len or i + k > len(runs):
                continue
            if tuple(r[0] for r in runs[i : i + k]) == pattern:
                best_len = k
                best_pattern = pattern
        if best_pattern is None:
            chunks.append(
                PhraseChunk(
                    kind=kind,
                    tokens=tuple(runs[i][1]),
                    matched=False,
                    diagnostic=f"run {label!r} matches no {kind} arrangement",
                )
            )
            i += 1
            continue
        toks: list[EduToken] = []
        for _, run_toks in runs[i : i + best_len]:
            toks.extend(run_toks)
        chunks.append(
            PhraseChunk(kind=kind, tokens=tuple(toks), arrangement="-".join(best_pattern))
        )
        i += best_len
    return tuple(chunks)


# -- EDU segmentation --------------------------------------------------------


def edu_state(role: str, segment_initial: bool) -> str:
    return ("B-" if segment_initial else "I-") + role


def split_edu_state(state: str) -> tuple[str, bool]:
    if state.startswith("B-"):
        return state[2:], True
    if state.startswith("I-"):
        return state[2:], False
    raise DataError(f"malformed EDU state: {state!r}")


def segment_edus(model: HmmModel, chunks: tuple[PhraseChunk, ...]) -> list[Edu]:
    """Split a chunk sequence into EDUs via the boundary HMM.

    Decodes one ``B-``/``I-`` flagged role per chunk; a new EDU opens at
    every segment-initial state (the first chunk always opens one). Chunk
    roles broadcast to their tokens, so each EDU arrives with token-level
    constituents ready for grouping.
    """
    if not chunks:
        return []
    symbols = tuple(c.kind for c in chunks)
    states, _ = viterbi(model, symbols)
    edus: list[Edu] = []
    current: list[Constituent] = []

    def close() -> None:
        if current:
            edus.append(_make_edu(len(edus) + 1, tuple(current)))
            current.clear()

    for chunk, state in zip(chunks, states):
        role, initial = split_edu_state(state)
        if initial:
            close()
        current.append(Constituent(role=role, tokens=chunk.tokens))
    close()
    return edus


def _make_edu(position: int, constituents: tuple[Constituent, ...]) -> Edu:
    before: list[str] = []
    after: list[str] = []
    i = 0
    while i < len(constituents) and constituents[i].role == "Marker":
        before.extend(constituents[i].surfaces)
        i += 1
    j = len(constituents)
    while j > i and constituents[j - 1].role == "Marker":
        after = list(constituents[j - 1].surfaces) + after
        j -= 1
    return Edu(
        position=position,
        constituents=constituents,
        markers_before=tuple(before),
        markers_after=tuple(after),
    )


# -- constituent grouping ----------------------------------------------------


@dataclass(frozen=True)
class VttTable:
    """P(role | verb, term) estimates for the double-transitive ambiguity."""

    probs: dict

    def probability(self, verb: str, term: str, role: str) -> float:
        entry = self.probs.get((verb, term))
        if not entry:
            return 0.5
        return entry.get(role, 0.0)

    def __len__(self) -> int:
        return len(self.probs)

    def to_dict(self) -> dict:
        return {
            "entries": [
                {"verb": v, "term": t, "roles": dict(roles)}
                for (v, t), roles in sorted(self.probs.items())
            ]
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "VttTable":
        probs = {}
        for item in payload.get("entries", []):
            roles = {r: float(p) for r, p in item["roles"].items()}
            for p in roles.values():
                if not 0.0 <= p <= 1.0:
                    raise DataError("Vtt probabilities must lie in [0, 1]")
            probs[(item["verb"], item["term"])] = roles
        return cls(probs=probs)

    @classmethod
    def empty(cls) -> "VttTable":
        return cls(probs={})


def build_vtt_table(edus) -> VttTable:
    """Relative-frequency P(role | verb, term) from gold-grouped Vtt EDUs."""
    counts: dict[tuple[str, str], dict[str, int]] = {}
    for edu in edus:
        verbs = [c for c in edu.constituents if c.role == "Vtt"]
        if not verbs:
            continue
        verb = _verb_lemma(verbs[0])
        for group in edu.constituents:
            if group.role not in ("O", "I"):
                continue
            term = _head_term(group)
            if term is None:
                continue
            entry = counts.setdefault((verb, term), {})
            entry[group.role] = entry.get(group.role, 0) + 1
    probs = {}
    for key, entry in counts.items():
        total = sum(entry.values())
        probs[key] = {role: c / total for role, c in entry.items()}
    return VttTable(probs=probs)


def _verb_lemma(group: Constituent) -> str:
    for t in group.tokens:
        if t.phrase_label == "Nuc":
            return t.surface
    return group.tokens[0].surface


def _head_term(group: Constituent) -> str | None:
    for t in group.tokens:
        if t.phrase_label == "H":
            return t.surface
    return group.tokens[0].surface if group.tokens else None


def group_constituents(edu: Edu, rules: GrammarRuleTable, vtt: VttTable | None = None) -> Edu:
    """Merge adjacent same-role tokens and assign the best arrangement.

    The ambiguous pair O-S-Vtt-I / I-S-Vtt-O is re-read in whichever
    direction maximizes the product of Vtt table probabilities; an empty
    table leaves the decoded reading in place (table-order fallback).
    """
    merged = _merge_adjacent(edu)
    roles = merged.role_sequence
    hit = rules.best_edu_arrangement(roles)
    if hit is None:
        return replace(
            merged,
            grouped=False,
            ungrouped_reason=f"role sequence {'-'.join(roles)!r} matches no arrangement",
        )
    arrangement, omitted = hit
    result = replace(
        merged,
        arrangement="-".join(arrangement.pattern),
        frame_rule=arrangement.rule,
        omitted_slots=omitted,
        grouped=True,
        ungrouped_reason=None,
    )
    if vtt is not None and len(vtt):
        result = _resolve_vtt_ambiguity(result, rules, vtt)
    return result


_AMBIGUOUS_VTT = (("O", "S", "Vtt", "I"), ("I", "S", "Vtt", "O"))


def _resolve_vtt_ambiguity(edu: Edu, rules: GrammarRuleTable, vtt: VttTable) -> Edu:
    roles = edu.role_sequence
    if roles not in _AMBIGUOUS_VTT:
        return edu
    groups = [c for c in edu.constituents if c.role != "Marker"]
    verb_group = next(c for c in groups if c.role == "Vtt")
    verb = _verb_lemma(verb_group)
    first = next(c for c in groups if c.role in ("O", "I"))
    last = next(c for c in reversed(groups) if c.role in ("O", "I"))
    t_first, t_last = _head_term(first), _head_term(last)
    as_is = vtt.probability(verb, t_first, first.role) * vtt.probability(
        verb, t_last, last.role
    )
    flipped = vtt.probability(verb, t_first, last.role) * vtt.probability(
        verb, t_last, first.role
    )
    if flipped <= as_is:
        return edu
    swap = {first.role: last.role, last.role: first.role}
    constituents = tuple(
        replace(c, role=swap.get(c.role, c.role)) for c in edu.constituents
    )
    flipped_roles = tuple(swap.get(r, r) for r in roles)
    arrangement = rules.match_edu_pattern(flipped_roles)
    return replace(
        edu,
        constituents=constituents,
        arrangement="-".join(flipped_roles),
        frame_rule=arrangement.rule if arrangement else edu.frame_rule,
    )


def _merge_adjacent(edu: Edu) -> Edu:
    merged: list[Constituent] = []
    for c in edu.constituents:
        if merged and merged[-1].role == c.role:
            merged[-1] = Constituent(
                role=c.role, tokens=merged[-1].tokens + c.tokens
            )
        else:
            merged.append(c)
    return replace(edu, constituents=tuple(merged))


def grouped_form(edu: Edu) -> str:
    """Canonical rendering of a grouped EDU, e.g. ``NP_S-(V,V)_t-(NP,NP,NP)_O``."""
    parts = []
    for c in edu.constituents:
        if c.role == "Marker":
            parts.append(f"Marker({','.join(c.surfaces)})")
            continue
        if c.role in NP_ROLES:
            unit, suffix = "NP", c.role
        else:
            unit, suffix = "V", c.role[1:]
        n = len(c.tokens)
        body = unit if n == 1 else "(" + ",".join([unit] * n) + ")"
        parts.append(f"{body}_{suffix}")
    return "-".join(parts)


# -- training-data helpers ----------------------------------------------------


def phrase_training_pairs(documents) -> list[tuple[list[str], list[str]]]:
    """(phrase-label path, POS-tag sequence) pairs from gold-labeled corpora."""
    pairs = []
    for doc in documents:
        for seq in doc.sequences:
            if seq.phrase_labels is None:
                continue
            if any(not lab for lab in seq.phrase_labels):
                raise DataError("sequence has incomplete phrase-label column")
            pairs.append((list(seq.phrase_labels), list(seq.tags)))
    if not pairs:
        raise DataError("corpus carries no phrase-labeled sequences")
    return pairs


def gold_chunks(seq: TaggedSequence, table: GrammarRuleTable) -> tuple[PhraseChunk, ...]:
    if seq.phrase_labels is None:
        raise DataError("sequence has no gold phrase labels")
    tokens = tuple(
        EduToken(surface=t.surface, tag=t.tag, phrase_label=lab)
        for t, lab in zip(seq.tokens, seq.phrase_labels)
    )
    return chunk_phrases(tokens, table)


def edu_training_pairs(documents, table: GrammarRuleTable) -> list[tuple[list[str], list[str]]]:
    """(B/I role path, chunk-tag sequence) pairs from gold-labeled corpora.

    Chunk roles and boundary flags are read off the first token of each
    gold chunk.
    """
    pairs = []
    for doc in documents:
        for seq in doc.sequences:
            if seq.edu_labels is None or seq.boundaries is None:
                continue
            chunks = gold_chunks(seq, table)
            path: list[str] = []
            symbols: list[str] = []
            offset = 0
            for chunk in chunks:
                role = seq.edu_labels[offset]
                flag = seq.boundaries[offset]
                if not role or not flag:
                    raise DataError("sequence has incomplete EDU gold columns")
                path.append(edu_state(role, flag == "B"))
                symbols.append(chunk.kind)
                offset += len(chunk.tokens)
            pairs.append((path, symbols))
    if not pairs:
        raise DataError("corpus carries no EDU-labeled sequences")
    return pairs


def train_phrase_model(documents) -> HmmModel:
    return estimate_supervised(phrase_training_pairs(documents))


def train_edu_model(documents, table: GrammarRuleTable) -> HmmModel:
    return estimate_supervised(edu_training_pairs(documents, table))


def segment_document(
    doc,
    phrase_model: HmmModel,
    edu_model: HmmModel,
    table: GrammarRuleTable,
    vtt: VttTable | None = None,
) -> list[Edu]:
    """Run the full segmentation stage over one document.

    Sequences are concatenated in order; EDU positions run 1..n across the
    document.
    """
    edus: list[Edu] = []
    for seq in doc.sequences:
        result = identify_phrases(phrase_model, seq, table)
        for edu in segment_edus(edu_model, result.chunks):
            edu = group_constituents(edu, table, vtt)
            edus.append(edu.with_position(len(edus) + 1))
    return edus
