"""Semantic rules between EDU pairs: matching, features, and similarity.

The closed rule catalog pairs constituents of the cataphoric (earlier) and
anaphoric (later) EDU: repetition rules fire when a content word recurs in
the paired slot, absence rules when a frame slot the anaphoric unit expects
is left empty, addition rules when a lexicon marker or key phrase flanks
an EDU. Each matched rule yields a 14-element feature vector per EDU, a
score from the vector magnitudes gated by the maximum EDU distance, and the
document similarity is the CombSum fusion of min-max normalized rule scores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

from .corpus import default_key_phrases, default_markers
from .errors import DataError
from .types import Edu

# -- rule catalog -------------------------------------------------------------

ABSENCE = "absence"
REPETITION = "repetition"
ADDITION = "addition"


@dataclass(frozen=True)
class SemanticRule:
    kind: str
    cat: tuple[str, ...]
    ana: tuple[str, ...]

    def __str__(self) -> str:
        mark = {ABSENCE: "Phi", REPETITION: "Rep", ADDITION: "Add"}[self.kind]
        def side(parts):
            return parts[0] if len(parts) == 1 else "(" + ",".join(parts) + ")"
        return f"{mark}({side(self.cat)},{side(self.ana)})"


def _rep(cat, ana):
    return SemanticRule(REPETITION, cat, ana)


def _abs(cat, ana):
    return SemanticRule(ABSENCE, cat, ana)


def _add(trigger, position):
    return SemanticRule(ADDITION, (trigger,), (position,))


REPETITION_RULES = (
    _rep(("S",), ("S",)),
    _rep(("O",), ("S",)),
    _rep(("S",), ("O",)),
    _rep(("O",), ("O",)),
    _rep(("S",), ("Prep",)),
    _rep(("O",), ("Prep",)),
    _rep(("Prep",), ("S",)),
    _rep(("Prep",), ("O",)),
    _rep(("S", "Prep"), ("S", "Prep")),
    _rep(("O", "Prep"), ("S", "Prep")),
    _rep(("Prep", "Prep"), ("S", "Prep")),
    _rep(("S", "Prep"), ("O", "Prep")),
    _rep(("O", "Prep"), ("O", "Prep")),
    _rep(("Prep", "Prep"), ("O", "Prep")),
    _rep(("OnlyH",), ("OnlyH",)),
    _rep(("H",), ("M",)),
    _rep(("OnlyM",), ("OnlyNuc",)),
    _rep(("OnlyM",), ("OnlyM",)),
    _rep(("Nuc", "VM"), ("Nuc", "VM")),
)

ABSENCE_RULES = (
    _abs(("S",), ("S",)),
    _abs(("O",), ("S",)),
    _abs(("S",), ("O",)),
    _abs(("O",), ("O",)),
    _abs(("OnlyH",), ("H",)),
    _abs(("H", "M"), ("H",)),
    _abs(("H", "M"), ("M",)),
    _abs(("S",), ("Prep",)),
    _abs(("O",), ("Prep",)),
    _abs(("Prep",), ("S",)),
    _abs(("Prep",), ("O",)),
)

ADDITION_RULES = (
    _add("Marker", "After"),
    _add("Marker", "Before"),
    _add("KeyPhrase", "After"),
    _add("KeyPhrase", "Before"),
)

ALL_RULES = REPETITION_RULES + ABSENCE_RULES + ADDITION_RULES

# Vector element addressed by each rule component.
_ELEMENT = {
    "S": "subject",
    "O": "object",
    "Prep": "preposition",
    "H": "head",
    "OnlyH": "head",
    "M": "modifier_head",
    "OnlyM": "modifier_head",
    "Nuc": "nucleus",
    "OnlyNuc": "nucleus",
    "VM": "modifier_nucleus",
}
_ABSENCE_ELEMENT = {
    "S": "absence_subject",
    "O": "absence_object",
    "Prep": "absence_preposition",
    "H": "absence_head",
    "M": "absence_modifier_head",
}


@dataclass(frozen=True)
class RuleMatch:
    rule: SemanticRule
    bindings: tuple[str, ...] = ()


@dataclass(frozen=True)
class MarkerLexicon:
    markers: frozenset[str]
    key_phrases: frozenset[str] = frozenset()

    @classmethod
    def default(cls) -> "MarkerLexicon":
        return cls(
            markers=frozenset(default_markers()),
            key_phrases=frozenset(default_key_phrases()),
        )


@dataclass
class EduFeatureVector:
    """The 14 similarity-feature elements of one EDU, all in [0, 1]."""

    subject: float = 0.0
    absence_subject: float = 0.0
    object: float = 0.0
    absence_object: float = 0.0
    preposition: float = 0.0
    absence_preposition: float = 0.0
    nucleus: float = 0.0
    modifier_nucleus: float = 0.0
    head: float = 0.0
    absence_head: float = 0.0
    modifier_head: float = 0.0
    absence_modifier_head: float = 0.0
    marker_before: float = 0.0
    marker_after: float = 0.0

    def set_element(self, name: str, value: float) -> None:
        if not hasattr(self, name):
            raise DataError(f"unknown feature element: {name!r}")
        setattr(self, name, value)

    def values(self) -> tuple[float, ...]:
        return tuple(getattr(self, f.name) for f in fields(self))

    def magnitude(self) -> float:
        return math.sqrt(sum(v * v for v in self.values()))


@dataclass(frozen=True)
class SimilarityConfig:
    md: int = 4

    def __post_init__(self):
        if self.md < 1:
            raise DataError("maximum EDU distance must be >= 1")


# -- rule matching ------------------------------------------------------------


def match_rules(cat: Edu, ana: Edu, lexicon: MarkerLexicon) -> tuple[RuleMatch, ...]:
    """All catalog rules holding between an ordered EDU pair.

    Repetition fires on shared content words in the paired slots; absence
    fires once per omitted anaphoric slot, preferring the same-type
    antecedent constituent and falling back through the catalog order;
    addition fires on lexicon markers/key phrases after the cataphoric or
    before the anaphoric unit. Multiple matching is allowed.
    """
    if cat.position >= ana.position:
        raise DataError("cataphoric EDU must precede the anaphoric EDU")
    matches: list[RuleMatch] = []
    matches.extend(_match_repetition(cat, ana))
    matches.extend(_match_absence(cat, ana))
    matches.extend(_match_addition(cat, ana, lexicon))
    return tuple(matches)


def _match_repetition(cat: Edu, ana: Edu) -> list[RuleMatch]:
    out = []
    for rule in REPETITION_RULES:
        shared_all: list[str] = []
        ok = True
        for c_comp, a_comp in zip(rule.cat, rule.ana):
            shared = set(cat.component_words(c_comp)) & set(ana.component_words(a_comp))
            if not shared:
                ok = False
                break
            shared_all.extend(sorted(shared))
        if ok:
            out.append(RuleMatch(rule=rule, bindings=tuple(dict.fromkeys(shared_all))))
    return out


def _omitted_argument_slots(cat: Edu, ana: Edu) -> list[str]:
    slots = [s for s in ana.omitted_slots if s in ("S", "O")]
    # A missing PP is only treated as an omission when the two units share
    # their predicate; bare absence of a PP is not evidence.
    if not ana.has_component("Prep"):
        if set(cat.component_words("Nuc")) & set(ana.component_words("Nuc")):
            slots.append("Prep")
    return slots


def _match_absence(cat: Edu, ana: Edu) -> list[RuleMatch]:
    out = []
    for slot in _omitted_argument_slots(cat, ana):
        candidates = [r for r in ABSENCE_RULES if r.ana == (slot,)]
        candidates.sort(key=lambda r: (r.cat != (slot,),))
        for rule in candidates:
            words = cat.component_words(rule.cat[0])
            if words:
                out.append(RuleMatch(rule=rule, bindings=tuple(dict.fromkeys(words))))
                break
    # NP-internal omissions.
    cat_hm_groups = _groups_with_head_and_modifier(cat)
    if not ana.has_component("H"):
        if cat_hm_groups:
            rule = _abs(("H", "M"), ("H",))
            out.append(RuleMatch(rule=rule, bindings=cat_hm_groups))
        elif cat.has_component("OnlyH"):
            rule = _abs(("OnlyH",), ("H",))
            out.append(
                RuleMatch(rule=rule, bindings=tuple(dict.fromkeys(cat.component_words("OnlyH"))))
            )
    elif not ana.has_component("M") and cat_hm_groups:
        rule = _abs(("H", "M"), ("M",))
        out.append(RuleMatch(rule=rule, bindings=cat_hm_groups))
    return out


def _groups_with_head_and_modifier(edu: Edu) -> tuple[str, ...]:
    words: list[str] = []
    for group in edu.constituents:
        if group.role not in ("S", "O", "I", "N"):
            continue
        labels = {t.phrase_label for t in group.tokens}
        if "H" in labels and labels & {"Mi", "Ma"}:
            words.extend(t.surface for t in group.tokens if t.phrase_label == "H")
    return tuple(dict.fromkeys(words))


def _match_addition(cat: Edu, ana: Edu, lexicon: MarkerLexicon) -> list[RuleMatch]:
    out = []
    cat_after = [m for m in cat.markers_after if m in lexicon.markers]
    ana_before = [m for m in ana.markers_before if m in lexicon.markers]
    if cat_after:
        out.append(RuleMatch(rule=_add("Marker", "After"), bindings=tuple(cat_after)))
    if ana_before:
        out.append(RuleMatch(rule=_add("Marker", "Before"), bindings=tuple(ana_before)))
    kp_after = [m for m in cat.markers_after if m in lexicon.key_phrases]
    kp_before = [m for m in ana.markers_before if m in lexicon.key_phrases]
    if kp_after:
        out.append(RuleMatch(rule=_add("KeyPhrase", "After"), bindings=tuple(kp_after)))
    if kp_before:
        out.append(RuleMatch(rule=_add("KeyPhrase", "Before"), bindings=tuple(kp_before)))
    return out


# -- feature calculations ------------------------------------------------------


def absence_feature(
    cat: Edu, ana: Edu, match: RuleMatch, n_total: int
) -> tuple[EduFeatureVector, EduFeatureVector]:
    """Fill both vectors for a matched absence rule with the proximity value."""
    if match.rule.kind != ABSENCE:
        raise DataError("absence_feature requires an absence rule")
    if n_total <= 0:
        raise DataError("document must contain at least one EDU")
    d = abs(cat.position - ana.position)
    value = (n_total - d) / n_total if d <= n_total else 0.0
    vec_cat, vec_ana = EduFeatureVector(), EduFeatureVector()
    for comp in match.rule.cat:
        vec_cat.set_element(_ELEMENT[comp], value)
    for comp in match.rule.ana:
        vec_ana.set_element(_ABSENCE_ELEMENT[comp], value)
    return vec_cat, vec_ana


def repetition_feature(
    cat: Edu, ana: Edu, match: RuleMatch, n_total: int
) -> tuple[EduFeatureVector, EduFeatureVector]:
    """Fill both vectors for a matched repetition rule.

    value = proximity * (repeating/total words of cat) * (same for ana),
    with repeating words counted inside the rule's constituent slots.
    """
    if match.rule.kind != REPETITION:
        raise DataError("repetition_feature requires a repetition rule")
    if n_total <= 0:
        raise DataError("document must contain at least one EDU")
    w_cat = len(cat.content_words())
    w_ana = len(ana.content_words())
    if w_cat == 0 or w_ana == 0:
        raise DataError("repetition feature undefined for an EDU with no content words")
    shared = set(match.bindings)
    r_cat = sum(
        1
        for comp in match.rule.cat
        for word in cat.component_words(comp)
        if word in shared
    )
    r_ana = sum(
        1
        for comp in match.rule.ana
        for word in ana.component_words(comp)
        if word in shared
    )
    d = abs(cat.position - ana.position)
    proximity_num = max(n_total - d, 0)
    value = (proximity_num * r_cat * r_ana) / (n_total * w_cat * w_ana)
    vec_cat, vec_ana = EduFeatureVector(), EduFeatureVector()
    for comp in match.rule.cat:
        vec_cat.set_element(_ELEMENT[comp], value)
    for comp in match.rule.ana:
        vec_ana.set_element(_ELEMENT[comp], value)
    return vec_cat, vec_ana


def addition_feature(
    cat: Edu, ana: Edu, match: RuleMatch
) -> tuple[EduFeatureVector, EduFeatureVector]:
    """Set the paired marker elements to 1 for a matched addition rule."""
    if match.rule.kind != ADDITION:
        raise DataError("addition_feature requires an addition rule")
    vec_cat, vec_ana = EduFeatureVector(), EduFeatureVector()
    vec_cat.marker_after = 1.0
    vec_ana.marker_before = 1.0
    return vec_cat, vec_ana


def rule_feature_vectors(
    cat: Edu, ana: Edu, match: RuleMatch, n_total: int
) -> tuple[EduFeatureVector, EduFeatureVector]:
    if match.rule.kind == ABSENCE:
        return absence_feature(cat, ana, match, n_total)
    if match.rule.kind == REPETITION:
        return repetition_feature(cat, ana, match, n_total)
    return addition_feature(cat, ana, match)


def score_rule(
    vec_cat: EduFeatureVector,
    vec_ana: EduFeatureVector,
    kind: str,
    distance: int,
    cfg: SimilarityConfig,
) -> float:
    """Combine a rule's two vectors into a score, gated by the distance limit."""
    if distance >= cfg.md:
        return 0.0
    if kind == ADDITION:
        return vec_cat.magnitude() + vec_ana.magnitude()
    return vec_cat.magnitude() * vec_ana.magnitude()


# -- document-level similarity --------------------------------------------------


@dataclass
class DocumentAnalysis:
    """All pairwise rule matches, raw scores, and CombSum similarities."""

    edus: tuple[Edu, ...]
    cfg: SimilarityConfig
    pair_matches: dict = field(default_factory=dict)
    raw_scores: dict = field(default_factory=dict)
    similarities: dict = field(default_factory=dict)

    def similarity(self, pos_cat: int, pos_ana: int) -> float:
        return self.similarities.get((pos_cat, pos_ana), 0.0)

    def matrix(self) -> np.ndarray:
        n = len(self.edus)
        out = np.zeros((n, n))
        for (i, j), value in self.similarities.items():
            out[i - 1, j - 1] = value
        return out


def analyze_document(
    edus, lexicon: MarkerLexicon | None = None, cfg: SimilarityConfig | None = None
) -> DocumentAnalysis:
    """Match rules and compute CombSum similarities for every ordered pair.

    Rule scores are min-max normalized per rule across all of the
    document's pairs (a constant column normalizes to zero), then summed.
    """
    edus = tuple(edus)
    lexicon = lexicon or MarkerLexicon.default()
    cfg = cfg or SimilarityConfig()
    analysis = DocumentAnalysis(edus=edus, cfg=cfg)
    n = len(edus)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    per_rule: dict[SemanticRule, dict[tuple[int, int], float]] = {}
    for i, j in pairs:
        cat, ana = edus[i], edus[j]
        key = (cat.position, ana.position)
        matches = match_rules(cat, ana, lexicon)
        analysis.pair_matches[key] = matches
        scores: dict[SemanticRule, float] = {}
        distance = abs(cat.position - ana.position)
        for match in matches:
            vec_cat, vec_ana = rule_feature_vectors(cat, ana, match, n)
            scores[match.rule] = score_rule(vec_cat, vec_ana, match.rule.kind, distance, cfg)
        analysis.raw_scores[key] = scores
        for rule, value in scores.items():
            per_rule.setdefault(rule, {})[key] = value

    norm: dict[tuple[int, int], dict[SemanticRule, float]] = {key: {} for key in analysis.raw_scores}
    for rule, values in per_rule.items():
        column = [values.get((edus[i].position, edus[j].position), 0.0) for i, j in pairs]
        mn, mx = min(column), max(column)
        span = mx - mn
        for (i, j), raw in zip(pairs, column):
            key = (edus[i].position, edus[j].position)
            if rule in analysis.raw_scores[key]:
                norm[key][rule] = (raw - mn) / span if span > 0 else 0.0
    for key, rule_norms in norm.items():
        analysis.similarities[key] = float(sum(rule_norms.values()))
    return analysis


def similarity(cat: Edu, ana: Edu, analysis: DocumentAnalysis) -> float:
    """CombSum similarity of an ordered pair within an analyzed document."""
    if cat.position >= ana.position:
        raise DataError("cataphoric EDU must precede the anaphoric EDU")
    return analysis.similarity(cat.position, ana.position)


def similarity_matrix(
    edus, lexicon: MarkerLexicon | None = None, cfg: SimilarityConfig | None = None
) -> np.ndarray:
    """Upper-triangular similarity matrix over the document's EDUs."""
    edus = tuple(edus)
    if len(edus) < 2:
        raise DataError("similarity matrix needs at least two EDUs")
    return analyze_document(edus, lexicon, cfg).matrix()
