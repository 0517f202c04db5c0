"""Core domain types: tagged tokens, discourse units, and the RS tree."""

from __future__ import annotations

from dataclasses import dataclass, replace
from importlib import resources

from .errors import DataError

# Phrase-level constituent labels: noun-phrase roles, verb-phrase roles,
# discourse markers, and the two virtual sequence anchors.
NP_PHRASE_LABELS = ("H", "Mi", "Ma", "Q", "D")
VP_PHRASE_LABELS = ("Nuc", "Aux1", "Aux2", "M")
PHRASE_LABELS = NP_PHRASE_LABELS + VP_PHRASE_LABELS + ("Marker", "Start", "End")

# EDU-level constituent roles.
EDU_ROLES = ("S", "O", "I", "N", "Vi", "Vt", "Vtt", "Marker")
NP_ROLES = ("S", "O", "I", "N")
VERB_ROLES = ("Vi", "Vt", "Vtt")

# The ten discourse relations.
RELATIONS = (
    "consent",
    "example",
    "characteristic",
    "summary",
    "condition",
    "option",
    "time",
    "reason",
    "explanation",
    "contrast",
)

# Relations with more than one nucleus; promotion unions both children.
MULTINUCLEAR_RELATIONS = frozenset({"contrast"})

# POS tags treated as prepositions when locating PP constituents.
PREP_TAGS = frozenset({"RPRE"})

# Phrase labels excluded from content-word extraction (auxiliaries).
_AUX_LABELS = frozenset({"Aux1", "Aux2"})


def _load_packaged_lines(name: str) -> tuple[str, ...]:
    text = resources.files("thairst.data").joinpath(name).read_text(encoding="utf-8")
    out = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return tuple(out)


@dataclass(frozen=True)
class TagAlphabet:
    """Finite POS-tag alphabet, loaded once per run."""

    tags: tuple[str, ...]

    def __post_init__(self):
        if not self.tags:
            raise DataError("POS tag alphabet is empty")
        if len(set(self.tags)) != len(self.tags):
            raise DataError("POS tag alphabet contains duplicates")

    def __contains__(self, code: str) -> bool:
        return code in set(self.tags)

    def require(self, code: str) -> str:
        if code not in self.tags:
            raise DataError(f"unknown POS tag: {code!r}")
        return code

    @classmethod
    def default(cls) -> "TagAlphabet":
        """The bundled 44-category ORCHID-style alphabet."""
        return cls(_load_packaged_lines("pos_tags.txt"))

    @classmethod
    def from_file(cls, path) -> "TagAlphabet":
        with open(path, encoding="utf-8") as fh:
            tags = tuple(
                ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")
            )
        return cls(tags)


@dataclass(frozen=True)
class TaggedToken:
    surface: str
    tag: str
    index: int

    def __post_init__(self):
        if not self.surface:
            raise DataError("token surface must be nonempty")
        if self.index < 0:
            raise DataError("token index must be >= 0")


@dataclass(frozen=True)
class TaggedSequence:
    """One sentence/string of tagged tokens plus optional gold columns.

    Gold columns, when present, are parallel to ``tokens``: phrase labels
    (H/Mi/.../Marker), EDU roles (S/O/.../Marker), and boundary flags (B/I).
    Empty strings mark individually missing cells.
    """

    tokens: tuple[TaggedToken, ...]
    phrase_labels: tuple[str, ...] | None = None
    edu_labels: tuple[str, ...] | None = None
    boundaries: tuple[str, ...] | None = None

    def __post_init__(self):
        for name in ("phrase_labels", "edu_labels", "boundaries"):
            col = getattr(self, name)
            if col is not None and len(col) != len(self.tokens):
                raise DataError(f"{name} length does not match token count")
        for i, tok in enumerate(self.tokens):
            if tok.index != i:
                raise DataError("token indices must be 0-based and consecutive")

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def tags(self) -> tuple[str, ...]:
        return tuple(t.tag for t in self.tokens)

    @property
    def surfaces(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)


@dataclass(frozen=True)
class Document:
    """An ordered group of tagged sequences with header metadata."""

    sequences: tuple[TaggedSequence, ...]
    meta: tuple[tuple[str, str], ...] = ()

    def meta_dict(self) -> dict[str, str]:
        return dict(self.meta)


@dataclass(frozen=True)
class EduToken:
    """A token inside an EDU, carrying its phrase-constituent label."""

    surface: str
    tag: str
    phrase_label: str


@dataclass(frozen=True)
class Constituent:
    """A grouped run of tokens sharing one EDU role."""

    role: str
    tokens: tuple[EduToken, ...]

    def __post_init__(self):
        if self.role not in EDU_ROLES:
            raise DataError(f"unknown EDU role: {self.role!r}")
        if not self.tokens:
            raise DataError("constituent must contain at least one token")

    @property
    def surfaces(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)


@dataclass(frozen=True)
class Edu:
    """A segmented elementary discourse unit.

    ``constituents`` partition the unit's token span in text order; markers
    stay in the partition (role Marker) and are additionally surfaced through
    ``markers_before`` / ``markers_after``.
    """

    position: int
    constituents: tuple[Constituent, ...]
    markers_before: tuple[str, ...] = ()
    markers_after: tuple[str, ...] = ()
    arrangement: str | None = None
    frame_rule: str | None = None
    omitted_slots: tuple[str, ...] = ()
    grouped: bool = False
    ungrouped_reason: str | None = None

    def __post_init__(self):
        if self.position < 1:
            raise DataError("EDU positions are 1-based")

    @property
    def tokens(self) -> tuple[EduToken, ...]:
        return tuple(t for c in self.constituents for t in c.tokens)

    @property
    def token_roles(self) -> tuple[str, ...]:
        return tuple(c.role for c in self.constituents for _ in c.tokens)

    @property
    def role_sequence(self) -> tuple[str, ...]:
        """Merged role sequence with markers removed (arrangement key)."""
        out: list[str] = []
        for c in self.constituents:
            if c.role == "Marker":
                continue
            if not out or out[-1] != c.role:
                out.append(c.role)
        return tuple(out)

    def content_tokens(self) -> tuple[EduToken, ...]:
        return tuple(
            t
            for c in self.constituents
            if c.role != "Marker"
            for t in c.tokens
            if t.phrase_label not in _AUX_LABELS
        )

    def content_words(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.content_tokens())

    def _np_groups(self) -> tuple[Constituent, ...]:
        return tuple(c for c in self.constituents if c.role in NP_ROLES)

    def _verb_groups(self) -> tuple[Constituent, ...]:
        return tuple(c for c in self.constituents if c.role in VERB_ROLES)

    def component_words(self, component: str) -> tuple[str, ...]:
        """Surfaces filling a semantic-rule constituent slot.

        Components follow the rule catalog: argument slots S/O/I/N, the PP
        slot Prep, NP-internal slots H/OnlyH/M/OnlyM, and verb slots
        Nuc/OnlyNuc/VM (modifier of the nucleus).
        """
        if component in NP_ROLES:
            return tuple(
                t.surface
                for c in self.constituents
                if c.role == component
                for t in c.tokens
                if t.phrase_label not in _AUX_LABELS
            )
        if component == "Prep":
            words = [t.surface for t in self.tokens if t.tag in PREP_TAGS]
            for g in self._verb_groups():
                words.extend(t.surface for t in g.tokens if t.phrase_label == "M")
            return tuple(dict.fromkeys(words))
        if component == "H":
            return tuple(
                t.surface
                for g in self._np_groups()
                for t in g.tokens
                if t.phrase_label == "H"
            )
        if component == "OnlyH":
            out = []
            for g in self._np_groups():
                labels = {t.phrase_label for t in g.tokens}
                if "H" in labels and not labels & {"Mi", "Ma"}:
                    out.extend(t.surface for t in g.tokens if t.phrase_label == "H")
            return tuple(out)
        if component == "M":
            return tuple(
                t.surface
                for g in self._np_groups()
                for t in g.tokens
                if t.phrase_label in ("Mi", "Ma")
            )
        if component == "OnlyM":
            out = []
            for g in self._np_groups():
                labels = {t.phrase_label for t in g.tokens}
                if "H" not in labels:
                    out.extend(
                        t.surface for t in g.tokens if t.phrase_label in ("Mi", "Ma")
                    )
            return tuple(out)
        if component == "Nuc":
            return tuple(
                t.surface
                for g in self._verb_groups()
                for t in g.tokens
                if t.phrase_label == "Nuc"
            )
        if component == "OnlyNuc":
            out = []
            for g in self._verb_groups():
                if all(t.phrase_label == "Nuc" for t in g.tokens):
                    out.extend(t.surface for t in g.tokens)
            return tuple(out)
        if component == "VM":
            return tuple(
                t.surface
                for g in self._verb_groups()
                for t in g.tokens
                if t.phrase_label == "M"
            )
        raise DataError(f"unknown rule component: {component!r}")

    def has_component(self, component: str) -> bool:
        return bool(self.component_words(component))

    def with_position(self, position: int) -> "Edu":
        return replace(self, position=position)


@dataclass(frozen=True)
class RSTree:
    """Binary rhetorical-structure tree over EDU positions.

    Leaves carry a single position; internal nodes union their children.
    ``promotion`` is the nucleus subset representing the subtree. Loaded
    fixture trees may contain a unary node (``right`` absent); trees built
    by this package are always strictly binary.
    """

    status: frozenset[int]
    promotion: frozenset[int]
    relation: str | None = None
    left: "RSTree | None" = None
    right: "RSTree | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None and self.right is None

    @staticmethod
    def leaf(position: int) -> "RSTree":
        s = frozenset({position})
        return RSTree(status=s, promotion=s)

    def children(self) -> tuple["RSTree", ...]:
        return tuple(c for c in (self.left, self.right) if c is not None)

    def validate(self) -> None:
        if self.relation is not None and self.relation not in RELATIONS:
            raise DataError(f"unknown discourse relation: {self.relation!r}")
        if not self.promotion or not self.promotion <= self.status:
            raise DataError("promotion must be a nonempty subset of status")
        if self.is_leaf:
            if len(self.status) != 1:
                raise DataError("leaf status must contain exactly one position")
            if self.promotion != self.status:
                raise DataError("leaf promotion must equal its status")
            return
        if self.left is None:
            raise DataError("internal node must carry a left child")
        kids = self.children()
        union: set[int] = set()
        total = 0
        for k in kids:
            union |= k.status
            total += len(k.status)
            k.validate()
        if total != len(union) or frozenset(union) != self.status:
            raise DataError(
                "internal node status must be the disjoint union of its children"
            )

    def internal_nodes(self) -> list["RSTree"]:
        out: list[RSTree] = []
        stack = [self]
        while stack:
            node = stack.pop()
            if not node.is_leaf:
                out.append(node)
                stack.extend(reversed(node.children()))
        return out

    def leaves(self) -> list["RSTree"]:
        out: list[RSTree] = []
        stack = [self]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node)
            else:
                stack.extend(reversed(node.children()))
        return out

    def postorder(self) -> list["RSTree"]:
        out: list[RSTree] = []

        def walk(node: "RSTree") -> None:
            for k in node.children():
                walk(k)
            out.append(node)

        walk(self)
        return out

    def span(self) -> tuple[int, int]:
        return min(self.status), max(self.status)
