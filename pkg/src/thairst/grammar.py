"""Grammar-rule tables: EDU arrangements and NP/VP phrase arrangements.

Both tables are configuration data loaded from simple TSV files; the
bundled defaults cover the twelve EDU arrangements and the 25 noun-phrase /
10 verb-phrase patterns.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .errors import DataError
from .types import EDU_ROLES, NP_PHRASE_LABELS, NP_ROLES, VERB_ROLES, VP_PHRASE_LABELS

_NP_SET = frozenset(NP_PHRASE_LABELS)
_VP_SET = frozenset(VP_PHRASE_LABELS)


@dataclass(frozen=True)
class EduArrangement:
    """One EDU surface pattern with its canonical argument frame."""

    pattern: tuple[str, ...]
    rule: str

    @property
    def frame_slots(self) -> tuple[str, ...]:
        """NP argument slots named by the frame rule, in rule order."""
        slots = []
        for part in self.rule.split("-"):
            if part.startswith("NP_"):
                slots.append(part[3:])
        return tuple(slots)

    @property
    def verb_role(self) -> str | None:
        for part in self.rule.split("-"):
            if part in VERB_ROLES:
                return part
        return None


@dataclass(frozen=True)
class GrammarRuleTable:
    edu_arrangements: tuple[EduArrangement, ...]
    np_arrangements: tuple[tuple[str, ...], ...]
    vp_arrangements: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        for arr in self.edu_arrangements:
            for role in arr.pattern:
                if role not in EDU_ROLES:
                    raise DataError(f"EDU arrangement uses unknown role {role!r}")
        for pat in self.np_arrangements:
            if not pat or not set(pat) <= _NP_SET:
                raise DataError(f"bad NP arrangement: {pat!r}")
        for pat in self.vp_arrangements:
            if not pat or not set(pat) <= _VP_SET:
                raise DataError(f"bad VP arrangement: {pat!r}")

    def phrase_arrangements(self, kind: str) -> tuple[tuple[str, ...], ...]:
        if kind == "NP":
            return self.np_arrangements
        if kind == "VP":
            return self.vp_arrangements
        raise DataError(f"unknown phrase kind: {kind!r}")

    def match_edu_pattern(self, roles: tuple[str, ...]) -> EduArrangement | None:
        """Exact pattern lookup (first matching row in table order)."""
        for arr in self.edu_arrangements:
            if arr.pattern == roles:
                return arr
        return None

    def best_edu_arrangement(
        self, roles: tuple[str, ...]
    ) -> tuple[EduArrangement, tuple[str, ...]] | None:
        """Best arrangement for a (possibly elliptical) role sequence.

        An arrangement matches when the surface roles form an in-order
        subsequence of its pattern with only NP roles omitted. Returns the
        matching arrangement with the fewest omissions (first table row on
        ties) together with the omitted frame slots.
        """
        if not roles:
            return None
        best: tuple[int, int, EduArrangement] | None = None
        for order, arr in enumerate(self.edu_arrangements):
            if not _subsequence_with_np_gaps(roles, arr.pattern):
                continue
            omissions = len(arr.pattern) - len(roles)
            if best is None or (omissions, order) < (best[0], best[1]):
                best = (omissions, order, arr)
        if best is None:
            return None
        arr = best[2]
        omitted = _omitted_slots(roles, arr)
        return arr, omitted


def _subsequence_with_np_gaps(roles: tuple[str, ...], pattern: tuple[str, ...]) -> bool:
    i = 0
    for want in pattern:
        if i < len(roles) and roles[i] == want:
            i += 1
        elif want in NP_ROLES:
            continue
        else:
            return False
    return i == len(roles)


def _omitted_slots(roles: tuple[str, ...], arr: EduArrangement) -> tuple[str, ...]:
    """Distinct frame NP slots with no surface realization, in frame order.

    A frame may list one slot at several positions (e.g. pre- and
    post-verbal object); realizing it anywhere counts.
    """
    present = {r for r in roles if r in NP_ROLES}
    omitted = []
    for slot in arr.frame_slots:
        if slot not in present and slot not in omitted:
            omitted.append(slot)
    return tuple(omitted)


def _parse_tsv(text: str, ncols: int, what: str) -> list[tuple[str, ...]]:
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != ncols:
            raise DataError(
                f"{what} line {lineno}: expected {ncols} columns, got {len(fields)}"
            )
        rows.append(tuple(fields))
    return rows


def parse_edu_arrangements(text: str) -> tuple[EduArrangement, ...]:
    rows = _parse_tsv(text, 2, "EDU arrangement table")
    return tuple(
        EduArrangement(pattern=tuple(p.split("-")), rule=rule) for p, rule in rows
    )


def parse_phrase_arrangements(
    text: str,
) -> tuple[tuple[tuple[str, ...], ...], tuple[tuple[str, ...], ...]]:
    rows = _parse_tsv(text, 2, "phrase arrangement table")
    nps, vps = [], []
    for kind, pattern in rows:
        entry = tuple(pattern.split("-"))
        if kind == "NP":
            nps.append(entry)
        elif kind == "VP":
            vps.append(entry)
        else:
            raise DataError(f"phrase arrangement kind must be NP or VP, got {kind!r}")
    return tuple(nps), tuple(vps)


def default_rule_table() -> GrammarRuleTable:
    data = resources.files("thairst.data")
    edu = parse_edu_arrangements(
        data.joinpath("edu_arrangements.tsv").read_text("utf-8")
    )
    nps, vps = parse_phrase_arrangements(
        data.joinpath("phrase_arrangements.tsv").read_text("utf-8")
    )
    return GrammarRuleTable(edu_arrangements=edu, np_arrangements=nps, vp_arrangements=vps)


def load_rule_table(edu_path=None, phrase_path=None) -> GrammarRuleTable:
    default = default_rule_table()
    edu = default.edu_arrangements
    nps, vps = default.np_arrangements, default.vp_arrangements
    if edu_path is not None:
        with open(edu_path, encoding="utf-8") as fh:
            edu = parse_edu_arrangements(fh.read())
    if phrase_path is not None:
        with open(phrase_path, encoding="utf-8") as fh:
            nps, vps = parse_phrase_arrangements(fh.read())
    return GrammarRuleTable(edu_arrangements=edu, np_arrangements=nps, vp_arrangements=vps)
