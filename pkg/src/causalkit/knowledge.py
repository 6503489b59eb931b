"""Background-knowledge constraints for structure discovery.

Forbidden/required ordered pairs plus optional causal tiers: with tiers,
edges may only point from an earlier tier to a later one, and edges inside
a tier can be outlawed wholesale. File format::

    {"forbidden": [["a","b"], ...], "required": [...],
     "tiers": [["b","r","f","C","P"], ["SP"]],
     "within_tier_forbidden": true}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import KnowledgeError


@dataclass(frozen=True)
class Knowledge:
    forbidden: frozenset = frozenset()   # ordered (a, b): a cannot cause b
    required: frozenset = frozenset()    # ordered (a, b): a -> b must appear
    tiers: tuple = ()
    within_tier_forbidden: bool = False
    _tier_of: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "forbidden", frozenset(tuple(p) for p in self.forbidden))
        object.__setattr__(self, "required", frozenset(tuple(p) for p in self.required))
        object.__setattr__(self, "tiers", tuple(tuple(t) for t in self.tiers))
        tier_of = {}
        for level, tier in enumerate(self.tiers):
            for name in tier:
                if name in tier_of:
                    raise KnowledgeError(f"node '{name}' appears in two tiers")
                tier_of[name] = level
        object.__setattr__(self, "_tier_of", tier_of)
        for a, b in self.required:
            if self.is_forbidden(a, b):
                raise KnowledgeError(f"edge {a} -> {b} is both required and forbidden")
        _check_required_acyclic(self.required)

    def is_empty(self) -> bool:
        return not (self.forbidden or self.required or self.tiers)

    def is_forbidden(self, a: str, b: str) -> bool:
        """True when an edge a -> b must not appear."""
        if (a, b) in self.forbidden:
            return True
        ta, tb = self._tier_of.get(a), self._tier_of.get(b)
        if ta is None or tb is None:
            return False
        if ta > tb:
            return True
        return ta == tb and self.within_tier_forbidden

    def is_required(self, a: str, b: str) -> bool:
        return (a, b) in self.required


def _check_required_acyclic(required):
    children = {}
    for a, b in required:
        children.setdefault(a, []).append(b)
    seen, active = set(), set()

    def visit(v):
        active.add(v)
        for c in children.get(v, ()):
            if c in active:
                raise KnowledgeError("required edges form a directed cycle")
            if c not in seen:
                visit(c)
        active.discard(v)
        seen.add(v)

    for v in list(children):
        if v not in seen:
            visit(v)


EMPTY = Knowledge()


def knowledge_from_dict(obj: dict) -> Knowledge:
    return Knowledge(
        forbidden=frozenset(tuple(p) for p in obj.get("forbidden", [])),
        required=frozenset(tuple(p) for p in obj.get("required", [])),
        tiers=tuple(tuple(t) for t in obj.get("tiers", [])),
        within_tier_forbidden=bool(obj.get("within_tier_forbidden", False)),
    )


def knowledge_to_dict(k: Knowledge) -> dict:
    return {
        "forbidden": sorted(list(p) for p in k.forbidden),
        "required": sorted(list(p) for p in k.required),
        "tiers": [list(t) for t in k.tiers],
        "within_tier_forbidden": k.within_tier_forbidden,
    }


def load_knowledge(path) -> Knowledge:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise KnowledgeError(f"cannot read knowledge file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise KnowledgeError(f"invalid knowledge JSON in {path}: {exc}") from exc
    return knowledge_from_dict(obj)
