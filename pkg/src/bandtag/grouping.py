"""Group-spec documents: parsing, canonical serialization, and generators.

A group spec is JSON::

    {"name": "user_friendly",
     "drop_unlisted": false,
     "groups": {"Lyrical": ["alliteration", "assonance"], ...},
     "descriptions": {"Lyrical": "..."}}

``descriptions`` is optional. Group order in the file is kept as the
declaration order; serialization sorts group keys.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Sequence

import numpy as np

from .core import GroupPartition, validate_partition
from .errors import (
    DuplicateFeatureError,
    EmptyGroupError,
    InvalidJ,
    MissingSourceTag,
    ParseError,
)

SOURCE_TAGS = ("symbolic", "dnn", "signal", "nlp")


@dataclass(frozen=True)
class GroupSpecDocument:
    name: str
    groups: dict
    drop_unlisted: bool = False
    descriptions: dict = field(default_factory=dict)

    def __post_init__(self):
        groups = {str(g): [str(f) for f in feats] for g, feats in self.groups.items()}
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "descriptions", dict(self.descriptions))
        if not groups:
            raise EmptyGroupError(f"group spec {self.name!r} has no groups")
        seen = {}
        for g, feats in groups.items():
            if not feats:
                raise EmptyGroupError(f"group {g!r} is empty")
            for f in feats:
                if f in seen:
                    raise DuplicateFeatureError(
                        f"feature {f!r} listed in {seen[f]!r} and again in {g!r}"
                    )
                seen[f] = g
        unknown = set(self.descriptions) - set(groups)
        if unknown:
            raise ParseError(f"descriptions for undeclared groups {sorted(unknown)}")

    @property
    def group_names(self):
        return list(self.groups)

    @property
    def n_features(self):
        return sum(len(v) for v in self.groups.values())

    def features(self):
        return [f for feats in self.groups.values() for f in feats]

    def to_partition(self, feature_names: Sequence[str]) -> GroupPartition:
        return validate_partition(self.groups, feature_names, self.drop_unlisted)

    def to_dict(self):
        out = {"name": self.name, "drop_unlisted": bool(self.drop_unlisted), "groups": self.groups}
        if self.descriptions:
            out["descriptions"] = self.descriptions
        return out


def serialize_group_spec(doc: GroupSpecDocument) -> bytes:
    """Canonical form: sorted keys, two-space indent, trailing newline."""
    return (json.dumps(doc.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode()


def parse_group_spec(data) -> GroupSpecDocument:
    """Parse and structurally validate a group-spec document.

    Raises
    ------
    ParseError
        Malformed JSON (message carries line and column) or wrong field types.
    DuplicateFeatureError, EmptyGroupError
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"group spec is not UTF-8: {exc}") from exc
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ParseError("group spec must be a JSON object")
    extra = set(raw) - {"name", "groups", "drop_unlisted", "descriptions"}
    if extra:
        raise ParseError(f"unexpected keys {sorted(extra)}")
    groups = raw.get("groups")
    if not isinstance(groups, dict):
        raise ParseError("'groups' must map group names to feature lists")
    for g, feats in groups.items():
        if not isinstance(feats, list) or not all(isinstance(f, str) for f in feats):
            raise ParseError(f"group {g!r} must be a list of feature names")
    drop = raw.get("drop_unlisted", False)
    if not isinstance(drop, bool):
        raise ParseError("'drop_unlisted' must be true or false")
    desc = raw.get("descriptions", {})
    if not isinstance(desc, dict) or not all(isinstance(v, str) for v in desc.values()):
        raise ParseError("'descriptions' must map group names to text")
    return GroupSpecDocument(str(raw.get("name", "")), groups, drop, desc)


def load_group_spec(path) -> GroupSpecDocument:
    with open(path, "rb") as fh:
        return parse_group_spec(fh.read())


def load_fixture(name) -> GroupSpecDocument:
    """Bundled grouping, e.g. ``"user_friendly"`` or ``"domain_expert"``."""
    blob = resources.files("bandtag.data").joinpath(f"{name}.groups.json").read_bytes()
    return parse_group_spec(blob)


def random_grouping(feature_names: Sequence[str], n_groups: int, seed: int) -> GroupSpecDocument:
    """Shuffle features with a seeded Philox stream, then deal them round-robin.

    Group sizes differ by at most one. Philox is counter-based, so the
    permutation for a seed is the same on every platform.
    """
    feature_names = list(feature_names)
    if not 1 <= n_groups <= len(feature_names):
        raise InvalidJ(f"need 1 <= J <= {len(feature_names)} features, got J={n_groups}")
    rng = np.random.Generator(np.random.Philox(seed))
    order = rng.permutation(len(feature_names))
    shuffled = [feature_names[i] for i in order]
    groups = {f"random_{j + 1}": shuffled[j::n_groups] for j in range(n_groups)}
    return GroupSpecDocument(f"random_J{n_groups}_seed{seed}", groups)


def extraction_method_grouping(manifest, name="all_features") -> GroupSpecDocument:
    """One group per feature-extraction source present in ``manifest``.

    ``manifest`` maps feature name to source tag, one of ``SOURCE_TAGS``.
    Groups follow the order of ``SOURCE_TAGS``.
    """
    items = manifest.items() if isinstance(manifest, Mapping) else manifest
    groups = {t: [] for t in SOURCE_TAGS}
    for feature, tag in items:
        if tag not in groups:
            raise MissingSourceTag(
                f"feature {feature!r} has source {tag!r}; expected one of {SOURCE_TAGS}"
            )
        groups[tag].append(feature)
    return GroupSpecDocument(name, {t: f for t, f in groups.items() if f})


def load_manifest_fixture(name="all_features"):
    blob = resources.files("bandtag.data").joinpath(f"{name}.manifest.json").read_text("utf-8")
    return json.loads(blob)["features"]
