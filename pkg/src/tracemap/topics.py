"""Topic extraction, ranking, map anchoring, and the zoom-indexed tree.

Each item gets at most three topic labels from a pluggable provider. The
bundled stub provider scores tokens by TF-IDF over the build corpus so the
whole pipeline runs offline; a remote provider can swap in a model-backed
extractor without touching anything downstream.
"""

from __future__ import annotations

import logging
import math
import time
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import requests

from .embed import tokenize
from .errors import MissingPosition, ProviderUnavailable

log = logging.getLogger(__name__)

MAX_TOPICS_PER_ITEM = 3
MAX_LABEL_CHARS = 64
MIN_TOKEN_CHARS = 2
DEFAULT_LEVELS = 4
DEFAULT_L0_MAX = 12
LEVEL_FANOUT = 4

STOPWORDS = frozenset("""
a about above after again against all am an and any are as at be because been
before being below between both but by can did do does doing down during each
few for from further had has have having he her here hers herself him himself
his how i if in into is it its itself just me more most my myself no nor not
now of off on once only or other our ours ourselves out over own same she
should so some such than that the their theirs them themselves then there
these they this those through to too under until up very was we were what when
where which while who whom why will with you your yours yourself yourselves
""".split())


@dataclass
class TopicAssignment:
    """Up to three topic labels for one event."""

    event_id: str
    topics: list[str]

    def to_json_obj(self) -> dict:
        return {"event_id": self.event_id, "topics": list(self.topics)}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "TopicAssignment":
        return cls(event_id=obj["event_id"], topics=list(obj["topics"]))


@dataclass
class RankedTopic:
    """One aggregated topic: display label, popularity, and its events."""

    label: str
    normalized: str
    rank: int
    count: int
    member_event_ids: list[str]
    anchor: tuple[float, float] | None = None


@dataclass
class TopicNode:
    """A node of the zoom-indexed topic tree.

    ``count`` is the topic's popularity (how many events mention it), which
    is what ``rank`` orders. ``member_event_ids`` is the node's exclusive
    region membership used for tree containment: every event belongs to
    exactly one subtree, parents include their descendants' members.
    """

    label: str
    normalized: str
    rank: int
    count: int
    anchor: tuple[float, float]
    zoom_min: int
    member_event_ids: list[str]
    children: list["TopicNode"] = field(default_factory=list)

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()

    def to_json_obj(self) -> dict:
        return {
            "label": self.label,
            "normalized": self.normalized,
            "rank": self.rank,
            "count": self.count,
            "anchor": [self.anchor[0], self.anchor[1]],
            "zoom_min": self.zoom_min,
            "member_event_ids": list(self.member_event_ids),
            "children": [c.to_json_obj() for c in self.children],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "TopicNode":
        return cls(
            label=obj["label"],
            normalized=obj["normalized"],
            rank=int(obj["rank"]),
            count=int(obj["count"]),
            anchor=(float(obj["anchor"][0]), float(obj["anchor"][1])),
            zoom_min=int(obj["zoom_min"]),
            member_event_ids=list(obj["member_event_ids"]),
            children=[cls.from_json_obj(c) for c in obj["children"]],
        )


@dataclass
class TopicTree:
    """Forest of TopicNodes indexed by zoom level."""

    roots: list[TopicNode]
    levels: int

    def nodes(self) -> list[TopicNode]:
        out: list[TopicNode] = []
        for root in self.roots:
            out.extend(root.walk())
        return out

    def visible_at(self, zoom: int) -> list[TopicNode]:
        return [n for n in self.nodes() if n.zoom_min <= zoom]

    def to_json_obj(self) -> dict:
        return {
            "levels": self.levels,
            "roots": [r.to_json_obj() for r in self.roots],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "TopicTree":
        return cls(
            roots=[TopicNode.from_json_obj(r) for r in obj["roots"]],
            levels=int(obj["levels"]),
        )


class TfidfStubProvider:
    """Offline topic provider: per-document top TF-IDF tokens.

    Document frequency comes from the batch passed to assign(), so the
    "corpus" is whatever the build is processing. Deterministic; ties go
    to the alphabetically earlier token.
    """

    provider_id = "tfidf-stub"

    def __init__(self, stopwords: frozenset[str] = STOPWORDS):
        self.stopwords = stopwords

    def _doc_tokens(self, text: str) -> list[str]:
        return [
            t for t in tokenize(text)
            if len(t) >= MIN_TOKEN_CHARS and t not in self.stopwords
        ]

    def assign(self, payloads: list[str]) -> list[list[str]]:
        docs = [self._doc_tokens(p) for p in payloads]
        n = len(docs)
        df: Counter[str] = Counter()
        for doc in docs:
            df.update(set(doc))
        out: list[list[str]] = []
        for doc in docs:
            tf = Counter(doc)
            scored = [
                (-(count * (math.log((1 + n) / (1 + df[token])) + 1)), token)
                for token, count in tf.items()
            ]
            scored.sort()
            out.append([token for _, token in scored[:MAX_TOPICS_PER_ITEM]])
        return out


class RemoteTopicProvider:
    """HTTP topic provider: POST {"text": ...} -> {"topics": [...]}.

    A failed request for one item yields an empty assignment with a logged
    warning; the batch never aborts.
    """

    def __init__(self, endpoint: str, auth_token: str | None = None,
                 timeout: float = 30.0, max_retries: int = 2, backoff: float = 0.5):
        self.endpoint = endpoint
        self.auth_token = auth_token
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self.provider_id = f"remote-topics:{endpoint}"
        self._session = requests.Session()

    def _one(self, text: str) -> list[str]:
        headers = {"Content-Type": "application/json"}
        if self.auth_token:
            headers["Authorization"] = f"Bearer {self.auth_token}"
        last: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                resp = self._session.post(
                    self.endpoint, json={"text": text}, headers=headers,
                    timeout=self.timeout,
                )
            except requests.RequestException as exc:
                last = exc
                continue
            if resp.status_code != 200:
                last = ProviderUnavailable(f"topic endpoint returned {resp.status_code}")
                continue
            body = resp.json()
            topics = body.get("topics")
            if not isinstance(topics, list):
                raise ProviderUnavailable("topic response missing 'topics' list")
            return [str(t) for t in topics]
        raise ProviderUnavailable(f"topic endpoint unreachable: {last}")

    def assign(self, payloads: list[str]) -> list[list[str]]:
        out: list[list[str]] = []
        for i, text in enumerate(payloads):
            try:
                out.append(self._one(text))
            except ProviderUnavailable as exc:
                log.warning("topic provider failed on item %d: %s", i, exc)
                out.append([])
        return out


def _clean_labels(raw: list[str]) -> list[str]:
    """Trim, drop empties, dedupe case-insensitively, cap count and length."""
    seen: set[str] = set()
    cleaned: list[str] = []
    for label in raw:
        label = str(label).strip()[:MAX_LABEL_CHARS]
        key = label.lower()
        if not label or key in seen:
            continue
        seen.add(key)
        cleaned.append(label)
        if len(cleaned) == MAX_TOPICS_PER_ITEM:
            break
    return cleaned


def extract_topics(payloads: list[str], provider,
                   event_ids: list[str] | None = None) -> list[TopicAssignment]:
    """Assign up to three topics per payload.

    The cap is enforced here, not trusted to the provider: anything past
    the first three labels is dropped. A provider failure on one item
    produces an empty assignment, never a batch abort.
    """
    if event_ids is None:
        event_ids = [str(i) for i in range(len(payloads))]
    if len(event_ids) != len(payloads):
        raise ValueError("event_ids and payloads must align")
    raw = provider.assign(payloads)
    if len(raw) != len(payloads):
        raise ProviderUnavailable(
            f"topic provider returned {len(raw)} assignments for {len(payloads)} items"
        )
    return [
        TopicAssignment(event_id=eid, topics=_clean_labels(labels))
        for eid, labels in zip(event_ids, raw)
    ]


def aggregate_rank(assignments: list[TopicAssignment]) -> list[RankedTopic]:
    """Group topics by normalized label and rank by popularity.

    Sort key: descending member count, then label ascending. Display label
    is the casing of the topic's first occurrence in the input. Member
    lists are sorted so the result is permutation-invariant.
    """
    members: dict[str, list[str]] = {}
    display: dict[str, str] = {}
    for assignment in assignments:
        for label in assignment.topics:
            key = label.lower()
            if key not in members:
                members[key] = []
                display[key] = label
            members[key].append(assignment.event_id)
    entries = sorted(members.items(), key=lambda kv: (-len(kv[1]), kv[0]))
    return [
        RankedTopic(
            label=display[key],
            normalized=key,
            rank=i + 1,
            count=len(ids),
            member_event_ids=sorted(set(ids)),
        )
        for i, (key, ids) in enumerate(entries)
    ]


def anchor_topics(ranked: list[RankedTopic],
                  positions: dict[str, tuple[float, float]]) -> list[RankedTopic]:
    """Anchor each topic at the centroid of its members' 2D positions."""
    for topic in ranked:
        try:
            pts = np.array([positions[eid] for eid in topic.member_event_ids], dtype=np.float64)
        except KeyError as exc:
            raise MissingPosition(f"no layout position for event {exc.args[0]!r}")
        centroid = pts.mean(axis=0)
        if not np.isfinite(centroid).all():
            raise MissingPosition(f"non-finite anchor for topic {topic.label!r}")
        topic.anchor = (float(centroid[0]), float(centroid[1]))
    return ranked


def level_cap(level: int, l0_max: int = DEFAULT_L0_MAX) -> int:
    return l0_max * LEVEL_FANOUT ** level


def build_topic_tree(
    ranked: list[RankedTopic],
    assignments: list[TopicAssignment],
    levels: int = DEFAULT_LEVELS,
    l0_max: int = DEFAULT_L0_MAX,
) -> TopicTree:
    """Build the zoom-indexed topic forest.

    Admission: level 0 takes the top ``l0_max`` topics by rank, each deeper
    level multiplies the cap by the fanout factor; a topic's zoom_min is the
    first level that admits it. Parents: the nearest already-admitted topic
    of the previous level by anchor distance.

    Membership: each event is claimed by the best-ranked admitted topic
    among its assignments, so exclusive member sets partition the events;
    a parent's member set then absorbs its descendants', which gives the
    containment and sibling-disjointness guarantees the viewer relies on.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    admitted = [t for t in ranked if t.rank <= level_cap(levels - 1, l0_max)]
    if not admitted:
        return TopicTree(roots=[], levels=levels)
    for topic in admitted:
        if topic.anchor is None:
            raise MissingPosition(f"topic {topic.label!r} has no anchor")

    def zoom_min_for(rank: int) -> int:
        for level in range(levels):
            if rank <= level_cap(level, l0_max):
                return level
        raise AssertionError("unreachable: topic past the deepest cap")

    nodes: dict[str, TopicNode] = {}
    by_rank: dict[int, RankedTopic] = {}
    for topic in admitted:
        by_rank[topic.rank] = topic
        nodes[topic.normalized] = TopicNode(
            label=topic.label,
            normalized=topic.normalized,
            rank=topic.rank,
            count=topic.count,
            anchor=topic.anchor,  # type: ignore[arg-type]
            zoom_min=zoom_min_for(topic.rank),
            member_event_ids=[],
        )

    # exclusive claim: an event goes to its best-ranked admitted topic
    rank_of = {t.normalized: t.rank for t in admitted}
    claimed: dict[str, list[str]] = {t.normalized: [] for t in admitted}
    for assignment in assignments:
        keys = [label.lower() for label in assignment.topics]
        candidates = [k for k in keys if k in rank_of]
        if not candidates:
            continue
        best = min(candidates, key=lambda k: rank_of[k])
        claimed[best].append(assignment.event_id)

    parent_of: dict[str, str | None] = {}
    for node in nodes.values():
        if node.zoom_min == 0:
            parent_of[node.normalized] = None
            continue
        pool = [
            other for other in nodes.values()
            if other.zoom_min <= node.zoom_min - 1
        ]
        ax, ay = node.anchor
        best_parent = min(
            pool,
            key=lambda o: ((o.anchor[0] - ax) ** 2 + (o.anchor[1] - ay) ** 2,
                           o.rank),
        )
        parent_of[node.normalized] = best_parent.normalized

    for key, parent in parent_of.items():
        if parent is not None:
            nodes[parent].children.append(nodes[key])
    for node in nodes.values():
        node.children.sort(key=lambda c: c.rank)

    def fill_members(node: TopicNode) -> list[str]:
        acc = list(claimed[node.normalized])
        for child in node.children:
            acc.extend(fill_members(child))
        node.member_event_ids = sorted(set(acc))
        return node.member_event_ids

    roots = sorted(
        (n for k, n in nodes.items() if parent_of[k] is None),
        key=lambda n: n.rank,
    )
    for root in roots:
        fill_members(root)
    return TopicTree(roots=roots, levels=levels)
