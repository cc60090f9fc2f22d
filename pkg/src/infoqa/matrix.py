"""Feature-class information matrices.

The knowledge store is a table of weights, one per (feature, class) pair.
Each weight is the amount of information (in bits) the feature carries
about the class: a pointwise-mutual-information value, optionally scaled
by an emergence coefficient and shifted by a per-class bias.  Inputs are
binary feature activations; classification is an argmax over activated
weight sums.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import DegenerateSystem, EmptyMask, EmptyTrainingSet

# Above this many features, log2(2^W - 1) == W to better than 2^-30 relative
# error, and the exact power no longer fits comfortably in a float.
EMERGENCE_EXACT_LIMIT = 30


def emergence_coefficient(feature_count: int, class_count: int) -> float:
    """log2(2^W - 1) / log2(N): feature-combination capacity per class bit.

    W is the number of features taking part in decisions, N the number of
    possible outcomes.  Raises DegenerateSystem for N < 2 (log2 N would be
    zero).
    """
    if feature_count < 1:
        raise ValueError("feature_count must be >= 1, got %r" % feature_count)
    if class_count < 2:
        raise DegenerateSystem(
            "emergence coefficient needs at least 2 classes, got %d" % class_count
        )
    if feature_count > EMERGENCE_EXACT_LIMIT:
        numerator = float(feature_count)
    else:
        numerator = math.log2(2**feature_count - 1)
    return numerator / math.log2(class_count)


@dataclass
class WeightConfig:
    """Knobs for turning co-occurrence counts into weights.

    activation_epsilon is reserved for a fuzzy feature matcher; the default
    activation is pure presence and ignores it.
    """

    emergence_enabled: bool = True
    bias_default: float = 0.0
    alpha: float = 0.0
    activation_epsilon: float = 0.0
    log_base: int = 2

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.log_base != 2:
            raise ValueError("log base is fixed at 2")


@dataclass
class CountTable:
    """Raw co-occurrence tallies between features and classes."""

    feature_ids: list[str]
    class_ids: list[str]
    co_counts: dict[str, dict[str, int]]
    feature_totals: dict[str, int]
    class_totals: dict[str, int]
    grand_total: int

    def validate(self) -> None:
        for fid in self.feature_ids:
            expected = sum(self.co_counts.get(fid, {}).values())
            if self.feature_totals.get(fid, 0) != expected:
                raise ValueError("feature total mismatch for %r" % fid)
        if self.grand_total != sum(self.class_totals.values()):
            raise ValueError("grand total does not match class totals")
        for row in self.co_counts.values():
            for count in row.values():
                if count < 0:
                    raise ValueError("negative count")


def accumulate_counts(rows: Iterable[tuple[Iterable[str], str]]) -> CountTable:
    """Tally (feature-set, label) rows into a CountTable.

    Features repeated within one row count once: rows are sets.
    Vocabularies keep first-seen order.
    """
    feature_ids: dict[str, None] = {}
    class_ids: dict[str, None] = {}
    co_counts: dict[str, dict[str, int]] = {}
    class_totals: dict[str, int] = {}
    grand_total = 0

    for features, label in rows:
        if not isinstance(label, str) or not label:
            raise ValueError("class labels must be non-empty strings")
        seen = dict.fromkeys(features)
        if any(not isinstance(f, str) or not f for f in seen):
            raise ValueError("features must be non-empty strings")
        class_ids.setdefault(label, None)
        class_totals[label] = class_totals.get(label, 0) + 1
        grand_total += 1
        for feat in seen:
            feature_ids.setdefault(feat, None)
            row = co_counts.setdefault(feat, {})
            row[label] = row.get(label, 0) + 1

    if grand_total == 0:
        raise EmptyTrainingSet("no training rows")

    feature_totals = {f: sum(co_counts[f].values()) for f in feature_ids}
    table = CountTable(
        feature_ids=list(feature_ids),
        class_ids=list(class_ids),
        co_counts=co_counts,
        feature_totals=feature_totals,
        class_totals=class_totals,
        grand_total=grand_total,
    )
    table.validate()
    return table


@dataclass
class InformationMatrix:
    """Frozen weight table: never mutate after construction.

    weights is sparse; absent cells are exact zeros.  class_counts mirrors
    the bottom row of the knowledge table (objects seen per class).
    """

    feature_ids: list[str]
    class_ids: list[str]
    weights: dict[str, dict[str, float]]
    bias: dict[str, float]
    class_counts: dict[str, int]

    @property
    def connection_count(self) -> int:
        return len(self.feature_ids) * len(self.class_ids)

    @cached_property
    def feature_index(self) -> dict[str, int]:
        return {f: i for i, f in enumerate(self.feature_ids)}

    @cached_property
    def class_index(self) -> dict[str, int]:
        return {c: i for i, c in enumerate(self.class_ids)}

    @cached_property
    def mean_positive_weight(self) -> float:
        positives = [w for row in self.weights.values() for w in row.values() if w > 0]
        if not positives:
            return 0.0
        return sum(positives) / len(positives)

    def weight(self, feature_id: str, class_id: str) -> float:
        return self.weights.get(feature_id, {}).get(class_id, 0.0)

    def to_text(self) -> str:
        """Render the bundle text format.

        Header, class vocabulary, feature vocabulary, then sparse triplets
        (feature index, class index, shortest round-trip weight), one per
        line, LF endings.
        """
        lines = ["features=%d classes=%d" % (len(self.feature_ids), len(self.class_ids))]
        lines.extend(self.class_ids)
        lines.extend(self.feature_ids)
        cindex = self.class_index
        for fi, fid in enumerate(self.feature_ids):
            row = self.weights.get(fid)
            if not row:
                continue
            for cid, w in sorted(row.items(), key=lambda kv: cindex[kv[0]]):
                lines.append("%d\t%d\t%s" % (fi, cindex[cid], repr(w)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "InformationMatrix":
        lines = text.splitlines()
        if not lines:
            raise ValueError("empty matrix text")
        header = re.fullmatch(r"features=(\d+) classes=(\d+)", lines[0])
        if not header:
            raise ValueError("bad matrix header: %r" % lines[0])
        n_feat, n_cls = int(header.group(1)), int(header.group(2))
        if len(lines) < 1 + n_cls + n_feat:
            raise ValueError("truncated matrix vocabulary")
        class_ids = lines[1 : 1 + n_cls]
        feature_ids = lines[1 + n_cls : 1 + n_cls + n_feat]
        weights: dict[str, dict[str, float]] = {}
        for line in lines[1 + n_cls + n_feat :]:
            if not line:
                continue
            fi_s, ci_s, w_s = line.split("\t")
            fid = feature_ids[int(fi_s)]
            cid = class_ids[int(ci_s)]
            weights.setdefault(fid, {})[cid] = float(w_s)
        return cls(
            feature_ids=list(feature_ids),
            class_ids=list(class_ids),
            weights=weights,
            bias={},
            class_counts={},
        )


def compute_weights(
    counts: CountTable,
    config: WeightConfig | None = None,
    class_bias: Mapping[str, float] | None = None,
) -> InformationMatrix:
    """Turn counts into information weights.

    For a seen pair: weight = psi * log2(P(class | feature) / P(class)) + bias.
    Never-seen pairs carry no information and stay at exactly zero unless
    additive smoothing (alpha > 0) is on.
    """
    config = config or WeightConfig()
    if counts.grand_total <= 0:
        raise EmptyTrainingSet("count table has no observations")

    n_classes = len(counts.class_ids)
    if config.emergence_enabled:
        psi = emergence_coefficient(len(counts.feature_ids), n_classes)
    else:
        psi = 1.0

    bias = {c: config.bias_default for c in counts.class_ids}
    if class_bias:
        bias.update({c: float(b) for c, b in class_bias.items() if c in bias})

    alpha = config.alpha
    weights: dict[str, dict[str, float]] = {}
    for fid in counts.feature_ids:
        row = counts.co_counts.get(fid, {})
        total = counts.feature_totals[fid]
        out: dict[str, float] = {}
        for cid in counts.class_ids:
            co = row.get(cid, 0)
            if co == 0 and alpha == 0:
                continue
            p_ij = (co + alpha) / (total + alpha * n_classes)
            p_j = counts.class_totals[cid] / counts.grand_total
            w = psi * math.log2(p_ij / p_j) + bias[cid]
            if w != 0.0:
                out[cid] = w
        if out:
            weights[fid] = out

    return InformationMatrix(
        feature_ids=list(counts.feature_ids),
        class_ids=list(counts.class_ids),
        weights=weights,
        bias=bias,
        class_counts=dict(counts.class_totals),
    )


@dataclass
class ActivationVector:
    """Binary feature activation: which inputs the matrix recognises."""

    active_features: set[str] = field(default_factory=set)
    unknown_features: set[str] = field(default_factory=set)


def activate(input_features: Iterable[str], matrix: InformationMatrix) -> ActivationVector:
    """Presence activation: known identifiers go active, the rest are kept aside."""
    active: set[str] = set()
    unknown: set[str] = set()
    index = matrix.feature_index
    for feat in input_features:
        if feat in index:
            active.add(feat)
        else:
            unknown.add(feat)
    return ActivationVector(active_features=active, unknown_features=unknown)


@dataclass
class RankedClass:
    class_id: str
    score: float
    confidence: float


@dataclass
class Classification:
    ranked: list[RankedClass]
    winner: str

    @property
    def score(self) -> float:
        return self.ranked[0].score

    @property
    def winner_confidence(self) -> float:
        return self.ranked[0].confidence


def confidence(matrix: InformationMatrix, activation: ActivationVector, score: float) -> float:
    """Score as a fraction of the best plausible score: n_active * mean positive weight.

    Clamped to [0, 1]; zero active features mean zero confidence.
    """
    n_active = len(activation.active_features)
    if n_active == 0:
        return 0.0
    ceiling = n_active * matrix.mean_positive_weight
    if ceiling <= 0:
        return 0.0
    return min(1.0, max(0.0, score / ceiling))


def classify(
    matrix: InformationMatrix,
    activation: ActivationVector,
    mask: Iterable[str] | None = None,
) -> Classification:
    """Argmax over bias + activated weight sums.

    mask restricts candidate classes; unknown mask entries are dropped.
    Ties break toward the lower class vocabulary index.
    """
    if mask is not None:
        mask_set = set(mask)
        candidates = [c for c in matrix.class_ids if c in mask_set]
        if not candidates:
            raise EmptyMask("mask excludes every known class")
    else:
        candidates = matrix.class_ids

    scores = {c: matrix.bias.get(c, 0.0) for c in candidates}
    candidate_set = set(candidates)
    for feat in activation.active_features:
        for cid, w in matrix.weights.get(feat, {}).items():
            if cid in candidate_set:
                scores[cid] += w

    cindex = matrix.class_index
    order = sorted(candidates, key=lambda c: (-scores[c], cindex[c]))
    ranked = [
        RankedClass(c, scores[c], confidence(matrix, activation, scores[c])) for c in order
    ]
    return Classification(ranked=ranked, winner=order[0])
