"""End-to-end learning, prediction and cross-validation over fix corpora."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .corpus import FixPair
from .diff import extract_concrete_edits
from .edits import BugReport
from .fix import FixCandidate, predict
from .learn import DEFAULT_MIN_SUPPORT, Dendrogram, PatternSet, learn_patterns
from .lint import validate_fix
from .minijava import SourceFile, normalize


def corpus_edits(pairs: list[FixPair]) -> list:
    edits = []
    for k, p in enumerate(pairs):
        edits.extend(extract_concrete_edits(p.before.tree, p.after.tree, p.bug, fix_id=k))
    return edits


def learn_from_pairs(pairs: list[FixPair], min_support: float = DEFAULT_MIN_SUPPORT) -> tuple[PatternSet, Dendrogram, int]:
    """Learn a pruned pattern set; also returns the dendrogram and the edit count."""
    if not pairs:
        raise ValueError("no training pairs")
    edits = corpus_edits(pairs)
    if not edits:
        raise ValueError("training pairs contain no changes")
    ps, d = learn_patterns(edits, len(pairs), min_support)
    return ps, d, len(edits)


def predict_fixes(ps: PatternSet, file: SourceFile, bug: BugReport, top: int = 5,
                  validate: bool = False, nullable=None) -> list[FixCandidate]:
    cands = predict(ps.patterns, ps.training_size, file, bug, top)
    if validate and cands:
        names = set(nullable) if nullable else ({bug.variable} if bug.variable else set())
        cands[0].validated = validate_fix(cands[0], file, bug, names)
    return cands


def same_text(a: str, b: str) -> bool:
    """Line-by-line equality ignoring empty lines, whitespace otherwise exact."""
    return normalize(a) == normalize(b)


def assign_folds(n: int, folds: int, seed: int) -> list[int]:
    order = list(range(n))
    random.Random(seed).shuffle(order)
    fold_of = [0] * n
    for pos, idx in enumerate(order):
        fold_of[idx] = pos % folds
    return fold_of


@dataclass
class EvalResult:
    folds: int
    top: int
    per_fold: list = field(default_factory=list)
    per_pair: list = field(default_factory=list)

    def accuracy(self, k: int, names: Optional[set] = None) -> float:
        rows = [r for r in self.per_pair if names is None or r["name"] in names]
        if not rows:
            return 0.0
        return sum(1 for r in rows if r["rank"] is not None and r["rank"] <= k) / len(rows)

    def to_json(self) -> dict:
        return {
            "folds": self.folds,
            "top": self.top,
            "aggregate": {f"top{k}": self.accuracy(k) for k in range(1, self.top + 1)},
            "perFold": self.per_fold,
            "pairs": self.per_pair,
        }


def cross_validate(pairs: list[FixPair], folds: int = 10, top: int = 5, seed: int = 0,
                   min_support: float = DEFAULT_MIN_SUPPORT) -> EvalResult:
    """k-fold evaluation; a hit is a top-k patch equal to the human fix."""
    if folds < 1:
        raise ValueError("folds must be >= 1")
    if folds > len(pairs):
        raise ValueError("more folds than pairs")
    fold_of = assign_folds(len(pairs), folds, seed)
    res = EvalResult(folds, top)
    for f in range(folds):
        train = [p for p, g in zip(pairs, fold_of) if g != f]
        test = [p for p, g in zip(pairs, fold_of) if g == f]
        ps = learn_from_pairs(train, min_support)[0] if train else PatternSet(0, [])
        hits = [0] * top
        for p in test:
            cands = predict(ps.patterns, ps.training_size, p.before, p.bug, top) if ps.patterns else []
            rank = next((k + 1 for k, c in enumerate(cands) if same_text(c.text, p.after.text)), None)
            res.per_pair.append({"name": p.name, "fold": f, "rank": rank, "candidates": len(cands)})
            for k in range(top):
                if rank is not None and rank <= k + 1:
                    hits[k] += 1
        res.per_fold.append({
            "fold": f,
            "size": len(test),
            **{f"top{k + 1}": (hits[k] / len(test) if test else 0.0) for k in range(top)},
        })
    return res
