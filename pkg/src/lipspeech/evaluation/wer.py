"""Word error rate via word-level edit distance."""

from __future__ import annotations

from typing import Sequence


def tokenize(text: str) -> list[str]:
    """Case-fold and split on whitespace."""
    return text.lower().split()


def edit_distance(ref: Sequence[str], hyp: Sequence[str]) -> int:
    """Minimum substitutions + deletions + insertions turning ref into hyp."""
    if len(hyp) < len(ref):
        # rolling array over the shorter side
        return edit_distance(hyp, ref)
    prev = list(range(len(ref) + 1))
    for j, h in enumerate(hyp, start=1):
        cur = [j]
        for i, r in enumerate(ref, start=1):
            if r == h:
                cur.append(prev[i - 1])
            else:
                cur.append(1 + min(prev[i - 1], prev[i], cur[-1]))
        prev = cur
    return prev[-1]


def wer(ref: Sequence[str], hyp: Sequence[str]) -> float:
    """Word error rate of hyp against ref (both tokenized, case-folded)."""
    if len(ref) == 0:
        raise ValueError("reference transcript must be non-empty")
    return edit_distance(ref, hyp) / len(ref)


def corpus_wer(pairs: Sequence[tuple[Sequence[str], Sequence[str]]]) -> tuple[float, int, int]:
    """WER over concatenated corpus word counts.

    pairs: (reference, hypothesis) token lists. Returns (wer, total
    errors, total reference words).
    """
    errors = 0
    words = 0
    for ref, hyp in pairs:
        if len(ref) == 0:
            raise ValueError("reference transcript must be non-empty")
        errors += edit_distance(ref, hyp)
        words += len(ref)
    if words == 0:
        raise ValueError("corpus has no reference words")
    return errors / words, errors, words
