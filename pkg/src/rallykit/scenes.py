"""Turn per-frame in-play labels into contiguous in-play segments."""

from __future__ import annotations

from dataclasses import dataclass

from .tracks import SceneLabel

DEFAULT_WINDOW = 9
DEFAULT_MIN_LEN = 25


@dataclass(frozen=True)
class InPlaySegment:
    frame_start: int
    frame_end: int  # inclusive

    def __len__(self) -> int:
        return self.frame_end - self.frame_start + 1

    def contains(self, frame: int) -> bool:
        return self.frame_start <= frame <= self.frame_end


def smooth_labels(labels: list[SceneLabel], window: int = DEFAULT_WINDOW) -> list[SceneLabel]:
    """Majority vote over a centered window; truncated at the boundaries.

    Window must be odd so the vote is centered.  The vote operates positionally
    on the label list, which is expected to cover a contiguous frame range.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be an odd integer >= 1")
    if window == 1 or not labels:
        return list(labels)

    half = window // 2
    values = [lbl.in_play for lbl in labels]
    n = len(values)
    # prefix sums keep the vote O(n) regardless of window size
    prefix = [0] * (n + 1)
    for i, v in enumerate(values):
        prefix[i + 1] = prefix[i] + (1 if v else 0)

    out = []
    for i, lbl in enumerate(labels):
        lo = max(0, i - half)
        hi = min(n, i + half + 1)
        trues = prefix[hi] - prefix[lo]
        out.append(SceneLabel(lbl.frame, trues * 2 >= (hi - lo)))
    return out


def segments(labels: list[SceneLabel], min_len: int = DEFAULT_MIN_LEN) -> list[InPlaySegment]:
    """Maximal runs of in_play=True at least min_len frames long."""
    out: list[InPlaySegment] = []
    start: int | None = None
    last_true: int | None = None

    def close() -> None:
        if start is not None and last_true is not None:
            if last_true - start + 1 >= min_len:
                out.append(InPlaySegment(start, last_true))

    for lbl in labels:
        if lbl.in_play:
            if start is None or (last_true is not None and lbl.frame != last_true + 1):
                close()
                start = lbl.frame
            last_true = lbl.frame
        else:
            close()
            start = None
            last_true = None
    close()
    return out
