"""Special-moment extraction from windowed heart rate.

A window is flagged when its mean-bpm step from the previous window is large
both in absolute terms and relative to the person's recent variability:
|delta| >= max(abs_delta, z_threshold * sigma), where sigma is the sample
standard deviation of deltas over a trailing baseline (floored at 1 bpm so a
flat baseline cannot make noise significant). Flagged runs are merged across
small gaps, padded with context windows, and emitted as labeled episodes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from statistics import stdev

from .fusion import AlignedFrame, HrWindow

SIGMA_FLOOR = 1.0  # bpm


@dataclass(frozen=True)
class MomentParams:
    abs_delta: float = 12.0  # bpm; universal "sudden change" floor
    z_threshold: float = 2.5
    baseline_len: int = 20  # windows; 10 min at 30 s windows
    merge_gap: int = 2  # unflagged windows bridged between runs
    context_pad: int = 2  # windows added on both sides of a run

    def __post_init__(self) -> None:
        for name in ("abs_delta", "z_threshold", "baseline_len", "merge_gap", "context_pad"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.baseline_len < 2:
            raise ValueError("baseline_len must be >= 2")


@dataclass(frozen=True)
class Episode:
    start: int  # UTC epoch seconds
    end: int  # end > start; last window's exclusive edge
    window_starts: tuple[int, ...]
    peak_delta: float  # max |mean-bpm step| inside
    frames: tuple[str, ...] = ()  # aligned-frame image ids, filled by attach_frames
    label: str | None = None


def window_deltas(windows: list[HrWindow]) -> list[tuple[int, float]]:
    """Mean-bpm steps between consecutive adjacent windows.

    Returns (window_start, delta) for each window whose predecessor ends
    exactly where it starts; a time gap between windows yields no delta.
    """
    out: list[tuple[int, float]] = []
    for prev, cur in zip(windows, windows[1:]):
        if prev.start + prev.len == cur.start:
            out.append((cur.start, cur.mean_bpm - prev.mean_bpm))
    return out


def _delta_by_index(windows: list[HrWindow]) -> list[float | None]:
    deltas: list[float | None] = [None] * len(windows)
    for i in range(1, len(windows)):
        if windows[i - 1].start + windows[i - 1].len == windows[i].start:
            deltas[i] = windows[i].mean_bpm - windows[i - 1].mean_bpm
    return deltas


def detect_special_moments(
    windows: list[HrWindow], params: MomentParams | None = None
) -> list[Episode]:
    """Extract episodes where the windowed heart rate changes suddenly.

    The trigger is causal: each window's sigma comes only from deltas in the
    `baseline_len` windows before it. Runs of flagged windows separated by at
    most `merge_gap` unflagged windows merge; each run is then padded by
    `context_pad` windows per side (clipped to the stream) and padded runs
    that overlap or touch become one episode.
    """
    params = params or MomentParams()
    n = len(windows)
    if n < 2:
        return []
    deltas = _delta_by_index(windows)

    flagged = [False] * n
    for i in range(1, n):
        d = deltas[i]
        if d is None:
            continue
        trailing = [
            deltas[j]
            for j in range(max(1, i - params.baseline_len), i)
            if deltas[j] is not None
        ]
        sigma = stdev(trailing) if len(trailing) >= 2 else 0.0
        sigma = max(sigma, SIGMA_FLOOR)
        if abs(d) >= max(params.abs_delta, params.z_threshold * sigma):
            flagged[i] = True

    runs: list[list[int]] = []  # [first, last] flagged index, inclusive
    for i, is_flagged in enumerate(flagged):
        if not is_flagged:
            continue
        if runs and i - runs[-1][1] - 1 <= params.merge_gap:
            runs[-1][1] = i
        else:
            runs.append([i, i])

    padded: list[list[int]] = []
    for first, last in runs:
        a = max(0, first - params.context_pad)
        b = min(n - 1, last + params.context_pad)
        if padded and a <= padded[-1][1] + 1:
            padded[-1][1] = max(padded[-1][1], b)
        else:
            padded.append([a, b])

    episodes: list[Episode] = []
    for a, b in padded:
        span = windows[a : b + 1]
        peak = max(
            abs(deltas[i]) for i in range(a, b + 1) if deltas[i] is not None
        )
        episodes.append(
            Episode(
                start=span[0].start,
                end=span[-1].start + span[-1].len,
                window_starts=tuple(w.start for w in span),
                peak_delta=peak,
            )
        )
    return episodes


def attach_frames(
    episodes: list[Episode], frames: list[AlignedFrame]
) -> list[Episode]:
    """Fill each episode's frames with ids whose t lies in [start, end].

    The interval is closed: a photo taken at the boundary second belongs to
    the moment.
    """
    out: list[Episode] = []
    for ep in episodes:
        ids = tuple(f.image_id for f in frames if ep.start <= f.t <= ep.end)
        out.append(replace(ep, frames=ids))
    return out


def label_episode(episodes: list[Episode], index: int, text: str) -> list[Episode]:
    """Return a copy of the list with only episode `index` relabeled."""
    if not 0 <= index < len(episodes):
        raise IndexError(f"episode index {index} out of range 0..{len(episodes) - 1}")
    out = list(episodes)
    out[index] = replace(out[index], label=text)
    return out


def episodes_to_csv(episodes: list[Episode]) -> str:
    """Standalone serialization: `start,end,peak_delta,n_frames,label`."""
    out = ["start,end,peak_delta,n_frames,label"]
    for ep in episodes:
        label = ep.label if ep.label is not None else ""
        out.append(f"{ep.start},{ep.end},{ep.peak_delta!r},{len(ep.frames)},{label}")
    return "\n".join(out) + "\n"
