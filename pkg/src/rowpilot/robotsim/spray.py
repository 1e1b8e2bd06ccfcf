"""Spot-spray actuation with a fire delay, so slow passes double-dose a weed."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional

import numpy as np


@dataclass(frozen=True)
class SprayEvent:
    t: float
    weed: int
    duplicate: bool


class SprayState:
    """Pending nozzle actuations keyed by weed id.

    A weed seen inside the trigger zone schedules one actuation `delay_s`
    (plus valve jitter) later. After that actuation fires, the weed can
    schedule again if it is still in the zone, which is exactly how the same
    plant ends up sprayed twice: dwell time longer than the actuation delay.
    """

    def __init__(self, delay_s: float = 0.4, jitter_s: float = 0.1):
        if delay_s < 0.0:
            raise ValueError(f"delay_s must be non-negative, got {delay_s}")
        if jitter_s < 0.0 or jitter_s > delay_s:
            raise ValueError(f"jitter_s must be in [0, delay_s], got {jitter_s}")
        self.delay_s = delay_s
        self.jitter_s = jitter_s
        self.pending: Dict[int, float] = {}
        self.counts: Dict[int, int] = {}


def spray_trigger(
    st: SprayState,
    t: float,
    hits: Iterable[int],
    rng: Optional[np.random.Generator] = None,
) -> List[SprayEvent]:
    """Advance the nozzle queue to time t with the weeds currently in the zone.

    Fires every pending actuation that has come due (even if its weed has
    since left the zone: the valve was already committed) and schedules new
    ones for weeds in `hits` that have nothing pending. Returns the events
    fired this tick, oldest first.
    """
    fired: List[SprayEvent] = []
    due = sorted(
        (w for w, ft in st.pending.items() if ft <= t),
        key=lambda w: (st.pending[w], w),
    )
    for w in due:
        ft = st.pending.pop(w)
        n = st.counts.get(w, 0)
        st.counts[w] = n + 1
        fired.append(SprayEvent(ft, w, duplicate=n > 0))
    for w in sorted(set(hits)):
        if w in st.pending:
            continue
        jitter = 0.0
        if st.jitter_s > 0.0 and rng is not None:
            jitter = float(rng.uniform(-st.jitter_s, st.jitter_s))
        st.pending[w] = t + st.delay_s + jitter
    return fired


def duplicate_fraction(events: Iterable[SprayEvent]) -> float:
    """Fraction of sprayed weeds that received more than one actuation."""
    counts: Dict[int, int] = {}
    for ev in events:
        counts[ev.weed] = counts.get(ev.weed, 0) + 1
    if not counts:
        return 0.0
    doubled = sum(1 for n in counts.values() if n > 1)
    return doubled / len(counts)
