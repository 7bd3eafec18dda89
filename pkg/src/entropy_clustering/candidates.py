"""Max-priority queue of candidate operations with lazy invalidation"""

import heapq
from typing import Dict, Hashable, List, Optional, Tuple


class CandidateQueue:
    """Heap of (gain, a, b) keyed by the stamps of a and b at push time.

    Bumping an item's stamp makes every queued entry that mentions it stale;
    stale entries are dropped when they reach the top. Equal gains pop in
    ascending (a, b) order.
    """

    def __init__(self):
        self._heap: List[Tuple[float, Hashable, Hashable, int, int]] = []
        self._stamp: Dict[Hashable, int] = {}

    def __len__(self) -> int:
        return len(self._heap)

    def stamp(self, item: Hashable) -> int:
        return self._stamp.get(item, 0)

    def push(self, gain: float, a: Hashable, b: Hashable = None) -> None:
        if b is not None and b < a:
            a, b = b, a
        heapq.heappush(self._heap, (-gain, a, b, self.stamp(a), self.stamp(b)))

    def invalidate(self, item: Hashable) -> None:
        self._stamp[item] = self.stamp(item) + 1

    def kill(self, item: Hashable) -> None:
        """Invalidate an item permanently"""
        self._stamp[item] = -1

    def _fresh(self, entry) -> bool:
        _, a, b, sa, sb = entry
        if self._stamp.get(a, 0) != sa or sa < 0:
            return False
        return b is None or (self._stamp.get(b, 0) == sb and sb >= 0)

    def pop_best(self) -> Optional[Tuple[float, Hashable, Hashable]]:
        """Remove and return the best fresh entry, or None when exhausted"""
        while self._heap:
            entry = heapq.heappop(self._heap)
            if self._fresh(entry):
                return -entry[0], entry[1], entry[2]
        return None
