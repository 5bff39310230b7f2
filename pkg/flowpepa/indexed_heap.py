# flowpepa/indexed_heap.py
"""
Indexed binary min-heap over reaction indices.

Every reaction 0..n-1 is always present; its key (tentative firing time)
can be changed in O(log n) through a position index, and the minimum is
read in O(1). Unlike a lazy-deletion heapq queue, no stale entries build up.
"""

import math
from typing import List, Sequence, Tuple


class IndexedPriorityQueue:
    def __init__(self, keys: Sequence[float]) -> None:
        self._keys: List[float] = list(keys)
        self._heap: List[int] = list(range(len(self._keys)))
        self._pos: List[int] = list(range(len(self._keys)))
        for slot in reversed(range(len(self._heap) // 2)):
            self._sift_down(slot)

    def __len__(self) -> int:
        return len(self._heap)

    def key(self, item: int) -> float:
        return self._keys[item]

    def peek(self) -> Tuple[int, float]:
        """(item, key) with the smallest key; (-1, inf) when empty."""
        if not self._heap:
            return -1, math.inf
        item = self._heap[0]
        return item, self._keys[item]

    def update(self, item: int, key: float) -> None:
        old = self._keys[item]
        self._keys[item] = key
        if key < old:
            self._sift_up(self._pos[item])
        elif key > old:
            self._sift_down(self._pos[item])

    def is_heap(self) -> bool:
        """Heap and position index agree; used by tests."""
        for slot, item in enumerate(self._heap):
            if self._pos[item] != slot:
                return False
            parent = (slot - 1) // 2
            if slot and self._keys[self._heap[parent]] > self._keys[item]:
                return False
        return True

    # --------------------------------------------------------

    def _swap(self, a: int, b: int) -> None:
        heap = self._heap
        heap[a], heap[b] = heap[b], heap[a]
        self._pos[heap[a]] = a
        self._pos[heap[b]] = b

    def _sift_up(self, slot: int) -> None:
        keys, heap = self._keys, self._heap
        while slot > 0:
            parent = (slot - 1) // 2
            if keys[heap[parent]] <= keys[heap[slot]]:
                return
            self._swap(slot, parent)
            slot = parent

    def _sift_down(self, slot: int) -> None:
        keys, heap = self._keys, self._heap
        size = len(heap)
        while True:
            left = 2 * slot + 1
            if left >= size:
                return
            child = left
            right = left + 1
            if right < size and keys[heap[right]] < keys[heap[left]]:
                child = right
            if keys[heap[slot]] <= keys[heap[child]]:
                return
            self._swap(slot, child)
            slot = child
