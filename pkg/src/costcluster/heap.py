"""Mergeable priority queue (pairing heap).

Min-ordered on an explicit key; callers wanting max-by-efficiency pass a key
such as ``(-efficiency, kind, ident)``. ``merge`` is O(1) and ``pop`` is
O(log n) amortized, which keeps repeated melding of subtree queues cheap.
"""

from __future__ import annotations

from typing import Any, Iterable


class _Node:
    __slots__ = ("key", "item", "kids")

    def __init__(self, key, item):
        self.key = key
        self.item = item
        self.kids: list[_Node] = []


def _link(a: _Node, b: _Node) -> _Node:
    if b.key < a.key:
        a, b = b, a
    a.kids.append(b)
    return a


def _two_pass(kids: list[_Node]):
    n = len(kids)
    if n == 0:
        return None
    if n == 1:
        return kids[0]
    paired = [_link(kids[i], kids[i + 1]) for i in range(0, n - 1, 2)]
    if n % 2:
        paired.append(kids[-1])
    root = paired.pop()
    while paired:
        root = _link(paired.pop(), root)
    return root


class MergeableHeap:
    __slots__ = ("_root", "_size")

    def __init__(self, pairs: Iterable[tuple[Any, Any]] = ()):
        self._root = None
        self._size = 0
        for key, item in pairs:
            self.push(key, item)

    @classmethod
    def from_sorted(cls, pairs: Iterable[tuple[Any, Any]]) -> "MergeableHeap":
        """Build from pairs already in ascending key order, in linear time."""
        h = cls()
        prev = None
        for key, item in pairs:
            node = _Node(key, item)
            if prev is None:
                h._root = node
            else:
                if key < prev.key:
                    raise ValueError("from_sorted needs keys in ascending order")
                prev.kids.append(node)
            prev = node
            h._size += 1
        return h

    def __len__(self) -> int:
        return self._size

    def __bool__(self) -> bool:
        return self._root is not None

    def push(self, key, item) -> None:
        node = _Node(key, item)
        self._root = node if self._root is None else _link(self._root, node)
        self._size += 1

    def peek(self):
        """``(key, item)`` of the minimum; IndexError when empty."""
        if self._root is None:
            raise IndexError("peek at an empty heap")
        return self._root.key, self._root.item

    def pop(self):
        if self._root is None:
            raise IndexError("pop from an empty heap")
        root = self._root
        self._root = _two_pass(root.kids)
        self._size -= 1
        return root.key, root.item

    def merge(self, other: "MergeableHeap") -> None:
        """Meld ``other`` into this heap; ``other`` is left empty."""
        if other is self or other._root is None:
            return
        self._root = other._root if self._root is None else _link(self._root, other._root)
        self._size += other._size
        other._root = None
        other._size = 0

    def drain(self):
        """Pop everything in key order."""
        while self._root is not None:
            yield self.pop()

    def take_sorted(self) -> list:
        """Empty the heap, returning all ``(key, item)`` pairs sorted by key.

        Same order as repeated :meth:`pop` but done by one sort over the nodes.
        """
        out = []
        stack = [self._root] if self._root is not None else []
        while stack:
            node = stack.pop()
            out.append((node.key, node.item))
            stack.extend(node.kids)
        self._root = None
        self._size = 0
        out.sort(key=_first)
        return out

    def items(self) -> list:
        """All ``(key, item)`` pairs in key order, leaving the heap intact."""
        out = []
        stack = [self._root] if self._root is not None else []
        while stack:
            node = stack.pop()
            out.append((node.key, node.item))
            stack.extend(node.kids)
        out.sort(key=_first)
        return out


def _first(pair):
    return pair[0]
