"""Finite unions of intervals on the line.

Intervals are closed on the left.  On the right they are closed or half-open
according to a per-interval flag, which lets one type serve both truncation
sets (closed) and partition cells (half-open except the last).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class IntervalUnion:
    lows: tuple
    highs: tuple
    right_closed: tuple

    @classmethod
    def from_pairs(cls, pairs, right_closed=True):
        pairs = [(float(lo), float(hi)) for lo, hi in pairs]
        for lo, hi in pairs:
            if not lo <= hi:
                raise DomainError(f"interval [{lo}, {hi}] has lo > hi")
        flags = [bool(right_closed)] * len(pairs) if np.isscalar(right_closed) else [bool(f) for f in right_closed]
        if len(flags) != len(pairs):
            raise DomainError("one closure flag per interval is required")
        order = sorted(range(len(pairs)), key=lambda k: pairs[k])
        lows, highs, closed = [], [], []
        for k in order:
            lo, hi = pairs[k]
            if lows and lo <= highs[-1]:
                # overlapping or touching pieces fuse
                if hi > highs[-1]:
                    highs[-1], closed[-1] = hi, flags[k]
                elif hi == highs[-1]:
                    closed[-1] = closed[-1] or flags[k]
                continue
            lows.append(lo)
            highs.append(hi)
            closed.append(flags[k])
        return cls(tuple(lows), tuple(highs), tuple(closed))

    @classmethod
    def interval(cls, lo, hi, right_closed=True):
        return cls.from_pairs([(lo, hi)], right_closed)

    @classmethod
    def empty(cls):
        return cls((), (), ())

    def is_empty(self):
        return not self.lows

    def __len__(self):
        return len(self.lows)

    def pairs(self):
        return list(zip(self.lows, self.highs))

    def endpoints(self):
        return sorted(set(self.lows) | set(self.highs))

    def length(self):
        return float(sum(h - l for l, h in zip(self.lows, self.highs)))

    def contains(self, x):
        """Membership of each entry of ``x`` (scalars or an (n, 1) array)."""
        x = np.asarray(x, dtype=float).reshape(-1)
        hit = np.zeros(x.shape[0], dtype=bool)
        for lo, hi, rc in zip(self.lows, self.highs, self.right_closed):
            upper = x <= hi if rc else x < hi
            hit |= (x >= lo) & upper
        return hit

    def subset_of(self, other: "IntervalUnion"):
        for lo, hi in self.pairs():
            if not any(a <= lo and hi <= b for a, b in other.pairs()):
                return False
        return True

    def classify(self, a, b):
        """For closed intervals [a_k, b_k]: (contained in self, disjoint from self)."""
        a = np.asarray(a, dtype=float).reshape(-1)
        b = np.asarray(b, dtype=float).reshape(-1)
        inside = np.zeros(a.shape[0], dtype=bool)
        meets = np.zeros(a.shape[0], dtype=bool)
        for lo, hi, rc in zip(self.lows, self.highs, self.right_closed):
            top = b <= hi if rc else b < hi
            inside |= (a >= lo) & top
            reach = a <= hi if rc else a < hi
            meets |= (b >= lo) & reach
        return inside, ~meets

    def to_json(self):
        return [[lo, hi, rc] for lo, hi, rc in zip(self.lows, self.highs, self.right_closed)]


def as_union(obj, right_closed=True) -> IntervalUnion:
    if isinstance(obj, IntervalUnion):
        return obj
    obj = list(obj)
    if len(obj) == 2 and np.isscalar(obj[0]):
        obj = [obj]
    return IntervalUnion.from_pairs(obj, right_closed)
