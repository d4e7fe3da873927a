"""Base classes for atomic creature systems.

An atomic parameter bundles a finite base set with an indexed family of
creatures.  Each creature owns a nonempty value set (a subset of the base),
a nonnegative norm, and a set of admissible strengthenings ("successors").
Families may be explicit (everything tabulated) or intensional (membership
and successor enumeration given by code).  Intensional families declare
structural hooks that the checkers are allowed to rely on; a checker that
needs a hook the family does not provide fails loudly instead of sampling.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from typing import Iterable, Iterator, Optional

from ..errors import CapacityExceeded, UsageError
from ..logreal import LogReal, lr_from_rational

# Explicit tabulation is refused above this creature count.
EXPLICIT_LIMIT = 1 << 16


class AtomicParameter:
    """Interface shared by explicit tables and intensional families."""

    name: str = "atomic"
    # Structural declarations checkers may rely on.
    explicit: bool = False
    # All nonempty value-subsets are creatures and the norm depends only on
    # the value-set size, monotonically.  Licenses the analytic bigness mode.
    size_monotone_all_subsets: bool = False
    # Permutations of the base set act as automorphisms, so verdicts only
    # depend on the class key.  Licenses class-representative iteration.
    symmetric: bool = False

    def base(self) -> frozenset:
        raise NotImplementedError

    def ids(self) -> Iterable:
        raise NotImplementedError

    def has(self, w) -> bool:
        raise NotImplementedError

    def val(self, w) -> frozenset:
        raise NotImplementedError

    def val_size(self, w) -> int:
        return len(self.val(w))

    def nor(self, w) -> LogReal:
        raise NotImplementedError

    def succ_ids(self, w) -> Iterator:
        """All successors of w, including w itself."""
        raise NotImplementedError

    def in_succ(self, v, w) -> bool:
        return any(v == u for u in self.succ_ids(w))

    # -- optional structure hooks ---------------------------------------------

    def norm_of_size(self, k: int) -> LogReal:
        raise UsageError(f"{self.name}: norm is not a pure function of size")

    def best_successor_within(self, w, allowed: frozenset):
        """Max-norm successor of w whose values lie inside `allowed`,
        or None.  Default: linear scan."""
        best = None
        best_nor = None
        for v in self.succ_ids(w):
            if not self.val(v) <= allowed:
                continue
            nv = self.nor(v)
            if best is None or nv > best_nor:
                best, best_nor = v, nv
        return best

    def class_key(self, w):
        """Key identifying w up to base-set automorphism (only meaningful
        when `symmetric` is set)."""
        return w

    def class_reps(self) -> Iterable:
        """One creature per automorphism class."""
        return self.ids()

    def succ_class_reps(self, w) -> Iterable:
        """One successor of w per automorphism class of successors."""
        return self.succ_ids(w)

    def max_norm(self) -> LogReal:
        best = None
        for w in self.class_reps():
            n = self.nor(w)
            if best is None or n > best:
                best = n
        if best is None:
            raise UsageError(f"{self.name}: empty creature set")
        return best

    def small_successor(self, w, x: LogReal):
        """Successor of minimal value-set size with nor > nor(w) - x,
        or None."""
        floor = self.nor(w) - x
        best = None
        best_size = None
        for v in self.succ_ids(w):
            if self.nor(v) > floor:
                sz = self.val_size(v)
                if best is None or sz < best_size:
                    best, best_size = v, sz
        return best

    def big_successor(self, w, x: LogReal):
        """Successor intended to stay hereditarily big; default w itself."""
        return w

    # -- identity ---------------------------------------------------------------

    def describe(self) -> str:
        raise NotImplementedError

    def param_hash(self) -> str:
        return hashlib.sha256(self.describe().encode()).hexdigest()[:16]


def _norm_to_json(x: LogReal) -> dict:
    return x.to_json()


class ExplicitAtomicParameter(AtomicParameter):
    """Fully tabulated parameter: creature id -> (val, nor, succ set)."""

    explicit = True

    def __init__(self, name, base, vals, nors, succs):
        if len(vals) > EXPLICIT_LIMIT:
            raise CapacityExceeded(
                f"{len(vals)} creatures exceed the explicit limit {EXPLICIT_LIMIT}"
            )
        self.name = name
        self._base = frozenset(base)
        self._vals = {w: frozenset(v) for w, v in vals.items()}
        self._nors = dict(nors)
        self._succs = {w: frozenset(s) for w, s in succs.items()}

    def base(self):
        return self._base

    def ids(self):
        return list(self._vals)

    def has(self, w):
        return w in self._vals

    def val(self, w):
        return self._vals[w]

    def nor(self, w):
        return self._nors[w]

    def succ_ids(self, w):
        return iter(self._succs[w])

    def in_succ(self, v, w):
        return v in self._succs[w]

    def describe(self) -> str:
        body = {
            "name": self.name,
            "base": sorted(self._base),
            "creatures": {
                str(w): {
                    "val": sorted(self._vals[w]),
                    "nor": _norm_to_json(self._nors[w]),
                    "succ": sorted(str(v) for v in self._succs[w]),
                }
                for w in sorted(self._vals, key=str)
            },
        }
        return json.dumps(body, sort_keys=True)

    # -- serialization ----------------------------------------------------------

    def to_json(self) -> dict:
        ids = sorted(self._vals, key=str)
        key = {w: str(i) for i, w in enumerate(ids)}
        return {
            "name": self.name,
            "base": sorted(self._base),
            "creatures": {
                key[w]: {
                    "id": list(w) if isinstance(w, tuple) else w,
                    "val": sorted(self._vals[w]),
                    "nor": self._nors[w].to_json(),
                    "succ": [key[v] for v in sorted(self._succs[w], key=str)],
                }
                for w in ids
            },
        }

    @staticmethod
    def from_json(obj) -> "ExplicitAtomicParameter":
        raw = obj["creatures"]

        def restore(entry):
            i = entry["id"]
            return tuple(i) if isinstance(i, list) else i

        names = {k: restore(v) for k, v in raw.items()}
        vals = {names[k]: frozenset(v["val"]) for k, v in raw.items()}
        nors = {names[k]: LogReal.from_json(v["nor"]) for k, v in raw.items()}
        succs = {
            names[k]: frozenset(names[s] for s in v["succ"]) for k, v in raw.items()
        }
        return ExplicitAtomicParameter(obj.get("name", "atomic"), obj["base"], vals, nors, succs)

    def mutated(self, **changes) -> "ExplicitAtomicParameter":
        """Copy with creature tables replaced; for violation-injection tests."""
        vals = changes.get("vals", self._vals)
        nors = changes.get("nors", self._nors)
        succs = changes.get("succs", self._succs)
        return ExplicitAtomicParameter(self.name + "*", self._base, vals, nors, succs)


def frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


def lr(x) -> LogReal:
    if isinstance(x, LogReal):
        return x
    return lr_from_rational(frac(x))
