"""JSON input/output for the command line.

Readers turn JSON documents into live objects (atomic parameters, creatures,
fragments, name tables, profiles); the writer is atomic: it writes to a
temporary file in the target directory and renames it into place, so a
crashed run never leaves a partial output behind.
"""

from __future__ import annotations

import json
import os
import tempfile
from fractions import Fraction

from .errors import UsageError
from .logreal import LogReal
from .mlcore import MlCreature
from .atomic import (
    HalvingPairFamily,
    ReservoirFamily,
    SubsetLadderFamily,
    TrivialTwoPointFamily,
    capped_ladder,
    plateau_family,
    subset_log_family,
)


def read_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"input file not found: {path}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON in {path}: {exc}")


def write_json(path, obj) -> None:
    """Serialize obj to path atomically (temp file + rename)."""
    directory = os.path.dirname(os.path.abspath(path))
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def parse_rational(text) -> Fraction:
    """Parse a rational literal: '3', '3/2', '1.5', or 'log2(8)' for an
    integer power-of-two logarithm."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    s = str(text).strip()
    if s.startswith("log2(") and s.endswith(")"):
        inner = int(s[5:-1])
        if inner < 1 or inner & (inner - 1):
            raise UsageError(f"log2 literal needs a power of two, got {inner}")
        return Fraction(inner.bit_length() - 1)
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a rational literal: {text!r}")


def id_from_json(v):
    """Creature ids serialize tuples as JSON arrays; restore them."""
    return tuple(id_from_json(x) for x in v) if isinstance(v, list) else v


def id_to_json(v):
    return [id_to_json(x) for x in v] if isinstance(v, tuple) else v


def atomic_param_from_json(obj):
    """Build an atomic parameter from a registry document {'kind': ..., ...}."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise UsageError("atomic parameter document needs a 'kind' field")
    kind = obj["kind"]
    if kind == "subset-log":
        return subset_log_family(obj.get("base_size", 16),
                                 name=obj.get("name", "subset-log"))
    if kind == "capped-ladder":
        return capped_ladder(parse_rational(obj["m_max"]),
                             base_size=obj.get("base_size", 8),
                             name=obj.get("name", "capped-ladder"))
    if kind == "plateau":
        return plateau_family(parse_rational(obj["height"]),
                              obj["base_size"],
                              name=obj.get("name", "plateau"))
    if kind == "two-point":
        return TrivialTwoPointFamily(parse_rational(obj["m_max"]))
    if kind == "halving-pairs":
        return HalvingPairFamily(base_size=obj.get("base_size", 16))
    if kind == "reservoir":
        return ReservoirFamily()
    if kind == "ladder":
        norms = {int(k): parse_rational(v) for k, v in obj["norms_by_size"].items()}
        return SubsetLadderFamily(obj.get("name", "ladder"), obj["base_size"], norms)
    raise UsageError(f"unknown atomic parameter kind: {kind!r}")


def creature_to_json(c: MlCreature) -> dict:
    return {
        "n": c.n,
        "u": sorted(c.u, key=str),
        "w_eps": [[i, id_to_json(w)] for i, w in sorted(c.w_eps.items(), key=lambda kv: str(kv[0]))],
        "w_alpha": [[a, k, id_to_json(w)] for (a, k), w in sorted(
            c.w_alpha.items(), key=lambda kv: (str(kv[0][0]), kv[0][1]))],
        "d": c.d.to_json(),
    }


def creature_from_json(obj) -> MlCreature:
    return MlCreature(
        obj["n"],
        frozenset(obj["u"]),
        {i: id_from_json(w) for i, w in obj["w_eps"]},
        {(a, k): id_from_json(w) for a, k, w in obj["w_alpha"]},
        LogReal.from_json(obj["d"]),
    )
