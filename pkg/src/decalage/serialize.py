"""JSON encoding of rings, matrices, complexes, sheaves and embeddings.

Ring elements travel as strings (decimal integers, polynomials in canonical
descending form such as "2*t^3+1"); matrices as row-major nested arrays of
such strings.  Complexes carry {ring, lo, hi, ranks, differentials}; sheaf
complexes carry {site, stalks, restrictions} with restriction keys "a<=b".
"""

from __future__ import annotations

import json

from .complexes import ChainMap, FreeComplex
from .rings import BaseRing, RingElementError, ring_from_description
from .rmatrix import Matrix
from .sites import PosetSite, SheafComplex


class SerializeError(ValueError):
    """Input does not parse as the expected object."""


def matrix_to_json(M: Matrix):
    return [[M.ring.format(x) for x in row] for row in M.data]


def matrix_from_json(ring: BaseRing, data, rows: int, cols: int) -> Matrix:
    if not isinstance(data, list) or len(data) != rows:
        raise SerializeError(f"matrix needs {rows} rows, got {data!r}")
    out = []
    for row in data:
        if not isinstance(row, list) or len(row) != cols:
            raise SerializeError(f"matrix row needs {cols} entries")
        try:
            out.append([ring.parse(str(x)) for x in row])
        except RingElementError as exc:
            raise SerializeError(str(exc)) from exc
    return Matrix(ring, out, cols=cols)


def complex_to_json(K: FreeComplex) -> dict:
    return {
        "ring": K.ring.describe(),
        "lo": K.lo,
        "hi": K.hi,
        "ranks": list(K.ranks()),
        "differentials": [matrix_to_json(K.d(i)) for i in range(K.lo, K.hi)],
        "twist": K.twist,
    }


def complex_from_json(data: dict, ring: BaseRing | None = None) -> FreeComplex:
    if not isinstance(data, dict):
        raise SerializeError("complex JSON must be an object")
    try:
        ring = ring or ring_from_description(data["ring"])
        lo = int(data["lo"])
        ranks = [int(r) for r in data["ranks"]]
        raw = data.get("differentials", [])
    except (KeyError, TypeError, ValueError, RingElementError) as exc:
        raise SerializeError(f"bad complex JSON: {exc}") from exc
    if "hi" in data and int(data["hi"]) != lo + len(ranks) - 1:
        raise SerializeError("hi does not match lo + len(ranks) - 1")
    if len(raw) != max(len(ranks) - 1, 0):
        raise SerializeError("need one differential per adjacent degree pair")
    diffs = [
        matrix_from_json(ring, raw[i], ranks[i + 1], ranks[i])
        for i in range(len(raw))
    ]
    return FreeComplex(ring, lo, ranks, diffs, int(data.get("twist", 0)))


def site_to_json(site: PosetSite) -> dict:
    return site.describe()


def site_from_json(data: dict) -> PosetSite:
    try:
        return PosetSite(data["elements"], [tuple(p) for p in data.get("leq", [])])
    except (KeyError, TypeError, ValueError) as exc:
        raise SerializeError(f"bad site JSON: {exc}") from exc


def sheaf_to_json(F: SheafComplex) -> dict:
    out = {
        "site": site_to_json(F.site),
        "stalks": {x: complex_to_json(F.stalk(x)) for x in F.site.elements},
        "restrictions": {},
    }
    for a, b in F.site.strict_pairs():
        src = F.stalk(a)
        cm = F.res(a, b)
        out["restrictions"][f"{a}<={b}"] = [
            matrix_to_json(cm.map(i)) for i in range(src.lo, src.hi + 1)
        ]
    return out


def sheaf_from_json(data: dict) -> SheafComplex:
    if not isinstance(data, dict) or "site" not in data:
        raise SerializeError("sheaf JSON must carry a site")
    site = site_from_json(data["site"])
    try:
        stalks = {x: complex_from_json(data["stalks"][x]) for x in site.elements}
    except KeyError as exc:
        raise SerializeError(f"missing stalk: {exc}") from exc
    restrictions = {}
    raw = data.get("restrictions", {})
    for a, b in site.strict_pairs():
        key = f"{a}<={b}"
        if key not in raw:
            raise SerializeError(f"missing restriction {key}")
        src, tgt = stalks[a], stalks[b]
        mats = raw[key]
        if len(mats) != src.hi - src.lo + 1:
            raise SerializeError(f"restriction {key} needs one matrix per degree")
        maps = {
            src.lo + j: matrix_from_json(
                src.ring, mats[j], tgt.rank(src.lo + j), src.rank(src.lo + j)
            )
            for j in range(len(mats))
        }
        restrictions[(a, b)] = ChainMap(src, tgt, maps)
    return SheafComplex(site, stalks, restrictions)


def embedding_to_json(emb) -> dict:
    K = emb.ambient
    return {
        "complex": complex_to_json(emb.complex),
        "iota": [matrix_to_json(emb.basis(i)) for i in range(K.lo, K.hi + 1)],
        "twists": [emb.twists[i] for i in range(K.lo, K.hi + 1)],
    }


def load_instance(data):
    """A sheaf complex from JSON: bare complexes become point-site sheaves."""
    if isinstance(data, dict) and "site" in data:
        return sheaf_from_json(data)
    K = complex_from_json(data)
    return SheafComplex.constant(PosetSite.point(), K)


def load_instance_file(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SerializeError(f"cannot read {path}: {exc}") from exc
    return load_instance(data)


def dump_json(obj, path: str | None = None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return text
