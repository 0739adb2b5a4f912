"""Text formats: edge lists, map files and the optional per-node inputs.

All files are line oriented; ``#`` starts a comment and blank lines are
ignored. Map files carry their parameters as ``# key value`` header lines.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .geometry import GeoCoordinate, ModelParams
from .graph import Topology

MAP_PARAM_KEYS = ("N", "k_bar", "gamma", "beta", "R", "kappa0", "alpha_fs")


class FormatError(ValueError):
    pass


def _records(path):
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if body:
                yield lineno, body.split()


def _int_token(tok, path, lineno, what="node id"):
    try:
        v = int(tok)
    except ValueError:
        raise FormatError(f"{path}:{lineno}: malformed {what} {tok!r}") from None
    if v < 0:
        raise FormatError(f"{path}:{lineno}: {what} must be non-negative, got {v}")
    return v


def header_lines(command: str, args: dict | None = None, seed=None) -> list[str]:
    """Provenance header shared by every output file (no timestamps, so reruns match byte for byte)."""
    lines = [f"# tool hypermap {__version__}", f"# command {command}"]
    if args is not None:
        lines.append("# args " + json.dumps(args, sort_keys=True, default=str))
    if seed is not None:
        lines.append(f"# seed {seed}")
    return lines


# -- edge lists ---------------------------------------------------------------------------
def parse_edge_list(path) -> Topology:
    """Read ``u v`` lines; duplicates and self-loops are dropped and counted on the result."""
    pairs = []
    for lineno, tok in _records(path):
        if len(tok) != 2:
            raise FormatError(f"{path}:{lineno}: expected two node ids, got {len(tok)} fields")
        pairs.append((_int_token(tok[0], path, lineno), _int_token(tok[1], path, lineno)))
    return Topology.from_edges(np.array(pairs, dtype=np.int64).reshape(-1, 2))


def write_edge_list(path, g: Topology, header=()) -> None:
    with open(path, "w") as fh:
        for line in header:
            fh.write(line + "\n")
        for u, v in g.edges():
            fh.write(f"{u} {v}\n")


# -- maps ---------------------------------------------------------------------------------
def write_map(path, emap, header=(), countries: dict | None = None) -> None:
    """Write ``node kappa theta r provenance [country]`` rows.

    Floats use Python's shortest round-trip representation, so reading
    the file back gives bit-identical arrays.
    """
    from .embedder import PROVENANCE_NAMES

    p = emap.params
    values = {"N": p.n_model, "k_bar": p.k_bar, "gamma": p.gamma, "beta": p.beta,
              "R": p.disc_radius, "kappa0": p.kappa0, "alpha_fs": emap.alpha_fs}
    with open(path, "w") as fh:
        for line in header:
            fh.write(line + "\n")
        for key in MAP_PARAM_KEYS:
            fh.write(f"# {key} {float(values[key])!r}\n")
        fh.write("# columns node kappa theta r provenance" + (" country" if countries else "") + "\n")
        for a, v in enumerate(emap.nodes):
            row = (f"{int(v)} {float(emap.kappa[a])!r} {float(emap.theta[a])!r} {float(emap.r[a])!r} "
                   f"{PROVENANCE_NAMES[int(emap.provenance[a])]}")
            if countries:
                row += f" {countries.get(int(v), '-')}"
            fh.write(row + "\n")


def read_map(path, tol: float = 1e-6):
    """Parse a map file; returns ``(EmbeddedMap, countries)``.

    The derived header values (R, kappa0) and every row's ``r`` are checked
    against the parameters; a mismatch raises :class:`FormatError`.
    """
    from .embedder import PROVENANCE_NAMES, EmbeddedMap

    codes = {name: c for c, name in PROVENANCE_NAMES.items()}
    header = {}
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] in MAP_PARAM_KEYS:
                    try:
                        header[parts[0]] = float(parts[1])
                    except ValueError:
                        raise FormatError(f"{path}: bad header value for {parts[0]}") from None
    missing = [k for k in ("N", "k_bar", "gamma", "beta") if k not in header]
    if missing:
        raise FormatError(f"{path}: header lacks {', '.join(missing)}")
    try:
        params = ModelParams(header["N"], header["k_bar"], header["gamma"], header["beta"])
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    for key, derived in (("R", params.disc_radius), ("kappa0", params.kappa0)):
        if key in header and not math.isclose(header[key], derived, rel_tol=1e-9, abs_tol=1e-12):
            raise FormatError(f"{path}: header {key}={header[key]} disagrees with the parameters ({derived})")

    nodes, kappa, theta, r, prov, countries = [], [], [], [], [], {}
    for lineno, tok in _records(path):
        if not 4 <= len(tok) <= 6:
            raise FormatError(f"{path}:{lineno}: expected 4 to 6 fields, got {len(tok)}")
        v = _int_token(tok[0], path, lineno)
        try:
            k, t, rr = float(tok[1]), float(tok[2]), float(tok[3])
        except ValueError:
            raise FormatError(f"{path}:{lineno}: malformed number") from None
        if not (math.isfinite(k) and math.isfinite(rr)) or k <= 0 or not 0.0 <= t < 2 * math.pi:
            raise FormatError(f"{path}:{lineno}: node {v} has invalid coordinates")
        code = codes.get(tok[4]) if len(tok) >= 5 else 0
        if code is None:
            raise FormatError(f"{path}:{lineno}: unknown provenance {tok[4]!r}")
        if len(tok) == 6 and tok[5] != "-":
            countries[v] = tok[5]
        nodes.append(v)
        kappa.append(k)
        theta.append(t)
        r.append(rr)
        prov.append(code)
    nodes = np.array(nodes, dtype=np.int64)
    if len(np.unique(nodes)) != len(nodes):
        raise FormatError(f"{path}: repeated node ids")
    order = np.argsort(nodes, kind="stable")
    emap = EmbeddedMap(params, nodes[order], np.array(kappa)[order], np.array(theta)[order],
                       np.array(prov, dtype=np.int8)[order], header.get("alpha_fs", 1.0))
    bad = np.abs(emap.r - np.array(r)[order]) > tol * np.maximum(1.0, np.abs(emap.r))
    if bad.any():
        first = int(emap.nodes[np.argmax(bad)])
        raise FormatError(f"{path}: node {first} has r inconsistent with its kappa ({int(bad.sum())} rows)")
    return emap, countries


# -- optional inputs ----------------------------------------------------------------------
def read_geo(path) -> dict[int, GeoCoordinate]:
    """``node lat lon`` rows (degrees)."""
    out = {}
    for lineno, tok in _records(path):
        if len(tok) != 3:
            raise FormatError(f"{path}:{lineno}: expected 'node lat lon'")
        v = _int_token(tok[0], path, lineno)
        try:
            out[v] = GeoCoordinate(float(tok[1]), float(tok[2]))
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from None
    return out


def read_router_counts(path) -> dict[int, int]:
    out = {}
    for lineno, tok in _records(path):
        if len(tok) != 2:
            raise FormatError(f"{path}:{lineno}: expected 'node count'")
        v = _int_token(tok[0], path, lineno)
        c = _int_token(tok[1], path, lineno, "router count")
        if c == 0:
            raise FormatError(f"{path}:{lineno}: router count must be positive")
        out[v] = c
    return out


def read_snapshots(paths, final_nodes=None) -> list[np.ndarray]:
    """One membership list per file (node ids, any whitespace layout), in the given order."""
    out = []
    known = None if final_nodes is None else np.asarray(final_nodes)
    for path in paths:
        ids = [_int_token(t, path, lineno) for lineno, tok in _records(path) for t in tok]
        arr = np.unique(np.array(ids, dtype=np.int64))
        if known is not None:
            extra = arr[~np.isin(arr, known)]
            if len(extra):
                raise FormatError(f"{path}: unknown node ids {extra[:10].tolist()}")
        out.append(arr)
    return out


def write_text(path, text: str) -> None:
    Path(path).write_text(text)
