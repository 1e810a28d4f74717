"""File-backed cluster simulator.

Layout of a cluster directory::

    manifest.json
    node-00/shard.rsrp
    node-01/shard.rsrp
    ...

A file is prefixed with its length (u64 little-endian), zero-padded, and cut
into stripes of k symbols; stripe t is one codeword and its j-th symbol goes
to node j.  Repairs read helper shards only through the Helper interface, so
the transcript totals are exactly what a newcomer would download.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import logging
import os
import shutil
import struct
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import CorruptionError, InvalidInputError, ParameterError, RSRPError
from .grs import CodeSpec, encode, interpolate
from .repair import RepairTranscript, SymbolHelper, cutset_bound, repair, repair_plan, required_helpers, trivial_bandwidth
from .tower import KElement, TowerSpec, element_from_bytes, element_nbytes, element_to_bytes

MAGIC = b"RSRP"
SHARD_VERSION = 1
_HEADER = struct.Struct("<4sBH")
_LENGTH_PREFIX = struct.Struct("<Q")
MANIFEST = "manifest.json"
SHARD_NAME = "shard.rsrp"

log = logging.getLogger(__name__)


class ClusterIOError(RSRPError, OSError):
    pass


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def worker_count() -> int:
    env = os.environ.get("RSRP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ParameterError(f"RSRP_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


# -- shard files --------------------------------------------------------------


@dataclass(frozen=True)
class ShardFile:
    node: int
    payload: bytes

    def to_bytes(self) -> bytes:
        return _HEADER.pack(MAGIC, SHARD_VERSION, self.node) + self.payload

    @classmethod
    def from_bytes(cls, data: bytes) -> "ShardFile":
        if len(data) < _HEADER.size:
            raise CorruptionError("shard file shorter than its header")
        magic, version, node = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise CorruptionError(f"bad shard magic {magic!r}")
        if version != SHARD_VERSION:
            raise CorruptionError(f"unsupported shard version {version}")
        return cls(node, data[_HEADER.size:])


# -- packing bytes into field elements ------------------------------------------


def data_bytes_per_symbol(tower: TowerSpec) -> int:
    """Largest B with 256^B <= p^L."""
    return ((tower.p ** tower.total_degree).bit_length() - 1) // 8


def bytes_to_element(tower: TowerSpec, chunk: bytes) -> KElement:
    if tower.p == 2:
        raw = np.frombuffer(chunk, dtype=np.uint8)
        bits = np.zeros(tower.total_degree, dtype=np.int64)
        bits[: 8 * len(chunk)] = np.unpackbits(raw, bitorder="little")
        return KElement(tower, bits)
    n = int.from_bytes(chunk, "little")
    digits = []
    for _ in range(tower.total_degree):
        n, r = divmod(n, tower.p)
        digits.append(r)
    return KElement(tower, digits)


def element_to_data(x: KElement, nbytes: int) -> bytes:
    t = x.tower
    vec = x.coeffs.reshape(-1)
    if t.p == 2:
        if vec[8 * nbytes:].any():
            raise CorruptionError("decoded symbol carries bits beyond the data capacity")
        return np.packbits(vec[: 8 * nbytes].astype(np.uint8), bitorder="little").tobytes()
    n = 0
    for c in reversed(vec.tolist()):
        n = n * t.p + c
    if n >= 256 ** nbytes:
        raise CorruptionError("decoded symbol exceeds the data capacity")
    return n.to_bytes(nbytes, "little")


# -- reports -------------------------------------------------------------------


@dataclass
class RepairReport:
    node: int
    helpers: tuple[int, ...]
    stripes: int
    per_helper: dict[int, int]
    total: int
    cutset_per_stripe: Fraction
    trivial_per_stripe: int
    shard_sha256: str
    checksum_ok: bool
    wall_clock: float = 0.0
    transcripts: list[RepairTranscript] = field(default_factory=list, repr=False)

    @property
    def cutset_total(self) -> Fraction:
        return self.cutset_per_stripe * self.stripes

    @property
    def trivial_total(self) -> int:
        return self.trivial_per_stripe * self.stripes

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.total) / self.cutset_total

    def to_json(self) -> dict:
        return {
            "node": self.node,
            "helpers": list(self.helpers),
            "stripes": self.stripes,
            "symbols_per_helper": {str(j): c for j, c in self.per_helper.items()},
            "total_base_symbols": self.total,
            "cutset_bound": _frac_json(self.cutset_total),
            "cutset_bound_per_stripe": _frac_json(self.cutset_per_stripe),
            "trivial_bound": self.trivial_total,
            "ratio_to_cutset": _frac_json(self.ratio),
            "shard_sha256": self.shard_sha256,
            "checksum_ok": self.checksum_ok,
        }

    def to_text(self) -> str:
        rows = [
            ("failed node", str(self.node)),
            ("helpers", ",".join(map(str, self.helpers))),
            ("stripes", str(self.stripes)),
            ("downloaded base symbols", str(self.total)),
            ("cut-set bound", _frac_text(self.cutset_total)),
            ("trivial repair", str(self.trivial_total)),
            ("achieved/bound", _frac_text(self.ratio)),
            ("checksum", "ok" if self.checksum_ok else "MISMATCH"),
        ]
        rows += [(f"  from node {j}", str(c)) for j, c in self.per_helper.items()]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def _frac_json(x: Fraction) -> dict:
    return {"numerator": x.numerator, "denominator": x.denominator}


def _frac_text(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# -- the cluster --------------------------------------------------------------


class ClusterDir:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        path = self.root / MANIFEST
        try:
            self.manifest = json.loads(path.read_text())
        except FileNotFoundError:
            raise ClusterIOError(f"no cluster manifest at {path}") from None
        except json.JSONDecodeError as exc:
            raise CorruptionError(f"unreadable manifest: {exc}") from None
        self.spec = CodeSpec.from_json(self.manifest["spec"])
        layout = self.manifest["layout"]
        self.stripes = int(layout["stripes"])
        self.symbol_bytes = element_nbytes(self.spec.tower)
        if layout["element_bytes"] != self.symbol_bytes:
            raise CorruptionError("manifest element size disagrees with the tower")

    # paths and manifest

    def node_dir(self, j: int) -> Path:
        return self.root / f"node-{j:02d}"

    def shard_path(self, j: int) -> Path:
        return self.node_dir(j) / SHARD_NAME

    @property
    def failed(self) -> set[int]:
        return set(self.manifest.get("failed", []))

    def alive(self) -> list[int]:
        return [j for j in range(self.spec.n) if j not in self.failed and self.shard_path(j).exists()]

    def _save_manifest(self):
        tmp = self.root / (MANIFEST + ".tmp")
        tmp.write_text(json.dumps(self.manifest, indent=2, sort_keys=True))
        tmp.replace(self.root / MANIFEST)

    @property
    def payload_bytes(self) -> int:
        return self.stripes * self.symbol_bytes

    # shard access

    def read_shard(self, j: int) -> ShardFile:
        try:
            data = self.shard_path(j).read_bytes()
        except FileNotFoundError:
            raise ClusterIOError(f"node {j} has no shard") from None
        shard = ShardFile.from_bytes(data)
        if shard.node != j:
            raise CorruptionError(f"shard in node-{j:02d} claims node {shard.node}")
        if len(shard.payload) != self.payload_bytes:
            raise CorruptionError(f"node {j} payload is {len(shard.payload)} bytes, expected {self.payload_bytes}")
        return shard

    def symbols(self, j: int) -> list[KElement]:
        payload = self.read_shard(j).payload
        b = self.symbol_bytes
        t = self.spec.tower
        try:
            return [element_from_bytes(t, payload[s * b:(s + 1) * b]) for s in range(self.stripes)]
        except InvalidInputError as exc:
            raise CorruptionError(f"node {j} shard: {exc}") from None

    def _write_shard(self, j: int, symbols: Sequence[KElement]) -> str:
        data = ShardFile(j, b"".join(element_to_bytes(x) for x in symbols)).to_bytes()
        self.node_dir(j).mkdir(parents=True, exist_ok=True)
        self.shard_path(j).write_bytes(data)
        return _sha256(data)

    # operations

    @classmethod
    def create(cls, root: str | Path, spec: CodeSpec, data: bytes, name: str = "input",
               force: bool = False) -> "ClusterDir":
        if not data:
            raise InvalidInputError("refusing to encode an empty file")
        root = Path(root)
        if root.exists() and any(root.iterdir()):
            if not force:
                raise ClusterIOError(f"{root} exists and is not empty (use --force)")
            shutil.rmtree(root)
        root.mkdir(parents=True, exist_ok=True)
        tower = spec.tower
        B = data_bytes_per_symbol(tower)
        if B < 1:
            raise ParameterError("field too small to carry a data byte per symbol")
        framed = _LENGTH_PREFIX.pack(len(data)) + data
        stripe_bytes = spec.k * B
        stripes = -(-len(framed) // stripe_bytes)
        framed += b"\0" * (stripes * stripe_bytes - len(framed))
        columns: list[list[KElement]] = [[] for _ in range(spec.n)]
        for s in range(stripes):
            chunk = framed[s * stripe_bytes:(s + 1) * stripe_bytes]
            msg = [bytes_to_element(tower, chunk[m * B:(m + 1) * B]) for m in range(spec.k)]
            for j, c in enumerate(encode(spec, msg).symbols):
                columns[j].append(c)
        manifest = {
            "format": "rsrp-cluster",
            "version": 1,
            "spec": spec.to_json(),
            "file": {"name": name, "size": len(data), "sha256": _sha256(data)},
            "layout": {
                "stripes": stripes,
                "data_bytes_per_symbol": B,
                "element_bytes": element_nbytes(tower),
                "padding": "u64le-length-prefix, zero-fill",
            },
            "shards": {},
            "failed": [],
        }
        (root / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True))
        cluster = cls(root)
        for j in range(spec.n):
            digest = cluster._write_shard(j, columns[j])
            cluster.manifest["shards"][str(j)] = {"sha256": digest, "bytes": _HEADER.size + cluster.payload_bytes}
        cluster._save_manifest()
        return cluster

    def decode(self, nodes: Sequence[int] | None = None) -> bytes:
        spec = self.spec
        nodes = list(nodes) if nodes is not None else self.alive()[: spec.k]
        if len(nodes) < spec.k:
            raise InvalidInputError(f"need {spec.k} live shards to decode, have {len(nodes)}")
        cols = {j: self.symbols(j) for j in nodes[: spec.k]}
        B = self.manifest["layout"]["data_bytes_per_symbol"]
        out = bytearray()
        for s in range(self.stripes):
            msg = interpolate(spec, {j: c[s] for j, c in cols.items()})
            for m in msg:
                out += element_to_data(m, B)
        (size,) = _LENGTH_PREFIX.unpack_from(out)
        data = bytes(out[_LENGTH_PREFIX.size:_LENGTH_PREFIX.size + size])
        if len(data) != size or _sha256(data) != self.manifest["file"]["sha256"]:
            raise CorruptionError("decoded file does not match the recorded checksum")
        return data

    def fail(self, j: int):
        if not 0 <= j < self.spec.n:
            raise InvalidInputError(f"node {j} out of range")
        path = self.shard_path(j)
        if path.exists():
            path.unlink()
        failed = self.failed | {j}
        self.manifest["failed"] = sorted(failed)
        self._save_manifest()

    def default_helpers(self, i: int) -> list[int]:
        need = required_helpers(self.spec, i)
        candidates = [j for j in self.alive() if j != i]
        if len(candidates) < need:
            raise InvalidInputError(f"node {i} needs {need} live helpers, only {len(candidates)} available")
        return candidates[:need]

    def repair(self, i: int, helpers: Sequence[int] | None = None, force: bool = False,
               verify: bool = False, threads: int | None = None) -> RepairReport:
        spec = self.spec
        if not 0 <= i < spec.n:
            raise InvalidInputError(f"node {i} out of range")
        if i not in self.failed and self.shard_path(i).exists() and not force:
            raise InvalidInputError(f"node {i} is alive (use --force to rebuild it anyway)")
        helpers = list(helpers) if helpers is not None else self.default_helpers(i)
        if i in helpers:
            raise InvalidInputError(f"failed node {i} cannot be its own helper")
        dead = [j for j in helpers if j in self.failed or not self.shard_path(j).exists()]
        if dead:
            raise InvalidInputError(f"helpers {dead} are not alive")
        start = time.perf_counter()
        plan = repair_plan(spec, i, helpers)
        R = plan.helpers
        # each node reads only its own shard
        helper_symbols = {j: self.symbols(j) for j in R}
        # optional cross-check against k full helper symbols, not counted as bandwidth
        checkers = {j: helper_symbols[j] for j in R[: spec.k]} if verify else {}

        def one(s: int):
            access = {j: SymbolHelper(helper_symbols[j][s]) for j in R}
            check = {j: c[s] for j, c in checkers.items()} if verify else None
            return repair(spec, i, R, access, verify_with=check)

        workers = threads if threads is not None else worker_count()
        if workers > 1 and self.stripes > 1:
            with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(one, range(self.stripes)))
        else:
            results = [one(s) for s in range(self.stripes)]
        symbols = [c for c, _ in results]
        transcripts = [tr for _, tr in results]
        log.info("node %d: %d stripes repaired from %s with %d workers", i, self.stripes, list(R), workers)
        digest = self._write_shard(i, symbols)
        expected = self.manifest["shards"][str(i)]["sha256"]
        ok = digest == expected
        if ok:
            self.manifest["failed"] = sorted(self.failed - {i})
            self._save_manifest()
        per_helper = {j: sum(tr.symbols_per_helper[j] for tr in transcripts) for j in R}
        report = RepairReport(
            node=i,
            helpers=R,
            stripes=self.stripes,
            per_helper=per_helper,
            total=sum(tr.total for tr in transcripts),
            cutset_per_stripe=cutset_bound(len(R), spec.k, spec.l),
            trivial_per_stripe=trivial_bandwidth(spec.k, spec.l),
            shard_sha256=digest,
            checksum_ok=ok,
            wall_clock=time.perf_counter() - start,
            transcripts=transcripts,
        )
        return report


__all__ = ["ClusterDir", "ShardFile", "RepairReport", "ClusterIOError", "MAGIC"]
