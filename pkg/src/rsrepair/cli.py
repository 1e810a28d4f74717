"""Command-line front end: ``rsrp <command> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage or parameter error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np
from sympy import prime, primepi

from .cluster import ClusterDir, ClusterIOError, RepairReport
from .errors import (
    CorruptionError,
    InternalInconsistencyError,
    InvalidInputError,
    NotARepairSchemeError,
    RefusalError,
    RSRPError,
)
from .grs import MAIN, SIMPLE, CodeSpec, random_codeword, verify_mds
from .gw import family_from_repair, verify
from .repair import (
    build_main_construction,
    build_simple_construction,
    cutset_bound,
    lemma1_basis,
    lower_bound_subpacketization,
    repair,
    required_helpers,
    select_primes,
    trivial_bandwidth,
)

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_IO = 3

VARIANT_CHOICES = (MAIN, SIMPLE)

class VerificationFailed(RSRPError):
    pass


def _frac(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _table(rows: Sequence[tuple[str, object]]) -> str:
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def _node_list(text: str | None) -> list[int] | None:
    if text is None:
        return None
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InvalidInputError(f"expected a comma-separated list of node indices, got {text!r}") from None


def _load_spec(path: str) -> CodeSpec:
    try:
        obj = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ClusterIOError(f"no such spec file: {path}") from None
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path} is not valid JSON: {exc}") from None
    return CodeSpec.from_json(obj.get("spec", obj))


def _emit(args, payload: dict, text: str):
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


# -- bounds ---------------------------------------------------------------------


def bounds_rows(variant: str, n: int, k: int, d: int | None) -> list[dict]:
    """Per-node-class bound rows without building any field."""
    if not 1 <= k < n:
        raise InvalidInputError(f"need 1 <= k < n, got n={n}, k={k}")
    lower = lower_bound_subpacketization(k)
    if variant == MAIN:
        if d is None or not k <= d <= n - 1:
            raise InvalidInputError(f"need k <= d <= n-1, got d={d}")
        s = d - k + 1
        primes = select_primes(s, n)
        l = s * int(np.prod(primes, dtype=object))
        return [{
            "nodes": "all",
            "d": d,
            "s": s,
            "primes": primes,
            "l": l,
            "cutset_bound": cutset_bound(d, k, l),
            "trivial": trivial_bandwidth(k, l),
            "lower_bound_l": lower,
        }]
    r = n - k
    m = int(primepi(r))
    if m < 1:
        raise InvalidInputError("the simple construction needs n - k >= 2")
    primes = [int(prime(t)) for t in range(1, m + 1)]
    l = int(np.prod(primes, dtype=object))
    rows = []
    for i, pi in enumerate(primes):
        di = pi + k - 1
        rows.append({
            "nodes": str(i), "d": di, "s": pi, "primes": primes, "l": l,
            "cutset_bound": cutset_bound(di, k, l), "trivial": trivial_bandwidth(k, l), "lower_bound_l": lower,
        })
    rows.append({
        "nodes": f"{m}..{n - 1}" if m < n - 1 else str(m), "d": k, "s": 1, "primes": primes, "l": l,
        "cutset_bound": cutset_bound(k, k, l), "trivial": trivial_bandwidth(k, l), "lower_bound_l": lower,
    })
    return rows


def _bounds_json(rows: list[dict]) -> list[dict]:
    out = []
    for r in rows:
        r = dict(r)
        c = r["cutset_bound"]
        r["cutset_bound"] = {"numerator": c.numerator, "denominator": c.denominator}
        out.append(r)
    return out


def _bounds_text(rows: list[dict]) -> str:
    lines = []
    for r in rows:
        lines.append(_table([
            ("nodes", r["nodes"]),
            ("repair degree d", r["d"]),
            ("sub-packetization l", r["l"]),
            ("cut-set bound", _frac(r["cutset_bound"])),
            ("trivial bandwidth k*l", r["trivial"]),
            ("lower bound on l", r["lower_bound_l"]),
        ]))
    return "\n\n".join(lines)


def cmd_bounds(args) -> int:
    rows = bounds_rows(args.variant, args.n, args.k, args.d)
    _emit(args, {"variant": args.variant, "n": args.n, "k": args.k, "rows": _bounds_json(rows)}, _bounds_text(rows))
    return EXIT_OK


# -- construct ------------------------------------------------------------------


def _build(args) -> CodeSpec:
    if args.variant == MAIN:
        if args.d is None:
            raise InvalidInputError("the main construction needs -d")
        return build_main_construction(args.p, args.n, args.k, args.d)
    if args.d is not None:
        raise InvalidInputError("the simple construction fixes the repair degree per node; drop -d")
    return build_simple_construction(args.q, args.n, args.k)


def table_row(spec: CodeSpec) -> str:
    """One summary line per construction in the usual comparison-table form."""
    if spec.variant == MAIN:
        bw = cutset_bound(spec.d, spec.k, spec.l)
        return (f"repair bandwidth {_frac(bw)} = d*l/(d+1-k) | sub-packetization {spec.l} | "
                f"repair degree d={spec.d} | achieving cut-set bound: Yes")
    opt = [i for i, d in enumerate(spec.repair_degrees) if d is not None]
    parts = ", ".join(f"node {i}: {_frac(cutset_bound(spec.repair_degrees[i], spec.k, spec.l))}" for i in opt)
    return (f"repair bandwidth {parts} | sub-packetization {spec.l} | "
            f"repair degree d_i = p_i+k-1 | achieving cut-set bound: Yes (nodes {opt[0]}..{opt[-1]})")


def cmd_construct(args) -> int:
    spec = _build(args)
    obj = spec.to_json()
    if args.out:
        try:
            Path(args.out).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
        except OSError as exc:
            raise ClusterIOError(str(exc)) from None
    rows = [("variant", spec.variant), ("n", spec.n), ("k", spec.k), ("l", spec.l),
            ("axis degrees", ",".join(map(str, spec.tower.axis_degrees))), ("s", spec.tower.s)]
    if spec.variant == MAIN:
        rows.append(("cut-set bound", _frac(cutset_bound(spec.d, spec.k, spec.l))))
    else:
        for i, d in enumerate(spec.repair_degrees):
            if d is not None:
                rows.append((f"cut-set bound node {i} (d={d})", _frac(cutset_bound(d, spec.k, spec.l))))
    rows += [("trivial bandwidth", trivial_bandwidth(spec.k, spec.l)),
             ("lower bound on l", lower_bound_subpacketization(spec.k))]
    text = _table(rows) + "\n" + table_row(spec)
    if args.out:
        text += f"\nwrote {args.out}"
    _emit(args, {"spec": obj, "table_row": table_row(spec),
                 "lower_bound_l": lower_bound_subpacketization(spec.k)}, text)
    return EXIT_OK


# -- cluster commands -----------------------------------------------------------


def cmd_encode(args) -> int:
    spec = _load_spec(args.spec)
    try:
        data = Path(args.input).read_bytes()
    except OSError as exc:
        raise ClusterIOError(str(exc)) from None
    cluster = ClusterDir.create(args.cluster, spec, data, name=Path(args.input).name, force=args.force)
    _emit(args, {"cluster": str(cluster.root), "stripes": cluster.stripes, "shard_bytes": cluster.payload_bytes},
          f"encoded {len(data)} bytes into {cluster.stripes} stripes across {spec.n} nodes at {cluster.root}")
    return EXIT_OK


def cmd_decode(args) -> int:
    cluster = ClusterDir(args.cluster)
    data = cluster.decode(_node_list(args.nodes))
    try:
        Path(args.output).write_bytes(data)
    except OSError as exc:
        raise ClusterIOError(str(exc)) from None
    print(f"decoded {len(data)} bytes to {args.output}")
    return EXIT_OK


def cmd_fail(args) -> int:
    cluster = ClusterDir(args.cluster)
    cluster.fail(args.node)
    print(f"node {args.node} marked failed; shard removed")
    return EXIT_OK


def cmd_repair(args) -> int:
    cluster = ClusterDir(args.cluster)
    report: RepairReport = cluster.repair(args.node, _node_list(args.helpers), force=args.force,
                                          verify=args.verify, threads=args.threads)
    if args.report:
        try:
            Path(args.report).write_text(json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n")
        except OSError as exc:
            raise ClusterIOError(str(exc)) from None
    _emit(args, report.to_json(), report.to_text())
    if not report.checksum_ok:
        raise VerificationFailed(f"repaired shard {args.node} does not match the recorded checksum")
    return EXIT_OK


# -- verify ---------------------------------------------------------------------


def _helper_sets(spec: CodeSpec, i: int, every: bool) -> list[tuple[int, ...]]:
    need = required_helpers(spec, i)
    others = [j for j in range(spec.n) if j != i]
    if every:
        return list(itertools.combinations(others, need))
    return [tuple(others[:need])]


def verify_report(spec: CodeSpec, mode: str, nodes: Sequence[int] | None = None,
                  all_helper_sets: bool = False, sample: int | None = None, seed: int = 0) -> dict:
    """Run one verification suite and return JSON verdicts (``ok`` overall)."""
    rng = np.random.default_rng(seed)
    if nodes is None:
        nodes = [i for i in range(spec.n) if spec.repair_degrees[i] is not None]
    verdicts = []
    if mode == "mds":
        try:
            ok = verify_mds(spec, rng=rng, sample=sample)
        except RefusalError as exc:
            raise InvalidInputError(str(exc)) from None
        verdicts.append({"check": "mds", "ok": ok, "sampled_subsets": sample})
    elif mode == "gw":
        for i in nodes:
            for R in _helper_sets(spec, i, all_helper_sets):
                entry = {"node": i, "helpers": list(R)}
                try:
                    cert = verify(family_from_repair(spec, i, R))
                except NotARepairSchemeError as exc:
                    entry.update(ok=False, error=str(exc))
                    verdicts.append(entry)
                    continue
                cw = random_codeword(spec, rng)
                got, tr = repair(spec, i, R, cw)
                entry.update(bandwidth=cert.bandwidth, coordinate_rank=cert.coordinate_rank,
                             transcript_total=tr.total, repaired=got == cw[i],
                             ok=cert.bandwidth == tr.total and cert.coordinate_rank == spec.l and got == cw[i])
                verdicts.append(entry)
    elif mode == "lemma1":
        if spec.variant != MAIN:
            raise InvalidInputError("subspace-basis checks apply to the main construction")
        L = spec.l
        for i in nodes:
            rb = lemma1_basis(spec, i, check=False)
            pi = spec.tower.axis_degrees[i]
            di = rb.view.degree
            sr, tr_rank = rb.subspace_rank, rb.target_rank
            verdicts.append({"node": i, "subspace_rank": sr, "expected_subspace_rank": pi * di,
                             "target_rank": tr_rank, "expected_target_rank": L,
                             "ok": sr == pi * di and tr_rank == L})
    else:
        raise InvalidInputError(f"unknown verify mode {mode!r}")
    return {"mode": mode, "spec": repr(spec), "ok": all(v["ok"] for v in verdicts), "verdicts": verdicts}


def cmd_verify(args) -> int:
    if (args.cluster is None) == (args.spec is None):
        raise InvalidInputError("give exactly one of --cluster or --spec")
    spec = ClusterDir(args.cluster).spec if args.cluster else _load_spec(args.spec)
    report = verify_report(spec, args.mode, _node_list(args.nodes), args.all_helper_sets, args.sample, args.seed)
    lines = [f"{args.mode}: {'PASS' if report['ok'] else 'FAIL'}"]
    for v in report["verdicts"]:
        lines.append("  " + " ".join(f"{k}={v[k]}" for k in v))
    _emit(args, report, "\n".join(lines))
    if not report["ok"]:
        raise VerificationFailed(f"{args.mode} verification failed")
    return EXIT_OK


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rsrp", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def code_args(p: argparse.ArgumentParser, need_field: bool):
        p.add_argument("--variant", choices=VARIANT_CHOICES, default=MAIN)
        if need_field:
            p.add_argument("-p", type=int, default=2, help="base field of the main construction")
            p.add_argument("-q", type=int, default=5, help="base field of the simple construction")
        p.add_argument("-n", type=int, required=True)
        p.add_argument("-k", type=int, required=True)
        p.add_argument("-d", type=int, default=None)

    p = sub.add_parser("construct", help="build a code and write its JSON spec")
    code_args(p, True)
    p.add_argument("-o", "--out")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("bounds", help="print cut-set, trivial and sub-packetization bounds")
    code_args(p, False)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("encode", help="encode a file into a cluster directory")
    p.add_argument("spec")
    p.add_argument("input")
    p.add_argument("cluster")
    p.add_argument("--force", action="store_true", help="overwrite a non-empty cluster directory")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="rebuild the original file from k shards")
    p.add_argument("cluster")
    p.add_argument("output")
    p.add_argument("--nodes", help="comma-separated shard indices to use")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("fail", help="delete a node's shard")
    p.add_argument("cluster")
    p.add_argument("node", type=int)
    p.set_defaults(func=cmd_fail)

    p = sub.add_parser("repair", help="regenerate a failed node from helper traces")
    p.add_argument("cluster")
    p.add_argument("node", type=int)
    p.add_argument("--helpers", help="comma-separated helper indices (default: first live nodes)")
    p.add_argument("--report", help="write the JSON report here")
    p.add_argument("--force", action="store_true", help="rebuild a node that has not failed")
    p.add_argument("--verify", action="store_true", help="cross-check each stripe by erasure decoding")
    p.add_argument("--threads", type=int, default=None, help="worker count (default: RSRP_THREADS or CPU count)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_repair)

    p = sub.add_parser("verify", help="run mds, gw or lemma1 checks")
    p.add_argument("--cluster")
    p.add_argument("--spec")
    p.add_argument("--mode", choices=("mds", "gw", "lemma1"), required=True)
    p.add_argument("--nodes", help="comma-separated nodes (default: every node with an optimal scheme)")
    p.add_argument("--all-helper-sets", action="store_true")
    p.add_argument("--sample", type=int, default=None, help="check this many random k-subsets (mds)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)
    return ap



def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (VerificationFailed, NotARepairSchemeError, InternalInconsistencyError) as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (ClusterIOError, CorruptionError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (InvalidInputError, RSRPError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
