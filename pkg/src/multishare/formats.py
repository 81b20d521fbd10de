"""File formats: JSON schemas for topologies, shares, manifests and
scenarios, plus canonical serialization helpers.

Field elements are lowercase big-endian hex. All JSON emitted through
canonical_json is byte-stable (sorted keys, fixed separators).
"""

from __future__ import annotations

import hashlib
import json
from typing import Dict, List

from .errors import CorruptData
from .field import FieldElement
from .protocol import LinkKind, NetworkSpec, NodeShare, Topology

FORMAT_VERSION = 1

# User-supplied moduli below this are rejected at the file boundary;
# in-process callers may still build small-field topologies for analysis.
MIN_USER_MODULUS = 257


def canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True,
                      separators=(",", ":")).encode("utf-8")


def topology_to_dict(topology: Topology) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "modulus": format(topology.modulus, "x"),
        "outer_degree": topology.outer_degree,
        "networks": [
            {
                "id": net.id,
                "node_count": net.node_count,
                "inner_degree": net.inner_degree,
                "link": net.link.value,
                "mother": i == topology.mother_index,
            }
            for i, net in enumerate(topology.networks)
        ],
    }


def topology_from_dict(data: dict, min_modulus: int = 0) -> Topology:
    try:
        if data.get("format_version") != FORMAT_VERSION:
            raise CorruptData(
                f"unsupported format_version {data.get('format_version')!r}")
        modulus = int(data["modulus"], 16)
        nets = data["networks"]
        mothers = [i for i, n in enumerate(nets) if n.get("mother")]
        if len(mothers) != 1:
            raise CorruptData("exactly one network must be the mother")
        specs = [NetworkSpec(id=n["id"], node_count=int(n["node_count"]),
                             inner_degree=int(n["inner_degree"]),
                             link=LinkKind(n["link"]))
                 for n in nets]
        outer = int(data["outer_degree"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptData(f"malformed topology file: {exc}") from exc
    if modulus < min_modulus:
        raise CorruptData(f"modulus must be at least {min_modulus}")
    try:
        return Topology(modulus=modulus, networks=tuple(specs),
                        mother_index=mothers[0], outer_degree=outer)
    except ValueError as exc:
        raise CorruptData(f"invalid topology: {exc}") from exc


def topology_digest(topology: Topology) -> str:
    return hashlib.sha256(
        canonical_json(topology_to_dict(topology))).hexdigest()


def share_to_dict(share: NodeShare, modulus: int) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "modulus": format(modulus, "x"),
        "network_id": share.network_id,
        "node_index": share.node_index,
        "epoch": share.epoch,
        "chunk_count": len(share.values),
        "values": [v.to_hex() for v in share.values],
    }


def share_from_dict(data: dict) -> NodeShare:
    try:
        if data.get("format_version") != FORMAT_VERSION:
            raise CorruptData(
                f"unsupported format_version {data.get('format_version')!r}")
        modulus = int(data["modulus"], 16)
        values = [FieldElement.from_hex(v, modulus) for v in data["values"]]
        if len(values) != int(data["chunk_count"]):
            raise CorruptData("chunk_count does not match values")
        return NodeShare(network_id=data["network_id"],
                         node_index=int(data["node_index"]),
                         epoch=int(data["epoch"]),
                         values=tuple(values))
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptData(f"malformed share file: {exc}") from exc


def manifest_dict(topology: Topology, chunk_count: int, epoch: int,
                  stale: List[str]) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "chunk_count": chunk_count,
        "epoch": epoch,
        "topology_digest": topology_digest(topology),
        "stale": sorted(stale),
    }


def shares_by_network(shares: List[NodeShare]) -> Dict[str, List[NodeShare]]:
    out: Dict[str, List[NodeShare]] = {}
    for s in shares:
        out.setdefault(s.network_id, []).append(s)
    return out
