"""Deterministic in-process simulation: owner, node stores, links, and
the two adversary models (whole-network compromise, harvest-then-decrypt).

Time is a logical event sequence. ITS links record nothing; classical
links record every payload verbatim. Compromise is sticky: a compromised
node leaks its current store and every later write. Authentication is
assumed perfect, so no man-in-the-middle events exist.
"""

from __future__ import annotations

import struct
import json
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .errors import Infeasible, StateError
from .field import FieldElement, deterministic_rng
from .formats import canonical_json, topology_from_dict, topology_to_dict
from .protocol import (Access, FunctionalSpace, LinkKind, NodeShare,
                       Topology, apply_node_refresh, deal, decode_secret,
                       encode_secret, refresh)
from . import formats

STATE_MAGIC = b"MSS1"

EVENT_KINDS = frozenset({
    "deal", "refresh", "compromise_network", "compromise_node",
    "fail_node", "attempt_reconstruct", "hndl_decrypt_classical"})


@dataclass
class SimNode:
    network_id: str
    node_index: int
    store: Optional[NodeShare] = None
    alive: bool = True
    compromised: bool = False
    stale: bool = False


@dataclass(frozen=True)
class Scenario:
    topology: Topology
    secret: bytes
    schedule: Tuple[dict, ...]

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        try:
            topology = topology_from_dict(data["topology"])
            secret = bytes.fromhex(data["secret_hex"])
            schedule = tuple(data["schedule"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed scenario: {exc}") from exc
        for ev in schedule:
            if not isinstance(ev, dict) or ev.get("event") not in EVENT_KINDS:
                raise ValueError(f"unknown event {ev!r}")
        return cls(topology=topology, secret=secret, schedule=schedule)


class Simulation:
    """Mutable world state for one scenario run."""

    def __init__(self, topology: Topology, secret: bytes, seed: int = 0):
        self.topology = topology
        self.secret = secret
        self.rng = deterministic_rng(seed)
        self.epoch = 0
        self.chunk_count = 0
        self.dealt = False
        self.hndl = False
        self.nodes: Dict[Tuple[str, int], SimNode] = {}
        for net in topology.networks:
            for j in range(1, net.node_count + 1):
                self.nodes[(net.id, j)] = SimNode(net.id, j)
        # Per-network recorded payloads; ITS links stay empty.
        self.transcripts: Dict[str, List[dict]] = {
            net.id: [] for net in topology.networks}
        # key -> captured values; key is ("share", net, idx, epoch) or
        # ("delta", net, idx, round).
        self.adversary: Dict[tuple, Tuple[int, ...]] = {}

    # -- owner actions ----------------------------------------------------

    def owner_store(self) -> dict:
        """Deal the secret and deliver every share over its link."""
        chunks = encode_secret(self.secret, self.topology.modulus)
        self.chunk_count = len(chunks)
        dealt = deal(chunks, self.topology, self.rng)
        delivered = 0
        for net in self.topology.networks:
            classical = net.link is LinkKind.CLASSICAL
            for share in dealt[net.id]:
                node = self.nodes[(net.id, share.node_index)]
                node.store = share
                node.stale = False
                delivered += 1
                if classical:
                    self.transcripts[net.id].append({
                        "kind": "share", "node": share.node_index,
                        "epoch": 0,
                        "values": [v.value for v in share.values]})
                if node.compromised:
                    self._leak_store(node)
        self.epoch = 0
        self.dealt = True
        return {"delivered": delivered, "chunks": self.chunk_count}

    def owner_refresh(self) -> dict:
        """One proactive refresh round; dead nodes miss it and go stale."""
        if not self.dealt:
            raise Infeasible("nothing dealt yet")
        deltas = refresh(self.topology, self.chunk_count, self.epoch,
                         self.rng)
        round_no = self.epoch + 1
        applied, stale = 0, []
        for net in self.topology.networks:
            classical = net.link is LinkKind.CLASSICAL
            for d in deltas[net.id]:
                if classical:
                    self.transcripts[net.id].append({
                        "kind": "delta", "node": d.node_index,
                        "round": round_no,
                        "values": [v.value for v in d.values]})
                node = self.nodes[(net.id, d.node_index)]
                if not node.alive:
                    node.stale = True
                    stale.append(f"{net.id}/{d.node_index}")
                    continue
                if node.store is not None and node.store.epoch == self.epoch:
                    node.store = apply_node_refresh(node.store, d)
                    applied += 1
                    if node.compromised:
                        self._leak_store(node)
        self.epoch = round_no
        return {"applied": applied, "stale": sorted(stale),
                "epoch": self.epoch}

    def owner_reconstruct(self, selection: Optional[List[Tuple[str, int]]]
                          = None) -> bytes:
        """Decode from live current-epoch nodes.

        Auto selection takes the mother quorum plus the smallest-quorum
        daughters; an explicit selection is used as-is.
        """
        if not self.dealt:
            raise Infeasible("nothing dealt yet")
        usable: Dict[str, List[NodeShare]] = {}
        for node in self.nodes.values():
            if (node.alive and not node.stale and node.store is not None
                    and node.store.epoch == self.epoch):
                usable.setdefault(node.network_id, []).append(node.store)
        if selection is not None:
            wanted = set(map(tuple, selection))
            usable = {nid: [s for s in lst
                            if (nid, s.node_index) in wanted]
                      for nid, lst in usable.items()}
        else:
            usable = self._auto_select(usable)
        chunks = formats.shares_by_network(
            [s for lst in usable.values() for s in lst])
        values = _reconstruct_chunks(chunks, self.topology)
        return decode_secret(values)

    def _auto_select(self, usable):
        topo = self.topology
        picked: Dict[str, List[NodeShare]] = {}
        mother = topo.mother
        got = usable.get(mother.id, [])
        if len(got) >= mother.inner_degree + 1:
            picked[mother.id] = sorted(
                got, key=lambda s: s.node_index)[:mother.inner_degree + 1]
        candidates = [(n.inner_degree + 1, n.id) for n in topo.daughters()
                      if len(usable.get(n.id, [])) >= n.inner_degree + 1]
        for quorum, nid in sorted(candidates)[:topo.outer_degree]:
            picked[nid] = sorted(usable[nid],
                                 key=lambda s: s.node_index)[:quorum]
        # Fall through with whatever was picked; reconstruction reports
        # precisely what is missing.
        return picked or usable

    # -- adversary bookkeeping --------------------------------------------

    def _leak_store(self, node: SimNode) -> None:
        share = node.store
        key = ("share", node.network_id, node.node_index, share.epoch)
        self.adversary[key] = tuple(v.value for v in share.values)

    def compromise_node(self, network_id: str, node_index: int) -> None:
        node = self.nodes[(network_id, node_index)]
        node.compromised = True
        if node.store is not None:
            self._leak_store(node)

    def compromise_network(self, network_id: str) -> None:
        for net in self.topology.networks:
            if net.id == network_id:
                for j in range(1, net.node_count + 1):
                    self.compromise_node(network_id, j)
                return
        raise ValueError(f"unknown network {network_id}")

    def fail_node(self, network_id: str, node_index: int) -> None:
        self.nodes[(network_id, node_index)].alive = False

    def adversary_rows(self) -> List[Tuple[tuple, List[int], Tuple[int, ...]]]:
        """(key, functional row, captured values) for everything the
        adversary holds; transcripts count only after the HNDL switch."""
        space = FunctionalSpace(self.topology, rounds=self.epoch)
        out = []
        for key in sorted(self.adversary):
            kind, nid, idx, e = key
            out.append((key, space.share_row(nid, idx, e),
                        self.adversary[key]))
        if self.hndl:
            for nid in sorted(self.transcripts):
                for entry in self.transcripts[nid]:
                    if entry["kind"] == "share":
                        key = ("share", nid, entry["node"], entry["epoch"])
                        row = space.share_row(nid, entry["node"],
                                              entry["epoch"])
                    else:
                        key = ("delta", nid, entry["node"], entry["round"])
                        row = space.delta_row(nid, entry["node"],
                                              entry["round"])
                    out.append((key, row, tuple(entry["values"])))
        return out

    def adversary_verdict(self) -> Tuple[Access, Optional[bytes]]:
        """Rank verdict; on Reconstructs, also the recovered plaintext."""
        if not self.dealt:
            return Access.NO_INFORMATION, None
        q = self.topology.modulus
        space = FunctionalSpace(self.topology, rounds=self.epoch)
        entries = self.adversary_rows()
        from .field import express_over_rows
        combo = express_over_rows([row for _, row, _ in entries],
                                  space.secret_functional(), q)
        if combo is None:
            return Access.NO_INFORMATION, None
        chunks = []
        for i in range(self.chunk_count):
            acc = 0
            for c, (_, _, vals) in zip(combo, entries):
                acc = (acc + c * vals[i]) % q
            chunks.append(FieldElement(acc, q))
        return Access.RECONSTRUCTS, decode_secret(chunks)

    # -- persistence ------------------------------------------------------

    def to_state(self) -> dict:
        return {
            "version": 1,
            "topology": topology_to_dict(self.topology),
            "secret": self.secret.hex(),
            "epoch": self.epoch,
            "chunk_count": self.chunk_count,
            "dealt": self.dealt,
            "hndl": self.hndl,
            "rng_state": _state_to_json(self.rng.getstate()),
            "nodes": [
                {
                    "network": n.network_id, "index": n.node_index,
                    "alive": n.alive, "compromised": n.compromised,
                    "stale": n.stale,
                    "store": None if n.store is None else {
                        "epoch": n.store.epoch,
                        "values": [v.to_hex() for v in n.store.values]},
                }
                for key, n in sorted(self.nodes.items())
            ],
            "transcripts": self.transcripts,
            "adversary": [
                {"key": list(key), "values": [format(v, "x") for v in vals]}
                for key, vals in sorted(self.adversary.items())
            ],
        }

    @classmethod
    def from_state(cls, state: dict) -> "Simulation":
        try:
            if state["version"] != 1:
                raise StateError(f"unsupported version {state['version']!r}")
            topology = topology_from_dict(state["topology"])
            sim = cls(topology, bytes.fromhex(state["secret"]))
            sim.epoch = int(state["epoch"])
            sim.chunk_count = int(state["chunk_count"])
            sim.dealt = bool(state["dealt"])
            sim.hndl = bool(state["hndl"])
            sim.rng.setstate(_state_from_json(state["rng_state"]))
            q = topology.modulus
            for rec in state["nodes"]:
                node = sim.nodes[(rec["network"], int(rec["index"]))]
                node.alive = bool(rec["alive"])
                node.compromised = bool(rec["compromised"])
                node.stale = bool(rec["stale"])
                if rec["store"] is not None:
                    node.store = NodeShare(
                        network_id=node.network_id,
                        node_index=node.node_index,
                        epoch=int(rec["store"]["epoch"]),
                        values=tuple(FieldElement.from_hex(v, q)
                                     for v in rec["store"]["values"]))
            sim.transcripts = {nid: list(entries) for nid, entries
                               in state["transcripts"].items()}
            sim.adversary = {
                tuple(rec["key"]): tuple(int(v, 16) for v in rec["values"])
                for rec in state["adversary"]}
            return sim
        except (KeyError, TypeError, ValueError) as exc:
            raise StateError(f"corrupt state: {exc}") from exc

    def save_state(self, path) -> None:
        payload = canonical_json(self.to_state())
        with open(path, "wb") as fh:
            fh.write(STATE_MAGIC + struct.pack(">Q", len(payload)) + payload)


def load_state(path) -> Simulation:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != STATE_MAGIC:
        raise StateError("bad magic; not a simulation state file")
    if len(blob) < 12:
        raise StateError("truncated state file")
    (length,) = struct.unpack(">Q", blob[4:12])
    payload = blob[12:]
    if len(payload) != length:
        raise StateError(
            f"payload length {len(payload)} does not match header {length}")
    try:
        state = json.loads(payload.decode("utf-8"))
    except ValueError as exc:
        raise StateError(f"undecodable state payload: {exc}") from exc
    return Simulation.from_state(state)


def _state_to_json(state):
    version, internal, gauss = state
    return [version, list(internal), gauss]


def _state_from_json(data):
    version, internal, gauss = data
    return (version, tuple(internal), gauss)


def _reconstruct_chunks(shares, topology):
    from .protocol import reconstruct
    return reconstruct(shares, topology)


# ---------------------------------------------------------------------------


def run_scenario(scenario: Scenario, seed: int = 0,
                 sim: Optional[Simulation] = None) -> dict:
    """Apply the schedule and report per-event outcomes plus final
    adversary and availability verdicts. Deterministic per (scenario, seed).
    """
    if sim is None:
        sim = Simulation(scenario.topology, scenario.secret, seed)
    events_out = []
    for ev in scenario.schedule:
        kind = ev["event"]
        try:
            if kind == "deal":
                outcome = sim.owner_store()
            elif kind == "refresh":
                outcome = sim.owner_refresh()
            elif kind == "compromise_network":
                sim.compromise_network(ev["network"])
                outcome = {"compromised": ev["network"]}
            elif kind == "compromise_node":
                sim.compromise_node(ev["network"], int(ev["node"]))
                outcome = {"compromised": f"{ev['network']}/{ev['node']}"}
            elif kind == "fail_node":
                sim.fail_node(ev["network"], int(ev["node"]))
                outcome = {"failed": f"{ev['network']}/{ev['node']}"}
            elif kind == "hndl_decrypt_classical":
                sim.hndl = True
                outcome = {"hndl": True}
            elif kind == "attempt_reconstruct":
                actor = ev.get("actor", "owner")
                if actor == "owner":
                    try:
                        data = sim.owner_reconstruct()
                        outcome = {"actor": "owner", "result": "ok",
                                   "matches": data == sim.secret}
                    except Infeasible as exc:
                        outcome = {"actor": "owner", "result": "infeasible",
                                   "missing": str(exc)}
                else:
                    verdict, data = sim.adversary_verdict()
                    outcome = {"actor": "adversary",
                               "verdict": verdict.value,
                               "matches": (None if data is None
                                           else data == sim.secret)}
            else:
                raise ValueError(f"unknown event {kind!r}")
        except KeyError as exc:
            raise ValueError(f"malformed event {ev!r}: {exc}") from exc
        events_out.append({"event": kind, "outcome": outcome})
    verdict, recovered = sim.adversary_verdict()
    try:
        owner = sim.owner_reconstruct() == sim.secret if sim.dealt else False
        owner_detail = "ok" if owner else "mismatch"
    except Infeasible as exc:
        owner, owner_detail = False, str(exc)
    return {
        "seed": seed,
        "epoch": sim.epoch,
        "events": events_out,
        "adversary_verdict": verdict.value,
        "adversary_recovered_secret": (None if recovered is None
                                       else recovered == sim.secret),
        "owner_available": owner,
        "owner_detail": owner_detail,
    }
