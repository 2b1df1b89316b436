"""Entanglement distribution by swap-assisted teleportation with XOR-coded
classical messaging.

One round moves one qubit state from every transmitter Tk to its receiver
Rk.  No quantum link Tk--Rk exists, so a neighbor receiver (the assister)
swaps entanglement sourced at M2 onto Tk's own Bell pair; Tk then teleports
its payload and the 2-bit teleport messages cross the M1--M2 bottleneck as
a single XOR-combined message that every receiver can invert locally.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Protocol, Sequence

import numpy as np

from .qstate import QubitId, StateRegistry, X, Z
from .simnet import QNetwork, TraceEntry
from .topology import NodeId

SUCCESS_FIDELITY = 1.0 - 1e-9


class RotationCodec(Protocol):
    """Anything that can wrap/unwrap a payload state with a rotation gate."""

    def gate(self): ...

    def inverse_gate(self): ...


@dataclass(frozen=True)
class TeleportMessage:
    """The two classical bits of a Bell measurement (b1 from the H side)."""

    b1: int
    b2: int

    def __post_init__(self) -> None:
        if self.b1 not in (0, 1) or self.b2 not in (0, 1):
            raise ValueError(f"teleport bits must be 0/1, got ({self.b1}, {self.b2})")

    @property
    def bits(self) -> str:
        return f"{self.b1}{self.b2}"

    @classmethod
    def from_bits(cls, bits: str) -> "TeleportMessage":
        if len(bits) != 2:
            raise ValueError(f"teleport message is exactly 2 bits, got {bits!r}")
        return cls(int(bits[0]), int(bits[1]))

    def __xor__(self, other: "TeleportMessage") -> "TeleportMessage":
        return TeleportMessage(self.b1 ^ other.b1, self.b2 ^ other.b2)


def xor_combine(messages: Sequence[TeleportMessage]) -> TeleportMessage:
    """Bitwise XOR of all messages; this is what crosses the bottleneck."""
    if not messages:
        raise ValueError("cannot combine zero messages")
    return reduce(lambda a, b: a ^ b, messages)


def xor_recover(combined: TeleportMessage, others: Sequence[TeleportMessage]) -> TeleportMessage:
    """Invert the combination: XOR out every message that is not yours."""
    return reduce(lambda a, b: a ^ b, others, combined)


def assign_swappers(n_pairs: int) -> dict[int, NodeId]:
    """Assister for each pair k: the cyclically previous receiver.

    A_k = R_{k-1} and A_1 = R_N, so every assister differs from its pair's
    own receiver and is quantum-connected to the pair's transmitter.
    """
    if n_pairs < 2:
        raise ValueError("swap assignment needs at least 2 transceiver pairs")
    return {k: NodeId.receiver(k - 1 if k > 1 else n_pairs) for k in range(1, n_pairs + 1)}


def entanglement_swap(reg: StateRegistry, phi_half: QubitId, psi_half: QubitId) -> TeleportMessage:
    """Bell-measure the source half against the transmitter-pair half.

    Teleports psi_half's entanglement onto the transmitter's kept qubit;
    the returned bits must be applied there as corrections.
    """
    b1, b2 = reg.bell_measure(psi_half, phi_half)
    return TeleportMessage(b1, b2)


def teleport_encode(reg: StateRegistry, state: QubitId, half: QubitId) -> TeleportMessage:
    """Bell-measure payload against the local pair half; consumes both."""
    b1, b2 = reg.bell_measure(state, half)
    return TeleportMessage(b1, b2)


def teleport_decode(reg: StateRegistry, half: QubitId, msg: TeleportMessage) -> QubitId:
    """Apply the conditional corrections (X if b2, then Z if b1) to the held half."""
    if msg.b2:
        reg.apply_gate(X, [half])
    if msg.b1:
        reg.apply_gate(Z, [half])
    return half


def _tag(prefix: str, k: int, role: str = "") -> str:
    return f"{prefix}{k}.{role}" if role else f"{prefix}{k}"


def distribute_entanglements(net: QNetwork, reg: StateRegistry) -> dict[int, tuple[QubitId, QubitId]]:
    """Phase one: leave every (Tk, Rk) holding an exact shared Bell pair.

    Per pair: Tk makes a pair and sends one half to the assister; M2 makes a
    pair and sends its halves to the assister and to Rk; the assister
    Bell-measures its two halves and sends the 2 correction bits straight to
    Tk, which applies them.  The M1--M2 bottleneck is never used here.
    """
    n = net.topology.n_pairs
    swappers = assign_swappers(n)
    source = NodeId.source()
    for k in range(1, n + 1):
        t = NodeId.transmitter(k)
        keep, give = reg.create_bell_pair()
        net.deposit(t, _tag("phi", k, "keep"), keep)
        net.deposit(t, _tag("phi", k, "give"), give)
        net.send_qubit(t, swappers[k], give, _tag("phi", k, "swap"))
        left, right = reg.create_bell_pair()
        net.deposit(source, _tag("psi", k, "assist"), left)
        net.deposit(source, _tag("psi", k, "own"), right)
        net.send_qubit(source, swappers[k], left, _tag("psi", k, "swap"))
        net.send_qubit(source, NodeId.receiver(k), right, _tag("psi", k, "own"))
    net.run_until_idle()

    for k in range(1, n + 1):
        assister = swappers[k]
        phi_half = net.take(assister, _tag("phi", k, "swap"))
        psi_half = net.take(assister, _tag("psi", k, "swap"))
        msg = entanglement_swap(reg, phi_half, psi_half)
        net.send_classical(assister, NodeId.transmitter(k), msg.bits, _tag("swap", k))
    net.run_until_idle()

    pairs: dict[int, tuple[QubitId, QubitId]] = {}
    for k in range(1, n + 1):
        t = NodeId.transmitter(k)
        msg = TeleportMessage.from_bits(net.inventories[t].message(_tag("swap", k)).bits)
        kept = net.holdings(t)[_tag("phi", k, "keep")]
        teleport_decode(reg, kept, msg)
        pairs[k] = (kept, net.holdings(NodeId.receiver(k))[_tag("psi", k, "own")])
    return pairs


@dataclass
class RoundResult:
    fidelities: list[float] = field(default_factory=list)
    successes: list[bool] = field(default_factory=list)
    all_success: bool = False
    peak_usage: int = 0        # sum over nodes of per-node peak holdings
    peak_alloc: int = 0        # network-wide simultaneous live qubits
    trace: list[TraceEntry] = field(default_factory=list)
    distribution_events: int = 0
    error: str | None = None


def run_round(net: QNetwork, reg: StateRegistry,
              input_states: Sequence[Sequence[complex]],
              rotations: Sequence[RotationCodec | None] | None = None) -> RoundResult:
    """One full protocol round on a fresh/reset network.

    input_states: one payload state per pair.  rotations: optional per-pair
    codec applied at the transmitter and inverted at the receiver.  A pair
    succeeds when the receiver-side fidelity reaches 1 within 1e-9.
    """
    n = net.topology.n_pairs
    if len(input_states) != n:
        raise ValueError(f"need {n} input states, got {len(input_states)}")
    if rotations is not None and len(rotations) != n:
        raise ValueError(f"need {n} rotation entries, got {len(rotations)}")
    result = RoundResult()
    try:
        distribute_entanglements(net, reg)
        result.distribution_events = len(net.trace)

        relay = NodeId.relay()
        source = NodeId.source()
        for k in range(1, n + 1):
            t = NodeId.transmitter(k)
            payload = reg.alloc_qubit(np.asarray(input_states[k - 1], dtype=complex))
            net.deposit(t, _tag("eta", k), payload)
            if rotations is not None and rotations[k - 1] is not None:
                reg.apply_gate(rotations[k - 1].gate(), [payload])
            state_q = net.take(t, _tag("eta", k))
            kept = net.take(t, _tag("phi", k, "keep"))
            msg = teleport_encode(reg, state_q, kept)
            net.broadcast_classical(t, msg.bits, _tag("B", k))
        net.run_until_idle()

        tele_msgs = net.inventories[relay].messages_tagged("B")
        combined = xor_combine([TeleportMessage.from_bits(m.bits) for m in tele_msgs])
        net.send_classical(relay, source, combined.bits, "combined")
        net.run_until_idle()

        net.broadcast_classical(source, combined.bits, "combined", exclude=[relay])
        net.run_until_idle()

        for k in range(1, n + 1):
            r = NodeId.receiver(k)
            inbox = net.inventories[r]
            others = [TeleportMessage.from_bits(m.bits) for m in inbox.messages_tagged("B")]
            total = TeleportMessage.from_bits(inbox.message("combined").bits)
            own = xor_recover(total, others)
            half = net.take(r, _tag("psi", k, "own"))
            teleport_decode(reg, half, own)
            if rotations is not None and rotations[k - 1] is not None:
                reg.apply_gate(rotations[k - 1].inverse_gate(), [half])
            fid = reg.fidelity(half, np.asarray(input_states[k - 1], dtype=complex))
            result.fidelities.append(fid)
            result.successes.append(fid >= SUCCESS_FIDELITY)
            reg.release(half)
        result.all_success = all(result.successes)
    except Exception as exc:  # a failed round is a failed trial, with diagnostic
        result.error = f"{type(exc).__name__}: {exc}"
        result.all_success = False
    result.peak_usage = net.peak_usage_total()
    result.peak_alloc = reg.peak_alloc
    result.trace = list(net.trace)
    return result
