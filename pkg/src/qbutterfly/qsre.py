"""Key-driven rotation encoding of teleported states, and the insider
eavesdropping attack it defends against.

A key chunk of 2+D bits picks a rotation: bit 0 chooses the axis (0 -> X,
1 -> Y), bit 1 the direction, and the remaining D bits (MSB first) a
magnitude d, giving angle pi / (sign * (1 + d)).  The transmitter rotates
the payload before teleporting; the intended receiver, holding the same
key, applies the inverse.  An eavesdropper who captured the raw teleported
state must guess among 2 * 2 * 2**D rotations.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .iedtc import (
    SUCCESS_FIDELITY,
    TeleportMessage,
    assign_swappers,
    entanglement_swap,
    teleport_decode,
    teleport_encode,
    xor_combine,
    xor_recover,
)
from .qstate import Gate, QubitId, StateRegistry, random_state, rx, ry
from .simnet import QNetwork
from .topology import NodeId

EAVESDROP_THRESHOLD = 0.99


class Axis(enum.Enum):
    X = "x"
    Y = "y"


class SignConvention(enum.Enum):
    """How the direction bit maps to the rotation sign.

    FORMULA: direction bit 1 means negative (sign = (-1)**bit).
    EXAMPLE: the opposite reading (direction bit 0 means negative); kept
    selectable because the two readings are both defensible and differ only
    in sign, which has no effect on guessing difficulty.
    """

    FORMULA = "formula"
    EXAMPLE = "example"


def rotation_angle(sign_bit: int, magnitude: int,
                   convention: SignConvention = SignConvention.FORMULA) -> float:
    if sign_bit not in (0, 1):
        raise ValueError(f"sign bit must be 0/1, got {sign_bit}")
    if magnitude < 0:
        raise ValueError(f"magnitude must be non-negative, got {magnitude}")
    negative = (sign_bit == 1) if convention is SignConvention.FORMULA else (sign_bit == 0)
    sign = -1.0 if negative else 1.0
    return sign * math.pi / (1 + magnitude)


@dataclass(frozen=True)
class RotationSpec:
    axis: Axis
    sign_bit: int
    magnitude: int
    angle: float

    @classmethod
    def from_parts(cls, axis: Axis, sign_bit: int, magnitude: int,
                   convention: SignConvention = SignConvention.FORMULA) -> "RotationSpec":
        return cls(axis, sign_bit, magnitude, rotation_angle(sign_bit, magnitude, convention))

    @classmethod
    def from_bits(cls, chunk: str, convention: SignConvention = SignConvention.FORMULA) -> "RotationSpec":
        if len(chunk) < 3 or any(c not in "01" for c in chunk):
            raise ValueError(f"rotation chunk needs >= 3 bits of 0/1, got {chunk!r}")
        axis = Axis.Y if chunk[0] == "1" else Axis.X
        sign_bit = int(chunk[1])
        magnitude = int(chunk[2:], 2)
        return cls.from_parts(axis, sign_bit, magnitude, convention)

    def gate(self) -> Gate:
        return rx(self.angle) if self.axis is Axis.X else ry(self.angle)

    def inverse_gate(self) -> Gate:
        return rx(-self.angle) if self.axis is Axis.X else ry(-self.angle)

    def same_rotation(self, other: "RotationSpec") -> bool:
        return (self.axis is other.axis and self.sign_bit == other.sign_bit
                and self.magnitude == other.magnitude)


@dataclass(frozen=True)
class PrivateKey:
    """Shared secret bit string, consumed in chunks of 2 + magnitude_bits."""

    bits: str
    magnitude_bits: int

    def __post_init__(self) -> None:
        if self.magnitude_bits < 1:
            raise ValueError("magnitude_bits must be >= 1")
        if any(c not in "01" for c in self.bits):
            raise ValueError("key must consist of 0/1 characters")
        if len(self.bits) < self.chunk_width:
            raise ValueError(f"key holds no complete chunk of width {self.chunk_width}")

    @property
    def chunk_width(self) -> int:
        return 2 + self.magnitude_bits

    @property
    def num_chunks(self) -> int:
        return len(self.bits) // self.chunk_width

    def chunk(self, i: int) -> str:
        if not (0 <= i < self.num_chunks):
            raise ValueError(f"chunk index {i} out of range (key holds {self.num_chunks})")
        w = self.chunk_width
        return self.bits[i * w:(i + 1) * w]


def derive_rotation(key: PrivateKey, i: int,
                    convention: SignConvention = SignConvention.FORMULA) -> RotationSpec:
    """Rotation for the i-th message under this key."""
    return RotationSpec.from_bits(key.chunk(i), convention)


def encode_state(reg: StateRegistry, q: QubitId, spec: RotationSpec) -> None:
    """Rotate the payload; goes through the normal gate path (noise included)."""
    reg.apply_gate(spec.gate(), [q])


def decode_state(reg: StateRegistry, q: QubitId, spec: RotationSpec) -> None:
    """Inverse rotation at the receiving end."""
    reg.apply_gate(spec.inverse_gate(), [q])


def random_guess(magnitude_bits: int, rng: np.random.Generator,
                 convention: SignConvention = SignConvention.FORMULA) -> RotationSpec:
    """Uniform draw over the 2 * 2 * 2**magnitude_bits possible rotations."""
    if magnitude_bits < 1:
        raise ValueError("magnitude_bits must be >= 1")
    axis = Axis.Y if int(rng.integers(2)) else Axis.X
    sign_bit = int(rng.integers(2))
    magnitude = int(rng.integers(2 ** magnitude_bits))
    return RotationSpec.from_parts(axis, sign_bit, magnitude, convention)


def load_key_file(path: str) -> str:
    """Read a key file: '0'/'1' characters, whitespace/newlines ignored."""
    with open(path, "r", encoding="ascii") as fh:
        bits = "".join(fh.read().split())
    if not bits:
        raise ValueError(f"key file {path!r} contains no bits")
    if any(c not in "01" for c in bits):
        raise ValueError(f"key file {path!r} contains non-bit characters")
    return bits


@dataclass
class AttackStats:
    trials: int
    eavesdrop_successes: int
    legit_successes: int

    @property
    def eavesdrop_rate(self) -> float:
        return self.eavesdrop_successes / self.trials

    @property
    def legit_rate(self) -> float:
        return self.legit_successes / self.trials


def run_attack(net: QNetwork, reg: StateRegistry, magnitude_bits: int,
               use_qsre: bool, trials: int, seed: int, *,
               key: PrivateKey | None = None,
               convention: SignConvention = SignConvention.FORMULA,
               threshold: float = EAVESDROP_THRESHOLD) -> AttackStats:
    """Insider attack on pair 1: the assisting receiver swaps in its own pair.

    The malicious assister Bell-measures its own pair half against the
    transmitter's half (so the transmitter unknowingly shares a pair with
    the attacker) and discards the half sourced at M2, leaving the real
    receiver with a decoy.  After the broadcast the attacker applies the
    teleport corrections it can read directly and, when rotation encoding is
    on, a uniformly guessed counter-rotation.  Eavesdrop success means
    fidelity >= threshold against the original payload; legitimate success
    keeps the protocol's own exactness bar.
    """
    n = net.topology.n_pairs
    if n < 2:
        raise ValueError("the attack needs at least 2 transceiver pairs")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if magnitude_bits < 1:
        raise ValueError("magnitude_bits must be >= 1")
    if key is not None and key.magnitude_bits != magnitude_bits:
        raise ValueError("key chunk width does not match magnitude_bits")
    rng = np.random.default_rng(seed)
    chunk_width = 2 + magnitude_bits
    eve_hits = 0
    legit_hits = 0
    for t in range(trials):
        net.reset()
        payload_ref = random_state(rng)
        if use_qsre:
            if key is not None:
                spec = derive_rotation(key, t % key.num_chunks, convention)
            else:
                bits = "".join(str(b) for b in rng.integers(0, 2, size=chunk_width))
                spec = derive_rotation(PrivateKey(bits, magnitude_bits), 0, convention)
        else:
            spec = None
        eve_qubit, legit_qubit = _run_attacked_round(net, reg, payload_ref, spec)

        legit_fid = reg.fidelity(legit_qubit, payload_ref)
        if legit_fid >= SUCCESS_FIDELITY:
            legit_hits += 1
        if use_qsre:
            guess = random_guess(magnitude_bits, rng, convention)
            reg.apply_gate(guess.inverse_gate(), [eve_qubit])
        eve_fid = reg.fidelity(eve_qubit, payload_ref)
        if eve_fid >= threshold:
            eve_hits += 1

        reg.release(eve_qubit)
        reg.release(legit_qubit)
        _release_leftovers(net, reg)
    return AttackStats(trials, eve_hits, legit_hits)


def _run_attacked_round(net: QNetwork, reg: StateRegistry,
                        payload_ref: np.ndarray,
                        spec: RotationSpec | None) -> tuple[QubitId, QubitId]:
    """One protocol round with a malicious assister on pair 1.

    Returns (attacker's captured qubit, legitimate receiver's qubit), both
    already teleport-corrected (and rotation-decoded on the legitimate side).
    """
    n = net.topology.n_pairs
    swappers = assign_swappers(n)
    eve = swappers[1]
    source = NodeId.source()
    relay = NodeId.relay()

    for k in range(1, n + 1):
        tx = NodeId.transmitter(k)
        keep, give = reg.create_bell_pair()
        net.deposit(tx, f"phi{k}.keep", keep)
        net.deposit(tx, f"phi{k}.give", give)
        net.send_qubit(tx, swappers[k], give, f"phi{k}.swap")
        left, right = reg.create_bell_pair()
        net.deposit(source, f"psi{k}.assist", left)
        net.deposit(source, f"psi{k}.own", right)
        net.send_qubit(source, swappers[k], left, f"psi{k}.swap")
        net.send_qubit(source, NodeId.receiver(k), right, f"psi{k}.own")
    net.run_until_idle()

    for k in range(1, n + 1):
        assister = swappers[k]
        phi_half = net.take(assister, f"phi{k}.swap")
        if k == 1:
            # Substitution: Eve's own pair rides the swap; the genuine
            # source half is discarded, decohering the receiver's half
            # into a decoy.
            e_keep, e_give = reg.create_bell_pair()
            net.deposit(eve, "eve.keep", e_keep)
            net.deposit(eve, "eve.give", e_give)
            msg = entanglement_swap(reg, phi_half, net.take(eve, "eve.give"))
            reg.release(net.take(eve, f"psi{k}.swap"))
        else:
            msg = entanglement_swap(reg, phi_half, net.take(assister, f"psi{k}.swap"))
        net.send_classical(assister, NodeId.transmitter(k), msg.bits, f"swap{k}")
    net.run_until_idle()

    for k in range(1, n + 1):
        tx = NodeId.transmitter(k)
        msg = TeleportMessage.from_bits(net.inventories[tx].message(f"swap{k}").bits)
        teleport_decode(reg, net.holdings(tx)[f"phi{k}.keep"], msg)

    for k in range(1, n + 1):
        tx = NodeId.transmitter(k)
        if k == 1:
            payload = reg.alloc_qubit(payload_ref)
            net.deposit(tx, f"eta{k}", payload)
            if spec is not None:
                encode_state(reg, payload, spec)
        else:
            payload = reg.alloc_qubit([1.0, 0.0])
            net.deposit(tx, f"eta{k}", payload)
        msg = teleport_encode(reg, net.take(tx, f"eta{k}"), net.take(tx, f"phi{k}.keep"))
        net.broadcast_classical(tx, msg.bits, f"B{k}")
    net.run_until_idle()

    combined = xor_combine([TeleportMessage.from_bits(m.bits)
                            for m in net.inventories[relay].messages_tagged("B")])
    net.send_classical(relay, source, combined.bits, "combined")
    net.run_until_idle()
    net.broadcast_classical(source, combined.bits, "combined", exclude=[relay])
    net.run_until_idle()

    # Legitimate receiver of pair 1: recover its message via the XOR path.
    r1 = NodeId.receiver(1)
    inbox = net.inventories[r1]
    others = [TeleportMessage.from_bits(m.bits) for m in inbox.messages_tagged("B")]
    own = xor_recover(TeleportMessage.from_bits(inbox.message("combined").bits), others)
    legit_qubit = teleport_decode(reg, net.take(r1, "psi1.own"), own)
    if spec is not None:
        decode_state(reg, legit_qubit, spec)

    # Eve reads the pair-1 broadcast directly: she is a connected receiver.
    b1 = TeleportMessage.from_bits(net.inventories[eve].message("B1").bits)
    eve_qubit = teleport_decode(reg, net.take(eve, "eve.keep"), b1)
    return eve_qubit, legit_qubit


def _release_leftovers(net: QNetwork, reg: StateRegistry) -> None:
    for node in net.topology.nodes:
        for tag in list(net.holdings(node)):
            q = net.take(node, tag)
            if reg.is_live(q):
                reg.release(q)
