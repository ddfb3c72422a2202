"""QKD-keyed one-time-pad channels, transcripts and observer views.

QKD is modelled as a source of shared uniform bits: either an ideal source
(bits straight from the seeded RNG) or a toy BB84 prepare-and-measure run.
Messages are JSON payloads, length-prefixed, turned into a bit string and
XORed with never-reused key bits.

Bit strings are plain ``str`` objects over ``"0"``/``"1"``.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, NamedTuple, Optional, Union

from .errors import Bb84Aborted, KeyExhausted
from .numeric import Scalar, format_scalar

ALICE = "alice"
BOB = "bob"
TRENT = "trent"
EVE = "eve"
HARNESS = "harness"
PUBLIC = "*"

PARTIES = (ALICE, BOB, TRENT)
OBSERVERS = (ALICE, BOB, TRENT, EVE)

DEFAULT_QBER_THRESHOLD = 0.11
DEFAULT_SAMPLE_FRACTION = 0.5
DEFAULT_KEY_BITS = 4096

LENGTH_PREFIX_BITS = 32


# -- bit strings ------------------------------------------------------------


def random_bits(rng: random.Random, n: int) -> str:
    if n <= 0:
        return ""
    return format(rng.getrandbits(n), f"0{n}b")


def xor_bits(a: str, b: str) -> str:
    """XOR two equal-length bit strings.

    >>> xor_bits("1010", "0110")
    '1100'
    """
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} != {len(b)}")
    if not a:
        return ""
    return format(int(a, 2) ^ int(b, 2), f"0{len(a)}b")


def bits_to_hex(bits: str) -> str:
    """Hex digest of a bit string, zero-padded on the left to whole nibbles."""
    if not bits:
        return ""
    return format(int(bits, 2), f"0{math.ceil(len(bits) / 4)}x")


def hex_to_bits(digest: str, n_bits: int) -> str:
    if n_bits == 0:
        return ""
    return format(int(digest, 16), f"0{n_bits}b")


def jsonable(value: Any) -> Any:
    """Replace scalars with their ``num/den`` text form, recursively."""
    if isinstance(value, (Scalar, Fraction)):
        return format_scalar(value)
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return value


def encode_payload(payload: dict) -> str:
    """Serialize a JSON payload into a length-prefixed bit string."""
    raw = json.dumps(jsonable(payload), sort_keys=True, separators=(",", ":")).encode()
    body = "".join(format(byte, "08b") for byte in raw)
    return format(len(raw), f"0{LENGTH_PREFIX_BITS}b") + body


def decode_payload(bits: str) -> dict:
    n_bytes = int(bits[:LENGTH_PREFIX_BITS], 2)
    body = bits[LENGTH_PREFIX_BITS:LENGTH_PREFIX_BITS + 8 * n_bytes]
    if len(body) != 8 * n_bytes:
        raise ValueError("truncated payload")
    raw = bytes(int(body[i:i + 8], 2) for i in range(0, len(body), 8))
    return json.loads(raw.decode())


# -- keys and messages ------------------------------------------------------


def _pair(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


@dataclass
class SharedKey:
    """Key material held identically by both endpoints of a link."""

    key_id: str
    pair: tuple[str, str]
    bits: str
    consumed_offset: int = 0

    @property
    def remaining(self) -> int:
        return len(self.bits) - self.consumed_offset

    def take(self, n: int) -> tuple[int, str]:
        """Consume the next ``n`` bits; returns (offset, bits)."""
        if n > self.remaining:
            raise KeyExhausted(
                f"key {self.key_id} has {self.remaining} bits left, {n} needed"
            )
        offset = self.consumed_offset
        self.consumed_offset += n
        return offset, self.bits[offset:offset + n]


@dataclass(frozen=True)
class CipherMessage:
    sender: str
    receiver: str
    ciphertext: str
    sequence: int
    key_id: str
    key_offset: int
    label: str = ""


@dataclass(frozen=True)
class Bb84Config:
    eavesdropper: str = "none"
    sample_fraction: float = DEFAULT_SAMPLE_FRACTION
    abort_threshold: Optional[float] = DEFAULT_QBER_THRESHOLD


KeySource = Union[str, Bb84Config]


# -- transcript -------------------------------------------------------------


class Transcript:
    """Append-only event log of one or more protocol runs.

    Events are plain dicts with at least ``seq``, ``kind``, ``from`` and
    ``to``. Kinds:

    ``key``       QKD key establishment (endpoints only; carries the key bits)
    ``cipher``    one-time-pad message (ciphertext as hex)
    ``announce``  public announcement by Trent
    ``local``     a value private to one party (its own inputs)
    ``record``    harness ground truth, never shown to any observer
    """

    def __init__(self, events: Optional[Iterable[dict]] = None):
        self.events: list[dict] = []
        self._pair_seq: dict[tuple[str, str], int] = {}
        self._key_ids: set[str] = set()
        for event in events or ():
            self._load(dict(event))

    def _load(self, event: dict) -> None:
        if "seq" not in event or "kind" not in event:
            raise ValueError(f"malformed transcript event: {event!r}")
        if self.events and event["seq"] <= self.events[-1]["seq"]:
            raise ValueError("transcript sequence numbers must increase")
        self._check_key(event)
        self.events.append(event)
        if event["kind"] == "cipher":
            key = (event["from"], event["to"])
            self._pair_seq[key] = max(self._pair_seq.get(key, -1), event["sequence"])

    def _check_key(self, event: dict) -> None:
        if event["kind"] != "key":
            return
        if event["key_id"] in self._key_ids:
            raise ValueError(f"duplicate key id {event['key_id']!r}")
        self._key_ids.add(event["key_id"])

    def new_key_id(self, pair: tuple[str, str]) -> str:
        """A key id for ``pair`` not yet used anywhere in this transcript."""
        n = len(self._key_ids)
        while f"{pair[0]}-{pair[1]}-{n}" in self._key_ids:
            n += 1
        return f"{pair[0]}-{pair[1]}-{n}"

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def append(self, kind: str, sender: str, receiver: str, **fields: Any) -> dict:
        seq = self.events[-1]["seq"] + 1 if self.events else 0
        event = {"seq": seq, "kind": kind, "from": sender, "to": receiver, **jsonable(fields)}
        self._check_key(event)
        self.events.append(event)
        return event

    def next_sequence(self, sender: str, receiver: str) -> int:
        key = (sender, receiver)
        seq = self._pair_seq.get(key, -1) + 1
        self._pair_seq[key] = seq
        return seq

    def keys(self) -> dict[str, str]:
        """Map key_id to key bits for every key event in the log."""
        return {
            e["key_id"]: hex_to_bits(e["bits_hex"], e["n_bits"])
            for e in self.events
            if e["kind"] == "key"
        }

    def redacted(self) -> "Transcript":
        """Copy with harness ground truth and the shared plan removed."""
        kept = [
            e for e in self.events
            if e["kind"] != "record" and e.get("label") != "plan"
        ]
        return Transcript(kept)

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps(e, sort_keys=True, separators=(",", ":")) + "\n"
            for e in self.events
        )

    def write(self, path: Union[str, Path], redact: bool = False) -> None:
        source = self.redacted() if redact else self
        Path(path).write_text(source.to_jsonl())

    @classmethod
    def from_jsonl(cls, text: str) -> "Transcript":
        events = []
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                events.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ValueError(f"line {lineno}: {exc}") from exc
        return cls(events)

    @classmethod
    def read(cls, path: Union[str, Path]) -> "Transcript":
        return cls.from_jsonl(Path(path).read_text())


# -- BB84 -------------------------------------------------------------------


class Bb84Result(NamedTuple):
    key_a: str
    key_b: str
    qber: float
    sifted_len: int


def bb84_exchange(
    n_pulses: int,
    eavesdropper: str = "none",
    rng: Optional[random.Random] = None,
    *,
    sample_fraction: float = DEFAULT_SAMPLE_FRACTION,
    abort_threshold: Optional[float] = DEFAULT_QBER_THRESHOLD,
) -> Bb84Result:
    """Toy BB84 over a noiseless channel, optionally with intercept-resend.

    Basis 0 is rectilinear, 1 diagonal. Measuring in the preparation basis
    returns the encoded bit; measuring in the other basis returns a fair coin.
    A random ``sample_fraction`` of the sifted bits is disclosed to estimate
    the QBER and discarded; the rest is the key. ``abort_threshold=None``
    disables the abort.
    """
    if n_pulses < 16:
        raise ValueError("n_pulses must be at least 16")
    if eavesdropper not in ("none", "intercept_resend"):
        raise ValueError(f"unknown eavesdropper model {eavesdropper!r}")
    rng = rng or random.Random()
    bit = rng.getrandbits

    a_bits = [bit(1) for _ in range(n_pulses)]
    a_bases = [bit(1) for _ in range(n_pulses)]
    b_bases = [bit(1) for _ in range(n_pulses)]

    b_bits = []
    for value, prep_basis, meas_basis in zip(a_bits, a_bases, b_bases):
        if eavesdropper == "intercept_resend":
            eve_basis = bit(1)
            value = value if eve_basis == prep_basis else bit(1)
            prep_basis = eve_basis
        b_bits.append(value if meas_basis == prep_basis else bit(1))

    sifted = [i for i in range(n_pulses) if a_bases[i] == b_bases[i]]
    sifted_len = len(sifted)
    n_sample = min(sifted_len, max(1, round(sample_fraction * sifted_len)))
    sample = set(rng.sample(range(sifted_len), n_sample)) if sifted_len else set()

    errors = sum(a_bits[sifted[j]] != b_bits[sifted[j]] for j in sample)
    qber = errors / len(sample) if sample else 0.0
    if abort_threshold is not None and qber > abort_threshold:
        raise Bb84Aborted(qber, abort_threshold, sifted_len)

    keep = [sifted[j] for j in range(sifted_len) if j not in sample]
    key_a = "".join(str(a_bits[i]) for i in keep)
    key_b = "".join(str(b_bits[i]) for i in keep)
    return Bb84Result(key_a, key_b, qber, sifted_len)


def _bb84_key(n_bits: int, config: Bb84Config, rng: random.Random) -> str:
    per_pulse = 0.5 * (1.0 - config.sample_fraction)
    key = ""
    while len(key) < n_bits:
        need = n_bits - len(key)
        pulses = max(16, math.ceil(need / per_pulse * 1.2) + 64)
        key_a, key_b, _, sifted_len = bb84_exchange(
            pulses,
            config.eavesdropper,
            rng,
            sample_fraction=config.sample_fraction,
            abort_threshold=config.abort_threshold,
        )
        if key_a != key_b:
            # No error correction is modelled: a residual mismatch the
            # sample missed is treated as a failed exchange.
            mismatch = sum(x != y for x, y in zip(key_a, key_b)) / max(1, len(key_a))
            raise Bb84Aborted(mismatch, config.abort_threshold or 0.0, sifted_len)
        key += key_a
    return key[:n_bits]


# -- operations -------------------------------------------------------------


def establish_key(
    a: str,
    b: str,
    n_bits: int,
    source: KeySource = "ideal",
    rng: Optional[random.Random] = None,
    transcript: Optional[Transcript] = None,
    key_id: Optional[str] = None,
) -> SharedKey:
    """Give parties ``a`` and ``b`` ``n_bits`` of shared secret key."""
    if n_bits < 1:
        raise ValueError("n_bits must be at least 1")
    rng = rng or random.Random()
    if source == "ideal":
        bits = random_bits(rng, n_bits)
        source_name = "ideal"
    elif source == "bb84":
        bits = _bb84_key(n_bits, Bb84Config(), rng)
        source_name = "bb84"
    elif isinstance(source, Bb84Config):
        bits = _bb84_key(n_bits, source, rng)
        source_name = "bb84"
    else:
        raise ValueError(f"unknown key source {source!r}")

    pair = _pair(a, b)
    if key_id is None:
        key_id = transcript.new_key_id(pair) if transcript is not None else f"{pair[0]}-{pair[1]}-0"
    key = SharedKey(key_id=key_id, pair=pair, bits=bits)
    if transcript is not None:
        transcript.append(
            "key", pair[0], pair[1],
            key_id=key_id, n_bits=n_bits, source=source_name,
            bits_hex=bits_to_hex(bits),
        )
    return key


def send_secure(
    t: Optional[Transcript],
    key: SharedKey,
    sender: str,
    plaintext: str,
    label: str = "",
) -> CipherMessage:
    """Encrypt ``plaintext`` from ``sender`` to the other key holder."""
    if sender not in key.pair:
        raise ValueError(f"{sender} does not hold key {key.key_id}")
    receiver = key.pair[1] if key.pair[0] == sender else key.pair[0]
    offset, pad = key.take(len(plaintext))
    ciphertext = xor_bits(plaintext, pad)
    sequence = t.next_sequence(sender, receiver) if t is not None else 0
    msg = CipherMessage(sender, receiver, ciphertext, sequence, key.key_id, offset, label)
    if t is not None:
        t.append(
            "cipher", sender, receiver,
            sequence=sequence, key_id=key.key_id, key_offset=offset,
            n_bits=len(ciphertext), payload_hex=bits_to_hex(ciphertext),
            label=label,
        )
    return msg


def receive_secure(key: SharedKey, message: CipherMessage) -> str:
    """Decrypt a message with the receiver's copy of the key."""
    start = message.key_offset
    pad = key.bits[start:start + len(message.ciphertext)]
    return xor_bits(message.ciphertext, pad)


# -- views ------------------------------------------------------------------


@dataclass
class View:
    """Everything one observer can see of a transcript."""

    observer: str
    events: list[dict] = field(default_factory=list)

    def payloads(self) -> list[dict]:
        """Plaintext payloads visible to the observer (messages, locals, announcements)."""
        out = []
        for e in self.events:
            if e["kind"] in ("message", "local"):
                out.append(e["payload"])
            elif e["kind"] == "announce":
                out.append(e["announcement"])
        return out

    def visible_fields(self) -> set[str]:
        return {name for payload in self.payloads() for name in payload}


def view(t: Transcript, observer: str) -> View:
    """Project a transcript onto what ``observer`` can see.

    Public announcements are visible to everyone. Messages are shown in
    plaintext to their two endpoints and as ciphertext to anybody else. Key
    material and local values are visible only to their holders, and harness
    records are visible to nobody.
    """
    keys = t.keys()
    out = View(observer)
    for e in t.events:
        kind = e["kind"]
        endpoint = observer in (e["from"], e["to"])
        base = {"seq": e["seq"], "from": e["from"], "to": e["to"]}
        if kind == "announce":
            out.events.append({**base, "kind": "announce", "announcement": e["announcement"]})
        elif kind == "key":
            if endpoint:
                out.events.append({**base, "kind": "key", "key_id": e["key_id"], "n_bits": e["n_bits"]})
        elif kind == "cipher":
            label = e.get("label", "")
            if endpoint and e["key_id"] in keys:
                cipher = hex_to_bits(e["payload_hex"], e["n_bits"])
                start = e["key_offset"]
                pad = keys[e["key_id"]][start:start + e["n_bits"]]
                payload = decode_payload(xor_bits(cipher, pad))
                out.events.append({**base, "kind": "message", "label": label, "payload": payload})
            else:
                out.events.append({**base, "kind": "cipher", "label": label, "payload_hex": e["payload_hex"]})
        elif kind == "local":
            if observer == e["from"]:
                out.events.append({**base, "kind": "local", "payload": e["payload"]})
    return out


# -- network ----------------------------------------------------------------


class SecureNetwork:
    """Pairwise QKD-keyed links between the parties of a run.

    Keys are established lazily and topped up with a fresh key whenever the
    current one runs short. Passing ``transcript=None`` keeps the
    encrypt/decrypt round trip but records nothing.
    """

    def __init__(
        self,
        rng: random.Random,
        transcript: Optional[Transcript] = None,
        key_source: KeySource = "ideal",
        key_bits: int = DEFAULT_KEY_BITS,
    ):
        self.rng = rng
        self.transcript = transcript
        self.key_source = key_source
        self.key_bits = key_bits
        self._keys: dict[tuple[str, str], SharedKey] = {}
        self.retired: list[SharedKey] = []
        self._count = 0

    def _key_for(self, a: str, b: str, need: int) -> SharedKey:
        pair = _pair(a, b)
        key = self._keys.get(pair)
        if key is None or key.remaining < need:
            if key is not None:
                self.retired.append(key)
            if self.transcript is not None:
                key_id = self.transcript.new_key_id(pair)
            else:
                key_id = f"{pair[0]}-{pair[1]}-{self._count}"
                self._count += 1
            key = establish_key(
                pair[0], pair[1], max(self.key_bits, need),
                self.key_source, self.rng, self.transcript, key_id=key_id,
            )
            self._keys[pair] = key
        return key

    def keys(self) -> list[SharedKey]:
        return self.retired + list(self._keys.values())

    def send(self, sender: str, receiver: str, payload: dict, label: str = "") -> dict:
        """Send ``payload`` over the OTP link; returns what the receiver decodes."""
        plaintext = encode_payload(payload)
        key = self._key_for(sender, receiver, len(plaintext))
        msg = send_secure(self.transcript, key, sender, plaintext, label)
        return decode_payload(receive_secure(key, msg))

    def announce(self, sender: str, announcement: dict) -> dict:
        if self.transcript is not None:
            self.transcript.append("announce", sender, PUBLIC, announcement=announcement)
        return announcement

    def note(self, party: str, payload: dict) -> None:
        if self.transcript is not None:
            self.transcript.append("local", party, party, payload=payload)

    def record(self, payload: dict) -> None:
        if self.transcript is not None:
            self.transcript.append("record", HARNESS, HARNESS, payload=payload)


class DirectLink:
    """Drop-in for :class:`SecureNetwork` that delivers payloads unencrypted.

    Used by Monte Carlo experiments where only announcements matter.
    """

    transcript = None

    def send(self, sender: str, receiver: str, payload: dict, label: str = "") -> dict:
        return payload

    def announce(self, sender: str, announcement: dict) -> dict:
        return announcement

    def note(self, party: str, payload: dict) -> None:
        pass

    def record(self, payload: dict) -> None:
        pass
