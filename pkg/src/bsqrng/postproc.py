"""Event streams to bit streams: extraction, debiasing, packing and file I/O.

Bits are packed most-significant-bit first within each byte; a final partial
byte is zero-padded and the true bit count kept in the stream metadata. The
binary file format is a small header (magic, version, bit length, provenance
text) followed by the packed payload; a plain ASCII '0'/'1' export is also
provided for interoperability.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping

import numpy as np

from .mcsim import EventRecord, Outcome

_MAGIC = b"BSRB"
_VERSION = 1
_HEADER = struct.Struct("<4sBQI")  # magic, version, bit length, provenance length


@dataclass(frozen=True)
class BitStream:
    """A packed bit sequence with its provenance record."""

    data: bytes
    length: int
    provenance: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.length < 0 or len(self.data) != (self.length + 7) // 8:
            raise ValueError(
                f"payload of {len(self.data)} bytes does not match {self.length} bits"
            )

    @classmethod
    def from_bits(
        cls, bits: Iterable[int] | np.ndarray, provenance: Mapping[str, str] | None = None
    ) -> "BitStream":
        arr = np.asarray(bits, dtype=np.uint8)
        if arr.size and arr.max() > 1:
            raise ValueError("bit values must be 0 or 1")
        return cls(np.packbits(arr).tobytes(), int(arr.size), dict(provenance or {}))

    def bits(self) -> np.ndarray:
        return np.unpackbits(np.frombuffer(self.data, dtype=np.uint8))[: self.length]

    def to_ascii(self) -> str:
        return "".join("01"[b] for b in self.bits())

    @classmethod
    def from_ascii(
        cls, text: str, provenance: Mapping[str, str] | None = None
    ) -> "BitStream":
        digits = [c for c in text if not c.isspace()]
        if any(c not in "01" for c in digits):
            raise ValueError("ASCII bit data may contain only '0', '1' and whitespace")
        return cls.from_bits([int(c) for c in digits], provenance)

    def write(self, path: str | Path) -> None:
        prov = "".join(f"{k}={v}\n" for k, v in self.provenance.items()).encode()
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(_MAGIC, _VERSION, self.length, len(prov)))
            fh.write(prov)
            fh.write(self.data)

    @classmethod
    def read(cls, path: str | Path) -> "BitStream":
        with open(path, "rb") as fh:
            header = fh.read(_HEADER.size)
            if len(header) < _HEADER.size:
                raise ValueError(f"{path}: truncated header")
            magic, version, length, prov_len = _HEADER.unpack(header)
            if magic != _MAGIC:
                raise ValueError(f"{path}: not a bit-stream file (bad magic)")
            if version != _VERSION:
                raise ValueError(f"{path}: unsupported version {version}")
            prov_text = fh.read(prov_len).decode()
            payload = fh.read()
        if len(payload) != (length + 7) // 8:
            raise ValueError(f"{path}: payload does not match declared bit length")
        provenance = {}
        for line in prov_text.splitlines():
            key, _, value = line.partition("=")
            if key:
                provenance[key] = value
        return cls(payload, length, provenance)


def events_to_bits(
    events: np.ndarray | Iterable[EventRecord | int],
    provenance: Mapping[str, str] | None = None,
) -> BitStream:
    """Keep the valid gates, in order: bit-0 clicks give 0, bit-1 clicks give 1."""
    if isinstance(events, np.ndarray):
        codes = events
    else:
        codes = np.array(
            [e.outcome if isinstance(e, EventRecord) else int(e) for e in events],
            dtype=np.uint8,
        )
    valid = codes[(codes == Outcome.BIT0) | (codes == Outcome.BIT1)]
    return BitStream.from_bits(valid - Outcome.BIT0, provenance)


def von_neumann(stream: BitStream) -> BitStream:
    """Classic pairwise debiaser.

    Consumes non-overlapping bit pairs in order: (0,1) emits 0, (1,0) emits 1,
    equal pairs emit nothing. A trailing unpaired bit is dropped. On
    independent identically biased input the output is exactly symmetric.
    """
    bits = stream.bits()
    pairs = bits[: 2 * (len(bits) // 2)].reshape(-1, 2)
    keep = pairs[:, 0] != pairs[:, 1]
    out = pairs[keep, 0]
    provenance = dict(stream.provenance)
    provenance["debiased"] = "von-neumann"
    provenance["raw_length"] = str(stream.length)
    return BitStream.from_bits(out, provenance)


#: Registry of available debiasing methods.
DEBIASERS: dict[str, Callable[[BitStream], BitStream]] = {"von-neumann": von_neumann}


def debias(stream: BitStream, method: str = "von-neumann") -> BitStream:
    try:
        fn = DEBIASERS[method]
    except KeyError:
        raise ValueError(
            f"unknown debiaser {method!r}; available: {sorted(DEBIASERS)}"
        ) from None
    return fn(stream)


@dataclass(frozen=True)
class StreamStats:
    length: int
    ones_fraction: float | None
    extraction_efficiency: float | None


def stream_stats(stream: BitStream) -> StreamStats:
    """Exact counts; extraction efficiency is reported for debiased streams."""
    ones = int(stream.bits().sum()) if stream.length else 0
    ones_fraction = ones / stream.length if stream.length else None
    efficiency = None
    raw = stream.provenance.get("raw_length")
    if raw is not None and int(raw) > 0:
        efficiency = stream.length / int(raw)
    return StreamStats(stream.length, ones_fraction, efficiency)
