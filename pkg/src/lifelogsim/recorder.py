"""Non-volatile sample log with a fixed byte budget.

Binary image, all integers little-endian::

    session header   8 bytes   u32 (0x80000000 | power_on_t_ms >> 32), u32 power_on_t_ms & 0xFFFFFFFF
    record          10 bytes   u32 offset_ms, u16 sc1_mv, u16 sc2_mv, u16 piezo_mv

``offset_ms`` is the time since the session's power-on, modulo 2**31 (the top
bit marks headers).  A reader unwraps it by assuming offsets never go
backwards, so sessions longer than ~24.8 days between two consecutive records
are not representable.

CSV export::

    # session 0 power_on_t_ms=0
    session,t_ms,sc1_mv,sc2_mv,piezo_mv
    0,1234,1998,2450,13
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

HEADER_BYTES = 8
RECORD_BYTES = 10
DEFAULT_CAPACITY = 32768
CSV_HEADER = "session,t_ms,sc1_mv,sc2_mv,piezo_mv"

_MARK = 0x80000000
_REC = struct.Struct("<IHHH")
_HDR = struct.Struct("<II")


class CapacityError(RuntimeError):
    pass


class LogFormatError(ValueError):
    pass


def to_mv(volts: float) -> int:
    """Volts to the u16 millivolt field, saturating at both ends."""
    return min(max(int(round(volts * 1000.0)), 0), 0xFFFF)


@dataclass(frozen=True)
class Sample:
    t_ms: int
    sc1_mv: int
    sc2_mv: int
    piezo_mv: int

    def __post_init__(self):
        for name in ("sc1_mv", "sc2_mv", "piezo_mv"):
            v = getattr(self, name)
            if not 0 <= v <= 0xFFFF:
                raise ValueError(f"{name}={v} outside u16 millivolt range")
        if self.t_ms < 0:
            raise ValueError("t_ms must be >= 0")


@dataclass
class Session:
    power_on_t_ms: int
    samples: list = field(default_factory=list)


@dataclass
class RecordLog:
    capacity_bytes: int = DEFAULT_CAPACITY
    sessions: list = field(default_factory=list)
    dropped: int = field(default=0, compare=False)
    _pending: int | None = field(default=None, repr=False, compare=False)

    @property
    def size_bytes(self) -> int:
        return sum(HEADER_BYTES + RECORD_BYTES * len(s.samples) for s in self.sessions)

    @property
    def n_samples(self) -> int:
        return sum(len(s.samples) for s in self.sessions)

    def _last_t(self):
        for s in reversed(self.sessions):
            if s.samples:
                return s.samples[-1].t_ms
            return s.power_on_t_ms
        return None

    def begin_session(self, power_on_t_ms: int) -> None:
        """Mark a power-on; the header is written with the next sample."""
        last = self._last_t()
        if last is not None and power_on_t_ms < last:
            raise ValueError("session power-on earlier than previous data")
        self._pending = int(power_on_t_ms)

    def append(self, sample: Sample) -> "RecordLog":
        """Append in place (and return self).  Raises CapacityError, leaving
        the log untouched, if the record (plus header) does not fit."""
        opening = self._pending is not None or not self.sessions
        need = RECORD_BYTES + (HEADER_BYTES if opening else 0)
        if self.size_bytes + need > self.capacity_bytes:
            raise CapacityError(f"log full ({self.size_bytes}/{self.capacity_bytes} bytes)")
        if opening:
            power_on = self._pending if self._pending is not None else sample.t_ms
            if sample.t_ms < power_on:
                raise ValueError("sample precedes session power-on")
            self.sessions.append(Session(power_on))
            self._pending = None
        else:
            last = self.sessions[-1].samples[-1].t_ms if self.sessions[-1].samples else self.sessions[-1].power_on_t_ms
            if sample.t_ms < last:
                raise ValueError("timestamps must not decrease within a session")
        self.sessions[-1].samples.append(sample)
        return self

    # binary image ---------------------------------------------------------

    def to_bytes(self) -> bytes:
        out = bytearray()
        for s in self.sessions:
            out += _HDR.pack(_MARK | (s.power_on_t_ms >> 32), s.power_on_t_ms & 0xFFFFFFFF)
            for r in s.samples:
                off = (r.t_ms - s.power_on_t_ms) % _MARK
                out += _REC.pack(off, r.sc1_mv, r.sc2_mv, r.piezo_mv)
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes, capacity_bytes: int = DEFAULT_CAPACITY) -> "RecordLog":
        log = cls(capacity_bytes)
        pos = 0
        cur = None
        while pos < len(data):
            (word,) = struct.unpack_from("<I", data, pos)
            if word & _MARK:
                if pos + HEADER_BYTES > len(data):
                    raise LogFormatError(f"truncated header at byte {pos}")
                hi, lo = _HDR.unpack_from(data, pos)
                cur = Session(((hi & ~_MARK) << 32) | lo)
                log.sessions.append(cur)
                wraps, prev_off = 0, 0
                pos += HEADER_BYTES
                continue
            if cur is None:
                raise LogFormatError("record before first session header")
            if pos + RECORD_BYTES > len(data):
                raise LogFormatError(f"truncated record at byte {pos}")
            off, a, b, c = _REC.unpack_from(data, pos)
            if off < prev_off:
                wraps += 1
            prev_off = off
            cur.samples.append(Sample(cur.power_on_t_ms + wraps * _MARK + off, a, b, c))
            pos += RECORD_BYTES
        return log


def export_csv(log: RecordLog) -> str:
    lines = []
    for i, s in enumerate(log.sessions):
        lines.append(f"# session {i} power_on_t_ms={s.power_on_t_ms}")
    lines.append(CSV_HEADER)
    for i, s in enumerate(log.sessions):
        for r in s.samples:
            lines.append(f"{i},{r.t_ms},{r.sc1_mv},{r.sc2_mv},{r.piezo_mv}")
    return "\n".join(lines) + "\n"


def import_csv(text: str, capacity_bytes: int = DEFAULT_CAPACITY) -> RecordLog:
    """Parse an exported log.  Row numbers in errors are 1-based file lines.

    Without ``# session`` comments, each session's power-on defaults to its
    first sample time.
    """
    power_on = {}
    rows = []
    seen_header = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 3 and parts[0] == "session" and parts[2].startswith("power_on_t_ms="):
                try:
                    power_on[int(parts[1])] = int(parts[2].split("=", 1)[1])
                except ValueError:
                    raise LogFormatError(f"row {lineno}: bad session comment") from None
            continue
        if not seen_header:
            if line != CSV_HEADER:
                raise LogFormatError(f"row {lineno}: expected header {CSV_HEADER!r}")
            seen_header = True
            continue
        fields = line.split(",")
        if len(fields) != 5:
            raise LogFormatError(f"row {lineno}: expected 5 fields, got {len(fields)}")
        try:
            vals = [int(x) for x in fields]
        except ValueError:
            raise LogFormatError(f"row {lineno}: non-integer field") from None
        rows.append((lineno, vals))
    if not seen_header:
        raise LogFormatError("missing CSV header")

    log = RecordLog(capacity_bytes)
    current = -1
    for lineno, (sess, t, a, b, c) in rows:
        if sess != current:
            if sess != current + 1:
                raise LogFormatError(f"row {lineno}: session {sess} out of order (expected {current + 1})")
            current = sess
            try:
                log.begin_session(power_on.get(sess, t))
            except ValueError as exc:
                raise LogFormatError(f"row {lineno}: {exc}") from None
        try:
            log.append(Sample(t, a, b, c))
        except (ValueError, CapacityError) as exc:
            raise LogFormatError(f"row {lineno}: {exc}") from None
    return log
