"""On-board position-packet filtering for the central UAV.

A rolling window of the last N* Minkowski step distances decides, per
incoming packet, whether it is redundant (abandon), normal (accept), or
follows a gap (accept and synthesize fill-in packets by linear
interpolation).  The window update rule exists in two variants:

* ``paper-literal``: an abandoned step replaces the window maximum, a
  gap step replaces the minimum, and the comparison base is always the
  previously *received* packet.  This reproduces the published algorithm
  verbatim, including its quirk that the window spread only ever
  shrinks.
* ``corrected``: replacement targets are swapped (abandon evicts the
  minimum, gap evicts the maximum) so the thresholds keep adapting, and
  the comparison base is the last *accepted* packet so an abandoned
  outlier cannot poison later distances.

Distances default to local meters: longitude/latitude are projected to
a tangent plane (equirectangular about each stream's first packet)
before the Minkowski norm, since raw degrees and meters do not share a
unit.  ``units="raw"`` keeps the published mixed-unit arithmetic.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field, replace

from .errors import DomainError, SequenceError
from .a2g import EARTH_RADIUS


@dataclass(frozen=True)
class PositionPacket:
    """One position report.  ``supplement`` marks synthesized packets."""
    seq_k: int
    lon_deg: float
    lat_deg: float
    alt_m: float
    source_id: str = "uav"
    time: float | None = None
    supplement: bool = False

    def __post_init__(self):
        if not -180.0 <= self.lon_deg <= 180.0:
            raise ValueError(f"lon_deg {self.lon_deg} outside [-180, 180]")
        if not -90.0 <= self.lat_deg <= 90.0:
            raise ValueError(f"lat_deg {self.lat_deg} outside [-90, 90]")
        if self.seq_k < 1:
            raise ValueError("seq_k must be >= 1")


@dataclass(frozen=True)
class Verdict:
    action: str  # "accept" | "abandon" | "accept-with-supplements"
    supplements: tuple[PositionPacket, ...]
    distance_m: float


@dataclass(frozen=True)
class FilterState:
    """Filter memory for one packet source.

    ``window_M`` holds the last N* step distances (a multiset, stored as
    a tuple).  ``prev_received`` is the paper-literal comparison base;
    ``last_accepted`` the corrected one.  ``origin`` pins the projection
    plane to the stream's first packet.
    """
    window_size_Nstar: int = 10
    order_p: float = 2.0
    units: str = "projected"  # or "raw"
    max_supplements: int = 10
    window_M: tuple[float, ...] = ()
    last_accepted: PositionPacket | None = None
    prev_received: PositionPacket | None = None
    warmup_count: int = 0
    origin: tuple[float, float, float] | None = None

    def __post_init__(self):
        if self.window_size_Nstar < 2:
            raise ValueError("window_size_Nstar must be >= 2")
        if self.order_p < 1:
            raise DomainError("Minkowski order p must be >= 1")
        if self.units not in ("projected", "raw"):
            raise ValueError(f"unknown units {self.units!r}")

    @property
    def warmed_up(self) -> bool:
        return self.warmup_count >= self.window_size_Nstar + 1


def minkowski_distance(a: PositionPacket, b: PositionPacket,
                       p: float) -> float:
    """Minkowski distance of order p over the raw packet fields
    (degrees, degrees, meters)."""
    if p < 1:
        raise DomainError(f"Minkowski order p must be >= 1, got {p}")
    return _minkowski((a.lon_deg, a.lat_deg, a.alt_m),
                      (b.lon_deg, b.lat_deg, b.alt_m), p)


def _minkowski(u, v, p: float) -> float:
    return sum(abs(x - y) ** p for x, y in zip(u, v)) ** (1.0 / p)


def _projected(packet: PositionPacket, origin) -> tuple[float, float, float]:
    lon0, lat0, alt0 = origin
    coslat = math.cos(math.radians(lat0))
    x = EARTH_RADIUS * math.radians(packet.lon_deg - lon0) * coslat
    y = EARTH_RADIUS * math.radians(packet.lat_deg - lat0)
    return (x, y, packet.alt_m - alt0)


def _step_distance(state: FilterState, a: PositionPacket,
                   b: PositionPacket) -> float:
    if state.units == "raw":
        return minkowski_distance(a, b, state.order_p)
    return _minkowski(_projected(a, state.origin),
                      _projected(b, state.origin), state.order_p)


def _check_seq(state: FilterState, packet: PositionPacket):
    prev = state.prev_received
    if prev is not None and packet.seq_k <= prev.seq_k:
        raise SequenceError(
            f"sequence not increasing: {packet.seq_k} after {prev.seq_k} "
            f"for source {packet.source_id!r}")


def warmup(state: FilterState, packet: PositionPacket) -> FilterState:
    """Feed one packet during warmup; the packet is always accepted.

    The first packet pins the projection origin; each later packet adds
    one consecutive-pair distance to the window until N* are recorded.
    """
    if state.warmed_up:
        raise ValueError("warmup already complete")
    _check_seq(state, packet)
    if state.prev_received is None:
        origin = (packet.lon_deg, packet.lat_deg, packet.alt_m)
        return replace(state, prev_received=packet, last_accepted=packet,
                       warmup_count=1, origin=origin)
    m = _step_distance(state, state.prev_received, packet)
    return replace(state, window_M=state.window_M + (m,),
                   prev_received=packet, last_accepted=packet,
                   warmup_count=state.warmup_count + 1)


def generate_supplements(prev: PositionPacket, curr: PositionPacket,
                         state: FilterState) -> tuple[PositionPacket, ...]:
    """Synthesize gap-filling packets between prev and curr.

    The count is ceil(m / median(window)) - 1, capped at the configured
    maximum; packet q sits at the weighted average
    prev + q/(n+1) * (curr - prev), with time interpolated the same way
    when both endpoints carry timestamps.  Sequence numbers take the
    nearest free integer between the endpoints where one exists.
    """
    m = _step_distance(state, prev, curr)
    med = statistics.median(state.window_M)
    n_sup = math.ceil(m / med) - 1
    n_sup = min(n_sup, state.max_supplements)
    if n_sup <= 0:
        return ()
    out = []
    seq_gap = curr.seq_k - prev.seq_k
    for q in range(1, n_sup + 1):
        t = q / (n_sup + 1)
        if curr.time is not None and prev.time is not None:
            when = prev.time + t * (curr.time - prev.time)
        else:
            when = None
        seq = prev.seq_k + round(t * seq_gap)
        if seq_gap >= 2:
            seq = min(max(seq, prev.seq_k + 1), curr.seq_k - 1)
        else:
            seq = prev.seq_k
        out.append(PositionPacket(
            seq_k=seq,
            lon_deg=prev.lon_deg + t * (curr.lon_deg - prev.lon_deg),
            lat_deg=prev.lat_deg + t * (curr.lat_deg - prev.lat_deg),
            alt_m=prev.alt_m + t * (curr.alt_m - prev.alt_m),
            source_id=curr.source_id,
            time=when,
            supplement=True))
    return tuple(out)


def _replace_one(window: tuple[float, ...], victim: float,
                 value: float) -> tuple[float, ...]:
    out = list(window)
    out[out.index(victim)] = value
    return tuple(out)


def process_packet(state: FilterState, packet: PositionPacket,
                   mode: str = "paper-literal") -> tuple[FilterState, Verdict]:
    """Classify one post-warmup packet and update the window.

    See the module docstring for the two modes.  The distance is taken
    against the previous received packet (paper-literal) or the last
    accepted one (corrected).
    """
    if mode not in ("paper-literal", "corrected"):
        raise ValueError(f"unknown mode {mode!r}")
    if not state.warmed_up:
        raise ValueError("cannot process packets before warmup is complete")
    _check_seq(state, packet)
    base = state.prev_received if mode == "paper-literal" else state.last_accepted
    m = _step_distance(state, base, packet)
    window = state.window_M
    lo, hi = min(window), max(window)

    if m < lo:
        new_window = _replace_one(window, hi if mode == "paper-literal" else lo, m)
        new_state = replace(state, window_M=new_window, prev_received=packet)
        return new_state, Verdict("abandon", (), m)

    if m >= hi:
        supplements = generate_supplements(base, packet, state)
        new_window = _replace_one(window, lo if mode == "paper-literal" else hi, m)
        new_state = replace(state, window_M=new_window, prev_received=packet,
                            last_accepted=packet)
        action = "accept-with-supplements" if supplements else "accept"
        return new_state, Verdict(action, supplements, m)

    new_state = replace(state, prev_received=packet, last_accepted=packet)
    return new_state, Verdict("accept", (), m)


@dataclass(frozen=True)
class FilterReport:
    """Outcome of filtering one packet stream."""
    accepted: tuple[PositionPacket, ...]
    total: int
    abandoned_count: int
    supplement_count: int
    reduction_ratio: float


def run_stream(packets, mode: str = "paper-literal",
               window_size_Nstar: int = 10, order_p: float = 2.0,
               units: str = "projected",
               max_supplements: int = 10) -> FilterReport:
    """Filter an ordered packet stream (possibly multiple sources).

    Each source gets an independent filter state; output preserves the
    input order with supplements inserted before the packet that
    triggered them.  Warmup packets are always kept.  Errors from
    individual packets are re-raised with the packet index attached.
    """
    states: dict[str, FilterState] = {}
    kept: list[PositionPacket] = []
    abandoned = 0
    supplements = 0
    total = 0
    for idx, packet in enumerate(packets):
        total += 1
        st = states.get(packet.source_id)
        if st is None:
            st = FilterState(window_size_Nstar=window_size_Nstar,
                             order_p=order_p, units=units,
                             max_supplements=max_supplements)
        try:
            if not st.warmed_up:
                st = warmup(st, packet)
                kept.append(packet)
            else:
                st, verdict = process_packet(st, packet, mode)
                if verdict.action == "abandon":
                    abandoned += 1
                else:
                    kept.extend(verdict.supplements)
                    supplements += len(verdict.supplements)
                    kept.append(packet)
        except SequenceError as err:
            raise SequenceError(f"packet index {idx}: {err}") from err
        except DomainError as err:
            raise DomainError(f"packet index {idx}: {err}") from err
        states[packet.source_id] = st
    ratio = abandoned / total if total else 0.0
    return FilterReport(accepted=tuple(kept), total=total,
                        abandoned_count=abandoned,
                        supplement_count=supplements,
                        reduction_ratio=ratio)


def read_packets(path) -> list[PositionPacket]:
    """Load a trajectory file: header ``source_id,seq,time_s,lon_deg,
    lat_deg,alt_m``, one packet per line, UTF-8, '.' decimals.  An empty
    time_s field means no timestamp.  A trailing ``flag`` column (as
    written by write_packets) is accepted and preserved."""
    from .errors import IoError
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as err:
        raise IoError(f"cannot read {path}: {err}") from err
    return parse_packets(lines, name=str(path))


def parse_packets(lines, name: str = "<stream>") -> list[PositionPacket]:
    from .errors import IoError
    if not lines:
        raise IoError(f"{name}: empty file")
    header = [h.strip() for h in lines[0].split(",")]
    base = ["source_id", "seq", "time_s", "lon_deg", "lat_deg", "alt_m"]
    if header != base and header != base + ["flag"]:
        raise IoError(f"{name}: unexpected header {lines[0]!r}")
    has_flag = len(header) == 7
    out = []
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise IoError(f"{name}:{ln}: expected {len(header)} fields, "
                          f"got {len(parts)}")
        try:
            out.append(PositionPacket(
                source_id=parts[0],
                seq_k=int(parts[1]),
                time=float(parts[2]) if parts[2].strip() else None,
                lon_deg=float(parts[3]),
                lat_deg=float(parts[4]),
                alt_m=float(parts[5]),
                supplement=has_flag and parts[6].strip() == "supp"))
        except ValueError as err:
            raise IoError(f"{name}:{ln}: {err}") from err
    return out


def format_packets(packets, with_flag: bool = True) -> str:
    """Serialize packets back to the trajectory format (LF endings)."""
    base = "source_id,seq,time_s,lon_deg,lat_deg,alt_m"
    lines = [base + (",flag" if with_flag else "")]
    for p in packets:
        t = repr(p.time) if p.time is not None else ""
        row = f"{p.source_id},{p.seq_k},{t},{p.lon_deg!r},{p.lat_deg!r},{p.alt_m!r}"
        if with_flag:
            row += ",supp" if p.supplement else ",recv"
        lines.append(row)
    return "\n".join(lines) + "\n"


def write_packets(path, packets, with_flag: bool = True):
    from .errors import IoError
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(format_packets(packets, with_flag))
    except OSError as err:
        raise IoError(f"cannot write {path}: {err}") from err
