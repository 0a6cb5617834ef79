"""Synthetic trajectory streams bundled with the package.

Three deterministic scenarios exercise the packet filter:

* ``hover``: warmup strides of 4-7 m, then the platform jitters around
  a fixed point with geometrically decaying displacements.  Every
  post-warmup step is far below the smallest window entry, so both
  filter modes abandon essentially the whole stream.
* ``gap``: steady 10 m strides with sequence numbers 200-204 missing;
  the packet after the outage sits 59.9 m out, which yields exactly
  five supplements that land on the missing sequence numbers.  (59.9
  rather than 60.0 keeps ceil(m/median) clear of the floating-point
  boundary; post-outage strides are 10.1 m so later steps stay strictly
  inside the window spread.)
* ``line``: perfectly uniform strides, a steady 10 m/step climb at a
  fixed ground position.  Running along the altitude axis keeps every
  stride bit-identical (altitude never passes through the longitude
  projection, whose per-packet rounding would jitter the strides by an
  ulp), so the degenerate all-equal window is a no-op in both modes.

All three fly at latitude 0 (the tangent projection is exact there),
one packet per 0.5 s; hover and gap hold 1000 m altitude.
"""

from __future__ import annotations

import math
from importlib import resources

from .a2g import EARTH_RADIUS
from .packet_filter import PositionPacket, parse_packets

_ALT = 1000.0
_DT = 0.5

_HOVER_WARMUP_STRIDES = (4.0, 6.0, 5.0, 7.0, 4.5, 6.5, 5.5, 4.0, 7.0, 5.0)
_GAP_WARMUP_STRIDES = (10.0, 9.5, 10.0, 10.0, 10.5, 10.0, 10.0, 10.0, 10.0, 10.0)
_LINE_CLIMB_STEP = 10.0  # meters per packet, exact in binary


def _lon_of(x_meters: float) -> float:
    return math.degrees(x_meters / EARTH_RADIUS)


def _packet(source: str, seq: int, lon: float) -> PositionPacket:
    return PositionPacket(seq_k=seq, lon_deg=lon, lat_deg=0.0, alt_m=_ALT,
                          source_id=source, time=(seq - 1) * _DT)


def hover_trajectory(n_total: int = 400) -> list[PositionPacket]:
    """Warmup walk-in ending at the hover point, then 0.5 * 0.985**k
    displacements along the track direction."""
    xs = [0.0]
    for stride in _HOVER_WARMUP_STRIDES:
        xs.append(xs[-1] + stride)
    hover_x = xs[-1]
    for k in range(1, n_total - len(xs) + 1):
        xs.append(hover_x + 0.5 * 0.985 ** k)
    return [_packet("hover-1", i + 1, _lon_of(x)) for i, x in enumerate(xs)]


def gap_trajectory() -> list[PositionPacket]:
    xs = [0.0]
    for stride in _GAP_WARMUP_STRIDES:
        xs.append(xs[-1] + stride)
    packets = [_packet("gap-1", i + 1, _lon_of(x)) for i, x in enumerate(xs)]
    x = xs[-1]
    for seq in range(12, 200):
        x += 10.0
        packets.append(_packet("gap-1", seq, _lon_of(x)))
    # seq 200..204 lost in transit; the next packet arrives 59.9 m out
    x += 59.9
    packets.append(_packet("gap-1", 205, _lon_of(x)))
    for seq in range(206, 301):
        x += 10.1
        packets.append(_packet("gap-1", seq, _lon_of(x)))
    return packets


def line_trajectory(n_total: int = 200) -> list[PositionPacket]:
    return [PositionPacket(seq_k=k + 1, lon_deg=0.0, lat_deg=0.0,
                           alt_m=_ALT + k * _LINE_CLIMB_STEP,
                           source_id="line-1", time=k * _DT)
            for k in range(n_total)]


BUNDLED = {
    "hover": hover_trajectory,
    "gap": gap_trajectory,
    "line": line_trajectory,
}


def load_bundled(name: str) -> list[PositionPacket]:
    """Read one of the packaged trajectory files (hover, gap, line)."""
    if name not in BUNDLED:
        raise KeyError(f"no bundled trajectory {name!r}; "
                       f"choices: {sorted(BUNDLED)}")
    text = (resources.files("uavnet") / "data" / f"{name}.csv").read_text(
        encoding="utf-8")
    return parse_packets(text.splitlines(), name=f"bundled:{name}")
