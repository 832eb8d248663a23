"""Text netlist format for optical circuits.

One element per line, angles in degrees, ``#`` comments::

    PLATFORM POL_OAM l=1
    HWP 22.5
    PSDP 45.0
    DOVE 22.5

Two-path circuits tag routed elements with ``arm=0|1|both``.  Printing and
parsing round-trip bit-exactly: angles are stored in degrees and emitted with
shortest-repr precision (always >= 6 significant digits).
"""

from __future__ import annotations

from .optics import (
    ARM_BOTH,
    ElementKind,
    OpticalCircuit,
    OpticalElement,
    Platform,
    PlatformKind,
    _ANGLED,
)


class NetlistError(ValueError):
    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        prefix = f"line {line_no}: " if line_no is not None else ""
        super().__init__(prefix + message)


def format_netlist(circuit: OpticalCircuit) -> str:
    lines = []
    if circuit.platform.kind is PlatformKind.POL_OAM:
        lines.append(f"PLATFORM POL_OAM l={circuit.platform.ell}")
    else:
        lines.append("PLATFORM PATH_POL")
    for e in circuit.elements:
        parts = [e.kind.value]
        if e.kind in _ANGLED:
            parts.append(repr(e.angle_deg))
        if e.kind is ElementKind.EOM:
            parts.append("on" if e.on else "off")
        if e.kind is ElementKind.SPIRAL:
            parts.append(str(e.shift))
        if circuit.platform.kind is PlatformKind.PATH_POL:
            if e.kind is ElementKind.ARM_PHASE or e.arm != ARM_BOTH:
                parts.append(f"arm={e.arm}")
            elif e.kind is ElementKind.BS:
                parts.append("arm=both")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def _parse_float(tok: str, line_no: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise NetlistError(f"bad angle {tok!r}", line_no) from None


def parse_netlist(text: str) -> OpticalCircuit:
    platform: Platform | None = None
    elements: list[OpticalElement] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if platform is None:
            if toks[0] != "PLATFORM":
                raise NetlistError("netlist must start with a PLATFORM line", line_no)
            if len(toks) >= 2 and toks[1] == "PATH_POL":
                platform = Platform.path_pol()
            elif len(toks) >= 3 and toks[1] == "POL_OAM" and toks[2].startswith("l="):
                try:
                    platform = Platform.pol_oam(int(toks[2][2:]))
                except ValueError as exc:
                    raise NetlistError(str(exc), line_no) from None
            else:
                raise NetlistError(f"bad platform line {line!r}", line_no)
            continue
        try:
            kind = ElementKind(toks[0])
        except ValueError:
            raise NetlistError(f"unknown element {toks[0]!r}", line_no) from None
        arm = ARM_BOTH
        on = True
        shift = 0
        angle_deg = 0.0
        pos = toks[1:]
        kw = [t for t in pos if t.startswith("arm=")]
        pos = [t for t in pos if not t.startswith("arm=")]
        if kw:
            arm = kw[-1][4:]
        if kind in _ANGLED:
            if not pos:
                raise NetlistError(f"{kind.value} needs an angle", line_no)
            angle_deg = _parse_float(pos.pop(0), line_no)
        if kind is ElementKind.EOM:
            if not pos or pos[0] not in ("on", "off"):
                raise NetlistError("EOM needs state 'on' or 'off'", line_no)
            on = pos.pop(0) == "on"
        if kind is ElementKind.SPIRAL:
            if not pos:
                raise NetlistError("SPIRAL needs a mode increment", line_no)
            try:
                shift = int(pos.pop(0))
            except ValueError:
                raise NetlistError(f"bad mode increment {pos[0]!r}", line_no) from None
        if pos:
            raise NetlistError(f"unexpected tokens {pos!r}", line_no)
        try:
            elements.append(
                OpticalElement(kind, angle_deg=angle_deg, arm=arm, on=on, shift=shift)
            )
        except ValueError as exc:
            raise NetlistError(str(exc), line_no) from None
    if platform is None:
        raise NetlistError("empty netlist: missing PLATFORM line")
    try:
        return OpticalCircuit(platform, tuple(elements))
    except ValueError as exc:
        raise NetlistError(str(exc)) from None
