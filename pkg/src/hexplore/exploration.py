"""Exploration walks: boundary-to-interior, interior-to-boundary, full-plane.

Walks are recorded as mid-edge sequences (integer times) with the crossed
vertices in between (half-integer times); they are self-avoiding on
half-edges.  Sampling runs in a compiled kernel; a pure-python reference
walker with per-step breadth-first connectivity queries implements the same
dynamics and is used by the exact enumerator and for differential testing.

Randomness: every decision is a pure function of (master seed, walk id,
decision counter), so identical seeds reproduce identical walks regardless
of scheduling.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels as K
from ._rng import bits_py, coin_py, stream_key_py, uniform_py
from .hexlattice import HexCoord, HexDomain, MidEdge, Window

BLUE, YELLOW = 1, 2
COLOR_NAMES = {1: "blue", 2: "yellow"}

WALK_FILE_MAGIC = "hexplore-walk v1"


class InconsistentColoring(ValueError):
    pass


class NoBoundaryContact(ValueError):
    pass


class WindowMarginTooSmall(ValueError):
    pass


class WalkError(RuntimeError):
    pass


_STATUS_NAMES = {
    K.OK: "ok", K.STUCK: "stuck", K.FORCED_BLOCKED: "forced-step blocked",
    K.BAD_FAN: "bad fan", K.CAPACITY: "capacity", K.MEET_IN_FORCED:
    "components met in a forced step",
}


@dataclass
class Walk:
    """One realized walk with its provenance."""
    window: Window
    delta: float
    edges: np.ndarray
    verts: np.ndarray
    flags: np.ndarray
    direction: str            # "ab" | "ba" | "fullplane"
    start_edge: int
    target_edge: int
    seed: Optional[tuple]     # (master seed, walk id)
    n_colored: int = 0
    n_forced: int = 0
    n_draws: int = 0
    l_geometric: int = 0
    vertex_terminated: bool = False
    domain_hash: Optional[str] = None

    def __len__(self):
        return len(self.edges)

    @property
    def n_half_steps(self) -> int:
        """Number of half-steps after time 0 (position count minus one)."""
        return 2 * (len(self.edges) - 1) + (1 if self.vertex_terminated else 0)

    def positions(self) -> np.ndarray:
        """Complex positions at half-step times 0, 1/2, 1, ..."""
        win = self.window
        n = len(self.edges)
        total = self.n_half_steps + 1
        pos = np.empty(total, dtype=complex)
        pos[0::2] = win.edge_mx[self.edges] + 1j * win.edge_my[self.edges]
        nv = total // 2
        if nv:
            vv = self.verts[:nv]
            pos[1::2] = win.vert_x[vv] + 1j * win.vert_y[vv]
        return pos

    def turn_string(self) -> str:
        out = []
        for f in self.flags[1:len(self.edges)]:
            if f >= 10:
                c = int(f) - 10
                out.append("L" if c // 2 == 0 else "R")
                out.append("L" if c % 2 == 1 else "R")
            elif f == 0:
                out.append("F")
            else:
                out.append("L" if f == 1 else "R")
        return "".join(out)


@dataclass
class Coloring:
    """Partial map hexagon -> blue/yellow produced along a walk."""
    entries: dict  # HexCoord -> "blue" | "yellow"

    def __len__(self):
        return len(self.entries)

    def color(self, coord) -> Optional[str]:
        return self.entries.get(coord)


@dataclass
class HittingRecord:
    T: float   # last boundary-contact time
    S: float   # first boundary-contact time


class DomainKit:
    """Packed arrays a domain (or window) exposes to the walk kernel."""

    def __init__(self, window: Window, graph_in, hex_in, bnd_vert=None):
        self.window = window
        self.edge_v = window.edge_v
        self.edge_hex = window.edge_hex
        self.he_left = window.he_left
        self.he_right = window.he_right
        self.he_ahead = window.he_ahead
        self.he_ahead_corner = window.he_ahead_corner
        self.ring_halves = window.ring_halves
        self.edge_mx = window.edge_mx
        self.edge_my = window.edge_my
        self.graph_in = np.ascontiguousarray(graph_in, dtype=np.uint8)
        self.hex_in = np.ascontiguousarray(hex_in, dtype=np.uint8)
        self.frame_edge = np.ascontiguousarray(window.frame_edge, dtype=np.uint8)
        if bnd_vert is None:
            bnd_vert = np.zeros(window.n_vert, dtype=np.uint8)
        self.bnd_vert = np.ascontiguousarray(bnd_vert, dtype=np.uint8)

    def make_scratch(self):
        E = self.window.n_edge
        H = self.window.n_hex
        cap = E + 2
        return dict(
            used_half=np.zeros(2 * E, dtype=np.uint8),
            color=np.zeros(H, dtype=np.int8),
            hex_seen=np.zeros(H, dtype=np.uint8),
            stamp=np.zeros(E, dtype=np.int64),
            queue_a=np.empty(E, dtype=np.int32),
            queue_b=np.empty(E, dtype=np.int32),
            out_edges=np.empty(cap, dtype=np.int32),
            out_verts=np.empty(cap, dtype=np.int32),
            out_flags=np.empty(cap, dtype=np.uint8),
        )


def _edge_id(m) -> int:
    return m.edge if isinstance(m, MidEdge) else int(m)


def radial_kit(dom: HexDomain, a_edge) -> DomainKit:
    """Kernel arrays for walks in a domain with the boundary-start appendage."""
    a_edge = _edge_id(a_edge)
    cached = getattr(dom, "_radial_kits", None)
    if cached is None:
        cached = {}
        dom._radial_kits = cached
    kit = cached.get(a_edge)
    if kit is not None:
        return kit
    graph_in = dom.edge_in.copy()
    graph_in[a_edge] = True
    kit = DomainKit(dom.window, graph_in, dom.hex_mask, dom.boundary_vert)
    # the start mid-edge is reachable only through its boundary-side vertex
    win = dom.window
    side_in = 0 if dom.boundary_vert[win.edge_v[a_edge, 0]] else 1
    if not dom.boundary_vert[win.edge_v[a_edge, side_in]]:
        raise ValueError("start mid-edge is not attached to the boundary")
    kit.a_edge = a_edge
    kit.a_side_in = side_in
    kit.pre_used_half = 2 * a_edge + (1 - side_in)
    cached[a_edge] = kit
    return kit


def fullplane_kit(window: Window, stop_domain: Optional[HexDomain] = None) -> DomainKit:
    graph_in = np.ones(window.n_edge, dtype=np.uint8)
    hex_in = np.ones(window.n_hex, dtype=np.uint8)
    bnd = stop_domain.boundary_vert if stop_domain is not None else None
    kit = DomainKit(window, graph_in, hex_in, bnd)
    kit.pre_used_half = -1
    return kit


def _run_kernel(kit: DomainKit, mode, start_edge, start_side, target_edge,
                stop_r2, stop_mode, key, scratch, coin_bias=-1.0,
                mutant_flags=0):
    return K.run_walk(
        mode, start_edge, start_side, kit.pre_used_half, target_edge,
        stop_r2, stop_mode,
        kit.edge_v, kit.edge_hex, kit.he_left, kit.he_right, kit.he_ahead,
        kit.he_ahead_corner, kit.ring_halves, kit.edge_mx, kit.edge_my,
        kit.graph_in, kit.hex_in, kit.frame_edge, kit.bnd_vert,
        np.uint64(key), coin_bias, mutant_flags,
        scratch["used_half"], scratch["color"], scratch["hex_seen"],
        scratch["stamp"], scratch["queue_a"], scratch["queue_b"],
        scratch["out_edges"], scratch["out_verts"], scratch["out_flags"])


def _finish_walk(kit, dom_or_win, delta, res, scratch, direction, start_edge,
                 target_edge, seed, want_coloring, domain_hash=None,
                 vertex_terminated=False):
    n, n_colored, n_forced, n_draws, l_count, anomalies, status = res
    if status != K.OK:
        raise WalkError(
            f"walk failed: {_STATUS_NAMES.get(status, status)} after {n} steps")
    nv = n - 1 + (1 if vertex_terminated else 0)
    walk = Walk(
        window=kit.window, delta=delta,
        edges=scratch["out_edges"][:n].copy(),
        verts=scratch["out_verts"][:nv].copy(),
        flags=scratch["out_flags"][:n].copy(),
        direction=direction, start_edge=start_edge, target_edge=target_edge,
        seed=seed, n_colored=n_colored, n_forced=n_forced, n_draws=n_draws,
        l_geometric=l_count, vertex_terminated=vertex_terminated,
        domain_hash=domain_hash)
    if not want_coloring:
        return walk, None
    win = kit.window
    ids = np.flatnonzero(scratch["color"])
    entries = {win.hex_coord(h): COLOR_NAMES[int(scratch["color"][h])]
               for h in ids}
    return walk, Coloring(entries)


def radial_explore_ab(dom: HexDomain, a_mid, b_mid, seed=0, walk_id=0,
                      reference=False, scratch=None):
    """Walk from the boundary mid-edge a to the interior mid-edge b."""
    a_edge, b_edge = _edge_id(a_mid), _edge_id(b_mid)
    if reference:
        return _reference_walk(dom, "ab", a_edge, b_edge, seed, walk_id)
    kit = radial_kit(dom, a_edge)
    if scratch is None:
        scratch = kit.make_scratch()
    key = stream_key_py(seed, walk_id)
    res = _run_kernel(kit, K.FWD_RADIAL, a_edge, kit.a_side_in, b_edge,
                      0.0, 0, key, scratch)
    return _finish_walk(kit, dom, dom.delta, res, scratch, "ab", a_edge,
                        b_edge, (seed, walk_id), True, dom.domain_hash())


def radial_explore_ba(dom: HexDomain, b_mid, a_mid, seed=0, walk_id=0,
                      reference=False, scratch=None, mutant_flags=0):
    """Walk from the interior mid-edge b to the boundary mid-edge a."""
    a_edge, b_edge = _edge_id(a_mid), _edge_id(b_mid)
    if reference:
        return _reference_walk(dom, "ba", b_edge, a_edge, seed, walk_id)
    kit = radial_kit(dom, a_edge)
    if scratch is None:
        scratch = kit.make_scratch()
    key = stream_key_py(seed, walk_id)
    res = _run_kernel(kit, K.REV_RADIAL, b_edge, -1, a_edge, 0.0, 0, key,
                      scratch, mutant_flags=mutant_flags)
    return _finish_walk(kit, dom, dom.delta, res, scratch, "ba", b_edge,
                        a_edge, (seed, walk_id), True, dom.domain_hash())


def full_plane_explore(window: Window, zero_mid, stop_radius: float, seed=0,
                       walk_id=0, stop_domain: Optional[HexDomain] = None,
                       scratch=None, kit=None):
    """Walk from the mid-edge nearest the origin, stopped at its first
    mid-edge with |m| >= stop_radius, or (with stop_domain) at its first
    contact with that domain's boundary."""
    zero_edge = _edge_id(zero_mid)
    x0, y0, x1, y1 = window.bounds
    if stop_domain is None:
        need = 2.0 * stop_radius
        if min(-x0, -y0, x1, y1) < need - 1e-9:
            raise WindowMarginTooSmall(
                f"window must cover the disk of radius {need}")
    if kit is None:
        kit = fullplane_kit(window, stop_domain)
    if scratch is None:
        scratch = kit.make_scratch()
    key = stream_key_py(seed, walk_id)
    stop_mode = 1 if stop_domain is not None else 2
    res = _run_kernel(kit, K.FULLPLANE, zero_edge, -1, -1,
                      stop_radius * stop_radius, stop_mode, key, scratch)
    walk, _ = _finish_walk(
        kit, window, window.delta, res, scratch, "fullplane", zero_edge, -1,
        (seed, walk_id), False, None, vertex_terminated=(stop_mode == 1))
    return walk


def reverse_walk(walk: Walk) -> Walk:
    """Index-reversed walk (an involution)."""
    if walk.vertex_terminated:
        raise ValueError("cannot reverse a vertex-terminated walk")
    direction = {"ab": "ba", "ba": "ab"}.get(walk.direction, walk.direction)
    return Walk(
        window=walk.window, delta=walk.delta, edges=walk.edges[::-1].copy(),
        verts=walk.verts[::-1].copy(), flags=np.zeros_like(walk.flags),
        direction=direction, start_edge=int(walk.edges[-1]),
        target_edge=int(walk.edges[0]), seed=walk.seed,
        n_colored=walk.n_colored, n_forced=walk.n_forced,
        n_draws=walk.n_draws, l_geometric=walk.l_geometric,
        domain_hash=walk.domain_hash)


def geometric_l(dom: HexDomain, edges) -> int:
    """Number of domain hexagons sharing at least a half-edge with the walk."""
    win = dom.window
    seen = set()
    for e in edges:
        for h in win.edge_hex[e]:
            if h >= 0 and dom.hex_mask[h]:
                seen.add(int(h))
    return len(seen)


def walk_weights(dom: HexDomain, walk: Walk, coloring: Optional[Coloring] = None):
    """(l, l') for a completed walk; optionally cross-checked against the
    coloring produced alongside it."""
    l = geometric_l(dom, walk.edges)
    lprime = l - 3
    if coloring is not None:
        expect = l if walk.direction == "ab" else lprime
        if len(coloring) != expect:
            raise InconsistentColoring(
                f"coloring has {len(coloring)} hexagons, expected {expect}")
    return l, lprime


def boundary_contact_mask(dom: HexDomain, walk: Walk) -> np.ndarray:
    """Bool mask over half-step positions: True when the walk position lies
    on the domain boundary (or on the outside ring, for the start mid-edge)."""
    total = walk.n_half_steps + 1
    mask = np.zeros(total, dtype=bool)
    on_edge = dom.edge_boundary[walk.edges] | dom.ring_edge[walk.edges]
    mask[0::2] = on_edge
    nv = total // 2
    if nv:
        mask[1::2] = dom.boundary_vert[walk.verts[:nv]]
    return mask


def hitting_record(dom: HexDomain, walk: Walk) -> HittingRecord:
    mask = boundary_contact_mask(dom, walk)
    idx = np.flatnonzero(mask)
    if len(idx) == 0:
        raise NoBoundaryContact("walk never touches the domain boundary")
    return HittingRecord(T=idx[-1] / 2.0, S=idx[0] / 2.0)


def full_edge_indices(walk: Walk, lo_half=0, hi_half=None) -> np.ndarray:
    """Indices i of walk edges both of whose half-edges are covered by the
    half-step window [lo_half, hi_half]."""
    if hi_half is None:
        hi_half = walk.n_half_steps
    i_lo = max((lo_half + 1 + 1) // 2, 0)       # 2i-1 >= lo
    i_hi = min((hi_half - 1) // 2, len(walk.edges) - 1)  # 2i+1 <= hi
    return np.arange(i_lo, i_hi + 1, dtype=np.int64)


def gamma_hexes(dom_or_window, walk: Walk, lo_half=0, hi_half=None) -> np.ndarray:
    """Mask of hexagons sharing a full edge with the walk segment."""
    if isinstance(dom_or_window, HexDomain):
        win = dom_or_window.window
        restrict = dom_or_window.hex_mask
    else:
        win = dom_or_window
        restrict = None
    idx = full_edge_indices(walk, lo_half, hi_half)
    gamma = np.zeros(win.n_hex, dtype=bool)
    for e in walk.edges[idx]:
        for h in win.edge_hex[e]:
            if h >= 0 and (restrict is None or restrict[h]):
                gamma[h] = True
    return gamma


def hull_of_walk(dom_or_window, walk: Walk, lo_half=0, hi_half=None):
    """Hexes of the hull of a walk segment: the hexagons sharing a full edge
    with it plus everything those enclose.  Returns a set of HexCoord."""
    win = dom_or_window.window if isinstance(dom_or_window, HexDomain) \
        else dom_or_window
    gamma = gamma_hexes(dom_or_window, walk, lo_half, hi_half)
    seen = np.zeros(win.n_hex, dtype=np.uint8)
    queue = np.empty(win.n_hex, dtype=np.int32)
    seen[gamma] = 1
    _flood_outside(win, seen, queue)
    return {win.hex_coord(h) for h in np.flatnonzero(seen != 2)}


def _flood_outside(win: Window, seen, queue):
    nbr = _hex_nbr(win)
    head = tail = 0
    for h in _rim_hexes(win):
        if seen[h] == 0:
            seen[h] = 2
            queue[tail] = h
            tail += 1
    while head < tail:
        h = queue[head]
        head += 1
        for k in range(6):
            nb = nbr[h, k]
            if nb >= 0 and seen[nb] == 0:
                seen[nb] = 2
                queue[tail] = nb
                tail += 1


def _hex_nbr(win: Window) -> np.ndarray:
    nbr = getattr(win, "_hex_nbr", None)
    if nbr is None:
        nbr = np.full((win.n_hex, 6), -1, dtype=np.int32)
        for h in range(win.n_hex):
            for k in range(6):
                e = win.hex_edge[h, k]
                a, b = win.edge_hex[e]
                nbr[h, k] = b if a == h else a
        win._hex_nbr = nbr
    return nbr


def _rim_hexes(win: Window) -> np.ndarray:
    rim = getattr(win, "_rim_hexes", None)
    if rim is None:
        mask = np.zeros(win.n_hex, dtype=bool)
        for e in np.flatnonzero(win.frame_edge):
            for h in win.edge_hex[e]:
                if h >= 0:
                    mask[h] = True
        rim = np.flatnonzero(mask).astype(np.int32)
        win._rim_hexes = rim
    return rim


def _vert_hexes(win: Window):
    vh = getattr(win, "_vert_hexes", None)
    if vh is None:
        vh = np.full((win.n_vert, 3), -1, dtype=np.int32)
        cnt = np.zeros(win.n_vert, dtype=np.int32)
        for h in range(win.n_hex):
            for j in range(6):
                v = win.hex_corner[h, j]
                vh[v, cnt[v]] = h
                cnt[v] += 1
        win._vert_hexes = vh
    return vh


# ---------------------------------------------------------------------------
# reference dynamics: per-step connectivity queries, exact but slow

class ReferenceWalker:
    """Pure-python walker resolving every step by connectivity.

    The same decision order and coin mapping as the kernel, so a fast and a
    reference run with one key produce identical trajectories.  Enumeration
    drives it through `options()`/`apply()` with explicit decision outcomes.
    """

    def __init__(self, dom: HexDomain, direction: str, a_edge: int,
                 b_edge: int, strict: bool = True):
        self.dom = dom
        self.win = dom.window
        self.direction = direction
        self.a_edge = a_edge
        self.b_edge = b_edge
        self.strict = strict
        kit = radial_kit(dom, a_edge)
        self.kit = kit
        self.graph_in = kit.graph_in
        self.reset()

    def reset(self):
        kit = self.kit
        self.used = set([kit.pre_used_half])
        self.color = {}
        self.first_hit_done = False
        self.n_colored = 0
        self.n_forced = 0
        self.n_draws = 0
        if self.direction == "ab":
            self.edges = [self.a_edge]
            self.side = kit.a_side_in
            self.target = self.b_edge
        else:
            self.edges = [self.b_edge]
            self.side = -1
            self.target = self.a_edge
        self.verts = []
        self.flags = [255]

    # -- state snapshots for enumeration ------------------------------------
    def snapshot(self):
        return (set(self.used), dict(self.color), self.first_hit_done,
                self.n_colored, self.n_forced, self.n_draws,
                list(self.edges), self.side, list(self.verts),
                list(self.flags))

    def restore(self, snap):
        (used, color, fh, nc, nf, nd, edges, side, verts, flags) = snap
        self.used = set(used)
        self.color = dict(color)
        self.first_hit_done = fh
        self.n_colored = nc
        self.n_forced = nf
        self.n_draws = nd
        self.edges = list(edges)
        self.side = side
        self.verts = list(verts)
        self.flags = list(flags)

    # -- graph helpers -------------------------------------------------------
    def _half(self, e, v):
        return 2 * e + (0 if self.win.edge_v[e, 0] == v else 1)

    def reachable(self, src_edge, extra_used, target_edge) -> bool:
        win = self.win
        used = self.used
        seen = {src_edge}
        stack = [src_edge]
        while stack:
            e = stack.pop()
            if e == target_edge:
                return True
            for s in range(2):
                he = 2 * e + s
                if he in used or he in extra_used:
                    continue
                v = win.edge_v[e, s]
                for e2 in (win.he_left[he], win.he_right[he]):
                    if e2 < 0 or not self.graph_in[e2] or e2 in seen:
                        continue
                    h2 = self._half(e2, v)
                    if h2 in used or h2 in extra_used:
                        continue
                    seen.add(int(e2))
                    stack.append(int(e2))
        return False

    def allowable(self):
        """Allowable continuations from the tip: list of (edge, is_left)."""
        win = self.win
        cur = self.edges[-1]
        he = 2 * cur + self.side
        v = win.edge_v[cur, self.side]
        out = []
        cands = []
        for e2, is_left in ((win.he_left[he], True), (win.he_right[he], False)):
            if e2 < 0 or not self.graph_in[e2]:
                continue
            h2 = self._half(e2, v)
            if h2 in self.used:
                continue
            cands.append((int(e2), is_left, h2))
        extra = {he} | {c[2] for c in cands}
        for e2, is_left, h2 in cands:
            if e2 == self.target or self.reachable(e2, extra, self.target):
                out.append((e2, is_left))
        return out

    def ahead_hex(self):
        he = 2 * self.edges[-1] + self.side
        ah = int(self.win.he_ahead[he])
        return ah

    def done(self):
        return self.edges[-1] == self.target

    # -- decision surface ----------------------------------------------------
    def options(self):
        """('done',) | ('forced', edge, is_left) |
        ('coin', kind, left_edge, right_edge) | ('fan', [(edge, side), x4])

        kind: 'color' (coin colors the ahead hexagon) or 'firsthit'.
        """
        if self.done():
            return ("done",)
        if self.side < 0:
            win = self.win
            e = self.edges[0]
            for s in range(2):
                he = 2 * e + s
                for e2 in (win.he_left[he], win.he_right[he]):
                    if e2 < 0 or not self.graph_in[e2]:
                        raise WalkError("interior start without a 4-way fan")
            return ("fan", None)
        allow = self.allowable()
        if len(allow) == 0:
            raise WalkError("no allowable continuation (stuck)")
        ah = self.ahead_hex()
        ahead_in = ah >= 0 and bool(self.kit.hex_in[ah])
        if len(allow) == 1:
            e2, is_left = allow[0]
            if self.strict and ahead_in and ah not in self.color:
                if self.direction == "ab":
                    raise WalkError(
                        "forced step with an uncolored in-domain hexagon ahead")
            if self.strict and ahead_in and ah in self.color:
                want_left = (self.color[ah] == BLUE) == (self.direction == "ab")
                if is_left != want_left:
                    raise WalkError("forced step contradicts the stored color")
            return ("forced", e2, is_left)
        # two allowable continuations
        left = next(e for e, isl in allow if isl)
        right = next(e for e, isl in allow if not isl)
        if ahead_in:
            if self.strict and ah in self.color:
                raise WalkError("branching step with a colored hexagon ahead")
            return ("coin", "color", left, right)
        if self.direction == "ba" and not self.first_hit_done:
            return ("coin", "firsthit", left, right)
        raise WalkError("branching step outside the domain after first hit")

    def apply(self, opt, outcome):
        """Advance one step.  outcome: fan index 0-3, or blue 0/1 for coins,
        ignored for forced steps."""
        win = self.win
        if opt[0] == "fan":
            b0, b1 = outcome >> 1, outcome & 1
            self.n_draws += 2
            e = self.edges[0]
            s = b0
            he = 2 * e + s
            v = int(win.edge_v[e, s])
            e2 = int(win.he_left[he]) if b1 == 1 else int(win.he_right[he])
            self.used.add(he)
            h2 = self._half(e2, v)
            self.used.add(h2)
            self.verts.append(v)
            self.edges.append(e2)
            self.flags.append(10 + 2 * b0 + b1)
            self.side = 1 - (h2 - 2 * e2)
            return
        cur = self.edges[-1]
        he = 2 * cur + self.side
        v = int(win.edge_v[cur, self.side])
        if opt[0] == "forced":
            e2, is_left = opt[1], opt[2]
            self.n_forced += 1
            flag = 0
        else:
            _, kind, left, right = opt
            blue = outcome
            self.n_draws += 1
            if kind == "color":
                ah = self.ahead_hex()
                self.color[ah] = BLUE if blue else YELLOW
                self.n_colored += 1
                want_left = bool(blue) == (self.direction == "ab")
            else:
                self.first_hit_done = True
                want_left = bool(blue)
            e2 = left if want_left else right
            flag = 1 if want_left else 2
        h2 = self._half(e2, v)
        self.used.add(he)
        self.used.add(h2)
        self.verts.append(v)
        self.edges.append(int(e2))
        self.flags.append(flag)
        self.side = 1 - (h2 - 2 * e2)

    def play(self, key):
        """Drive with counter-based coins, mirroring the kernel bit-for-bit."""
        ctr = 0
        while True:
            opt = self.options()
            if opt[0] == "done":
                break
            if opt[0] == "fan":
                b0 = coin_py(key, ctr)
                b1 = coin_py(key, ctr + 1)
                ctr += 2
                self.apply(opt, 2 * b0 + b1)
            elif opt[0] == "forced":
                self.apply(opt, 0)
            else:
                b = coin_py(key, ctr)
                ctr += 1
                self.apply(opt, b)
        return self


def _reference_walk(dom, direction, start_edge, other_edge, seed, walk_id):
    if direction == "ab":
        a_edge, b_edge = start_edge, other_edge
    else:
        b_edge, a_edge = start_edge, other_edge
    rw = ReferenceWalker(dom, direction, a_edge, b_edge)
    rw.play(stream_key_py(seed, walk_id))
    edges = np.array(rw.edges, dtype=np.int32)
    walk = Walk(
        window=dom.window, delta=dom.delta, edges=edges,
        verts=np.array(rw.verts, dtype=np.int32),
        flags=np.array(rw.flags, dtype=np.uint8),
        direction=direction, start_edge=start_edge,
        target_edge=other_edge, seed=(seed, walk_id),
        n_colored=rw.n_colored, n_forced=rw.n_forced, n_draws=rw.n_draws,
        l_geometric=geometric_l(dom, edges), domain_hash=dom.domain_hash())
    coloring = Coloring({dom.window.hex_coord(h): COLOR_NAMES[c]
                         for h, c in rw.color.items()})
    return walk, coloring


def allowable_midedges(dom: HexDomain, walk_edges, target, a_appendage=None):
    """Allowable continuations from the tip of a partial walk.

    walk_edges is the mid-edge sequence so far (ids or MidEdge); target and
    the optional boundary appendage identify the connectivity goal.  The tip
    orientation comes from the last crossed vertex, or from the boundary
    attachment for a single-edge walk started on the ring.
    """
    edges = [_edge_id(e) for e in walk_edges]
    target_edge = _edge_id(target)
    if a_appendage is not None:
        a_edge = _edge_id(a_appendage)
        direction = "ba" if target_edge == a_edge else "ab"
    else:
        a_edge = edges[0]
        direction = "ab"
    rw = ReferenceWalker(dom, direction, a_edge,
                         target_edge if direction == "ab" else edges[0],
                         strict=False)
    rw.target = target_edge
    win = dom.window
    rw.edges = list(edges)
    rw.verts = []
    rw.used = set([rw.kit.pre_used_half])
    if len(edges) == 1:
        if not dom.ring_edge[edges[0]] and a_appendage is None:
            raise ValueError("single-edge interior walk starts with a 4-way fan")
        rw.side = rw.kit.a_side_in
    else:
        for i in range(len(edges) - 1):
            v = win.shared_vertex(edges[i], edges[i + 1])
            rw.used.add(rw._half(edges[i], v))
            rw.used.add(rw._half(edges[i + 1], v))
            rw.verts.append(v)
        last_v = rw.verts[-1]
        e = edges[-1]
        rw.side = 1 - (rw._half(e, last_v) - 2 * e)
    if rw.done():
        return set()
    return {win.midedge(e) for e, _ in rw.allowable()}


# ---------------------------------------------------------------------------
# walk files

def save_walk(walk: Walk, path):
    if walk.seed is None:
        raise ValueError("only seeded walks can be saved")
    lines = [
        WALK_FILE_MAGIC,
        f"delta={walk.delta!r}",
        f"domain={walk.domain_hash or ''}",
        f"direction={walk.direction}",
        f"seed={walk.seed[0]}:{walk.seed[1]}",
        f"start_edge={walk.start_edge}",
        f"target_edge={walk.target_edge}",
        f"turns={walk.turn_string()}",
        "",
    ]
    with open(path, "w") as f:
        f.write("\n".join(lines))


def load_walk(path, dom: HexDomain) -> Walk:
    """Replay a saved walk in its domain; the stored turn string must match
    the regenerated one bit for bit."""
    with open(path) as f:
        lines = [ln.rstrip("\n") for ln in f]
    if not lines or lines[0] != WALK_FILE_MAGIC:
        raise ValueError("not a walk file")
    fields = dict(ln.partition("=")[::2] for ln in lines[1:] if "=" in ln)
    delta = float(fields["delta"])
    if abs(delta - dom.delta) > 1e-12 * dom.delta:
        raise ValueError("mesh mismatch")
    if fields["domain"] and fields["domain"] != dom.domain_hash():
        raise ValueError("domain hash mismatch")
    master, _, wid = fields["seed"].partition(":")
    direction = fields["direction"]
    start_edge = int(fields["start_edge"])
    target_edge = int(fields["target_edge"])
    if direction == "ab":
        walk, _ = radial_explore_ab(dom, start_edge, target_edge,
                                    int(master), int(wid))
    elif direction == "ba":
        walk, _ = radial_explore_ba(dom, start_edge, target_edge,
                                    int(master), int(wid))
    else:
        raise ValueError(f"unsupported direction {direction!r}")
    if walk.turn_string() != fields["turns"]:
        raise ValueError("stored turn string does not match the replay")
    return walk
