"""Numba kernels: walk sampling, hulls, region tracking, random walks, traces.

The walk kernel follows the local branching rule: the hexagon straight ahead
across the upcoming vertex decides each step.  If it is uncolored and inside
the domain, a fair coin colors it and the walk turns left on blue (mirrored
for walks started at the interior point, which turn right on blue).  If it is
already colored, the turn is forced by that color.  If it lies outside the
domain, the turn is forced by connectivity and resolved with an alternating
breadth-first search whose cost is bounded by the smaller of the two sides,
so all boundary contacts together cost O(domain) per walk.

Interior-started walks additionally re-examine branching steps whose local
ring around the ahead-hexagon is blocked by earlier half-edges: there the two
candidate continuations may sit in different components and the step is then
forced with the ahead-hexagon left uncolored.
"""

import numpy as np
from numba import njit

from ._rng import coin, uniform

U64_1 = np.uint64(1)

# walk status codes
OK = 0
STUCK = 1
FORCED_BLOCKED = 2
BAD_FAN = 3
CAPACITY = 4
MEET_IN_FORCED = 5

# walk modes
FWD_RADIAL = 0
REV_RADIAL = 1
FULLPLANE = 2

# mutant flags
MUT_SKIP_FIRST_HIT_COIN = 1


@njit(cache=True, nogil=True, inline="always")
def _side_of(edge_v, e, v):
    return 0 if edge_v[e, 0] == v else 1


@njit(cache=True, nogil=True, inline="always")
def _touch_hexes(e, edge_hex, hex_in, hex_seen):
    c = 0
    for t in range(2):
        h = edge_hex[e, t]
        if h >= 0 and hex_in[h] != 0 and hex_seen[h] == 0:
            hex_seen[h] = 1
            c += 1
    return c


@njit(cache=True, nogil=True)
def _bfs_resolve(candL, candR, h1, h2L, h2R, target_edge, target_is_frame,
                 edge_v, he_left, he_right, used_half, graph_in, frame_edge,
                 stamp, epoch, queue_a, queue_b, forced_ctx):
    """Alternating BFS from the two candidate mid-edges in the pruned graph.

    Returns (allowL, allowR); (-1, -1) if the frontiers touch in a context
    where exactly one side must survive (broken invariant).
    """
    used_half[h1] = 1
    used_half[h2L] = 1
    used_half[h2R] = 1

    ea = epoch
    eb = epoch + 1
    stamp[candL] = ea
    stamp[candR] = eb
    queue_a[0] = candL
    queue_b[0] = candR
    head_a = 0
    tail_a = 1
    head_b = 0
    tail_b = 1
    found_a = (not target_is_frame and candL == target_edge) or \
        (target_is_frame and frame_edge[candL] != 0)
    found_b = (not target_is_frame and candR == target_edge) or \
        (target_is_frame and frame_edge[candR] != 0)
    dead_a = False
    dead_b = False
    met = False

    while not met and not dead_a and not dead_b and not (found_a and found_b):
        if forced_ctx and (found_a or found_b):
            break
        for turn in range(2):
            if turn == 0:
                if head_a >= tail_a:
                    dead_a = True
                    continue
                e = queue_a[head_a]
                head_a += 1
                own, other = ea, eb
            else:
                if head_b >= tail_b:
                    dead_b = True
                    continue
                e = queue_b[head_b]
                head_b += 1
                own, other = eb, ea
            for s in range(2):
                he = 2 * e + s
                if used_half[he] != 0:
                    continue
                v = edge_v[e, s]
                for pick in range(2):
                    e2 = he_left[he] if pick == 0 else he_right[he]
                    if e2 < 0 or graph_in[e2] == 0:
                        continue
                    s2 = _side_of(edge_v, e2, v)
                    if used_half[2 * e2 + s2] != 0:
                        continue
                    st = stamp[e2]
                    if st == own:
                        continue
                    if st == other:
                        met = True
                        continue
                    stamp[e2] = own
                    hit = (not target_is_frame and e2 == target_edge) or \
                        (target_is_frame and frame_edge[e2] != 0)
                    if turn == 0:
                        queue_a[tail_a] = e2
                        tail_a += 1
                        found_a = found_a or hit
                    else:
                        queue_b[tail_b] = e2
                        tail_b += 1
                        found_b = found_b or hit

    used_half[h1] = 0
    used_half[h2L] = 0
    used_half[h2R] = 0

    if met:
        if forced_ctx:
            return -1, -1
        return 1, 1
    if forced_ctx:
        if found_a:
            return 1, 0
        if found_b:
            return 0, 1
        if dead_a and dead_b:
            return 0, 0
        if dead_a:
            return 0, 1
        return 1, 0
    if found_a and found_b:
        return 1, 1
    if dead_a and not found_a:
        return 0, 1
    if dead_b and not found_b:
        return 1, 0
    if found_a:
        return 1, 0
    return 0, 1


@njit(cache=True, nogil=True)
def run_walk(mode, start_edge, start_he_side, pre_used_half, target_edge,
             stop_r2, stop_mode,
             edge_v, edge_hex, he_left, he_right, he_ahead, he_ahead_corner,
             ring_halves, edge_mx, edge_my, graph_in, hex_in, frame_edge,
             bnd_vert, key, coin_bias, mutant_flags,
             used_half, color, hex_seen, stamp, queue_a, queue_b,
             out_edges, out_verts, out_flags):
    """Sample one exploration walk.

    Returns (n_edges, n_colored, n_forced, n_draws, l_count, anomalies,
    status).  out_edges[:n_edges] is the mid-edge sequence; out_verts[i] is
    the vertex crossed between edges i and i+1.  A negative start_he_side
    requests the 4-way fan start (two fair bits).  stop_mode: 0 none / stop
    at target mid-edge, 1 stop on first crossed vertex with bnd_vert set,
    2 stop at first mid-edge with |m|^2 >= stop_r2.  l_count is the number
    of in-domain hexagons sharing at least a half-edge with the walk.
    out_flags[i] describes the step arriving at edges[i]: 0 forced, 1 coined
    left, 2 coined right, 10+2*b0+b1 for the fan start.
    """
    used_half[:] = 0
    color[:] = 0
    hex_seen[:] = 0
    stamp[:] = 0
    epoch = 1
    if pre_used_half >= 0:
        used_half[pre_used_half] = 1

    n_colored = 0
    n_forced = 0
    ctr = np.uint64(0)
    anomalies = 0
    l_count = 0
    first_hit_done = False

    cap = out_edges.shape[0]
    out_edges[0] = start_edge
    out_flags[0] = 255
    n = 1
    cur = start_edge
    cur_side = start_he_side
    l_count += _touch_hexes(cur, edge_hex, hex_in, hex_seen)

    if start_he_side < 0:
        b0 = coin(key, ctr)
        ctr += U64_1
        b1 = coin(key, ctr)
        ctr += U64_1
        cur_side = 0 if b0 == 0 else 1
        he = 2 * cur + cur_side
        if used_half[he] != 0:
            return n, n_colored, n_forced, int(ctr), l_count, anomalies, BAD_FAN
        v = edge_v[cur, cur_side]
        eL = he_left[he]
        eR = he_right[he]
        if eL < 0 or eR < 0 or graph_in[eL] == 0 or graph_in[eR] == 0:
            return n, n_colored, n_forced, int(ctr), l_count, anomalies, BAD_FAN
        nxt = eL if b1 == 1 else eR
        s2 = _side_of(edge_v, nxt, v)
        used_half[he] = 1
        used_half[2 * nxt + s2] = 1
        out_verts[0] = v
        out_edges[1] = nxt
        out_flags[1] = 10 + 2 * int(b0) + int(b1)
        n = 2
        l_count += _touch_hexes(nxt, edge_hex, hex_in, hex_seen)
        cur = nxt
        cur_side = 1 - s2

    while True:
        if stop_mode != 2 and cur == target_edge:
            return n, n_colored, n_forced, int(ctr), l_count, anomalies, OK
        if stop_mode == 2:
            dx = edge_mx[cur]
            dy = edge_my[cur]
            if dx * dx + dy * dy >= stop_r2:
                return n, n_colored, n_forced, int(ctr), l_count, anomalies, OK

        he = 2 * cur + cur_side
        v = edge_v[cur, cur_side]

        if stop_mode == 1 and bnd_vert[v] != 0:
            out_verts[n - 1] = v
            return n, n_colored, n_forced, int(ctr), l_count, anomalies, OK

        eL = he_left[he]
        eR = he_right[he]
        ah = he_ahead[he]
        okL = eL >= 0 and graph_in[eL] != 0 and \
            used_half[2 * eL + _side_of(edge_v, eL, v)] == 0
        okR = eR >= 0 and graph_in[eR] != 0 and \
            used_half[2 * eR + _side_of(edge_v, eR, v)] == 0
        if not okL and not okR:
            return n, n_colored, n_forced, int(ctr), l_count, anomalies, STUCK

        ahead_in = ah >= 0 and hex_in[ah] != 0
        chosen = -1
        was_forced = False

        if ahead_in and color[ah] != 0:
            want_left = (color[ah] == 1) == (mode != REV_RADIAL)
            ok = okL if want_left else okR
            if not ok:
                return (n, n_colored, n_forced, int(ctr), l_count, anomalies,
                        FORCED_BLOCKED)
            chosen = eL if want_left else eR
            was_forced = True
        elif ahead_in:
            two_ok = okL and okR
            ring_free = two_ok
            if two_ok and mode == REV_RADIAL:
                jstar = he_ahead_corner[he]
                lo = 2 * jstar + 1
                hi = (2 * jstar + 2) % 12
                for t in range(12):
                    if t == lo or t == hi:
                        continue
                    if used_half[ring_halves[ah, t]] != 0:
                        ring_free = False
                        break
            if ring_free:
                if coin_bias >= 0.0:
                    blue = 1 if uniform(key, ctr) < coin_bias else 0
                else:
                    blue = int(coin(key, ctr))
                ctr += U64_1
                color[ah] = 1 if blue == 1 else 2
                n_colored += 1
                want_left = (blue == 1) == (mode != REV_RADIAL)
                chosen = eL if want_left else eR
            elif not two_ok:
                if mode != REV_RADIAL:
                    anomalies += 1
                chosen = eL if okL else eR
                was_forced = True
            else:
                h2L = 2 * eL + _side_of(edge_v, eL, v)
                h2R = 2 * eR + _side_of(edge_v, eR, v)
                aL, aR = _bfs_resolve(
                    eL, eR, he, h2L, h2R, target_edge, mode == FULLPLANE,
                    edge_v, he_left, he_right, used_half, graph_in,
                    frame_edge, stamp, epoch, queue_a, queue_b, False)
                epoch += 2
                if aL == 1 and aR == 1:
                    if coin_bias >= 0.0:
                        blue = 1 if uniform(key, ctr) < coin_bias else 0
                    else:
                        blue = int(coin(key, ctr))
                    ctr += U64_1
                    color[ah] = 1 if blue == 1 else 2
                    n_colored += 1
                    want_left = (blue == 1) == (mode != REV_RADIAL)
                    chosen = eL if want_left else eR
                else:
                    if mode != REV_RADIAL:
                        anomalies += 1
                    chosen = eL if aL == 1 else eR
                    was_forced = True
        else:
            if mode == REV_RADIAL and not first_hit_done:
                first_hit_done = True
                if not (okL and okR):
                    return (n, n_colored, n_forced, int(ctr), l_count,
                            anomalies, BAD_FAN)
                if mutant_flags & MUT_SKIP_FIRST_HIT_COIN:
                    chosen = eL
                else:
                    b = coin(key, ctr)
                    ctr += U64_1
                    chosen = eL if b == 1 else eR
            elif okL and okR:
                h2L = 2 * eL + _side_of(edge_v, eL, v)
                h2R = 2 * eR + _side_of(edge_v, eR, v)
                aL, aR = _bfs_resolve(
                    eL, eR, he, h2L, h2R, target_edge, mode == FULLPLANE,
                    edge_v, he_left, he_right, used_half, graph_in,
                    frame_edge, stamp, epoch, queue_a, queue_b, True)
                epoch += 2
                if aL < 0:
                    return (n, n_colored, n_forced, int(ctr), l_count,
                            anomalies, MEET_IN_FORCED)
                if aL == 0 and aR == 0:
                    return (n, n_colored, n_forced, int(ctr), l_count,
                            anomalies, STUCK)
                chosen = eL if aL == 1 else eR
                was_forced = True
            else:
                chosen = eL if okL else eR
                was_forced = True

        if was_forced:
            n_forced += 1
        if n + 1 > cap:
            return n, n_colored, n_forced, int(ctr), l_count, anomalies, CAPACITY
        s2 = _side_of(edge_v, chosen, v)
        used_half[he] = 1
        used_half[2 * chosen + s2] = 1
        out_verts[n - 1] = v
        out_edges[n] = chosen
        out_flags[n] = 0 if was_forced else (1 if chosen == eL else 2)
        n += 1
        l_count += _touch_hexes(chosen, edge_hex, hex_in, hex_seen)
        cur = chosen
        cur_side = 1 - s2


@njit(cache=True, nogil=True)
def flood_hull(full_edges, edge_hex, hex_nbr, n_hex, outside_seed, seen, queue):
    """Hull of a walk segment: hexes sharing an edge with it plus everything
    not connected to the frame seeds in the complement.  seen: 1 on the
    segment hexes, 2 on the outside component, 0 on enclosed hexes."""
    seen[:] = 0
    for i in range(full_edges.shape[0]):
        e = full_edges[i]
        for t in range(2):
            h = edge_hex[e, t]
            if h >= 0:
                seen[h] = 1
    head = 0
    tail = 0
    for i in range(outside_seed.shape[0]):
        h = outside_seed[i]
        if seen[h] == 0:
            seen[h] = 2
            queue[tail] = h
            tail += 1
    while head < tail:
        h = queue[head]
        head += 1
        for k in range(6):
            nb = hex_nbr[h, k]
            if nb >= 0 and seen[nb] == 0:
                seen[nb] = 2
                queue[tail] = nb
                tail += 1
    count = 0
    for h in range(n_hex):
        if seen[h] != 2:
            count += 1
    return count


@njit(cache=True, nogil=True, inline="always")
def _live_arcs(h, hex_nbr, live):
    """Number of cyclic blocks of live neighbors around hexagon h."""
    arcs = 0
    prev = live[hex_nbr[h, 5]] != 0 if hex_nbr[h, 5] >= 0 else False
    for k in range(6):
        nb = hex_nbr[h, k]
        cur = live[nb] != 0 if nb >= 0 else False
        if cur and not prev:
            arcs += 1
        prev = cur
    return arcs


@njit(cache=True, nogil=True)
def _hex_bfs(src0, src1, target, live, hex_nbr, stamp, epoch, queue):
    """BFS over live hexes from up to two sources; True if target reached."""
    head = 0
    tail = 0
    if src0 >= 0 and live[src0] != 0:
        stamp[src0] = epoch
        queue[tail] = src0
        tail += 1
    if src1 >= 0 and src1 != src0 and live[src1] != 0:
        stamp[src1] = epoch
        queue[tail] = src1
        tail += 1
    if tail == 0:
        return False
    if (src0 == target and live[target] != 0) or \
            (src1 == target and live[target] != 0):
        return True
    while head < tail:
        h = queue[head]
        head += 1
        for k in range(6):
            nb = hex_nbr[h, k]
            if nb >= 0 and live[nb] != 0 and stamp[nb] != epoch:
                stamp[nb] = epoch
                if nb == target:
                    return True
                queue[tail] = nb
                tail += 1
    return False


@njit(cache=True, nogil=True)
def construction_phase(walk_edges, n_edges, start_half, live,
                       b0, b1, z_attach, edge_hex, hex_nbr,
                       stamp, queue, epoch0):
    """Advance one disconnection phase over a completed walk.

    Removes, half-step by half-step, the hexagons sharing a fully covered
    edge with the walk segment starting at start_half, until the target
    attachment hexagon is cut off from the interior attachment hexagons.
    Returns (tau_half, epoch, status): status 0 found, 1 walk exhausted,
    2 interior attachment swallowed.
    """
    epoch = epoch0
    i0 = start_half // 2 + 1
    for i in range(i0, n_edges - 1):
        changed = False
        pinch = False
        for t in range(2):
            h = edge_hex[walk_edges[i], t]
            if h >= 0 and live[h] != 0:
                live[h] = 0
                changed = True
                if h == z_attach:
                    return 2 * i + 1, epoch, 0
                if _live_arcs(h, hex_nbr, live) >= 2:
                    pinch = True
        if not changed:
            continue
        if live[b0] == 0 and (b1 < 0 or live[b1] == 0):
            return 2 * i + 1, epoch, 2
        if pinch:
            epoch += 1
            if not _hex_bfs(b0, b1, z_attach, live, hex_nbr, stamp, epoch,
                            queue):
                return 2 * i + 1, epoch, 0
    return 2 * (n_edges - 1), epoch, 1


@njit(cache=True, nogil=True)
def component_mask(src0, src1, live, hex_nbr, out_mask, queue):
    """Mark the live component containing the source hexes; returns size."""
    out_mask[:] = 0
    head = 0
    tail = 0
    size = 0
    if src0 >= 0 and live[src0] != 0:
        out_mask[src0] = 1
        queue[tail] = src0
        tail += 1
        size += 1
    if src1 >= 0 and src1 != src0 and live[src1] != 0:
        out_mask[src1] = 1
        queue[tail] = src1
        tail += 1
        size += 1
    while head < tail:
        h = queue[head]
        head += 1
        for k in range(6):
            nb = hex_nbr[h, k]
            if nb >= 0 and live[nb] != 0 and out_mask[nb] == 0:
                out_mask[nb] = 1
                queue[tail] = nb
                tail += 1
                size += 1
    return size


@njit(cache=True, nogil=True)
def scan_entry(walk_edges, walk_verts, n_edges, from_half, comp,
               edge_hex, vert_edges, edge_v):
    """First half-step >= from_half whose walk position touches the closed
    region given by comp (mask over hexes); -1 if none."""
    for half in range(from_half, 2 * n_edges - 1):
        if half % 2 == 0:
            e = walk_edges[half // 2]
            for t in range(2):
                h = edge_hex[e, t]
                if h >= 0 and comp[h] != 0:
                    return half
        else:
            v = walk_verts[half // 2]
            for j in range(3):
                e = vert_edges[v, j]
                if e < 0:
                    continue
                for t in range(2):
                    h = edge_hex[e, t]
                    if h >= 0 and comp[h] != 0:
                        return half
    return -1


@njit(cache=True, nogil=True)
def srw_until_exit(key, r_lat2, grid, m, queue):
    """Simple random walk on the square lattice from the origin to its first
    vertex with |x|^2+|y|^2 >= r_lat2.  Marks visited vertices in grid
    ((2m+1)^2, reset here), floods the complement from the border, and
    returns (exit_x, exit_y, n_steps, hull_count)."""
    side = 2 * m + 1
    grid[:] = 0
    x = 0
    y = 0
    grid[(y + m) * side + (x + m)] = 1
    ctr = np.uint64(0)
    steps = 0
    while x * x + y * y < r_lat2:
        d = int(uniform(key, ctr) * 4.0)
        ctr += U64_1
        if d == 0:
            x += 1
        elif d == 1:
            x -= 1
        elif d == 2:
            y += 1
        else:
            y -= 1
        grid[(y + m) * side + (x + m)] = 1
        steps += 1
    head = 0
    tail = 0
    for i in range(side):
        for cell in (i, (side - 1) * side + i, i * side, i * side + side - 1):
            if grid[cell] == 0:
                grid[cell] = 2
                queue[tail] = cell
                tail += 1
    while head < tail:
        c = queue[head]
        head += 1
        cx = c % side
        cy = c // side
        if cx > 0 and grid[c - 1] == 0:
            grid[c - 1] = 2
            queue[tail] = c - 1
            tail += 1
        if cx < side - 1 and grid[c + 1] == 0:
            grid[c + 1] = 2
            queue[tail] = c + 1
            tail += 1
        if cy > 0 and grid[c - side] == 0:
            grid[c - side] = 2
            queue[tail] = c - side
            tail += 1
        if cy < side - 1 and grid[c + side] == 0:
            grid[c + side] = 2
            queue[tail] = c + side
            tail += 1
    hull = 0
    for c in range(side * side):
        if grid[c] != 2:
            hull += 1
    return x, y, steps, hull


@njit(cache=True, nogil=True, inline="always")
def _radial_slit_pull(p, expdt):
    """Inverse of the elementary radial slit map with driving point 1 and
    capacity log(expdt); pulls a point of the disk back one step."""
    w = (1.0 + p) / (1.0 - p)
    yt = w * w
    y0 = expdt * yt / (1.0 + (expdt - 1.0) * yt)
    w0 = np.sqrt(y0)
    return (w0 - 1.0) / (w0 + 1.0)


@njit(cache=True, nogil=True)
def radial_trace_points(ucum, dt, sample_every, seed_shrink, r_stop,
                        out_idx, out_pts):
    """Radial Loewner trace by composing inverse elementary slit maps.

    ucum[k] is the driving value at time k*dt (piecewise constant on steps).
    Trace points are computed at steps 0, sample_every, 2*sample_every, ...
    and the final step.  Stops early once |point| <= r_stop (r_stop <= 0
    disables).  Returns the number of points written.
    """
    K = ucum.shape[0] - 1
    expdt = np.exp(dt)
    m = 0
    k = 0
    while True:
        p = (1.0 - seed_shrink) * np.exp(1j * ucum[k])
        for j in range(k, 0, -1):
            rot = np.exp(1j * ucum[j - 1])
            p = rot * _radial_slit_pull(p / rot, expdt)
        out_idx[m] = k
        out_pts[m] = p
        m += 1
        if r_stop > 0.0 and np.abs(p) <= r_stop:
            break
        if k >= K:
            break
        k = k + sample_every
        if k > K:
            k = K
    return m


@njit(cache=True, nogil=True, inline="always")
def _chordal_slit_pull(p, u, fourdt):
    d = p - u
    return u + 1j * np.sqrt(fourdt - d * d)


@njit(cache=True, nogil=True)
def chordal_trace_points(ucum, dt, sample_every, seed_lift, out_idx, out_pts):
    """Chordal Loewner trace by composing inverse vertical slit maps."""
    K = ucum.shape[0] - 1
    fourdt = 4.0 * dt
    m = 0
    k = 0
    while True:
        p = ucum[k] + 1j * seed_lift
        for j in range(k, 0, -1):
            p = _chordal_slit_pull(p, ucum[j - 1], fourdt)
        out_idx[m] = k
        out_pts[m] = p
        m += 1
        if k >= K:
            break
        k = k + sample_every
        if k > K:
            k = K
    return m
