"""Hot numeric kernels with numba and pure-numpy implementations.

Three families live here:

* restricted-growth-string (RGS) enumeration of set partitions of a multirow
  ground set, with in-generator pruning of flat prefixes;
* batched assembly of the integer Gram matrices of merged diagrams and their
  exact determinants (fraction-free elimination in int64 with an overflow
  flag);
* counting of ordered embeddings of a template graph in sampled graphs.

Every public function takes a ``backend`` argument (``"numba"`` or
``"numpy"``); both paths return identical integers in identical order.
"""
from __future__ import annotations

import numpy as np

from ._accel import njit

# status codes of the batched determinant kernels
DET_OK = 0
DET_LOOP = 1
DET_OVERFLOW = 2

_OVERFLOW_GUARD = 4.0e18


# ---------------------------------------------------------------------------
# partition enumeration
# ---------------------------------------------------------------------------


@njit
def _rows_connected(masks, nb, full):
    comp = masks[0]
    changed = True
    while changed:
        changed = False
        for b in range(nb):
            m = masks[b]
            if (m & comp) != 0 and (m | comp) != comp:
                comp |= m
                changed = True
    return comp == full


@njit
def _dfs_partitions(row_of, full, prefix, nonflat, connected, hist, out, store):
    """Depth-first RGS completion of ``prefix``; returns the number emitted.

    ``hist[k]`` is incremented for every emitted partition with ``k`` blocks.
    When ``store`` is true the RGS codes are also written to ``out`` rows.
    """
    n_el = row_of.shape[0]
    plen = prefix.shape[0]
    a = np.full(n_el, -1, np.int64)
    masks = np.zeros(n_el + 1, np.int64)
    nbs = np.zeros(n_el + 1, np.int64)
    nb = 0
    for e in range(plen):
        c = prefix[e]
        bit = np.int64(1) << row_of[e]
        if c > nb or (nonflat and c < nb and (masks[c] & bit) != 0):
            return 0
        a[e] = c
        masks[c] |= bit
        if c == nb:
            nb += 1
    count = 0
    if plen == n_el:
        if (not connected) or _rows_connected(masks, nb, full):
            hist[nb] += 1
            if store:
                for e in range(n_el):
                    out[0, e] = a[e]
            count = 1
        return count
    pos = plen
    nbs[pos] = nb
    a[pos] = -1
    while pos >= plen:
        bit = np.int64(1) << row_of[pos]
        c = a[pos]
        if c >= 0:
            masks[c] ^= bit
        c += 1
        nb = nbs[pos]
        while c < nb and nonflat and (masks[c] & bit) != 0:
            c += 1
        if c > nb:
            a[pos] = -1
            pos -= 1
            continue
        a[pos] = c
        masks[c] |= bit
        newnb = nb + 1 if c == nb else nb
        if pos == n_el - 1:
            if (not connected) or _rows_connected(masks, newnb, full):
                hist[newnb] += 1
                if store:
                    for e in range(n_el):
                        out[count, e] = a[e]
                count += 1
        else:
            pos += 1
            nbs[pos] = newnb
            a[pos] = -1
    return count


def _expand_numpy(row_of, prefix, nonflat):
    """Breadth-first RGS expansion of one prefix, lexicographic output order."""
    n_el = len(row_of)
    plen = len(prefix)
    codes = np.asarray(prefix, dtype=np.int8).reshape(1, plen)
    masks = np.zeros((1, n_el + 1), dtype=np.int64)
    nb = np.zeros(1, dtype=np.int64)
    for e in range(plen):
        c = int(prefix[e])
        bit = np.int64(1) << int(row_of[e])
        if c > nb[0] or (nonflat and c < nb[0] and masks[0, c] & bit):
            return np.zeros((0, n_el), np.int8), masks[:0], nb[:0]
        masks[0, c] |= bit
        if c == nb[0]:
            nb[0] += 1
    for e in range(plen, n_el):
        bit = np.int64(1) << int(row_of[e])
        parents = []
        choices = []
        for c in range(int(nb.max()) + 1):
            ok = c <= nb
            if nonflat:
                ok &= (c == nb) | ((masks[:, c] & bit) == 0)
            idx = np.nonzero(ok)[0]
            parents.append(idx)
            choices.append(np.full(idx.size, c, dtype=np.int64))
        parent = np.concatenate(parents)
        choice = np.concatenate(choices)
        order = np.argsort(parent, kind="stable")
        parent = parent[order]
        choice = choice[order]
        codes = np.hstack([codes[parent], choice.astype(np.int8)[:, None]])
        masks = masks[parent]
        masks[np.arange(parent.size), choice] |= bit
        nb = nb[parent] + (choice == nb[parent])
    return codes, masks, nb


def _connected_numpy(masks, nb, n_rows):
    full = np.int64((1 << n_rows) - 1)
    width = masks.shape[1]
    live = np.arange(width)[None, :] < nb[:, None]
    masks = np.where(live, masks, 0)
    comp = masks[:, 0].copy()
    for _ in range(n_rows):
        touch = (masks & comp[:, None]) != 0
        comp = np.bitwise_or.reduce(np.where(touch, masks, 0), axis=1)
    return comp == full


def partitions_from_prefix(row_of, n_rows, prefix, nonflat, connected, backend, store=True):
    """Complete ``prefix`` into qualifying partitions.

    Returns ``(codes, nblocks)`` where ``codes`` has one RGS per row (int8)
    in lexicographic order.  With ``store=False`` codes is ``None`` and only
    the block counts histogram (length ``len(row_of)+1``) is returned in
    place of ``nblocks``.
    """
    row_of = np.ascontiguousarray(row_of, dtype=np.int64)
    prefix = np.ascontiguousarray(prefix, dtype=np.int64)
    n_el = row_of.shape[0]
    full = np.int64((1 << n_rows) - 1)
    if backend == "numba":
        hist = np.zeros(n_el + 2, np.int64)
        if not store:
            _dfs_partitions(row_of, full, prefix, nonflat, connected, hist,
                            np.zeros((0, n_el), np.int8), False)
            return None, hist[: n_el + 1]
        total = _dfs_partitions(row_of, full, prefix, nonflat, connected, hist,
                                np.zeros((0, n_el), np.int8), False)
        out = np.empty((total, n_el), np.int8)
        hist[:] = 0
        _dfs_partitions(row_of, full, prefix, nonflat, connected, hist, out, True)
        return out, _block_counts(out)
    codes, masks, nb = _expand_numpy(row_of, prefix, nonflat)
    if connected and len(nb):
        keep = _connected_numpy(masks, nb, n_rows)
        codes, nb = codes[keep], nb[keep]
    if not store:
        return None, np.bincount(nb, minlength=n_el + 1)[: n_el + 1].astype(np.int64)
    return codes, nb.astype(np.int64)


def _block_counts(codes):
    if codes.shape[0] == 0:
        return np.zeros(0, np.int64)
    return codes.max(axis=1).astype(np.int64) + 1


# ---------------------------------------------------------------------------
# batched Gram determinants
# ---------------------------------------------------------------------------


@njit
def _gram_dets_numba(codes, nblocks, edges, anchors, m, diag_extra):
    P = codes.shape[0]
    dets = np.zeros(P, np.int64)
    status = np.zeros(P, np.int8)
    kmax = 1
    for p in range(P):
        if nblocks[p] > kmax:
            kmax = nblocks[p]
    M = np.zeros((kmax, kmax), np.int64)
    seen = np.zeros((kmax, kmax), np.bool_)
    seen_a = np.zeros((kmax, max(m, 1)), np.bool_)
    for p in range(P):
        k = nblocks[p]
        for i in range(k):
            for j in range(k):
                M[i, j] = 0
                seen[i, j] = False
            for j in range(m):
                seen_a[i, j] = False
            M[i, i] = diag_extra
        bad = False
        for t in range(edges.shape[0]):
            bu = codes[p, edges[t, 0]]
            bv = codes[p, edges[t, 1]]
            if bu == bv:
                bad = True
                break
            if not seen[bu, bv]:
                seen[bu, bv] = True
                seen[bv, bu] = True
                M[bu, bv] = -1
                M[bv, bu] = -1
                M[bu, bu] += 1
                M[bv, bv] += 1
        if bad:
            status[p] = DET_LOOP
            continue
        for t in range(anchors.shape[0]):
            b = codes[p, anchors[t, 0]]
            j = anchors[t, 1]
            if not seen_a[b, j]:
                seen_a[b, j] = True
                M[b, b] += 1
        # fraction-free elimination without pivoting: the matrices are
        # positive semidefinite, so a zero leading minor means det = 0
        prev = np.int64(1)
        det = np.int64(0)
        for s in range(k):
            piv = M[s, s]
            if piv == 0:
                det = 0
                prev = 0
                break
            for i in range(s + 1, k):
                for j in range(s + 1, k):
                    x = float(piv) * float(M[i, j])
                    y = float(M[i, s]) * float(M[s, j])
                    if abs(x) > _OVERFLOW_GUARD or abs(y) > _OVERFLOW_GUARD:
                        status[p] = DET_OVERFLOW
                    M[i, j] = (piv * M[i, j] - M[i, s] * M[s, j]) // prev
            prev = piv
        if prev != 0:
            det = M[k - 1, k - 1]
        dets[p] = det
    return dets, status


def _gram_dets_numpy(codes, nblocks, edges, anchors, m, diag_extra):
    P = codes.shape[0]
    dets = np.zeros(P, np.int64)
    status = np.zeros(P, np.int8)
    for k in np.unique(nblocks):
        sel = np.nonzero(nblocks == k)[0]
        c = codes[sel].astype(np.int64)
        q = sel.size
        rows = np.arange(q)
        adj = np.zeros((q, k, k), dtype=bool)
        loop = np.zeros(q, dtype=bool)
        for u, v in edges:
            bu, bv = c[:, u], c[:, v]
            loop |= bu == bv
            adj[rows, bu, bv] = True
            adj[rows, bv, bu] = True
        idx = np.arange(k)
        adj[:, idx, idx] = False
        anch = np.zeros((q, k, max(m, 1)), dtype=bool)
        for u, j in anchors:
            anch[rows, c[:, u], j] = True
        M = -adj.astype(np.int64)
        M[:, idx, idx] = adj.sum(axis=2) + anch.sum(axis=2) + diag_extra
        d, over = _bareiss_batch(M)
        st = np.where(over, DET_OVERFLOW, DET_OK).astype(np.int8)
        st[loop] = DET_LOOP
        d[loop] = 0
        dets[sel] = d
        status[sel] = st
    return dets, status


def _bareiss_batch(M):
    """Vectorised fraction-free elimination over a stack of PSD matrices."""
    M = M.copy()
    q, k, _ = M.shape
    prev = np.ones(q, dtype=np.int64)
    zero = np.zeros(q, dtype=bool)
    over = np.zeros(q, dtype=bool)
    for s in range(k):
        piv = M[:, s, s].copy()
        zero |= piv == 0
        piv_safe = np.where(zero, 1, piv)
        if s + 1 < k:
            a = M[:, s + 1:, s + 1:]
            col = M[:, s + 1:, s][:, :, None]
            row = M[:, s, s + 1:][:, None, :]
            x = piv_safe[:, None, None].astype(float) * a.astype(float)
            y = col.astype(float) * row.astype(float)
            over |= ((np.abs(x) > _OVERFLOW_GUARD) | (np.abs(y) > _OVERFLOW_GUARD)).any(axis=(1, 2))
            M[:, s + 1:, s + 1:] = (piv_safe[:, None, None] * a - col * row) // prev[:, None, None]
        prev = piv_safe
    det = np.where(zero, 0, M[:, k - 1, k - 1])
    return det.astype(np.int64), over & ~zero


def gram_determinants(codes, nblocks, edges, anchors, m, diag_extra, backend):
    """Determinants of the merged-diagram Gram matrices of many partitions.

    ``edges`` holds pairs of ground-set element indices (one row per copied
    core edge), ``anchors`` holds ``(element, endpoint)`` pairs and
    ``diag_extra`` is 1 for Gaussian intensity.  Returns ``(dets, status)``;
    status is one of ``DET_OK``, ``DET_LOOP`` or ``DET_OVERFLOW`` (recompute
    that entry with arbitrary-precision integers).
    """
    codes = np.ascontiguousarray(codes, dtype=np.int8)
    nblocks = np.ascontiguousarray(nblocks, dtype=np.int64)
    edges = np.ascontiguousarray(np.asarray(edges, dtype=np.int64).reshape(-1, 2))
    anchors = np.ascontiguousarray(np.asarray(anchors, dtype=np.int64).reshape(-1, 2))
    if codes.shape[0] == 0:
        return np.zeros(0, np.int64), np.zeros(0, np.int8)
    if backend == "numba":
        return _gram_dets_numba(codes, nblocks, edges, anchors, int(m), int(diag_extra))
    return _gram_dets_numpy(codes, nblocks, edges, anchors, int(m), int(diag_extra))


# ---------------------------------------------------------------------------
# embedding counts
# ---------------------------------------------------------------------------


@njit
def _count_embeddings_numba(adj, cand, order, back_edges, back_ptr):
    """Backtracking count of injective maps respecting the template.

    ``cand[v]`` marks sample points adjacent to every endpoint that template
    vertex ``v`` attaches to; template vertices are placed in ``order`` and
    ``back_edges[back_ptr[t]:back_ptr[t+1]]`` lists earlier positions that
    must be adjacent to the vertex placed at step ``t``.
    """
    k = adj.shape[0]
    r = order.shape[0]
    if r == 0:
        return 1
    if k < r:
        return 0
    assign = np.full(r, -1, np.int64)
    used = np.zeros(k, np.bool_)
    total = 0
    t = 0
    while t >= 0:
        x = assign[t]
        if x >= 0:
            used[x] = False
        x += 1
        v = order[t]
        while x < k:
            if not used[x] and cand[v, x]:
                ok = True
                for q in range(back_ptr[t], back_ptr[t + 1]):
                    if not adj[x, assign[back_edges[q]]]:
                        ok = False
                        break
                if ok:
                    break
            x += 1
        if x >= k:
            assign[t] = -1
            t -= 1
            continue
        assign[t] = x
        if t == r - 1:
            total += 1
        else:
            used[x] = True
            t += 1
            assign[t] = -1
    return total


def _count_embeddings_numpy(adj, cand, order, back_edges, back_ptr):
    """Dense tensor count: sum over all ordered r-tuples of distinct points."""
    k = adj.shape[0]
    r = order.shape[0]
    if r == 0:
        return 1
    if k < r:
        return 0
    if k ** r > 50_000_000:
        raise MemoryError(f"dense embedding tensor of size {k}**{r} is too large")
    tensor = np.ones((k,) * r, dtype=np.int64)
    for t in range(r):
        shape = [1] * r
        shape[t] = k
        tensor = tensor * cand[order[t]].astype(np.int64).reshape(shape)
        for q in range(back_ptr[t], back_ptr[t + 1]):
            s = back_edges[q]
            shape2 = [1] * r
            shape2[s] = k
            shape2[t] = k
            a = adj.astype(np.int64)
            # axes (s, t) with s < t
            tensor = tensor * a.reshape(shape2) if s < t else tensor * a.T.reshape(shape2)
    eye = np.eye(k, dtype=bool)
    for s in range(r):
        for t in range(s + 1, r):
            shape = [1] * r
            shape[s] = k
            shape[t] = k
            tensor = tensor * (~eye).astype(np.int64).reshape(shape)
    return int(tensor.sum())


def count_embeddings_arrays(adj, cand, order, back_edges, back_ptr, backend):
    adj = np.ascontiguousarray(adj, dtype=np.bool_)
    cand = np.ascontiguousarray(cand, dtype=np.bool_)
    order = np.ascontiguousarray(order, dtype=np.int64)
    back_edges = np.ascontiguousarray(back_edges, dtype=np.int64)
    back_ptr = np.ascontiguousarray(back_ptr, dtype=np.int64)
    if backend == "numba":
        return int(_count_embeddings_numba(adj, cand, order, back_edges, back_ptr))
    return _count_embeddings_numpy(adj, cand, order, back_edges, back_ptr)
