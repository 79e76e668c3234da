"""Bitmask kernels with a numba path and a pure-numpy path.

Every kernel exists twice: ``_<name>_nb`` (loop form, numba-compiled) and
``_<name>_np`` (vectorised numpy). The public name is bound to one of them
according to :data:`distpref._accel.USE_NUMBA`. Both variants must return
identical results; ``tests/test_kernels.py`` checks that on random inputs.

Conventions shared by all kernels:

* a family of student sets is a 1-d ``int64`` array of bitmasks;
* ``geq`` is an ``m x m`` boolean matrix with ``geq[a, b]`` meaning
  "set ``a`` is weakly preferred to set ``b``";
* ``lookup`` maps a bitmask to its row in ``masks`` (``-1`` when absent) and
  has length ``2**n``.
"""
import numpy as np

from ._accel import USE_NUMBA, njit

_BITS = np.arange(64, dtype=np.int64)


# --------------------------------------------------------------------------
# popcount


@njit
def _popcount_nb(masks):
    out = np.empty(masks.shape[0], dtype=np.int64)
    for i in range(masks.shape[0]):
        x = masks[i]
        c = 0
        while x:
            x &= x - 1
            c += 1
        out[i] = c
    return out


def _popcount_np(masks):
    masks = np.asarray(masks, dtype=np.int64)
    return ((masks[:, None] >> _BITS) & 1).sum(axis=1).astype(np.int64)


# --------------------------------------------------------------------------
# k-subsets of a mask, ascending


@njit
def _submasks_of_size_nb(mask, k):
    pos = np.empty(64, dtype=np.int64)
    m = 0
    for b in range(63):
        if (mask >> b) & 1:
            pos[m] = b
            m += 1
    if k < 0 or k > m:
        return np.empty(0, dtype=np.int64)
    # binomial(m, k)
    total = 1
    for r in range(k):
        total = total * (m - r) // (r + 1)
    out = np.empty(total, dtype=np.int64)
    idx = np.arange(k)
    for t in range(total):
        x = 0
        for r in range(k):
            x |= np.int64(1) << pos[idx[r]]
        out[t] = x
        # advance to the next index combination
        r = k - 1
        while r >= 0 and idx[r] == m - k + r:
            r -= 1
        if r < 0:
            break
        idx[r] += 1
        for u in range(r + 1, k):
            idx[u] = idx[u - 1] + 1
    out.sort()
    return out


def _submasks_of_size_np(mask, k):
    mask = int(mask)
    pos = np.array([b for b in range(63) if (mask >> b) & 1], dtype=np.int64)
    m = pos.shape[0]
    if k < 0 or k > m:
        return np.empty(0, dtype=np.int64)
    codes = np.arange(1 << m, dtype=np.int64)
    picked = (codes[:, None] >> np.arange(m, dtype=np.int64)) & 1
    keep = picked.sum(axis=1) == k
    out = picked[keep] @ (np.int64(1) << pos)
    out.sort()
    return out.astype(np.int64)


# --------------------------------------------------------------------------
# mask -> row lookup


@njit
def _subset_lookup_nb(masks, n):
    table = np.full(1 << n, -1, dtype=np.int64)
    for i in range(masks.shape[0]):
        table[masks[i]] = i
    return table


def _subset_lookup_np(masks, n):
    table = np.full(1 << n, -1, dtype=np.int64)
    table[np.asarray(masks, dtype=np.int64)] = np.arange(len(masks), dtype=np.int64)
    return table


# --------------------------------------------------------------------------
# frontier selection


@njit
def _undominated_nb(geq):
    m = geq.shape[0]
    out = np.ones(m, dtype=np.bool_)
    for i in range(m):
        for k in range(m):
            if geq[k, i] and not geq[i, k]:
                out[i] = False
                break
    return out


def _undominated_np(geq):
    strict = geq & ~geq.T
    return ~strict.any(axis=0)


@njit
def _top_class_nb(scores, tol):
    best = scores[0]
    for i in range(1, scores.shape[0]):
        if scores[i] > best:
            best = scores[i]
    out = np.empty(scores.shape[0], dtype=np.bool_)
    for i in range(scores.shape[0]):
        out[i] = scores[i] >= best - tol
    return out


def _top_class_np(scores, tol):
    return scores >= scores.max() - tol


# --------------------------------------------------------------------------
# greedy scan against a precomputed frontier


@njit
def _greedy_choice_nb(frontier, order):
    kept = np.int64(0)
    for t in range(order.shape[0]):
        cand = kept | (np.int64(1) << order[t])
        for f in range(frontier.shape[0]):
            if frontier[f] & cand == cand:
                kept = cand
                break
    return kept


def _greedy_choice_np(frontier, order):
    kept = 0
    for s in order:
        cand = kept | (1 << int(s))
        if np.any((frontier & cand) == cand):
            kept = cand
    return np.int64(kept)


# --------------------------------------------------------------------------
# structural property scans
#
# Each returns (premise_count, violation_count, witnesses) with at most
# ``limit`` witness rows stored.


@njit
def _upper_bound_scan_nb(masks, geq, limit):
    m = masks.shape[0]
    # no more than one witness per ordered pair
    wit = np.empty((max(min(limit, m * m), 0), 2), dtype=np.int64)
    premises = 0
    bad = 0
    for i in range(m):
        for j in range(i + 1, m):
            if geq[i, j] or geq[j, i]:
                continue
            premises += 1
            u = masks[i] | masks[j]
            found = False
            for k in range(m):
                if masks[k] & ~u:
                    continue
                if (geq[k, i] and not geq[i, k]) or (geq[k, j] and not geq[j, k]):
                    found = True
                    break
            if not found:
                if bad < limit:
                    wit[bad, 0] = i
                    wit[bad, 1] = j
                bad += 1
    return premises, bad, wit[: min(bad, limit)]


def _upper_bound_scan_np(masks, geq, limit):
    strict = geq & ~geq.T
    inc = ~geq & ~geq.T
    ii, jj = np.nonzero(np.triu(inc, 1))
    if ii.size == 0:
        return 0, 0, np.empty((0, 2), dtype=np.int64)
    u = masks[ii] | masks[jj]
    sub = (masks[None, :] & ~u[:, None]) == 0
    ok = (sub & (strict[:, ii].T | strict[:, jj].T)).any(axis=1)
    bad = np.nonzero(~ok)[0]
    wit = np.stack([ii[bad], jj[bad]], axis=1)[:limit].astype(np.int64)
    return int(ii.size), int(bad.size), wit


@njit
def _maximizer_scan_nb(masks, geq, lookup, limit):
    m = masks.shape[0]
    # no more than one witness per ordered pair
    wit = np.empty((max(min(limit, m * m), 0), 2), dtype=np.int64)
    premises = 0
    bad = 0
    for i in range(m):
        for j in range(i + 1, m):
            u = masks[i] | masks[j]
            prem = True
            for k in range(m):
                if masks[k] & ~u:
                    continue
                if not (geq[i, k] and geq[j, k]):
                    prem = False
                    break
            if not prem:
                continue
            premises += 1
            di = masks[i] & ~masks[j]
            dj = masks[j] & ~masks[i]
            found = False
            for s in range(63):
                if not (di >> s) & 1:
                    continue
                for t in range(63):
                    if not (dj >> t) & 1:
                        continue
                    a = lookup[(masks[i] & ~(np.int64(1) << s)) | (np.int64(1) << t)]
                    b = lookup[(masks[j] & ~(np.int64(1) << t)) | (np.int64(1) << s)]
                    if geq[a, i] and geq[i, a] and geq[b, j] and geq[j, b]:
                        found = True
                        break
                if found:
                    break
            if not found:
                if bad < limit:
                    wit[bad, 0] = i
                    wit[bad, 1] = j
                bad += 1
    return premises, bad, wit[: min(bad, limit)]


def _maximizer_scan_np(masks, geq, lookup, limit):
    m = masks.shape[0]
    indiff = geq & geq.T
    ii, jj = np.triu_indices(m, 1)
    u = masks[ii] | masks[jj]
    sub = (masks[None, :] & ~u[:, None]) == 0
    prem = (~sub | (geq[ii] & geq[jj])).all(axis=1)
    ii, jj = ii[prem], jj[prem]
    rows = []
    for i, j in zip(ii.tolist(), jj.tolist()):
        mi, mj = int(masks[i]), int(masks[j])
        s_bits = [s for s in range(63) if (mi & ~mj) >> s & 1]
        t_bits = [t for t in range(63) if (mj & ~mi) >> t & 1]
        s_arr = np.repeat(s_bits, len(t_bits)).astype(np.int64)
        t_arr = np.tile(t_bits, len(s_bits)).astype(np.int64)
        a = lookup[(mi & ~(np.int64(1) << s_arr)) | (np.int64(1) << t_arr)]
        b = lookup[(mj & ~(np.int64(1) << t_arr)) | (np.int64(1) << s_arr)]
        if not np.any(indiff[a, i] & indiff[b, j]):
            rows.append((i, j))
    wit = np.array(rows[:limit], dtype=np.int64).reshape(-1, 2)
    return int(ii.size), len(rows), wit


@njit
def _improvement_scan_nb(masks, geq, lookup, limit):
    m = masks.shape[0]
    q = 0
    if m > 0:
        x = masks[0]
        while x:
            x &= x - 1
            q += 1
    wit = np.empty((max(min(limit, m * m * q), 0), 3), dtype=np.int64)
    premises = 0
    bad = 0
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            u = masks[i] | masks[j]
            di = masks[i] & ~masks[j]
            dj = masks[j] & ~masks[i]
            for s in range(63):
                if not (di >> s) & 1:
                    continue
                sbit = np.int64(1) << s
                prem = True
                for k in range(m):
                    if masks[k] & ~u:
                        continue
                    if masks[k] & sbit:
                        if not geq[i, k]:
                            prem = False
                            break
                    else:
                        if not (geq[i, k] and not geq[k, i]):
                            prem = False
                            break
                if not prem:
                    continue
                premises += 1
                found = False
                for t in range(63):
                    if not (dj >> t) & 1:
                        continue
                    b = lookup[(masks[j] & ~(np.int64(1) << t)) | sbit]
                    if geq[b, j] and not geq[j, b]:
                        found = True
                        break
                if not found:
                    if bad < limit:
                        wit[bad, 0] = i
                        wit[bad, 1] = j
                        wit[bad, 2] = s
                    bad += 1
    return premises, bad, wit[: min(bad, limit)]


def _improvement_scan_np(masks, geq, lookup, limit):
    m = masks.shape[0]
    strict = geq & ~geq.T
    premises = 0
    rows = []
    for i in range(m):
        mi = int(masks[i])
        u = mi | masks
        sub = (masks[None, :] & ~u[:, None]) == 0  # sub[j, k]: S_k inside S_i | S_j
        for s in range(63):
            if not (mi >> s) & 1:
                continue
            sbit = np.int64(1) << s
            has_s = (masks & sbit) != 0
            need = np.where(has_s, geq[i], strict[i])
            prem = (~sub | need[None, :]).all(axis=1) & ((masks & sbit) == 0)
            prem[i] = False
            js = np.nonzero(prem)[0]
            premises += int(js.size)
            for j in js.tolist():
                mj = int(masks[j])
                t_arr = np.array([t for t in range(63) if (mj & ~mi) >> t & 1], dtype=np.int64)
                b = lookup[(mj & ~(np.int64(1) << t_arr)) | sbit]
                if not np.any(strict[b, j]):
                    rows.append((i, j, s))
    rows.sort()
    wit = np.array(rows[:limit], dtype=np.int64).reshape(-1, 3)
    return premises, len(rows), wit


# --------------------------------------------------------------------------
# dispatch

if USE_NUMBA:
    popcount = _popcount_nb
    submasks_of_size = _submasks_of_size_nb
    subset_lookup = _subset_lookup_nb
    undominated = _undominated_nb
    top_class = _top_class_nb
    greedy_choice = _greedy_choice_nb
    upper_bound_scan = _upper_bound_scan_nb
    maximizer_scan = _maximizer_scan_nb
    improvement_scan = _improvement_scan_nb
else:
    popcount = _popcount_np
    submasks_of_size = _submasks_of_size_np
    subset_lookup = _subset_lookup_np
    undominated = _undominated_np
    top_class = _top_class_np
    greedy_choice = _greedy_choice_np
    upper_bound_scan = _upper_bound_scan_np
    maximizer_scan = _maximizer_scan_np
    improvement_scan = _improvement_scan_np

BACKENDS = {
    "numba": {
        "popcount": _popcount_nb,
        "submasks_of_size": _submasks_of_size_nb,
        "subset_lookup": _subset_lookup_nb,
        "undominated": _undominated_nb,
        "top_class": _top_class_nb,
        "greedy_choice": _greedy_choice_nb,
        "upper_bound_scan": _upper_bound_scan_nb,
        "maximizer_scan": _maximizer_scan_nb,
        "improvement_scan": _improvement_scan_nb,
    },
    "numpy": {
        "popcount": _popcount_np,
        "submasks_of_size": _submasks_of_size_np,
        "subset_lookup": _subset_lookup_np,
        "undominated": _undominated_np,
        "top_class": _top_class_np,
        "greedy_choice": _greedy_choice_np,
        "upper_bound_scan": _upper_bound_scan_np,
        "maximizer_scan": _maximizer_scan_np,
        "improvement_scan": _improvement_scan_np,
    },
}
