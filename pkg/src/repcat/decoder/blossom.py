"""Maximum-weight matching on a dense graph (Edmonds' blossom algorithm).

A numba port of the classic O(n^3) primal-dual implementation by J. van
Rantwijk, restricted to complete graphs with integer weights and
maximum-cardinality matching.  Recursion is replaced by explicit stacks so
the whole routine compiles in nopython mode.
"""
from __future__ import annotations

import numba
import numpy as np

int64 = np.int64


@numba.njit(cache=True)
def _slack(k, ei, ej, ew, dualvar):
    return dualvar[ei[k]] + dualvar[ej[k]] - 2 * ew[k]


@numba.njit(cache=True)
def _leaves(b, n, childs, childlen, out, stack):
    if b < n:
        out[0] = b
        return 1
    cnt = 0
    sp = 1
    stack[0] = b
    while sp > 0:
        sp -= 1
        x = stack[sp]
        for q in range(childlen[x]):
            c = childs[x, q]
            if c < n:
                out[cnt] = c
                cnt += 1
            else:
                stack[sp] = c
                sp += 1
    return cnt


@numba.njit(cache=True)
def _push(queue, qlen, v):
    if qlen[0] >= queue.shape[0]:
        bigger = np.empty(2 * queue.shape[0], dtype=queue.dtype)
        bigger[: queue.shape[0]] = queue
        queue = bigger
    queue[qlen[0]] = v
    qlen[0] += 1
    return queue


@numba.njit(cache=True)
def _assign_label(w, t, p, n, inblossom, label, labelend, bestedge, blossombase, mate, endpoint,
                  childs, childlen, queue, qlen, leafbuf, stackbuf):
    while True:
        b = inblossom[w]
        label[w] = t
        label[b] = t
        labelend[w] = p
        labelend[b] = p
        bestedge[w] = -1
        bestedge[b] = -1
        if t == 1:
            cnt = _leaves(b, n, childs, childlen, leafbuf, stackbuf)
            for q in range(cnt):
                queue = _push(queue, qlen, leafbuf[q])
            return queue
        base = blossombase[b]
        w = endpoint[mate[base]]
        p = mate[base] ^ 1
        t = 1


@numba.njit(cache=True)
def _scan_blossom(v, w, inblossom, label, labelend, blossombase, endpoint, pathbuf):
    npath = 0
    base = -1
    while v != -1 or w != -1:
        b = inblossom[v]
        if label[b] & 4:
            base = blossombase[b]
            break
        pathbuf[npath] = b
        npath += 1
        label[b] = 5
        if labelend[b] == -1:
            v = -1
        else:
            v = endpoint[labelend[b]]
            b = inblossom[v]
            v = endpoint[labelend[b]]
        if w != -1:
            v, w = w, v
    for q in range(npath):
        label[pathbuf[q]] = 1
    return base


@numba.njit(cache=True)
def max_weight_matching(weights):
    """Maximum-cardinality, maximum-weight matching of the complete graph.

    ``weights`` is a symmetric (n, n) int64 matrix.  Returns ``mate`` with
    mate[v] the partner of v or -1.
    """
    n = weights.shape[0]
    nedge = n * (n - 1) // 2
    ei = np.empty(nedge, int64)
    ej = np.empty(nedge, int64)
    ew = np.empty(nedge, int64)
    endpoint = np.empty(2 * nedge, int64)
    neighbend = np.empty((n, max(n - 1, 1)), int64)
    nbcount = np.zeros(n, int64)
    k = 0
    maxweight = 0
    for i in range(n):
        for j in range(i + 1, n):
            ei[k] = i
            ej[k] = j
            ew[k] = weights[i, j]
            if weights[i, j] > maxweight:
                maxweight = weights[i, j]
            endpoint[2 * k] = i
            endpoint[2 * k + 1] = j
            neighbend[i, nbcount[i]] = 2 * k + 1
            nbcount[i] += 1
            neighbend[j, nbcount[j]] = 2 * k
            nbcount[j] += 1
            k += 1

    mate = np.full(n, -1, int64)
    if n < 2:
        return mate
    n2 = 2 * n
    label = np.zeros(n2, int64)
    labelend = np.full(n2, -1, int64)
    inblossom = np.arange(n, dtype=int64)
    blossomparent = np.full(n2, -1, int64)
    childs = np.empty((n2, n + 1), int64)
    endps = np.empty((n2, n + 1), int64)
    childlen = np.zeros(n2, int64)
    blossombase = np.full(n2, -1, int64)
    for v in range(n):
        blossombase[v] = v
    bestedge = np.full(n2, -1, int64)
    bbe = np.empty((n2, n2), int64)
    bbelen = np.full(n2, -1, int64)
    unused = np.empty(n, int64)
    nunused = n
    for q in range(n):
        unused[q] = n + q
    dualvar = np.zeros(n2, int64)
    for v in range(n):
        dualvar[v] = maxweight
    allowedge = np.zeros(nedge, np.bool_)
    queue = np.empty(2 * nedge + 4 * n, int64)
    qlen = np.zeros(1, int64)

    leafbuf = np.empty(n, int64)
    stackbuf = np.empty(n2, int64)
    pathbuf = np.empty(n2, int64)
    bestedgeto = np.empty(n2, int64)
    tmpc = np.empty(n + 1, int64)
    tmpe = np.empty(n + 1, int64)
    aug_b = np.empty(n2, int64)
    aug_v = np.empty(n2, int64)
    expstack = np.empty(n2, int64)

    for _stage in range(n):
        label[:] = 0
        bestedge[:] = -1
        bbelen[n:] = -1
        allowedge[:] = False
        qlen[0] = 0
        for v in range(n):
            if mate[v] == -1 and label[inblossom[v]] == 0:
                queue = _assign_label(v, 1, -1, n, inblossom, label, labelend, bestedge, blossombase,
                                      mate, endpoint, childs, childlen, queue, qlen, leafbuf, stackbuf)
        augmented = False
        while True:
            while qlen[0] > 0 and not augmented:
                qlen[0] -= 1
                v = queue[qlen[0]]
                for q in range(nbcount[v]):
                    p = neighbend[v, q]
                    k = p // 2
                    w = endpoint[p]
                    if inblossom[v] == inblossom[w]:
                        continue
                    kslack = 0
                    if not allowedge[k]:
                        kslack = _slack(k, ei, ej, ew, dualvar)
                        if kslack <= 0:
                            allowedge[k] = True
                    if allowedge[k]:
                        if label[inblossom[w]] == 0:
                            queue = _assign_label(w, 2, p ^ 1, n, inblossom, label, labelend, bestedge,
                                                  blossombase, mate, endpoint, childs, childlen, queue,
                                                  qlen, leafbuf, stackbuf)
                        elif label[inblossom[w]] == 1:
                            base = _scan_blossom(v, w, inblossom, label, labelend, blossombase,
                                                 endpoint, pathbuf)
                            if base >= 0:
                                # ---- add blossom ----
                                bv_v = ei[k]
                                bw_w = ej[k]
                                bb = inblossom[base]
                                bv = inblossom[bv_v]
                                bw = inblossom[bw_w]
                                nunused -= 1
                                b = unused[nunused]
                                blossombase[b] = base
                                blossomparent[b] = -1
                                blossomparent[bb] = b
                                L = 0
                                while bv != bb:
                                    blossomparent[bv] = b
                                    tmpc[L] = bv
                                    tmpe[L] = labelend[bv]
                                    L += 1
                                    x = endpoint[labelend[bv]]
                                    bv = inblossom[x]
                                # path = [bb] + reversed(tmpc[:L]); endps = reversed(tmpe[:L]) + [2k]
                                childs[b, 0] = bb
                                for q2 in range(L):
                                    childs[b, 1 + q2] = tmpc[L - 1 - q2]
                                    endps[b, q2] = tmpe[L - 1 - q2]
                                endps[b, L] = 2 * k
                                cl = L + 1
                                el = L + 1
                                while bw != bb:
                                    blossomparent[bw] = b
                                    childs[b, cl] = bw
                                    cl += 1
                                    endps[b, el] = labelend[bw] ^ 1
                                    el += 1
                                    x = endpoint[labelend[bw]]
                                    bw = inblossom[x]
                                childlen[b] = cl
                                label[b] = 1
                                labelend[b] = labelend[bb]
                                dualvar[b] = 0
                                cnt = _leaves(b, n, childs, childlen, leafbuf, stackbuf)
                                for q2 in range(cnt):
                                    x = leafbuf[q2]
                                    if label[inblossom[x]] == 2:
                                        queue = _push(queue, qlen, x)
                                    inblossom[x] = b
                                bestedgeto[:] = -1
                                for ci in range(cl):
                                    cb = childs[b, ci]
                                    if bbelen[cb] == -1:
                                        cnt = _leaves(cb, n, childs, childlen, leafbuf, stackbuf)
                                        for q2 in range(cnt):
                                            x = leafbuf[q2]
                                            for q3 in range(nbcount[x]):
                                                kk = neighbend[x, q3] // 2
                                                i2 = ei[kk]
                                                j2 = ej[kk]
                                                if inblossom[j2] == b:
                                                    i2, j2 = j2, i2
                                                bj = inblossom[j2]
                                                if bj != b and label[bj] == 1 and (
                                                        bestedgeto[bj] == -1
                                                        or _slack(kk, ei, ej, ew, dualvar)
                                                        < _slack(bestedgeto[bj], ei, ej, ew, dualvar)):
                                                    bestedgeto[bj] = kk
                                    else:
                                        for q2 in range(bbelen[cb]):
                                            kk = bbe[cb, q2]
                                            i2 = ei[kk]
                                            j2 = ej[kk]
                                            if inblossom[j2] == b:
                                                i2, j2 = j2, i2
                                            bj = inblossom[j2]
                                            if bj != b and label[bj] == 1 and (
                                                    bestedgeto[bj] == -1
                                                    or _slack(kk, ei, ej, ew, dualvar)
                                                    < _slack(bestedgeto[bj], ei, ej, ew, dualvar)):
                                                bestedgeto[bj] = kk
                                    bbelen[cb] = -1
                                    bestedge[cb] = -1
                                m = 0
                                for q2 in range(n2):
                                    if bestedgeto[q2] != -1:
                                        bbe[b, m] = bestedgeto[q2]
                                        m += 1
                                bbelen[b] = m
                                bestedge[b] = -1
                                for q2 in range(m):
                                    kk = bbe[b, q2]
                                    if bestedge[b] == -1 or (_slack(kk, ei, ej, ew, dualvar)
                                                             < _slack(bestedge[b], ei, ej, ew, dualvar)):
                                        bestedge[b] = kk
                            else:
                                _augment_matching(k, n, ei, ej, inblossom, labelend, endpoint, mate,
                                                  blossomparent, childs, endps, childlen, blossombase,
                                                  tmpc, tmpe, aug_b, aug_v)
                                augmented = True
                                break
                        elif label[w] == 0:
                            label[w] = 2
                            labelend[w] = p ^ 1
                    elif label[inblossom[w]] == 1:
                        b = inblossom[v]
                        if bestedge[b] == -1 or kslack < _slack(bestedge[b], ei, ej, ew, dualvar):
                            bestedge[b] = k
                    elif label[w] == 0:
                        if bestedge[w] == -1 or kslack < _slack(bestedge[w], ei, ej, ew, dualvar):
                            bestedge[w] = k
            if augmented:
                break

            deltatype = -1
            delta = 0
            deltaedge = -1
            deltablossom = -1
            for v in range(n):
                if label[inblossom[v]] == 0 and bestedge[v] != -1:
                    dd = _slack(bestedge[v], ei, ej, ew, dualvar)
                    if deltatype == -1 or dd < delta:
                        delta = dd
                        deltatype = 2
                        deltaedge = bestedge[v]
            for b in range(n2):
                if blossomparent[b] == -1 and label[b] == 1 and bestedge[b] != -1:
                    dd = _slack(bestedge[b], ei, ej, ew, dualvar) // 2
                    if deltatype == -1 or dd < delta:
                        delta = dd
                        deltatype = 3
                        deltaedge = bestedge[b]
            for b in range(n, n2):
                if (blossombase[b] >= 0 and blossomparent[b] == -1 and label[b] == 2
                        and (deltatype == -1 or dualvar[b] < delta)):
                    delta = dualvar[b]
                    deltatype = 4
                    deltablossom = b
            if deltatype == -1:
                deltatype = 1
                delta = dualvar[0]
                for v in range(1, n):
                    if dualvar[v] < delta:
                        delta = dualvar[v]
                if delta < 0:
                    delta = 0

            for v in range(n):
                lb = label[inblossom[v]]
                if lb == 1:
                    dualvar[v] -= delta
                elif lb == 2:
                    dualvar[v] += delta
            for b in range(n, n2):
                if blossombase[b] >= 0 and blossomparent[b] == -1:
                    if label[b] == 1:
                        dualvar[b] += delta
                    elif label[b] == 2:
                        dualvar[b] -= delta

            if deltatype == 1:
                break
            elif deltatype == 2:
                allowedge[deltaedge] = True
                i2 = ei[deltaedge]
                j2 = ej[deltaedge]
                if label[inblossom[i2]] == 0:
                    i2, j2 = j2, i2
                queue = _push(queue, qlen, i2)
            elif deltatype == 3:
                allowedge[deltaedge] = True
                queue = _push(queue, qlen, ei[deltaedge])
            else:
                queue, nunused = _expand_blossom(
                    deltablossom, False, n, inblossom, label, labelend, bestedge, blossombase, mate,
                    endpoint, childs, endps, childlen, blossomparent, dualvar, allowedge, bbelen,
                    unused, nunused, queue, qlen, leafbuf, stackbuf, expstack)
        if not augmented:
            break
        for b in range(n, n2):
            if blossomparent[b] == -1 and blossombase[b] >= 0 and label[b] == 1 and dualvar[b] == 0:
                queue, nunused = _expand_blossom(
                    b, True, n, inblossom, label, labelend, bestedge, blossombase, mate, endpoint,
                    childs, endps, childlen, blossomparent, dualvar, allowedge, bbelen, unused,
                    nunused, queue, qlen, leafbuf, stackbuf, expstack)

    for v in range(n):
        if mate[v] >= 0:
            mate[v] = endpoint[mate[v]]
    return mate


@numba.njit(cache=True)
def _expand_blossom(b0, endstage, n, inblossom, label, labelend, bestedge, blossombase, mate,
                    endpoint, childs, endps, childlen, blossomparent, dualvar, allowedge, bbelen,
                    unused, nunused, queue, qlen, leafbuf, stackbuf, expstack):
    sp = 1
    expstack[0] = b0
    first = True
    while sp > 0:
        sp -= 1
        b = expstack[sp]
        L = childlen[b]
        for q in range(L):
            s = childs[b, q]
            blossomparent[s] = -1
            if s < n:
                inblossom[s] = s
            elif endstage and dualvar[s] == 0:
                expstack[sp] = s
                sp += 1
            else:
                cnt = _leaves(s, n, childs, childlen, leafbuf, stackbuf)
                for q2 in range(cnt):
                    inblossom[leafbuf[q2]] = s
        if first and (not endstage) and label[b] == 2:
            entrychild = inblossom[endpoint[labelend[b] ^ 1]]
            j = 0
            for q in range(L):
                if childs[b, q] == entrychild:
                    j = q
                    break
            if j & 1:
                j -= L
                jstep = 1
                endptrick = 0
            else:
                jstep = -1
                endptrick = 1
            p = labelend[b]
            while j != 0:
                label[endpoint[p ^ 1]] = 0
                label[endpoint[endps[b, (j - endptrick) % L] ^ endptrick ^ 1]] = 0
                queue = _assign_label(endpoint[p ^ 1], 2, p, n, inblossom, label, labelend, bestedge,
                                      blossombase, mate, endpoint, childs, childlen, queue, qlen,
                                      leafbuf, stackbuf)
                allowedge[endps[b, (j - endptrick) % L] // 2] = True
                j += jstep
                p = endps[b, (j - endptrick) % L] ^ endptrick
                allowedge[p // 2] = True
                j += jstep
            bv = childs[b, j % L]
            label[endpoint[p ^ 1]] = 2
            label[bv] = 2
            labelend[endpoint[p ^ 1]] = p
            labelend[bv] = p
            bestedge[bv] = -1
            j += jstep
            while childs[b, j % L] != entrychild:
                bv = childs[b, j % L]
                if label[bv] == 1:
                    j += jstep
                    continue
                cnt = _leaves(bv, n, childs, childlen, leafbuf, stackbuf)
                v = -1
                for q2 in range(cnt):
                    if label[leafbuf[q2]] != 0:
                        v = leafbuf[q2]
                        break
                if v >= 0:
                    label[v] = 0
                    label[endpoint[mate[blossombase[bv]]]] = 0
                    queue = _assign_label(v, 2, labelend[v], n, inblossom, label, labelend, bestedge,
                                          blossombase, mate, endpoint, childs, childlen, queue, qlen,
                                          leafbuf, stackbuf)
                j += jstep
        first = False
        label[b] = -1
        labelend[b] = -1
        childlen[b] = 0
        blossombase[b] = -1
        bbelen[b] = -1
        bestedge[b] = -1
        unused[nunused] = b
        nunused += 1
    return queue, nunused


@numba.njit(cache=True)
def _augment_blossom(b0, v0, n, endpoint, mate, blossomparent, childs, endps, childlen, blossombase,
                     tmpc, tmpe, aug_b, aug_v):
    sp = 1
    aug_b[0] = b0
    aug_v[0] = v0
    while sp > 0:
        sp -= 1
        b = aug_b[sp]
        v = aug_v[sp]
        t = v
        while blossomparent[t] != b:
            t = blossomparent[t]
        if t >= n:
            aug_b[sp] = t
            aug_v[sp] = v
            sp += 1
        L = childlen[b]
        i = 0
        for q in range(L):
            if childs[b, q] == t:
                i = q
                break
        j = i
        if i & 1:
            j -= L
            jstep = 1
            endptrick = 0
        else:
            jstep = -1
            endptrick = 1
        while j != 0:
            j += jstep
            t = childs[b, j % L]
            p = endps[b, (j - endptrick) % L] ^ endptrick
            if t >= n:
                aug_b[sp] = t
                aug_v[sp] = endpoint[p]
                sp += 1
            j += jstep
            t = childs[b, j % L]
            if t >= n:
                aug_b[sp] = t
                aug_v[sp] = endpoint[p ^ 1]
                sp += 1
            mate[endpoint[p]] = p ^ 1
            mate[endpoint[p ^ 1]] = p
        for q in range(L):
            tmpc[q] = childs[b, (i + q) % L]
            tmpe[q] = endps[b, (i + q) % L]
        for q in range(L):
            childs[b, q] = tmpc[q]
            endps[b, q] = tmpe[q]
        blossombase[b] = v


@numba.njit(cache=True)
def _augment_matching(k, n, ei, ej, inblossom, labelend, endpoint, mate, blossomparent, childs,
                      endps, childlen, blossombase, tmpc, tmpe, aug_b, aug_v):
    for side in range(2):
        if side == 0:
            s = ei[k]
            p = 2 * k + 1
        else:
            s = ej[k]
            p = 2 * k
        while True:
            bs = inblossom[s]
            if bs >= n:
                _augment_blossom(bs, s, n, endpoint, mate, blossomparent, childs, endps, childlen,
                                 blossombase, tmpc, tmpe, aug_b, aug_v)
            mate[s] = p
            if labelend[bs] == -1:
                break
            t = endpoint[labelend[bs]]
            bt = inblossom[t]
            s = endpoint[labelend[bt]]
            j = endpoint[labelend[bt] ^ 1]
            if bt >= n:
                _augment_blossom(bt, j, n, endpoint, mate, blossomparent, childs, endps, childlen,
                                 blossombase, tmpc, tmpe, aug_b, aug_v)
            mate[j] = labelend[bt]
            p = labelend[bt] ^ 1
