# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the zero-skipping operators.

Every kernel writes into a caller-allocated output array and returns the
number of multiply-accumulates it issued.  Accumulation order inside one
output element is fixed, so results do not depend on ``nthreads``.

Signatures are mirrored one-to-one by :mod:`cks._pykernels`.
"""
from cython.parallel cimport prange

ctypedef fused real:
    float
    double


cdef inline Py_ssize_t _ceil_div(Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    # b > 0; correct for negative a
    if a >= 0:
        return (a + b - 1) // b
    return -((-a) // b)


def conv_v2(const real[:, :, :, ::1] x, const real[:, :, :, ::1] w,
            real[:, :, :, ::1] out, int sh, int sw, int ph, int pw,
            int nthreads=1):
    cdef Py_ssize_t N = x.shape[0], IH = x.shape[1], IW = x.shape[2], IC = x.shape[3]
    cdef Py_ssize_t OC = w.shape[0], FH = w.shape[1], FW = w.shape[2]
    cdef Py_ssize_t OH = out.shape[1], OW = out.shape[2]
    cdef Py_ssize_t row, n, oh, ow, oc, fh, fw, ic
    cdef Py_ssize_t ih_s, iw_s, fh_s, fh_e, fw_s, fw_e
    cdef real acc
    cdef long long macs = 0

    for row in prange(N * OH * OW, nogil=True, num_threads=nthreads,
                      schedule="static"):
        n = row // (OH * OW)
        oh = (row // OW) % OH
        ow = row % OW
        ih_s = oh * sh - ph
        iw_s = ow * sw - pw
        fh_s = ih_s
        if fh_s < 0:
            fh_s = -fh_s
        else:
            fh_s = 0
        fw_s = iw_s
        if fw_s < 0:
            fw_s = -fw_s
        else:
            fw_s = 0
        fh_e = IH - ih_s
        if fh_e > FH:
            fh_e = FH
        fw_e = IW - iw_s
        if fw_e > FW:
            fw_e = FW
        for oc in range(OC):
            acc = 0
            for fh in range(fh_s, fh_e):
                for fw in range(fw_s, fw_e):
                    for ic in range(IC):
                        acc = acc + x[n, ih_s + fh, iw_s + fw, ic] * w[oc, fh, fw, ic]
            out[n, oh, ow, oc] = acc
        if fh_e > fh_s and fw_e > fw_s:
            macs += (fh_e - fh_s) * (fw_e - fw_s) * IC * OC
    return macs


def ks_deconv(const real[:, :, :, ::1] dy, const real[:, :, :, :, :, ::1] c,
              const Py_ssize_t[:, ::1] ch_ext, const Py_ssize_t[:, ::1] cw_ext,
              real[:, :, :, ::1] out, int sh, int sw, int ph, int pw,
              bint trim=False, int nthreads=1):
    cdef Py_ssize_t N = dy.shape[0], OH = dy.shape[1], OW = dy.shape[2], OC = dy.shape[3]
    cdef Py_ssize_t IH = out.shape[1], IW = out.shape[2], IC = out.shape[3]
    cdef Py_ssize_t U = _ceil_div(IH, sh), V = _ceil_div(IW, sw)
    cdef Py_ssize_t y, x, CH, CW, oph, opw, ih_s0, iw_s0
    cdef Py_ssize_t cell, n, u, v, ic, ih, iw, oh_s, ow_s, ch, cw, oc, oh, ow
    cdef Py_ssize_t ch_s, ch_e, cw_s, cw_e
    cdef real acc
    cdef long long macs = 0

    for y in range(sh):
        for x in range(sw):
            CH = ch_ext[y, x]
            CW = cw_ext[y, x]
            oph = CH - 1
            opw = CW - 1
            ih_s0 = y - ph
            if ih_s0 < 0:
                ih_s0 = ih_s0 + _ceil_div(-ih_s0, sh) * sh
            iw_s0 = x - pw
            if iw_s0 < 0:
                iw_s0 = iw_s0 + _ceil_div(-iw_s0, sw) * sw
            for cell in prange(N * U * V, nogil=True, num_threads=nthreads,
                               schedule="static"):
                n = cell // (U * V)
                u = (cell // V) % U
                v = cell % V
                ih = u * sh + ih_s0
                iw = v * sw + iw_s0
                if ih >= IH or iw >= IW:
                    continue
                # exact: ih + ph - y is a multiple of sh
                oh_s = (ih + ph - y) // sh - oph
                ow_s = (iw + pw - x) // sw - opw
                if trim:
                    ch_s = -oh_s if oh_s < 0 else 0
                    ch_e = OH - oh_s
                    if ch_e > CH:
                        ch_e = CH
                    cw_s = -ow_s if ow_s < 0 else 0
                    cw_e = OW - ow_s
                    if cw_e > CW:
                        cw_e = CW
                    if ch_e > ch_s and cw_e > cw_s:
                        macs += (ch_e - ch_s) * (cw_e - cw_s) * OC * IC
                    for ic in range(IC):
                        acc = 0
                        for ch in range(ch_s, ch_e):
                            for cw in range(cw_s, cw_e):
                                for oc in range(OC):
                                    acc = acc + dy[n, oh_s + ch, ow_s + cw, oc] * c[y, x, oc, ch, cw, ic]
                        out[n, ih, iw, ic] = acc
                else:
                    # rejected terms still cost an iteration and count as issued
                    macs += CH * CW * OC * IC
                    for ic in range(IC):
                        acc = 0
                        for ch in range(CH):
                            oh = oh_s + ch
                            if oh < 0 or oh >= OH:
                                continue
                            for cw in range(CW):
                                ow = ow_s + cw
                                if ow < 0 or ow >= OW:
                                    continue
                                for oc in range(OC):
                                    acc = acc + dy[n, oh, ow, oc] * c[y, x, oc, ch, cw, ic]
                        out[n, ih, iw, ic] = acc
    return macs


def sk_dilated(const real[:, :, :, ::1] x, const real[:, :, :, ::1] dy,
               real[:, :, :, ::1] out, int sh, int sw, int ph, int pw,
               bint trim=False, int nthreads=1):
    cdef Py_ssize_t N = x.shape[0], IH = x.shape[1], IW = x.shape[2], IC = x.shape[3]
    cdef Py_ssize_t OH = dy.shape[1], OW = dy.shape[2], OC = dy.shape[3]
    cdef Py_ssize_t FH = out.shape[1], FW = out.shape[2]
    cdef Py_ssize_t tap, oc, fh, fw, ic, n, oh, ow, ih, iw, ih_s, iw_s
    cdef Py_ssize_t oh_s, oh_e, ow_s, ow_e
    cdef real acc
    cdef long long macs = 0

    for tap in prange(OC * FH * FW, nogil=True, num_threads=nthreads,
                      schedule="static"):
        oc = tap // (FH * FW)
        fh = (tap // FW) % FH
        fw = tap % FW
        ih_s = fh - ph
        iw_s = fw - pw
        if trim:
            oh_s = _ceil_div(-ih_s, sh)
            if oh_s < 0:
                oh_s = 0
            oh_e = _ceil_div(IH - ih_s, sh)
            if oh_e > OH:
                oh_e = OH
            ow_s = _ceil_div(-iw_s, sw)
            if ow_s < 0:
                ow_s = 0
            ow_e = _ceil_div(IW - iw_s, sw)
            if ow_e > OW:
                ow_e = OW
            if oh_e > oh_s and ow_e > ow_s:
                macs += (oh_e - oh_s) * (ow_e - ow_s) * N * IC
            for ic in range(IC):
                acc = 0
                for oh in range(oh_s, oh_e):
                    for ow in range(ow_s, ow_e):
                        for n in range(N):
                            acc = acc + x[n, ih_s + oh * sh, iw_s + ow * sw, ic] * dy[n, oh, ow, oc]
                out[oc, fh, fw, ic] = acc
        else:
            macs += OH * OW * N * IC
            for ic in range(IC):
                acc = 0
                for oh in range(OH):
                    ih = oh * sh + ih_s
                    if ih < 0 or ih >= IH:
                        continue
                    for ow in range(OW):
                        iw = ow * sw + iw_s
                        if iw < 0 or iw >= IW:
                            continue
                        for n in range(N):
                            acc = acc + x[n, ih, iw, ic] * dy[n, oh, ow, oc]
                out[oc, fh, fw, ic] = acc
    return macs


def sk_dilated_segment(const real[:, :, :, ::1] x, const real[:, :, :, ::1] dy,
                       real[:, :, :, ::1] out, int sh, int sw, int ph, int pw,
                       Py_ssize_t k0, Py_ssize_t k1):
    """Add the weight-gradient terms with reduction index ``k0 <= k < k1`` to ``out``.

    ``k = (oh * O_W + ow) * N + n``.  Each entry continues from its current
    value, so chaining consecutive segments through one buffer reproduces the
    unsegmented sum.  Releases the GIL so segments can run on separate threads.
    """
    cdef Py_ssize_t N = x.shape[0], IH = x.shape[1], IW = x.shape[2], IC = x.shape[3]
    cdef Py_ssize_t OW = dy.shape[2], OC = dy.shape[3]
    cdef Py_ssize_t FH = out.shape[1], FW = out.shape[2]
    cdef Py_ssize_t oc, fh, fw, ic, k, n, oh, ow, ih, iw
    cdef real acc
    cdef long long macs = 0

    with nogil:
        for oc in range(OC):
            for fh in range(FH):
                for fw in range(FW):
                    for ic in range(IC):
                        acc = out[oc, fh, fw, ic]
                        for k in range(k0, k1):
                            n = k % N
                            ow = (k // N) % OW
                            oh = k // (N * OW)
                            ih = oh * sh + fh - ph
                            iw = ow * sw + fw - pw
                            if ih < 0 or ih >= IH or iw < 0 or iw >= IW:
                                continue
                            acc = acc + x[n, ih, iw, ic] * dy[n, oh, ow, oc]
                        out[oc, fh, fw, ic] = acc
        macs = (k1 - k0) * OC * FH * FW * IC
    return macs


def gemm(const real[:, ::1] a, const real[:, ::1] b, real[:, ::1] out,
         int block=64, int nthreads=1):
    """``out = a @ b`` with the reduction index ascending for every entry."""
    cdef Py_ssize_t M = a.shape[0], K = a.shape[1], P = b.shape[1]
    cdef Py_ssize_t i, j, k, k0, k1
    cdef real aik

    for i in prange(M, nogil=True, num_threads=nthreads, schedule="static"):
        for j in range(P):
            out[i, j] = 0
        k0 = 0
        while k0 < K:
            k1 = k0 + block
            if k1 > K:
                k1 = K
            for k in range(k0, k1):
                aik = a[i, k]
                for j in range(P):
                    out[i, j] = out[i, j] + aik * b[k, j]
            k0 = k1
