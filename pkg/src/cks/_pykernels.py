"""Pure-Python fallback for :mod:`cks._kernels`.

Same signatures and the same per-element accumulation order as the compiled
kernels, so both backends agree bitwise.  Loops are vectorized only across
axes that never share an output element (batch and channel axes), which keeps
each output's sum sequential.  ``nthreads`` is accepted and ignored.
"""
import numpy as np


def _ceil_div(a, b):
    return -((-a) // b)


def conv_v2(x, w, out, sh, sw, ph, pw, nthreads=1):
    N, IH, IW, IC = x.shape
    OC, FH, FW, _ = w.shape
    _, OH, OW, _ = out.shape
    macs = 0
    for oh in range(OH):
        ih_s = oh * sh - ph
        fh_s, fh_e = max(-ih_s, 0), min(IH - ih_s, FH)
        for ow in range(OW):
            iw_s = ow * sw - pw
            fw_s, fw_e = max(-iw_s, 0), min(IW - iw_s, FW)
            acc = np.zeros((N, OC), dtype=out.dtype)
            for fh in range(fh_s, fh_e):
                for fw in range(fw_s, fw_e):
                    for ic in range(IC):
                        acc += x[:, ih_s + fh, iw_s + fw, ic, None] * w[None, :, fh, fw, ic]
            out[:, oh, ow, :] = acc
            macs += max(fh_e - fh_s, 0) * max(fw_e - fw_s, 0) * IC * OC * N
    return macs


def ks_deconv(dy, c, ch_ext, cw_ext, out, sh, sw, ph, pw, trim=False, nthreads=1):
    N, OH, OW, OC = dy.shape
    _, IH, IW, IC = out.shape
    U, V = _ceil_div(IH, sh), _ceil_div(IW, sw)
    macs = 0
    for y in range(sh):
        for x in range(sw):
            CH, CW = int(ch_ext[y, x]), int(cw_ext[y, x])
            oph, opw = CH - 1, CW - 1
            ih_s0, iw_s0 = y - ph, x - pw
            if ih_s0 < 0:
                ih_s0 += _ceil_div(-ih_s0, sh) * sh
            if iw_s0 < 0:
                iw_s0 += _ceil_div(-iw_s0, sw) * sw
            kern = c[y, x]
            for u in range(U):
                ih = u * sh + ih_s0
                if ih >= IH:
                    continue
                oh_s = (ih + ph - y) // sh - oph
                for v in range(V):
                    iw = v * sw + iw_s0
                    if iw >= IW:
                        continue
                    ow_s = (iw + pw - x) // sw - opw
                    acc = np.zeros((N, IC), dtype=out.dtype)
                    if trim:
                        ch_s, ch_e = max(-oh_s, 0), min(OH - oh_s, CH)
                        cw_s, cw_e = max(-ow_s, 0), min(OW - ow_s, CW)
                        macs += max(ch_e - ch_s, 0) * max(cw_e - cw_s, 0) * OC * IC * N
                        for ch in range(ch_s, ch_e):
                            for cw in range(cw_s, cw_e):
                                for oc in range(OC):
                                    acc += dy[:, oh_s + ch, ow_s + cw, oc, None] * kern[None, oc, ch, cw, :]
                    else:
                        macs += CH * CW * OC * IC * N
                        for ch in range(CH):
                            oh = oh_s + ch
                            if not 0 <= oh < OH:
                                continue
                            for cw in range(CW):
                                ow = ow_s + cw
                                if not 0 <= ow < OW:
                                    continue
                                for oc in range(OC):
                                    acc += dy[:, oh, ow, oc, None] * kern[None, oc, ch, cw, :]
                    out[:, ih, iw, :] = acc
    return macs


def sk_dilated(x, dy, out, sh, sw, ph, pw, trim=False, nthreads=1):
    N, IH, IW, IC = x.shape
    _, OH, OW, OC = dy.shape
    _, FH, FW, _ = out.shape
    macs = 0
    for fh in range(FH):
        ih_s = fh - ph
        for fw in range(FW):
            iw_s = fw - pw
            acc = np.zeros((OC, IC), dtype=out.dtype)
            if trim:
                oh_s, oh_e = max(_ceil_div(-ih_s, sh), 0), min(OH, _ceil_div(IH - ih_s, sh))
                ow_s, ow_e = max(_ceil_div(-iw_s, sw), 0), min(OW, _ceil_div(IW - iw_s, sw))
                macs += max(oh_e - oh_s, 0) * max(ow_e - ow_s, 0) * N * IC * OC
                for oh in range(oh_s, oh_e):
                    for ow in range(ow_s, ow_e):
                        for n in range(N):
                            acc += dy[n, oh, ow, :, None] * x[n, ih_s + oh * sh, iw_s + ow * sw, None, :]
            else:
                macs += OH * OW * N * IC * OC
                for oh in range(OH):
                    ih = oh * sh + ih_s
                    if not 0 <= ih < IH:
                        continue
                    for ow in range(OW):
                        iw = ow * sw + iw_s
                        if not 0 <= iw < IW:
                            continue
                        for n in range(N):
                            acc += dy[n, oh, ow, :, None] * x[n, ih, iw, None, :]
            out[:, fh, fw, :] = acc
    return macs


def sk_dilated_segment(x, dy, out, sh, sw, ph, pw, k0, k1):
    N, IH, IW, IC = x.shape
    _, OH, OW, OC = dy.shape
    _, FH, FW, _ = out.shape
    for fh in range(FH):
        for fw in range(FW):
            acc = out[:, fh, fw, :].copy()
            for k in range(k0, k1):
                n, ow, oh = k % N, (k // N) % OW, k // (N * OW)
                ih, iw = oh * sh + fh - ph, ow * sw + fw - pw
                if 0 <= ih < IH and 0 <= iw < IW:
                    acc += dy[n, oh, ow, :, None] * x[n, ih, iw, None, :]
            out[:, fh, fw, :] = acc
    return (k1 - k0) * OC * FH * FW * IC


def gemm(a, b, out, block=64, nthreads=1):
    out[...] = 0
    K = a.shape[1]
    for k0 in range(0, K, block):
        for k in range(k0, min(k0 + block, K)):
            out += a[:, k, None] * b[None, k, :]
