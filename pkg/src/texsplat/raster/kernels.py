"""Single-threaded numba kernels: tiled forward pass, exact reverse pass, votes.

Loop structure is splat-outer inside each tile: candidates arrive depth
sorted per tile, each visits only its own bbox pixels, and per-pixel
transmittance lives in tile-local buffers. A pixel's visited candidates and
their order are therefore identical to a naive per-pixel front-to-back walk.

The backward kernel replays the forward walk contribution-by-contribution
(same expressions, same order) and pushes per-map gradients through alpha
compositing with the suffix trick: for the k-th contribution of a pixel,
d(pixel)/d(alpha_k) = T_k q_k - S_k / (1 - alpha_k), where S_k is everything
composited after k (including the background tail).
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .constants import ALPHA_CULL, ALPHA_MAX, DENOM_EPS, LOWPASS_SIGMA_PX, T_STOP, TILE

INV2S2 = 1.0 / (2.0 * LOWPASS_SIGMA_PX * LOWPASS_SIGMA_PX)

# mode ids must match targets.MODE_IDS (enum declaration order)
M_SHADED, M_FLAT, M_NORMAL, M_DEPTH, M_TEXTURE, M_SH = 0, 1, 2, 3, 4, 5


@njit(cache=True, nogil=True)
def forward_kernel(
    H, W, fx, fy, cx, cy, cam_pos, cam_rot, near, far,
    order, bin_offsets, bin_items, item_bbox, tiles_x, tiles_y,
    hA, hB, hC, ncam, pix_dcx, pix_dcy, pix_inv_dn,
    prim_light, hhat, hvalid,
    nrm, su, sv, o_eff, base3,
    textured, tex_u, tex_v, tex_off, tsize, texels,
    ka, kd, ks, beta, ldir, lspec, lamb, ldiff, sh_rgb,
    proj_px, proj_py, cut_half, mode, bg,
    color, alpha, depth, normal, texmap, kmaps,
):
    inv_near = 1.0 / near
    inv_far = 1.0 / far

    Tloc = np.empty((TILE, TILE))
    acc = np.empty((TILE, TILE, 14))  # color3, depth, normal3, tex3, k4
    row_alive = np.empty(TILE, dtype=np.int64)

    for tyi in range(tiles_y):
        y_lo = tyi * TILE
        y_hi = min(y_lo + TILE, H)
        for txi in range(tiles_x):
            x_lo = txi * TILE
            x_hi = min(x_lo + TILE, W)
            s0 = bin_offsets[tyi * tiles_x + txi]
            s1 = bin_offsets[tyi * tiles_x + txi + 1]
            for yy in range(y_hi - y_lo):
                row_alive[yy] = x_hi - x_lo
                for xx in range(x_hi - x_lo):
                    Tloc[yy, xx] = 1.0
                    for ch in range(14):
                        acc[yy, xx, ch] = 0.0

            for jj in range(s0, s1):
                i = order[bin_items[jj]]
                bx0 = max(item_bbox[jj, 0], x_lo)
                bx1 = min(item_bbox[jj, 1], x_hi - 1)
                by0 = max(item_bbox[jj, 2], y_lo)
                by1 = min(item_bbox[jj, 3], y_hi - 1)
                if bx0 > bx1 or by0 > by1:
                    continue
                A0 = hA[i, 0]
                A1 = hA[i, 1]
                A2 = hA[i, 2]
                B0 = hB[i, 0]
                B1 = hB[i, 1]
                B2 = hB[i, 2]
                C0 = hC[i, 0]
                C1 = hC[i, 1]
                C2 = hC[i, 2]
                nc0 = ncam[i, 0]
                nc1 = ncam[i, 1]
                nc2 = ncam[i, 2]
                nx = nrm[i, 0]
                ny = nrm[i, 1]
                nz = nrm[i, 2]
                oi = o_eff[i]
                ch_cut = cut_half[i]
                ppx = proj_px[i]
                ppy = proj_py[i]
                tex_on = textured[i] == 1
                U = tex_u[i]
                V = tex_v[i]
                off = tex_off[i]
                su_ts = su[i] / tsize[i] if tex_on else 0.0
                sv_ts = sv[i] / tsize[i] if tex_on else 0.0
                ucen = (U - 1) * 0.5
                vcen = (V - 1) * 0.5
                b0 = base3[i, 0]
                b1 = base3[i, 1]
                b2 = base3[i, 2]
                kai = ka[i]
                kdi = kd[i]
                ksi = ks[i]
                bei = beta[i]
                if mode == M_SHADED:
                    lx = ldir[i, 0]
                    ly = ldir[i, 1]
                    lz = ldir[i, 2]
                    ndl = abs(nx * lx + ny * ly + nz * lz)
                    coef = kai * lamb[i] + kdi * ldiff[i] * ndl
                    spec_gate = (ndl > 0.0) and ksi != 0.0
                    ls0 = lspec[i, 0]
                    ls1 = lspec[i, 1]
                    ls2 = lspec[i, 2]
                    li = prim_light[i]
                    bei_int = int(bei)
                    int_pow = bei == bei_int and 1 <= bei_int <= 64
                else:
                    lx = ly = lz = 0.0
                    ndl = 0.0
                    coef = 0.0
                    spec_gate = False
                    ls0 = ls1 = ls2 = 0.0
                    li = 0
                    bei_int = 1
                    int_pow = False

                for py in range(by0, by1 + 1):
                    yy = py - y_lo
                    if row_alive[yy] == 0:
                        continue
                    pyf = float(py)
                    dcy = pix_dcy[py]
                    rowA = A1 * pyf + A2
                    rowB = B1 * pyf + B2
                    rowC = C1 * pyf + C2
                    for px in range(bx0, bx1 + 1):
                        xx = px - x_lo
                        T = Tloc[yy, xx]
                        if T < T_STOP:
                            continue
                        pxf = float(px)
                        cp = C0 * pxf + rowC
                        if cp <= inv_far or cp >= inv_near:
                            continue
                        dcx = pix_dcx[px]
                        ncd = nc0 * dcx + nc1 * dcy + nc2
                        icp = 1.0 / cp
                        uu = (A0 * pxf + rowA) * icp
                        vv = (B0 * pxf + rowB) * icp
                        hr = 0.5 * (uu * uu + vv * vv)
                        ddx = pxf - ppx
                        ddy = pyf - ppy
                        elp = (ddx * ddx + ddy * ddy) * INV2S2
                        if hr > ch_cut:
                            if elp > ch_cut:
                                continue
                            G = math.exp(-elp)
                        elif elp > ch_cut:
                            G = math.exp(-hr)
                        else:
                            gs = math.exp(-hr)
                            gl = math.exp(-elp)
                            G = gs if gs >= gl else gl
                        a = oi * G
                        if a < ALPHA_CULL:
                            continue
                        if a > ALPHA_MAX:
                            a = ALPHA_MAX
                        zc = icp

                        ct0 = ct1 = ct2 = 0.0
                        if tex_on:
                            ut = uu * su_ts + ucen
                            vt = vv * sv_ts + vcen
                            if ut < 0.0:
                                ut = 0.0
                            elif ut > U - 1:
                                ut = float(U - 1)
                            if vt < 0.0:
                                vt = 0.0
                            elif vt > V - 1:
                                vt = float(V - 1)
                            u0i = int(ut)
                            v0i = int(vt)
                            if u0i > U - 2:
                                u0i = U - 2 if U > 1 else 0
                            if v0i > V - 2:
                                v0i = V - 2 if V > 1 else 0
                            u1i = u0i + 1 if u0i + 1 <= U - 1 else U - 1
                            v1i = v0i + 1 if v0i + 1 <= V - 1 else V - 1
                            fu = ut - u0i
                            fv = vt - v0i
                            c00 = off + u0i * V + v0i
                            c10 = off + u1i * V + v0i
                            c01 = off + u0i * V + v1i
                            c11 = off + u1i * V + v1i
                            w00 = (1.0 - fu) * (1.0 - fv)
                            w10 = fu * (1.0 - fv)
                            w01 = (1.0 - fu) * fv
                            w11 = fu * fv
                            ct0 = texels[c00, 0] * w00 + texels[c10, 0] * w10 + texels[c01, 0] * w01 + texels[c11, 0] * w11
                            ct1 = texels[c00, 1] * w00 + texels[c10, 1] * w10 + texels[c01, 1] * w01 + texels[c11, 1] * w11
                            ct2 = texels[c00, 2] * w00 + texels[c10, 2] * w10 + texels[c01, 2] * w01 + texels[c11, 2] * w11

                        sn = 1.0 if ncd < 0.0 else -1.0

                        if mode == M_SHADED or mode == M_FLAT:
                            cb0 = b0
                            cb1 = b1
                            cb2 = b2
                            if tex_on:
                                cb0 += ct0
                                cb1 += ct1
                                cb2 += ct2
                            if mode == M_SHADED:
                                q0 = coef * cb0
                                q1 = coef * cb1
                                q2 = coef * cb2
                                if spec_gate and hvalid[li, py, px] != 0:
                                    ndh = abs(
                                        nx * hhat[li, py, px, 0]
                                        + ny * hhat[li, py, px, 1]
                                        + nz * hhat[li, py, px, 2]
                                    )
                                    if int_pow:
                                        sk = ksi * ndh ** bei_int
                                    else:
                                        sk = ksi * ndh ** bei
                                    q0 += sk * ls0
                                    q1 += sk * ls1
                                    q2 += sk * ls2
                                if q0 < 0.0:
                                    q0 = 0.0
                                if q1 < 0.0:
                                    q1 = 0.0
                                if q2 < 0.0:
                                    q2 = 0.0
                            else:
                                q0, q1, q2 = cb0, cb1, cb2
                        elif mode == M_NORMAL:
                            q0 = sn * nx
                            q1 = sn * ny
                            q2 = sn * nz
                        elif mode == M_DEPTH:
                            q0 = zc
                            q1 = zc
                            q2 = zc
                        elif mode == M_TEXTURE:
                            q0, q1, q2 = ct0, ct1, ct2
                        else:
                            q0 = sh_rgb[i, 0]
                            q1 = sh_rgb[i, 1]
                            q2 = sh_rgb[i, 2]

                        wgt = T * a
                        acc[yy, xx, 0] += wgt * q0
                        acc[yy, xx, 1] += wgt * q1
                        acc[yy, xx, 2] += wgt * q2
                        acc[yy, xx, 3] += wgt * zc
                        acc[yy, xx, 4] += wgt * sn * nx
                        acc[yy, xx, 5] += wgt * sn * ny
                        acc[yy, xx, 6] += wgt * sn * nz
                        acc[yy, xx, 7] += wgt * ct0
                        acc[yy, xx, 8] += wgt * ct1
                        acc[yy, xx, 9] += wgt * ct2
                        acc[yy, xx, 10] += wgt * kai
                        acc[yy, xx, 11] += wgt * kdi
                        acc[yy, xx, 12] += wgt * ksi
                        acc[yy, xx, 13] += wgt * bei
                        Tn = T * (1.0 - a)
                        Tloc[yy, xx] = Tn
                        if Tn < T_STOP:
                            row_alive[yy] -= 1

            for py in range(y_lo, y_hi):
                yy = py - y_lo
                for px in range(x_lo, x_hi):
                    xx = px - x_lo
                    T = Tloc[yy, xx]
                    color[py, px, 0] = acc[yy, xx, 0] + T * bg[0]
                    color[py, px, 1] = acc[yy, xx, 1] + T * bg[1]
                    color[py, px, 2] = acc[yy, xx, 2] + T * bg[2]
                    alpha[py, px] = 1.0 - T
                    depth[py, px] = acc[yy, xx, 3]
                    normal[py, px, 0] = acc[yy, xx, 4]
                    normal[py, px, 1] = acc[yy, xx, 5]
                    normal[py, px, 2] = acc[yy, xx, 6]
                    texmap[py, px, 0] = acc[yy, xx, 7]
                    texmap[py, px, 1] = acc[yy, xx, 8]
                    texmap[py, px, 2] = acc[yy, xx, 9]
                    kmaps[py, px, 0] = acc[yy, xx, 10]
                    kmaps[py, px, 1] = acc[yy, xx, 11]
                    kmaps[py, px, 2] = acc[yy, xx, 12]
                    kmaps[py, px, 3] = acc[yy, xx, 13]


@njit(cache=True, nogil=True)
def backward_kernel(
    H, W, fx, fy, cx, cy, cam_pos, cam_rot, near, far,
    order, bin_offsets, bin_items, item_bbox, tiles_x, tiles_y,
    mu, tu, tv, nrm, su, sv, o_eff, base3,
    textured, tex_u, tex_v, tex_off, tsize, texels,
    ka, kd, ks, beta, ldir, lspec, lamb, ldiff, sh_rgb,
    proj_px, proj_py, cut_half, mode, bg,
    color, alpha, depth, normal, texmap, kmaps,
    gC, gA, gD, gN, gT, gK,
    g_mu, g_tu, g_tv, g_n, g_logsu, g_logsv, g_oeff, g_base3, g_texels,
    g_ka, g_kd, g_ks, g_beta, g_shrgb,
    ray_w, ray_dn,
):
    cpx, cpy, cpz = cam_pos[0], cam_pos[1], cam_pos[2]
    r00, r01, r02 = cam_rot[0, 0], cam_rot[0, 1], cam_rot[0, 2]
    r10, r11, r12 = cam_rot[1, 0], cam_rot[1, 1], cam_rot[1, 2]
    r20, r21, r22 = cam_rot[2, 0], cam_rot[2, 1], cam_rot[2, 2]

    Tloc = np.empty((TILE, TILE))
    pref = np.empty((TILE, TILE, 14))
    skip = np.empty((TILE, TILE), dtype=np.uint8)

    for tyi in range(tiles_y):
        y_lo = tyi * TILE
        y_hi = min(y_lo + TILE, H)
        for txi in range(tiles_x):
            x_lo = txi * TILE
            x_hi = min(x_lo + TILE, W)
            s0 = bin_offsets[tyi * tiles_x + txi]
            s1 = bin_offsets[tyi * tiles_x + txi + 1]
            if s0 == s1:
                continue
            any_grad = False
            for py in range(y_lo, y_hi):
                yy = py - y_lo
                for px in range(x_lo, x_hi):
                    xx = px - x_lo
                    Tloc[yy, xx] = 1.0
                    for ch in range(14):
                        pref[yy, xx, ch] = 0.0
                    z = (
                        gC[py, px, 0] == 0.0 and gC[py, px, 1] == 0.0 and gC[py, px, 2] == 0.0
                        and gA[py, px] == 0.0 and gD[py, px] == 0.0
                        and gN[py, px, 0] == 0.0 and gN[py, px, 1] == 0.0 and gN[py, px, 2] == 0.0
                        and gT[py, px, 0] == 0.0 and gT[py, px, 1] == 0.0 and gT[py, px, 2] == 0.0
                        and gK[py, px, 0] == 0.0 and gK[py, px, 1] == 0.0
                        and gK[py, px, 2] == 0.0 and gK[py, px, 3] == 0.0
                    )
                    skip[yy, xx] = 1 if z else 0
                    if not z:
                        any_grad = True
            if not any_grad:
                continue

            for jj in range(s0, s1):
                i = order[bin_items[jj]]
                bx0 = max(item_bbox[jj, 0], x_lo)
                bx1 = min(item_bbox[jj, 1], x_hi - 1)
                by0 = max(item_bbox[jj, 2], y_lo)
                by1 = min(item_bbox[jj, 3], y_hi - 1)
                if bx0 > bx1 or by0 > by1:
                    continue
                nx = nrm[i, 0]
                ny = nrm[i, 1]
                nz = nrm[i, 2]
                mx = mu[i, 0] - cpx
                my = mu[i, 1] - cpy
                mz = mu[i, 2] - cpz
                mdn = mx * nx + my * ny + mz * nz
                tux = tu[i, 0]
                tuy = tu[i, 1]
                tuz = tu[i, 2]
                tvx = tv[i, 0]
                tvy = tv[i, 1]
                tvz = tv[i, 2]
                isu = 1.0 / su[i]
                isv = 1.0 / sv[i]
                oi = o_eff[i]
                ch_cut = cut_half[i]
                ppx = proj_px[i]
                ppy = proj_py[i]
                tex_on = textured[i] == 1
                U = tex_u[i]
                V = tex_v[i]
                off = tex_off[i]
                its = 1.0 / tsize[i] if tex_on else 0.0
                ucen = (U - 1) * 0.5
                vcen = (V - 1) * 0.5
                b0 = base3[i, 0]
                b1 = base3[i, 1]
                b2 = base3[i, 2]
                kai = ka[i]
                kdi = kd[i]
                ksi = ks[i]
                bei = beta[i]
                if mode == M_SHADED:
                    lx = ldir[i, 0]
                    ly = ldir[i, 1]
                    lz = ldir[i, 2]
                    ndl_raw = nx * lx + ny * ly + nz * lz
                    ndl = abs(ndl_raw)
                    coef = kai * lamb[i] + kdi * ldiff[i] * ndl
                    spec_gate = ndl > 0.0
                    ls0 = lspec[i, 0]
                    ls1 = lspec[i, 1]
                    ls2 = lspec[i, 2]
                    lam = lamb[i]
                    ldf = ldiff[i]
                else:
                    lx = ly = lz = 0.0
                    ndl_raw = 0.0
                    ndl = 0.0
                    coef = 0.0
                    spec_gate = False
                    ls0 = ls1 = ls2 = 0.0
                    lam = ldf = 0.0

                for py in range(by0, by1 + 1):
                    pyf = float(py)
                    yy = py - y_lo
                    for px in range(bx0, bx1 + 1):
                        xx = px - x_lo
                        T = Tloc[yy, xx]
                        if T < T_STOP or skip[yy, xx] == 1:
                            continue
                        pxf = float(px)
                        wx = ray_w[py, px, 0]
                        wy = ray_w[py, px, 1]
                        wz = ray_w[py, px, 2]
                        dn = ray_dn[py, px]
                        denom = nx * wx + ny * wy + nz * wz
                        if -DENOM_EPS < denom < DENOM_EPS:
                            continue
                        t_ray = mdn / denom
                        zc = t_ray / dn
                        if zc <= near or zc >= far:
                            continue
                        plx = t_ray * wx - mx
                        ply = t_ray * wy - my
                        plz = t_ray * wz - mz
                        qu = tux * plx + tuy * ply + tuz * plz
                        qv = tvx * plx + tvy * ply + tvz * plz
                        uu = qu * isu
                        vv = qv * isv
                        hr = 0.5 * (uu * uu + vv * vv)
                        ddx = pxf - ppx
                        ddy = pyf - ppy
                        elp = (ddx * ddx + ddy * ddy) * INV2S2
                        lp_branch = False
                        if hr > ch_cut:
                            if elp > ch_cut:
                                continue
                            G = math.exp(-elp)
                            lp_branch = True
                        elif elp > ch_cut:
                            G = math.exp(-hr)
                        else:
                            gs = math.exp(-hr)
                            gl = math.exp(-elp)
                            if gs >= gl:
                                G = gs
                            else:
                                G = gl
                                lp_branch = True
                        a_raw = oi * G
                        if a_raw < ALPHA_CULL:
                            continue
                        clamped = a_raw > ALPHA_MAX
                        a = ALPHA_MAX if clamped else a_raw

                        # texture sample replay
                        ct0 = ct1 = ct2 = 0.0
                        ut = vt = fu = fv = 0.0
                        c00 = c10 = c01 = c11 = 0
                        uclamped = vclamped = True
                        if tex_on:
                            ut = qu * its + ucen
                            vt = qv * its + vcen
                            uclamped = ut < 0.0 or ut > U - 1
                            vclamped = vt < 0.0 or vt > V - 1
                            if ut < 0.0:
                                ut = 0.0
                            elif ut > U - 1:
                                ut = float(U - 1)
                            if vt < 0.0:
                                vt = 0.0
                            elif vt > V - 1:
                                vt = float(V - 1)
                            u0i = int(ut)
                            v0i = int(vt)
                            if u0i > U - 2:
                                u0i = U - 2 if U > 1 else 0
                            if v0i > V - 2:
                                v0i = V - 2 if V > 1 else 0
                            u1i = u0i + 1 if u0i + 1 <= U - 1 else U - 1
                            v1i = v0i + 1 if v0i + 1 <= V - 1 else V - 1
                            fu = ut - u0i
                            fv = vt - v0i
                            c00 = off + u0i * V + v0i
                            c10 = off + u1i * V + v0i
                            c01 = off + u0i * V + v1i
                            c11 = off + u1i * V + v1i
                            w00 = (1.0 - fu) * (1.0 - fv)
                            w10 = fu * (1.0 - fv)
                            w01 = (1.0 - fu) * fv
                            w11 = fu * fv
                            ct0 = texels[c00, 0] * w00 + texels[c10, 0] * w10 + texels[c01, 0] * w01 + texels[c11, 0] * w11
                            ct1 = texels[c00, 1] * w00 + texels[c10, 1] * w10 + texels[c01, 1] * w01 + texels[c11, 1] * w11
                            ct2 = texels[c00, 2] * w00 + texels[c10, 2] * w10 + texels[c01, 2] * w01 + texels[c11, 2] * w11

                        sn = 1.0 if denom < 0.0 else -1.0

                        # color source replay with pre-clamp values for masks
                        cb0 = cb1 = cb2 = 0.0
                        spec_on = False
                        hvx = hvy = hvz = 0.0
                        ihn = 0.0
                        ndh_raw = 0.0
                        ndh = 0.0
                        pw = 0.0
                        q0p = q1p = q2p = 0.0
                        if mode == M_SHADED or mode == M_FLAT:
                            cb0 = b0
                            cb1 = b1
                            cb2 = b2
                            if tex_on:
                                cb0 += ct0
                                cb1 += ct1
                                cb2 += ct2
                            if mode == M_SHADED:
                                q0p = coef * cb0
                                q1p = coef * cb1
                                q2p = coef * cb2
                                if spec_gate:
                                    hvx = lx - wx
                                    hvy = ly - wy
                                    hvz = lz - wz
                                    hn = math.sqrt(hvx * hvx + hvy * hvy + hvz * hvz)
                                    if hn > 1e-9:
                                        spec_on = True
                                        ihn = 1.0 / hn
                                        ndh_raw = (nx * hvx + ny * hvy + nz * hvz) * ihn
                                        ndh = abs(ndh_raw)
                                        pw = ndh ** bei
                                        sk = ksi * pw
                                        q0p += sk * ls0
                                        q1p += sk * ls1
                                        q2p += sk * ls2
                                q0 = q0p if q0p > 0.0 else 0.0
                                q1 = q1p if q1p > 0.0 else 0.0
                                q2 = q2p if q2p > 0.0 else 0.0
                            else:
                                q0, q1, q2 = cb0, cb1, cb2
                        elif mode == M_NORMAL:
                            q0 = sn * nx
                            q1 = sn * ny
                            q2 = sn * nz
                        elif mode == M_DEPTH:
                            q0 = zc
                            q1 = zc
                            q2 = zc
                        elif mode == M_TEXTURE:
                            q0, q1, q2 = ct0, ct1, ct2
                        else:
                            q0 = sh_rgb[i, 0]
                            q1 = sh_rgb[i, 1]
                            q2 = sh_rgb[i, 2]

                        wgt = T * a
                        one_m = 1.0 - a
                        inv_om = 1.0 / one_m
                        snx = sn * nx
                        sny = sn * ny
                        snz = sn * nz

                        gC0 = gC[py, px, 0]
                        gC1 = gC[py, px, 1]
                        gC2 = gC[py, px, 2]
                        gAv = gA[py, px]
                        gDv = gD[py, px]
                        gN0 = gN[py, px, 0]
                        gN1 = gN[py, px, 1]
                        gN2 = gN[py, px, 2]
                        gT0 = gT[py, px, 0]
                        gT1 = gT[py, px, 1]
                        gT2 = gT[py, px, 2]
                        gK0 = gK[py, px, 0]
                        gK1 = gK[py, px, 1]
                        gK2 = gK[py, px, 2]
                        gK3 = gK[py, px, 3]
                        Tfin = 1.0 - alpha[py, px]

                        # ---- alpha gradient via suffix sums ----------------
                        g_alpha = gAv * Tfin * inv_om
                        S = (color[py, px, 0] - Tfin * bg[0]) - pref[yy, xx, 0] - wgt * q0 + Tfin * bg[0]
                        g_alpha += gC0 * (T * q0 - S * inv_om)
                        S = (color[py, px, 1] - Tfin * bg[1]) - pref[yy, xx, 1] - wgt * q1 + Tfin * bg[1]
                        g_alpha += gC1 * (T * q1 - S * inv_om)
                        S = (color[py, px, 2] - Tfin * bg[2]) - pref[yy, xx, 2] - wgt * q2 + Tfin * bg[2]
                        g_alpha += gC2 * (T * q2 - S * inv_om)
                        S = depth[py, px] - pref[yy, xx, 3] - wgt * zc
                        g_alpha += gDv * (T * zc - S * inv_om)
                        S = normal[py, px, 0] - pref[yy, xx, 4] - wgt * snx
                        g_alpha += gN0 * (T * snx - S * inv_om)
                        S = normal[py, px, 1] - pref[yy, xx, 5] - wgt * sny
                        g_alpha += gN1 * (T * sny - S * inv_om)
                        S = normal[py, px, 2] - pref[yy, xx, 6] - wgt * snz
                        g_alpha += gN2 * (T * snz - S * inv_om)
                        S = texmap[py, px, 0] - pref[yy, xx, 7] - wgt * ct0
                        g_alpha += gT0 * (T * ct0 - S * inv_om)
                        S = texmap[py, px, 1] - pref[yy, xx, 8] - wgt * ct1
                        g_alpha += gT1 * (T * ct1 - S * inv_om)
                        S = texmap[py, px, 2] - pref[yy, xx, 9] - wgt * ct2
                        g_alpha += gT2 * (T * ct2 - S * inv_om)
                        S = kmaps[py, px, 0] - pref[yy, xx, 10] - wgt * kai
                        g_alpha += gK0 * (T * kai - S * inv_om)
                        S = kmaps[py, px, 1] - pref[yy, xx, 11] - wgt * kdi
                        g_alpha += gK1 * (T * kdi - S * inv_om)
                        S = kmaps[py, px, 2] - pref[yy, xx, 12] - wgt * ksi
                        g_alpha += gK2 * (T * ksi - S * inv_om)
                        S = kmaps[py, px, 3] - pref[yy, xx, 13] - wgt * bei
                        g_alpha += gK3 * (T * bei - S * inv_om)

                        # ---- per-contribution value gradients ---------------
                        dq0 = gC0 * wgt
                        dq1 = gC1 * wgt
                        dq2 = gC2 * wgt
                        gzc = gDv * wgt
                        gfn0 = gN0 * wgt
                        gfn1 = gN1 * wgt
                        gfn2 = gN2 * wgt
                        gct0 = gT0 * wgt
                        gct1 = gT1 * wgt
                        gct2 = gT2 * wgt
                        g_ka[i] += gK0 * wgt
                        g_kd[i] += gK1 * wgt
                        g_ks[i] += gK2 * wgt
                        g_beta[i] += gK3 * wgt

                        g_qu = 0.0
                        g_qv = 0.0
                        gn0 = 0.0
                        gn1 = 0.0
                        gn2 = 0.0

                        if mode == M_SHADED:
                            m0 = dq0 if q0p > 0.0 else 0.0
                            m1 = dq1 if q1p > 0.0 else 0.0
                            m2 = dq2 if q2p > 0.0 else 0.0
                            gcb0 = m0 * coef
                            gcb1 = m1 * coef
                            gcb2 = m2 * coef
                            mdotc = m0 * cb0 + m1 * cb1 + m2 * cb2
                            g_ka[i] += lam * mdotc
                            g_kd[i] += ldf * ndl * mdotc
                            g_ndl = kdi * ldf * mdotc
                            if spec_on:
                                gls = m0 * ls0 + m1 * ls1 + m2 * ls2
                                g_ks[i] += gls * pw
                                g_pw = gls * ksi
                                if ndh > 1e-12:
                                    g_beta[i] += g_pw * pw * math.log(ndh)
                                    g_ndh = g_pw * bei * ndh ** (bei - 1.0)
                                    sgn_h = 1.0 if ndh_raw >= 0.0 else -1.0
                                    gn0 += g_ndh * sgn_h * hvx * ihn
                                    gn1 += g_ndh * sgn_h * hvy * ihn
                                    gn2 += g_ndh * sgn_h * hvz * ihn
                            if ndl_raw != 0.0:
                                sgn_l = 1.0 if ndl_raw > 0.0 else -1.0
                                gn0 += g_ndl * sgn_l * lx
                                gn1 += g_ndl * sgn_l * ly
                                gn2 += g_ndl * sgn_l * lz
                            g_base3[i, 0] += gcb0
                            g_base3[i, 1] += gcb1
                            g_base3[i, 2] += gcb2
                            if tex_on:
                                gct0 += gcb0
                                gct1 += gcb1
                                gct2 += gcb2
                        elif mode == M_FLAT:
                            g_base3[i, 0] += dq0
                            g_base3[i, 1] += dq1
                            g_base3[i, 2] += dq2
                            if tex_on:
                                gct0 += dq0
                                gct1 += dq1
                                gct2 += dq2
                        elif mode == M_NORMAL:
                            gfn0 += dq0
                            gfn1 += dq1
                            gfn2 += dq2
                        elif mode == M_DEPTH:
                            gzc += dq0 + dq1 + dq2
                        elif mode == M_TEXTURE:
                            gct0 += dq0
                            gct1 += dq1
                            gct2 += dq2
                        else:
                            g_shrgb[i, 0] += dq0
                            g_shrgb[i, 1] += dq1
                            g_shrgb[i, 2] += dq2

                        # flipped normal -> raw normal
                        gn0 += sn * gfn0
                        gn1 += sn * gfn1
                        gn2 += sn * gfn2

                        # texture scatter + UV chain
                        if tex_on and (gct0 != 0.0 or gct1 != 0.0 or gct2 != 0.0):
                            w00 = (1.0 - fu) * (1.0 - fv)
                            w10 = fu * (1.0 - fv)
                            w01 = (1.0 - fu) * fv
                            w11 = fu * fv
                            g_texels[c00, 0] += gct0 * w00
                            g_texels[c00, 1] += gct1 * w00
                            g_texels[c00, 2] += gct2 * w00
                            g_texels[c10, 0] += gct0 * w10
                            g_texels[c10, 1] += gct1 * w10
                            g_texels[c10, 2] += gct2 * w10
                            g_texels[c01, 0] += gct0 * w01
                            g_texels[c01, 1] += gct1 * w01
                            g_texels[c01, 2] += gct2 * w01
                            g_texels[c11, 0] += gct0 * w11
                            g_texels[c11, 1] += gct1 * w11
                            g_texels[c11, 2] += gct2 * w11
                            if not uclamped:
                                d0 = (texels[c10, 0] - texels[c00, 0]) * (1.0 - fv) + (texels[c11, 0] - texels[c01, 0]) * fv
                                d1 = (texels[c10, 1] - texels[c00, 1]) * (1.0 - fv) + (texels[c11, 1] - texels[c01, 1]) * fv
                                d2 = (texels[c10, 2] - texels[c00, 2]) * (1.0 - fv) + (texels[c11, 2] - texels[c01, 2]) * fv
                                g_qu += (gct0 * d0 + gct1 * d1 + gct2 * d2) * its
                            if not vclamped:
                                d0 = (texels[c01, 0] - texels[c00, 0]) * (1.0 - fu) + (texels[c11, 0] - texels[c10, 0]) * fu
                                d1 = (texels[c01, 1] - texels[c00, 1]) * (1.0 - fu) + (texels[c11, 1] - texels[c10, 1]) * fu
                                d2 = (texels[c01, 2] - texels[c00, 2]) * (1.0 - fu) + (texels[c11, 2] - texels[c10, 2]) * fu
                                g_qv += (gct0 * d0 + gct1 * d1 + gct2 * d2) * its

                        # alpha -> (opacity, G) -> geometry
                        if not clamped:
                            gG = g_alpha * oi
                            g_oeff[i] += g_alpha * G
                            if not lp_branch:
                                grho = -0.5 * G * gG
                                g_qu += grho * 2.0 * qu * isu * isu
                                g_qv += grho * 2.0 * qv * isv * isv
                                g_logsu[i] += grho * (-2.0 * uu * uu)
                                g_logsv[i] += grho * (-2.0 * vv * vv)
                            else:
                                glp = gG * G
                                gpxv = glp * 2.0 * ddx * INV2S2
                                gpyv = glp * 2.0 * ddy * INV2S2
                                Xc = r00 * mx + r10 * my + r20 * mz
                                Yc = r01 * mx + r11 * my + r21 * mz
                                Zc = r02 * mx + r12 * my + r22 * mz
                                iz2 = 1.0 / (Zc * Zc)
                                g_mu[i, 0] += (
                                    gpxv * fx * (r00 * Zc - Xc * r02) * iz2
                                    + gpyv * fy * (r01 * Zc - Yc * r02) * iz2
                                )
                                g_mu[i, 1] += (
                                    gpxv * fx * (r10 * Zc - Xc * r12) * iz2
                                    + gpyv * fy * (r11 * Zc - Yc * r12) * iz2
                                )
                                g_mu[i, 2] += (
                                    gpxv * fx * (r20 * Zc - Xc * r22) * iz2
                                    + gpyv * fy * (r21 * Zc - Yc * r22) * iz2
                                )

                        # ray-splat intersection chain
                        tud = tux * wx + tuy * wy + tuz * wz
                        tvd = tvx * wx + tvy * wy + tvz * wz
                        g_t = g_qu * tud + g_qv * tvd + gzc / dn
                        inv_den = 1.0 / denom
                        g_mu[i, 0] += -g_qu * tux - g_qv * tvx + g_t * nx * inv_den
                        g_mu[i, 1] += -g_qu * tuy - g_qv * tvy + g_t * ny * inv_den
                        g_mu[i, 2] += -g_qu * tuz - g_qv * tvz + g_t * nz * inv_den
                        gn0 += g_t * (-plx) * inv_den
                        gn1 += g_t * (-ply) * inv_den
                        gn2 += g_t * (-plz) * inv_den
                        g_tu[i, 0] += g_qu * plx
                        g_tu[i, 1] += g_qu * ply
                        g_tu[i, 2] += g_qu * plz
                        g_tv[i, 0] += g_qv * plx
                        g_tv[i, 1] += g_qv * ply
                        g_tv[i, 2] += g_qv * plz
                        g_n[i, 0] += gn0
                        g_n[i, 1] += gn1
                        g_n[i, 2] += gn2

                        # prefixes and transmittance, exactly as in forward
                        pref[yy, xx, 0] += wgt * q0
                        pref[yy, xx, 1] += wgt * q1
                        pref[yy, xx, 2] += wgt * q2
                        pref[yy, xx, 3] += wgt * zc
                        pref[yy, xx, 4] += wgt * snx
                        pref[yy, xx, 5] += wgt * sny
                        pref[yy, xx, 6] += wgt * snz
                        pref[yy, xx, 7] += wgt * ct0
                        pref[yy, xx, 8] += wgt * ct1
                        pref[yy, xx, 9] += wgt * ct2
                        pref[yy, xx, 10] += wgt * kai
                        pref[yy, xx, 11] += wgt * kdi
                        pref[yy, xx, 12] += wgt * ksi
                        pref[yy, xx, 13] += wgt * bei
                        Tloc[yy, xx] = T * one_m


@njit(cache=True, nogil=True)
def vote_kernel(
    H, W, fx, fy, cx, cy, cam_pos, cam_rot, near, far,
    order, bin_offsets, bin_items, item_bbox, tiles_x, tiles_y,
    mu, tu, tv, nrm, su, sv, o_eff, proj_px, proj_py, cut_half,
    mask, inside, total, ray_w, ray_dn,
):
    """Accumulate per-primitive compositing weight, split by a pixel mask."""
    cpx, cpy, cpz = cam_pos[0], cam_pos[1], cam_pos[2]
    r00, r01, r02 = cam_rot[0, 0], cam_rot[0, 1], cam_rot[0, 2]
    r10, r11, r12 = cam_rot[1, 0], cam_rot[1, 1], cam_rot[1, 2]
    r20, r21, r22 = cam_rot[2, 0], cam_rot[2, 1], cam_rot[2, 2]
    Tloc = np.empty((TILE, TILE))

    for tyi in range(tiles_y):
        y_lo = tyi * TILE
        y_hi = min(y_lo + TILE, H)
        for txi in range(tiles_x):
            x_lo = txi * TILE
            x_hi = min(x_lo + TILE, W)
            s0 = bin_offsets[tyi * tiles_x + txi]
            s1 = bin_offsets[tyi * tiles_x + txi + 1]
            if s0 == s1:
                continue
            for yy in range(y_hi - y_lo):
                for xx in range(x_hi - x_lo):
                    Tloc[yy, xx] = 1.0
            for jj in range(s0, s1):
                i = order[bin_items[jj]]
                bx0 = max(item_bbox[jj, 0], x_lo)
                bx1 = min(item_bbox[jj, 1], x_hi - 1)
                by0 = max(item_bbox[jj, 2], y_lo)
                by1 = min(item_bbox[jj, 3], y_hi - 1)
                if bx0 > bx1 or by0 > by1:
                    continue
                nx = nrm[i, 0]
                ny = nrm[i, 1]
                nz = nrm[i, 2]
                mx = mu[i, 0] - cpx
                my = mu[i, 1] - cpy
                mz = mu[i, 2] - cpz
                mdn = mx * nx + my * ny + mz * nz
                tux = tu[i, 0]
                tuy = tu[i, 1]
                tuz = tu[i, 2]
                tvx = tv[i, 0]
                tvy = tv[i, 1]
                tvz = tv[i, 2]
                isu = 1.0 / su[i]
                isv = 1.0 / sv[i]
                oi = o_eff[i]
                ch_cut = cut_half[i]
                ppx = proj_px[i]
                ppy = proj_py[i]
                for py in range(by0, by1 + 1):
                    pyf = float(py)
                    yy = py - y_lo
                    for px in range(bx0, bx1 + 1):
                        xx = px - x_lo
                        T = Tloc[yy, xx]
                        if T < T_STOP:
                            continue
                        pxf = float(px)
                        wx = ray_w[py, px, 0]
                        wy = ray_w[py, px, 1]
                        wz = ray_w[py, px, 2]
                        dn = ray_dn[py, px]
                        denom = nx * wx + ny * wy + nz * wz
                        if -DENOM_EPS < denom < DENOM_EPS:
                            continue
                        t_ray = mdn / denom
                        zc = t_ray / dn
                        if zc <= near or zc >= far:
                            continue
                        plx = t_ray * wx - mx
                        ply = t_ray * wy - my
                        plz = t_ray * wz - mz
                        qu = tux * plx + tuy * ply + tuz * plz
                        qv = tvx * plx + tvy * ply + tvz * plz
                        uu = qu * isu
                        vv = qv * isv
                        hr = 0.5 * (uu * uu + vv * vv)
                        ddx = pxf - ppx
                        ddy = pyf - ppy
                        elp = (ddx * ddx + ddy * ddy) * INV2S2
                        if hr > ch_cut:
                            if elp > ch_cut:
                                continue
                            G = math.exp(-elp)
                        elif elp > ch_cut:
                            G = math.exp(-hr)
                        else:
                            gs = math.exp(-hr)
                            gl = math.exp(-elp)
                            G = gs if gs >= gl else gl
                        a = oi * G
                        if a < ALPHA_CULL:
                            continue
                        if a > ALPHA_MAX:
                            a = ALPHA_MAX
                        wgt = T * a
                        total[i] += wgt
                        if mask[py, px] != 0:
                            inside[i] += wgt
                        Tloc[yy, xx] = T * (1.0 - a)
