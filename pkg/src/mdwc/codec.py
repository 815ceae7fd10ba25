"""Embedded bitplane codec: quad-tree seeding plus weight-driven dilation.

One engine implements both codec sides.  All coding decisions consume the
shared synchronized state plus bit values obtained through a channel; the
encoder's channel computes each bit from the true coefficients and writes
it, the decoder's channel reads it back.  Because everything downstream of
the channel is common code, the two sides stay field-for-field identical
after every coded symbol, including at rate-budget stops.

Per bitplane (n_max down to 0) the significance pass visits the LL subband
first, then HL, LH, HH from the coarsest level to the finest.  LL uses the
plain quad-tree + one-bit-per-neighbor dilation; the detail subbands pick,
per group of N available neighbors, between weight-controlled dilation and
the variable-length group test, judged from the running group statistics
P[N][0], P[N][1].  A refinement pass closes each plane.
"""

from __future__ import annotations

from array import array
from collections import deque

import numpy as np

from . import container
from .bitio import (
    MODEL_REF,
    MODEL_SIG,
    MODEL_SIGN,
    TruncatedStream,
    make_sink,
    make_source,
)
from .transform import ORIENTS, WaveletPyramid
from .weights import OFFSETS, WeightSet, train_all

_FNV = 0x100000001B3
_M64 = 0xFFFFFFFFFFFFFFFF

# fingerprint tags
_T_PLANE = 0
_T_PIXEL = 1
_T_SIGN = 2
_T_SET = 3
_T_GROUP = 4
_T_PRE = 5
_T_REFINE = 6


class CodingStopped(Exception):
    """Rate budget reached; both sides stop before the same symbol."""


class Subband:
    __slots__ = (
        "idx", "level", "orient", "r0", "c0", "h", "w", "is_ll",
        "status", "sign", "rec", "sig_plane", "alphas",
        "parent", "child", "mag", "true_sign",
    )

    def __init__(self, idx, level, orient, rect):
        self.idx = idx
        self.level = level
        self.orient = orient
        self.r0, self.c0, self.h, self.w = rect
        self.is_ll = orient == "LL"
        # status: 0 untested, 1 tested-insignificant this plane, 2 significant
        self.status = np.zeros((self.h, self.w), dtype=np.uint8)
        self.sign = np.zeros((self.h, self.w), dtype=np.int8)
        self.rec = np.zeros((self.h, self.w), dtype=np.float64)
        self.sig_plane = np.full((self.h, self.w), -1, dtype=np.int16)
        self.alphas = None
        self.parent = None
        self.child = None
        self.mag = None        # encoder only: floor(|coefficient|)
        self.true_sign = None  # encoder only


class EncoderChannel:
    """Computes each bit from the true coefficients and emits it."""

    def __init__(self, sink, budget=None):
        self.sink = sink
        self.budget = budget
        self.threshold = 0

    def _emit(self, bit, model):
        sink = self.sink
        if self.budget is not None and sink.bits_emitted() >= self.budget:
            raise CodingStopped
        sink.put(bit, model)
        return bit

    def significance(self, sb, r, c):
        return self._emit(1 if sb.mag[r, c] >= self.threshold else 0, MODEL_SIG)

    def sign(self, sb, r, c):
        neg = sb.true_sign[r, c] < 0
        self._emit(1 if neg else 0, MODEL_SIGN)
        return -1 if neg else 1

    def set_significance(self, sb, rect):
        r0, c0, h, w = rect
        mags = sb.mag[r0 : r0 + h, c0 : c0 + w]
        st = sb.status[r0 : r0 + h, c0 : c0 + w]
        bit = 1 if bool(((mags >= self.threshold) & (st == 0)).any()) else 0
        return self._emit(bit, MODEL_SIG)

    def group_significance(self, sb, members):
        mags = sb.mag
        t = self.threshold
        bit = 0
        for r, c in members:
            if mags[r, c] >= t:
                bit = 1
                break
        return self._emit(bit, MODEL_SIG)

    def group_single(self, sb, members):
        mags = sb.mag
        t = self.threshold
        count = 0
        for r, c in members:
            if mags[r, c] >= t:
                count += 1
                if count > 1:
                    break
        return self._emit(1 if count == 1 else 0, MODEL_SIG)

    def refinement(self, sb, r, c, plane):
        return self._emit((int(sb.mag[r, c]) >> plane) & 1, MODEL_REF)

    def confirm_significant(self, sb, r, c):
        # soundness of the inference rules; never emits a bit
        assert sb.mag[r, c] >= self.threshold, "inferred-significant member below threshold"


class DecoderChannel:
    """Reads every bit the encoder would have computed."""

    def __init__(self, source, budget=None):
        self.source = source
        self.budget = budget
        self.threshold = 0

    def _take(self, model):
        source = self.source
        if self.budget is not None and source.bits_consumed() >= self.budget:
            raise CodingStopped
        return source.get(model)

    def significance(self, sb, r, c):
        return self._take(MODEL_SIG)

    def sign(self, sb, r, c):
        return -1 if self._take(MODEL_SIGN) else 1

    def set_significance(self, sb, rect):
        return self._take(MODEL_SIG)

    def group_significance(self, sb, members):
        return self._take(MODEL_SIG)

    def group_single(self, sb, members):
        return self._take(MODEL_SIG)

    def refinement(self, sb, r, c, plane):
        return self._take(MODEL_REF)

    def confirm_significant(self, sb, r, c):
        pass


class CoderEngine:
    """The synchronized coder state machine (either side)."""

    def __init__(self, height, width, levels, weight_sets, n_max, channel,
                 fingerprint=False):
        self.height = height
        self.width = width
        self.levels = levels
        self.n_max = n_max
        self.channel = channel
        geometry = WaveletPyramid.zeros(height, width, levels)
        self.subbands = []
        by_key = {}
        order = [(levels, "LL")]
        for level in range(levels, 0, -1):
            order.extend((level, o) for o in ORIENTS)
        for key in order:
            rect = geometry.subband_rect(*key)
            if rect[2] == 0 or rect[3] == 0:
                continue
            sb = Subband(len(self.subbands), key[0], key[1], rect)
            if not sb.is_ll:
                sb.alphas = tuple(float(v) for v in weight_sets[key[1]].alphas)
            self.subbands.append(sb)
            by_key[key] = sb
        for sb in self.subbands:
            if not sb.is_ll:
                sb.parent = by_key.get((sb.level + 1, sb.orient))
                sb.child = by_key.get((sb.level - 1, sb.orient))
        self.lis = [[(0, 0, sb.h, sb.w)] for sb in self.subbands]
        self.lsp = []
        self.stats_g = [0] * 9
        self.stats_c0 = [0] * 9
        self.stats_c1 = [0] * 9
        self.plane = n_max
        self.threshold = 1 << n_max
        self._fp_on = fingerprint
        self.fingerprint = 0
        self.trace = array("Q") if fingerprint else None

    def load_truth(self, pyramid):
        """Attach the encoder-side coefficient truth."""
        for sb in self.subbands:
            grid = pyramid.data[sb.r0 : sb.r0 + sb.h, sb.c0 : sb.c0 + sb.w]
            sb.mag = np.floor(np.abs(grid)).astype(np.int64)
            sb.true_sign = np.where(grid < 0, -1, 1).astype(np.int8)

    # -- fingerprinting ----------------------------------------------------

    def _fp(self, tag, sbidx, r, c, v):
        key = (tag << 58) ^ (sbidx << 52) ^ (r << 28) ^ (c << 4) ^ (v & 0xF)
        fp = ((self.fingerprint ^ key) * _FNV) & _M64
        self.fingerprint = fp
        self.trace.append(fp)

    # -- top level ---------------------------------------------------------

    def run(self):
        try:
            for n in range(self.n_max, -1, -1):
                self._plane(n)
        except (CodingStopped, TruncatedStream):
            pass

    def _plane(self, n):
        self.plane = n
        self.threshold = 1 << n
        self.channel.threshold = self.threshold
        for sb in self.subbands:
            st = sb.status
            st[st == 1] = 0
        if self._fp_on:
            self._fp(_T_PLANE, 0, n, 0, 0)
        lsp_end = len(self.lsp)
        for sb in self.subbands:
            self._code_subband(sb)
        self._refine(n, lsp_end)

    def _code_subband(self, sb):
        old = self.lis[sb.idx]
        new = []
        self.lis[sb.idx] = new
        for rect in old:
            self._quad(sb, rect, new)

    # -- quad-tree pass ----------------------------------------------------

    def _quad(self, sb, rect, out):
        r0, c0, h, w = rect
        status = sb.status
        if h == 1 and w == 1:
            s = status[r0, c0]
            if s:  # resolved: no bits; a merely-insignificant pixel stays listed
                if s == 1:
                    out.append(rect)
                return
            bit = self.channel.significance(sb, r0, c0)
            if self._fp_on:
                self._fp(_T_PIXEL, sb.idx, r0, c0, bit)
            if bit:
                self._make_significant(sb, r0, c0)
                self._dilate(sb, r0, c0)
            else:
                status[r0, c0] = 1
                out.append(rect)
            return
        view = status[r0 : r0 + h, c0 : c0 + w]
        if view.all():  # fully resolved: silently skipped, both sides know
            if not (view == 2).all():
                out.append(rect)
            return
        bit = self.channel.set_significance(sb, rect)
        if self._fp_on:
            self._fp(_T_SET, sb.idx, r0, c0, bit)
        if not bit:
            out.append(rect)
            return
        h1 = (h + 1) >> 1
        w1 = (w + 1) >> 1
        quads = (
            (r0, c0, h1, w1),
            (r0, c0 + w1, h1, w - w1),
            (r0 + h1, c0, h - h1, w1),
            (r0 + h1, c0 + w1, h - h1, w - w1),
        )
        for q in quads:
            if q[2] and q[3]:
                self._quad(sb, q, out)

    # -- dilation ----------------------------------------------------------

    def _make_significant(self, sb, r, c):
        sgn = self.channel.sign(sb, r, c)
        if self._fp_on:
            self._fp(_T_SIGN, sb.idx, r, c, 0 if sgn > 0 else 1)
        sb.status[r, c] = 2
        sb.sign[r, c] = sgn
        sb.sig_plane[r, c] = self.plane
        sb.rec[r, c] = 1.5 * self.threshold
        self.lsp.append((sb, r, c))

    def _dilate(self, sb, seed_r, seed_c):
        queue = deque()
        queue.append((seed_r, seed_c))
        status = sb.status
        h = sb.h
        w = sb.w
        is_ll = sb.is_ll
        while queue:
            r, c = queue.popleft()
            members = []
            for dr in (-1, 0, 1):
                rr = r + dr
                if 0 <= rr < h:
                    for dc in (-1, 0, 1):
                        if dr or dc:
                            cc = c + dc
                            if 0 <= cc < w and status[rr, cc] == 0:
                                members.append((rr, cc))
            n = len(members)
            if n == 0:
                continue
            if is_ll:
                self._plain_group(sb, members, queue)
            elif self._use_vl(n):
                self._vl_group(sb, members, queue, n)
            else:
                self._control_group(sb, members, queue, n)

    def _use_vl(self, n):
        # min(p'0, p'1) > 4N / (3N^2 + N + 2), evaluated exactly in integers
        g = self.stats_g[n]
        lhs = min(self.stats_c0[n], self.stats_c1[n]) * (3 * n * n + n + 2)
        return lhs > 4 * n * g

    def _wscore(self, sb, r, c):
        """Predicted significance degree of one untested coefficient."""
        a = sb.alphas
        status = sb.status
        h = sb.h
        w = sb.w
        t = 0.0
        k = 0
        for dr, dc in OFFSETS:
            rr = r + dr
            cc = c + dc
            if 0 <= rr < h and 0 <= cc < w and status[rr, cc] == 2:
                t += a[k]
            k += 1
        parent = sb.parent
        if parent is not None:
            pr = r >> 1
            pc = c >> 1
            if pr < parent.h and pc < parent.w and parent.status[pr, pc] == 2:
                t += a[12]
        child = sb.child
        if child is not None:
            cst = child.status
            chh = child.h
            chw = child.w
            r2 = r << 1
            c2 = c << 1
            hits = 0
            for rr in (r2, r2 + 1):
                if rr < chh:
                    for cc in (c2, c2 + 1):
                        if cc < chw and cst[rr, cc] == 2:
                            hits += 1
            if hits:
                t += a[13] * (hits * 0.25)
        return t

    def _order_desc(self, sb, members):
        scored = [(-self._wscore(sb, r, c), r, c) for r, c in members]
        scored.sort()
        return scored

    def _order_asc(self, sb, members):
        scored = [(self._wscore(sb, r, c), r, c) for r, c in members]
        scored.sort()
        return scored

    def _plain_group(self, sb, members, queue):
        # LL rule: one bit per available neighbor, raster order, no stats
        channel = self.channel
        fp_on = self._fp_on
        status = sb.status
        for r, c in members:
            bit = channel.significance(sb, r, c)
            if fp_on:
                self._fp(_T_PIXEL, sb.idx, r, c, bit)
            if bit:
                self._make_significant(sb, r, c)
                queue.append((r, c))
            else:
                status[r, c] = 1

    def _control_group(self, sb, members, queue, n):
        channel = self.channel
        fp_on = self._fp_on
        status = sb.status
        order = self._order_desc(sb, members)
        bits = []
        ones = 0
        for _, r, c in order:
            bit = channel.significance(sb, r, c)
            if fp_on:
                self._fp(_T_PIXEL, sb.idx, r, c, bit)
            bits.append(bit)
            if bit:
                self._make_significant(sb, r, c)
                queue.append((r, c))
                ones += 1
                if ones == 2:
                    break
            else:
                status[r, c] = 1
                break
        # decoder-observable stand-ins for P[N][0] and P[N][1]
        self.stats_g[n] += 1
        if bits[0] == 0:
            self.stats_c0[n] += 1
        elif len(bits) == 2 and bits[1] == 0:
            self.stats_c1[n] += 1

    def _vl_group(self, sb, members, queue, n):
        channel = self.channel
        fp_on = self._fp_on
        status = sb.status
        group_bit = channel.group_significance(sb, members)
        if fp_on:
            self._fp(_T_GROUP, sb.idx, members[0][0], members[0][1], group_bit)
        if group_bit == 0:
            for r, c in members:
                status[r, c] = 1
            self.stats_g[n] += 1
            self.stats_c0[n] += 1
            return
        pre = channel.group_single(sb, members)
        if fp_on:
            self._fp(_T_PRE, sb.idx, members[0][0], members[0][1], pre)
        if pre:
            # exactly one significant member; best candidates first
            order = self._order_desc(sb, members)
            last = n - 1
            for i, (_, r, c) in enumerate(order):
                if i == last:
                    channel.confirm_significant(sb, r, c)
                    bit = 1  # inferred after N-1 zeros, no bit spent
                else:
                    bit = channel.significance(sb, r, c)
                    if fp_on:
                        self._fp(_T_PIXEL, sb.idx, r, c, bit)
                if bit:
                    self._make_significant(sb, r, c)
                    queue.append((r, c))
                    for _, r2, c2 in order[i + 1 :]:
                        status[r2, c2] = 1  # inferred insignificant
                    break
                status[r, c] = 1
            self.stats_g[n] += 1
            self.stats_c1[n] += 1
            return
        # at least two significant members; likely-insignificant first
        order = self._order_asc(sb, members)
        zeros = 0
        stop = n - 2
        i = 0
        while i < n:
            if zeros == stop:
                break
            _, r, c = order[i]
            bit = channel.significance(sb, r, c)
            if fp_on:
                self._fp(_T_PIXEL, sb.idx, r, c, bit)
            if bit:
                self._make_significant(sb, r, c)
                queue.append((r, c))
            else:
                status[r, c] = 1
                zeros += 1
            i += 1
        for _, r, c in order[i:]:
            channel.confirm_significant(sb, r, c)  # inferred significant
            self._make_significant(sb, r, c)
            queue.append((r, c))
        self.stats_g[n] += 1

    # -- refinement ----------------------------------------------------------

    def _refine(self, n, lsp_end):
        channel = self.channel
        fp_on = self._fp_on
        step = self.threshold * 0.5  # 2^(n-1); midpoint reconstruction
        lsp = self.lsp
        for k in range(lsp_end):
            sb, r, c = lsp[k]
            bit = channel.refinement(sb, r, c, n)
            if fp_on:
                self._fp(_T_REFINE, sb.idx, r, c, bit)
            if bit:
                sb.rec[r, c] += step
            else:
                sb.rec[r, c] -= step

    # -- outputs -------------------------------------------------------------

    def reconstruction(self):
        """Current reconstruction as a WaveletPyramid."""
        pyr = WaveletPyramid.zeros(self.height, self.width, self.levels)
        for sb in self.subbands:
            pyr.data[sb.r0 : sb.r0 + sb.h, sb.c0 : sb.c0 + sb.w] = sb.rec * sb.sign
        return pyr

    def state_snapshot(self):
        """Deep copy of the decoder-visible state, for mirror comparisons."""
        return {
            "status": [sb.status.copy() for sb in self.subbands],
            "sign": [sb.sign.copy() for sb in self.subbands],
            "rec": [sb.rec.copy() for sb in self.subbands],
            "sig_plane": [sb.sig_plane.copy() for sb in self.subbands],
            "lis": [list(entries) for entries in self.lis],
            "lsp": [(sb.idx, r, c) for sb, r, c in self.lsp],
            "stats": (list(self.stats_g), list(self.stats_c0), list(self.stats_c1)),
        }


def compute_nmax(pyramid):
    """Highest bitplane index; (0, True) for a pyramid with no codable bit."""
    top = int(np.max(np.floor(np.abs(pyramid.data))))
    if top <= 0:
        return 0, True
    return top.bit_length() - 1, False


def build_header(pyramid, weight_sets, arithmetic):
    n_max, empty = compute_nmax(pyramid)
    return container.Header(
        width=pyramid.width,
        height=pyramid.height,
        levels=pyramid.levels,
        n_max=n_max,
        arithmetic=arithmetic,
        empty=empty,
        weights={o: weight_sets[o].quantized for o in ORIENTS},
    )


def encode_with_engine(pyramid, weight_sets=None, rate_budget=None,
                       arithmetic=True, fingerprint=False):
    """Full encode; returns (container bytes, engine or None)."""
    if weight_sets is None:
        weight_sets = train_all(pyramid)
    header = build_header(pyramid, weight_sets, arithmetic)
    packed = header.pack()
    if header.empty or (rate_budget is not None and rate_budget <= 0):
        return packed, None
    sink = make_sink(arithmetic)
    channel = EncoderChannel(sink, rate_budget)
    engine = CoderEngine(
        pyramid.height, pyramid.width, pyramid.levels,
        weight_sets, header.n_max, channel, fingerprint,
    )
    engine.load_truth(pyramid)
    engine.run()
    return packed + sink.getvalue(), engine


def encode(pyramid, weight_sets=None, rate_budget=None, arithmetic=True):
    """Encode a pyramid into a self-contained .mdw byte string."""
    data, _ = encode_with_engine(pyramid, weight_sets, rate_budget, arithmetic)
    return data


def decode_with_engine(data, rate_budget=None, fingerprint=False):
    """Decode container bytes; returns (WaveletPyramid, engine or None)."""
    header, payload = container.split_stream(data)
    if header.empty or (rate_budget is not None and rate_budget <= 0):
        return WaveletPyramid.zeros(header.height, header.width, header.levels), None
    weight_sets = {o: WeightSet(o, header.weights[o]) for o in ORIENTS}
    source = make_source(payload, header.arithmetic)
    channel = DecoderChannel(source, rate_budget)
    engine = CoderEngine(
        header.height, header.width, header.levels,
        weight_sets, header.n_max, channel, fingerprint,
    )
    engine.run()
    return engine.reconstruction(), engine


def decode(data, rate_budget=None):
    pyr, _ = decode_with_engine(data, rate_budget)
    return pyr


def rate_to_budget(rate_bpp, width, height, charge_header=False):
    """Payload bit budget for a target rate; optionally bills the header."""
    budget = int(round(rate_bpp * width * height))
    if charge_header:
        budget -= container.HEADER_BITS
    return max(budget, 0)


def encode_image(image, levels=5, rate_bpp=None, arithmetic=True, charge_header=False):
    """Transform, train and encode one 8-bit grayscale plane."""
    from .transform import forward_dwt97

    image = np.asarray(image)
    pyramid = forward_dwt97(image.astype(np.float64), levels)
    budget = None
    if rate_bpp is not None:
        budget = rate_to_budget(rate_bpp, pyramid.width, pyramid.height, charge_header)
    return encode(pyramid, rate_budget=budget, arithmetic=arithmetic)


def decode_image(data, rate_bpp=None, charge_header=False):
    """Decode container bytes back to a clamped 8-bit plane."""
    from .transform import inverse_dwt97, to_uint8

    header, _ = container.split_stream(data)
    budget = None
    if rate_bpp is not None:
        budget = rate_to_budget(rate_bpp, header.width, header.height, charge_header)
    return to_uint8(inverse_dwt97(decode(data, rate_budget=budget)))
