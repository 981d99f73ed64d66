"""Differentiable replica of the streaming enhancement pipeline.

Every stage of the engine's frame loop is rebuilt here from torch ops with
identical arithmetic conventions: replicate-padded 3x3 convolutions, 2x
mean-pool feature extraction, pixel-shuffle upsampling, clamped bilinear
deformation, rotation-ensemble pattern gathers and the learnable-step
quantizer between them.  The quantizer's forward value is the engine's
exact rounding, so the forward here and the engine's network path agree to
floating-point noise on identical weights, while its straight-through
construction lets gradients reach every parameter.

Parameter tensors keep the exact shapes the engine's weights file stores,
so export is a rename, not a reshape.
"""

from __future__ import annotations

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from .quantize import lsq_quantize

MAFE_LAYERS = 11
OFFSET_LAYERS = 4
NET_KINDS = ("s", "t1", "t2")
# First-layer kernel geometry per enhancement net: (in_channels, (kh, kw)).
FIRST_CONV = {"s": (1, (2, 2)), "t1": (3, (2, 1)), "t2": (1, (2, 2))}

# Neighbor displacements per rotation step of the 2x2 spatial pattern, in
# gather-column order (anchor, side a, side b, diagonal); step j rotates the
# pattern 90 degrees counter-clockwise about the anchor.
ROT_STEPS = (
    ((0, 1), (1, 0), (1, 1)),
    ((-1, 0), (0, 1), (-1, 1)),
    ((0, -1), (-1, 0), (-1, -1)),
    ((1, 0), (0, -1), (1, -1)),
)

# Center-to-neighbor displacement per rotation step of the temporal pair
# pattern: down, right, up, left.
T1_DIRS = ((1, 0), (0, 1), (-1, 0), (0, -1))

# Base grid displacements, row-major over the 3x3 neighborhood.
BASE_GRID = tuple((dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1))


def replicate_conv(x: torch.Tensor, conv: nn.Conv2d) -> torch.Tensor:
    """3x3 convolution with edge padding, keeping spatial size."""
    kh, kw = conv.kernel_size
    x = F.pad(x, (kw // 2, kw // 2, kh // 2, kh // 2), mode="replicate")
    return conv(x)


def downsample2x(x: torch.Tensor) -> torch.Tensor:
    """2x2 mean pooling on (B, C, H, W), replicate-padding odd sizes."""
    _, _, h, w = x.shape
    if h % 2 or w % 2:
        x = F.pad(x, (0, w % 2, 0, h % 2), mode="replicate")
    return F.avg_pool2d(x, 2)


def shifted(plane: torch.Tensor, dr: int, dc: int) -> torch.Tensor:
    """plane[:, r+dr, c+dc] with out-of-frame coordinates replicate-clamped."""
    _, h, w = plane.shape
    rows = torch.clamp(torch.arange(h, device=plane.device) + dr, 0, h - 1)
    cols = torch.clamp(torch.arange(w, device=plane.device) + dc, 0, w - 1)
    return plane[:, rows][:, :, cols]


def s_patterns(xq: torch.Tensor) -> torch.Tensor:
    """The four rotated 2x2 gather patterns, shape (4, B, H, W, 4)."""
    out = []
    for steps in ROT_STEPS:
        cols = [xq] + [shifted(xq, dr, dc) for dr, dc in steps]
        out.append(torch.stack(cols, dim=-1))
    return torch.stack(out)


def t1_patterns(cur3: torch.Tensor, ref1: torch.Tensor, ref2: torch.Tensor) -> torch.Tensor:
    """Center/neighbor pair gathers per rotation, shape (4, B, H, W, 6).

    Columns are plane-major (current, ref1, ref2), center before neighbor;
    the rotating partner never leaves the 3x3 block, so no clamping.
    """
    out = []
    for dr, dc in T1_DIRS:
        cols = []
        for plane in (cur3, ref1, ref2):
            cols.append(plane[:, 1::3, 1::3])
            cols.append(plane[:, 1 + dr :: 3, 1 + dc :: 3])
        out.append(torch.stack(cols, dim=-1))
    return torch.stack(out)


def t2_pattern(ref3: torch.Tensor) -> torch.Tensor:
    """Corner gather of each 3x3 patch, shape (B, H, W, 4), row-major."""
    return torch.stack(
        [ref3[:, 0::3, 0::3], ref3[:, 0::3, 2::3], ref3[:, 2::3, 0::3], ref3[:, 2::3, 2::3]],
        dim=-1,
    )


def ensemble_mean(results: torch.Tensor) -> torch.Tensor:
    # Sorting before summing matches the engine's rotation-label-independent
    # float32 accumulation; sort gradients are a permutation, so this stays
    # differentiable.
    return torch.sort(results, dim=0).values.sum(dim=0) / 4.0


def upsample3(x: torch.Tensor) -> torch.Tensor:
    """Pixel repetition on (B, H, W): each pixel becomes a 3x3 block."""
    return x.repeat_interleave(3, dim=1).repeat_interleave(3, dim=2)


def bilinear_sample(plane: torch.Tensor, yy: torch.Tensor, xx: torch.Tensor) -> torch.Tensor:
    """Sample (B, H, W) planes at fractional coordinates, clamped to frame.

    Mirrors the engine's formula: clamp, floor, lerp.  Gradients flow into
    the plane values and, through the fractional parts, into the
    coordinates; the integer cell choice is treated as constant, the usual
    piecewise-linear sampling semantics.
    """
    b, h, w = plane.shape
    yy = yy.clamp(0.0, h - 1.0)
    xx = xx.clamp(0.0, w - 1.0)
    y0 = yy.detach().floor().long()
    x0 = xx.detach().floor().long()
    y1 = torch.clamp(y0 + 1, max=h - 1)
    x1 = torch.clamp(x0 + 1, max=w - 1)
    fy = yy - y0
    fx = xx - x0
    bi = torch.arange(b, device=plane.device)[:, None, None]
    top = plane[bi, y0, x0] * (1.0 - fx) + plane[bi, y0, x1] * fx
    bot = plane[bi, y1, x0] * (1.0 - fx) + plane[bi, y1, x1] * fx
    return top * (1.0 - fy) + bot * fy


def deform(ref: torch.Tensor, offsets: torch.Tensor) -> torch.Tensor:
    """Gather (B, H, W) reference planes into the (B, 3H, 3W) layout.

    Slot k of the 3x3 block at (3r, 3c) samples the reference at
    (r + base_k.y + dy_k, c + base_k.x + dx_k), bilinearly, clamped.
    """
    b, h, w = ref.shape
    rows = torch.arange(h, device=ref.device, dtype=ref.dtype)[None, :, None]
    cols = torch.arange(w, device=ref.device, dtype=ref.dtype)[None, None, :]
    samples = []
    for k, (dr, dc) in enumerate(BASE_GRID):
        # (rows + dr) is exact in float32, so adding the offset last rounds
        # once, the same association the engine uses.
        yy = (rows + dr) + offsets[:, 2 * k]
        xx = (cols + dc) + offsets[:, 2 * k + 1]
        samples.append(bilinear_sample(ref, yy, xx))
    t = torch.stack(samples).reshape(3, 3, b, h, w)
    return t.permute(2, 3, 0, 4, 1).reshape(b, 3 * h, 3 * w)


class Mafe(nn.Module):
    """Shared feature extractor: 2x mean-pool then 11 conv3x3/relu layers."""

    def __init__(self):
        super().__init__()
        self.convs = nn.ModuleList(
            [nn.Conv2d(1 if i == 0 else 32, 32, 3) for i in range(MAFE_LAYERS)]
        )

    def forward(self, y: torch.Tensor) -> torch.Tensor:
        t = downsample2x(y)
        for i, conv in enumerate(self.convs):
            t = replicate_conv(t, conv)
            if i < MAFE_LAYERS - 1:
                t = F.relu(t)
        return t


class SpatialComplement(nn.Module):
    """Compensation head: 3 conv3x3 on features, pixel shuffle to a residual."""

    def __init__(self):
        super().__init__()
        self.convs = nn.ModuleList(
            [nn.Conv2d(32, 32, 3), nn.Conv2d(32, 32, 3), nn.Conv2d(32, 4, 3)]
        )

    def forward(self, feat: torch.Tensor) -> torch.Tensor:
        h = feat
        for i, conv in enumerate(self.convs):
            h = replicate_conv(h, conv)
            if i < 2:
                h = F.relu(h)
        return F.pixel_shuffle(h, 2)[:, 0]


class OffsetHead(nn.Module):
    """Offset predictor on concatenated features; final layer is linear."""

    def __init__(self):
        super().__init__()
        self.convs = nn.ModuleList(
            [
                nn.Conv2d(64, 32, 3),
                nn.Conv2d(32, 32, 3),
                nn.Conv2d(32, 32, 3),
                nn.Conv2d(32, 72, 3),
            ]
        )

    def forward(self, feat_cur: torch.Tensor, feat_ref: torch.Tensor) -> torch.Tensor:
        h = torch.cat([feat_cur, feat_ref], dim=1)
        for i, conv in enumerate(self.convs):
            h = replicate_conv(h, conv)
            if i < OFFSET_LAYERS - 1:
                h = F.relu(h)
        return F.pixel_shuffle(h, 2)


class EnhanceHead(nn.Module):
    """One enhancement network, applied as an MLP over gathered patterns.

    Parameters live in conv shapes (the file format's shapes); the first
    kernel's C-order flattening is the gather-column order, so the module
    consumes (..., D) pattern tensors directly.
    """

    def __init__(self, kind: str):
        super().__init__()
        in_c, ksize = FIRST_CONV[kind]
        self.kind = kind
        self.dims = in_c * ksize[0] * ksize[1]
        layers = [nn.Conv2d(in_c, 32, ksize, dilation=2 if kind == "t2" else 1)]
        layers += [nn.Conv2d(32, 32, 1) for _ in range(9)]
        layers.append(nn.Conv2d(32, 1, 1))
        self.convs = nn.ModuleList(layers)

    def forward(self, pats: torch.Tensor) -> torch.Tensor:
        """(..., D) dequantized patterns to (...) residuals."""
        h = pats
        for i, conv in enumerate(self.convs):
            w = conv.weight.reshape(conv.weight.shape[0], -1)
            h = h @ w.T + conv.bias
            if i < len(self.convs) - 1:
                h = F.relu(h)
        return h[..., 0]


class ReplicaModel(nn.Module):
    """The full trainable pipeline with the engine's frame-loop semantics."""

    def __init__(self, window: int = 7):
        super().__init__()
        self.window = window
        self.mafe = Mafe()
        self.sc = SpatialComplement()
        self.offset = OffsetHead()
        self.nets = nn.ModuleDict({kind: EnhanceHead(kind) for kind in NET_KINDS})
        self.s_input = nn.Parameter(torch.ones(1))
        self.s_ref = nn.Parameter(torch.ones(1))

    def zero_residual_init(self) -> None:
        """Start as the identity map: zero the last layer of every head.

        Offsets start at zero (identity alignment on the base grid), the
        compensation residual starts at zero, and all three enhancement
        residuals start at zero, so the initial output equals the input.
        """
        with torch.no_grad():
            for conv in (self.sc.convs[-1], self.offset.convs[-1]):
                conv.weight.zero_()
                conv.bias.zero_()
            for kind in NET_KINDS:
                self.nets[kind].convs[-1].weight.zero_()
                self.nets[kind].convs[-1].bias.zero_()
            self.s_input.fill_(1.0)
            self.s_ref.fill_(1.0)

    def compensate(self, y: torch.Tensor, feat: torch.Tensor) -> torch.Tensor:
        return y + self.sc(feat)

    def residuals(self, xhat: torch.Tensor, ref1hat: torch.Tensor, ref2hat: torch.Tensor):
        """The three residual paths from dequantized planes.

        ``xhat`` is (B, H, W) at original resolution; the references are
        (B, 3H, 3W) deformed planes.  Matches the engine's network path:
        rotation ensembles for the spatial and pair patterns, a plain
        two-reference average for the corner pattern.
        """
        r_s = ensemble_mean(self.nets["s"](s_patterns(xhat)))
        cur3 = upsample3(xhat)
        r_t1 = ensemble_mean(self.nets["t1"](t1_patterns(cur3, ref1hat, ref2hat)))
        q1 = self.nets["t2"](t2_pattern(ref1hat))
        q2 = self.nets["t2"](t2_pattern(ref2hat))
        r_t2 = (q1 + q2) / 2.0
        return r_s, r_t1, r_t2

    def _select_refs(self, cache: list, batch: int):
        """Per-sample two lowest-QP cache entries; ascending QP, ties prefer
        the more recent frame.  Returns per-reference gather indices."""
        order = []
        for b in range(batch):
            ranked = sorted(
                range(len(cache)), key=lambda i: (int(cache[i]["qp"][b]), -cache[i]["index"])
            )
            order.append((ranked[0], ranked[1] if len(ranked) > 1 else ranked[0]))
        sel1 = torch.tensor([o[0] for o in order])
        sel2 = torch.tensor([o[1] for o in order])
        return sel1, sel2

    def enhance_window(self, comp: torch.Tensor, qps) -> torch.Tensor:
        """Run the causal frame loop over (B, T, H, W) compressed luma.

        The cache holds detached features and outputs, so gradients stay
        within each frame's own computation (memory stays flat in the
        window length); the first frame self-references its compensated
        plane, exactly like the engine's bootstrap.
        """
        b, t_count, _, _ = comp.shape
        qps = np.asarray(qps)
        cache: list[dict] = []
        outs = []
        for t in range(t_count):
            y = comp[:, t]
            feat = self.mafe(y[:, None])
            xt = self.compensate(y, feat)
            if not cache:
                ref_feats = (feat, feat)
                ref_planes = (xt, xt)
            else:
                sel1, sel2 = self._select_refs(cache, b)
                feats = torch.stack([e["feat"] for e in cache])
                planes = torch.stack([e["plane"] for e in cache])
                bi = torch.arange(b)
                ref_feats = (feats[sel1, bi], feats[sel2, bi])
                ref_planes = (planes[sel1, bi], planes[sel2, bi])
            deformed = []
            for rf, rp in zip(ref_feats, ref_planes):
                offsets = self.offset(feat, rf)
                deformed.append(deform(rp, offsets))
            xhat = lsq_quantize(xt, self.s_input)
            r1hat = lsq_quantize(deformed[0], self.s_ref)
            r2hat = lsq_quantize(deformed[1], self.s_ref)
            r_s, r_t1, r_t2 = self.residuals(xhat, r1hat, r2hat)
            y_out = xt + (r_s + (r_t1 + r_t2))
            cache.append(
                {"feat": feat.detach(), "plane": y_out.detach(), "qp": qps[:, t], "index": t}
            )
            if len(cache) > self.window:
                cache.pop(0)
            outs.append(y_out)
        return torch.stack(outs, dim=1)

    def export_tensors(self) -> dict:
        """Parameters under the engine's tensor names, as numpy float32."""
        out = {}

        def put(name, module_list):
            for i, conv in enumerate(module_list):
                out[f"{name}.{i}.weight"] = conv.weight.detach().numpy().copy()
                out[f"{name}.{i}.bias"] = conv.bias.detach().numpy().copy()

        put("mafe", self.mafe.convs)
        put("sc", self.sc.convs)
        put("offset", self.offset.convs)
        for kind in NET_KINDS:
            put(f"net_{kind}", self.nets[kind].convs)
        out["quant.s_input"] = self.s_input.detach().numpy().copy()
        out["quant.s_ref"] = self.s_ref.detach().numpy().copy()
        return out
