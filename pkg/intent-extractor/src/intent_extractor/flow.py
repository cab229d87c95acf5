"""Mask propagation along per-frame-pair displacement fields.

Fields store forward displacements (dx, dy) in pixels: channel 0 moves
columns, channel 1 moves rows. The default propagation is a backward
gather, sampling the previous mask at position minus displacement with
bilinear weights, reading out-of-bounds as zero, then re-binarizing at
0.5. A forward splat is available for comparison; both agree on integer
translations.
"""

import numpy as np

from .backends import ExtractError


def check_flows(flows: np.ndarray, frames: int, height: int, width: int):
    flows = np.asarray(flows, dtype=np.float64)
    expect = (frames - 1, height, width, 2)
    if flows.shape != expect:
        raise ExtractError(f"flow shape {flows.shape} does not match {expect}")
    if not np.isfinite(flows).all():
        raise ExtractError("flow fields must be finite")
    return flows


def constant_flow(
    frames: int, height: int, width: int, dx: float, dy: float
) -> np.ndarray:
    """Synthetic field: every pixel of every pair moves by (dx, dy)."""
    flows = np.empty((frames - 1, height, width, 2), dtype=np.float64)
    flows[..., 0] = dx
    flows[..., 1] = dy
    return flows


def zero_flow(frames: int, height: int, width: int) -> np.ndarray:
    return constant_flow(frames, height, width, 0.0, 0.0)


def _bilinear_gather(values: np.ndarray, ys: np.ndarray, xs: np.ndarray):
    """Sample values at fractional coordinates; outside reads as 0."""
    h, w = values.shape
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    fy = ys - y0
    fx = xs - x0
    out = np.zeros(ys.shape, dtype=np.float64)
    for oy, wy in ((0, 1.0 - fy), (1, fy)):
        for ox, wx in ((0, 1.0 - fx), (1, fx)):
            yy = y0 + oy
            xx = x0 + ox
            inside = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w)
            vals = np.where(
                inside, values[yy.clip(0, h - 1), xx.clip(0, w - 1)], 0.0
            )
            out += wy * wx * vals
    return out


def warp_backward(mask: np.ndarray, flow: np.ndarray) -> np.ndarray:
    h, w = mask.shape
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    sampled = _bilinear_gather(
        mask.astype(np.float64), ys - flow[..., 1], xs - flow[..., 0]
    )
    return (sampled >= 0.5).astype(np.uint8)


def warp_splat(mask: np.ndarray, flow: np.ndarray) -> np.ndarray:
    h, w = mask.shape
    ys, xs = np.mgrid[0:h, 0:w]
    src = mask.astype(bool).ravel()
    ty = (ys.astype(np.float64) + flow[..., 1]).ravel()[src]
    tx = (xs.astype(np.float64) + flow[..., 0]).ravel()[src]
    acc = np.zeros((h, w), dtype=np.float64)
    y0 = np.floor(ty).astype(np.int64)
    x0 = np.floor(tx).astype(np.int64)
    fy = ty - y0
    fx = tx - x0
    for oy, wy in ((0, 1.0 - fy), (1, fy)):
        for ox, wx in ((0, 1.0 - fx), (1, fx)):
            yy = y0 + oy
            xx = x0 + ox
            inside = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w)
            np.add.at(acc, (yy[inside], xx[inside]), (wy * wx)[inside])
    return (acc >= 0.5).astype(np.uint8)


def propagate(
    first_mask: np.ndarray, flows: np.ndarray, mode: str = "backward"
) -> np.ndarray:
    """Roll the first-frame mask through every displacement field.

    Returns the (T, H, W) uint8 stack, first frame included unchanged.
    """
    first = np.asarray(first_mask)
    if first.ndim != 2:
        raise ExtractError("first mask must be 2-d")
    if not np.isin(first, (0, 1)).all():
        raise ExtractError("first mask must be binary")
    warp = {"backward": warp_backward, "splat": warp_splat}.get(mode)
    if warp is None:
        raise ExtractError(f"unknown propagation mode {mode!r}")
    h, w = first.shape
    flows = check_flows(flows, flows.shape[0] + 1, h, w)
    out = [first.astype(np.uint8)]
    for step in flows:
        out.append(warp(out[-1], step))
    return np.stack(out)
