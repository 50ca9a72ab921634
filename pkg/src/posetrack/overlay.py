"""Static per-frame renderings of tracked skeletons with their ids."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

from PIL import Image, ImageDraw

from .skeleton import DEFAULT_SKELETON, SkeletonSpec, TrackedPose

PALETTE = [
    (230, 25, 75), (60, 180, 75), (255, 225, 25), (0, 130, 200), (245, 130, 48),
    (145, 30, 180), (70, 240, 240), (240, 50, 230), (210, 245, 60), (250, 190, 212),
    (0, 128, 128), (220, 190, 255), (170, 110, 40), (128, 0, 0), (170, 255, 195),
]


def track_color(track_id: int) -> tuple[int, int, int]:
    return PALETTE[(track_id - 1) % len(PALETTE)]


def render_frame(poses: Sequence[TrackedPose], width: int, height: int,
                 spec: SkeletonSpec = DEFAULT_SKELETON) -> Image.Image:
    img = Image.new("RGB", (width, height), (16, 16, 16))
    draw = ImageDraw.Draw(img)
    for tp in poses:
        color = track_color(tp.track_id)
        xy, on = tp.pose.xy, tp.pose.present
        for i, j in spec.edges:
            if on[i] and on[j]:
                draw.line([tuple(xy[i]), tuple(xy[j])], fill=color, width=2)
        for k in range(spec.K):
            if on[k]:
                x, y = xy[k]
                draw.ellipse([x - 2, y - 2, x + 2, y + 2], fill=color)
        b = tp.pose.bbox
        draw.rectangle([b.x_min, b.y_min, b.x_max, b.y_max], outline=color)
        draw.text((b.x_min + 2, b.y_min + 1), str(tp.track_id), fill=color)
    return img


def write_overlays(frames: dict[int, Sequence[TrackedPose]], sizes: dict[int, tuple[int, int]],
                   out_dir, spec: SkeletonSpec = DEFAULT_SKELETON) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for t in sorted(frames):
        w, h = sizes[t]
        p = out / f"frame_{t:06d}.png"
        render_frame(frames[t], w, h, spec).save(p)
        paths.append(p)
    return paths
