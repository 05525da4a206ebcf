"""Debug images: room densities, evidence maps, and per-round corner loops (needs Pillow)."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def _require_pillow():
    try:
        from PIL import Image, ImageDraw
    except ImportError as exc:  # pragma: no cover - depends on the environment
        raise RuntimeError("debug images need Pillow: pip install 'floorseq[images]'") from exc
    return Image, ImageDraw


def gray_image(values: np.ndarray):
    """Grayscale image of a grid scaled to its own maximum; rows are u, columns v."""
    Image, _ = _require_pillow()
    v = np.asarray(values, dtype=float)
    top = v.max() if v.size and v.max() > 0 else 1.0
    return Image.fromarray(np.clip(v / top * 255.0, 0, 255).astype(np.uint8), mode="L")


def loop_image(mask: np.ndarray, cells: np.ndarray, scale: int = 4):
    """Mask in gray with a corner loop (cells as (u, v)) drawn on top in red."""
    Image, ImageDraw = _require_pillow()
    base = (np.asarray(mask, dtype=float) * 120).astype(np.uint8)
    img = Image.fromarray(base, mode="L").convert("RGB").resize((mask.shape[1] * scale, mask.shape[0] * scale),
                                                                Image.NEAREST)
    draw = ImageDraw.Draw(img)
    pts = [(float(c[1] + 0.5) * scale, float(c[0] + 0.5) * scale) for c in np.asarray(cells)]
    if len(pts) > 1:
        draw.line(pts + pts[:1], fill=(255, 40, 40), width=1)
    for x, y in pts:
        draw.ellipse([x - 2, y - 2, x + 2, y + 2], outline=(255, 220, 0))
    return img


def dump_debug(result, directory) -> list[Path]:
    """Write H, M_P, M_H, and each solver round's loop for every room of a pipeline result."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def save(img, name):
        path = out / name
        img.save(path)
        written.append(path)

    for rid, room in sorted(result.rooms.items()):
        save(gray_image(room.H.values), f"room{rid}_H.png")
    summary = {}
    for rid, res in sorted(result.room_results.items()):
        if res.evidence is None:
            summary[rid] = {"error": res.error}
            continue
        M_P, M_H = res.evidence
        save(gray_image(M_P.values), f"room{rid}_MP.png")
        save(gray_image(M_H.values), f"room{rid}_MH.png")
        rounds = []
        for k, tr in enumerate(res.solution.rounds):
            save(loop_image(tr.maps.M_H, tr.cells), f"room{rid}_round{k + 1}.png")
            rounds.append({"grid_size": tr.grid_size, "cost": tr.cost, "corners": tr.corners.tolist(),
                           "nodes": tr.n_nodes, "edges": tr.n_edges, "seconds": tr.seconds})
        summary[rid] = {"thetas": res.thetas, "rounds": rounds}
    path = out / "rounds.json"
    path.write_text(json.dumps(summary, indent=1), encoding="utf-8")
    written.append(path)
    return written
