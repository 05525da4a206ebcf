"""Keyframe streams (JSON lines), ground-truth bundles, and floor-plan output files."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator

import numpy as np
from scipy.spatial.transform import Rotation

from .geometry import Pose, RoomPolygon
from .layout import Keyframe, RawLayout
from .synth import GroundTruth

QUAT_TOL = 1e-6


class StreamError(ValueError):
    """Malformed stream record; names the record index (or line) and the field."""


@dataclass(frozen=True)
class KeyframeRecord:
    index: int
    quaternion: tuple[float, float, float, float]  # w, x, y, z
    translation: tuple[float, float, float]
    phi: tuple[float, ...]
    wall_corner_columns: tuple[int, ...]
    W: int

    def to_keyframe(self) -> Keyframe:
        w, x, y, z = self.quaternion
        R = Rotation.from_quat([x, y, z, w]).as_matrix()
        pose = Pose(R, np.asarray(self.translation), timestamp=self.index)
        return Keyframe(self.index, pose, RawLayout(np.asarray(self.phi), self.wall_corner_columns))

    @classmethod
    def from_keyframe(cls, kf: Keyframe) -> "KeyframeRecord":
        x, y, z, w = Rotation.from_matrix(kf.pose.rotation).as_quat()
        if w < 0:
            w, x, y, z = -w, -x, -y, -z
        return cls(kf.index, (float(w), float(x), float(y), float(z)),
                   tuple(float(v) for v in kf.pose.translation), tuple(float(v) for v in kf.raw.phi),
                   tuple(int(c) for c in kf.raw.wall_corner_columns), kf.raw.image_width)

    def to_json(self) -> str:
        return json.dumps({"index": self.index, "quaternion": list(self.quaternion),
                           "translation": list(self.translation), "phi": list(self.phi),
                           "wall_corner_columns": list(self.wall_corner_columns), "W": self.W})


def _numbers(obj, key, where, n=None, integer=False):
    if key not in obj:
        raise StreamError(f"{where}: missing field '{key}'")
    v = obj[key]
    if not isinstance(v, list) or (n is not None and len(v) != n):
        size = f" of {n}" if n is not None else ""
        raise StreamError(f"{where}: field '{key}' must be a list{size} numbers")
    kind = int if integer else (int, float)
    if not all(isinstance(a, kind) and not isinstance(a, bool) for a in v):
        raise StreamError(f"{where}: field '{key}' has a non-{'integer' if integer else 'numeric'} entry")
    if not integer and not all(math.isfinite(a) for a in v):
        raise StreamError(f"{where}: field '{key}' has a non-finite entry")
    return v


def parse_record(line: str, line_no: int = 0) -> KeyframeRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise StreamError(f"line {line_no}: invalid JSON ({exc.msg})") from exc
    if not isinstance(obj, dict):
        raise StreamError(f"line {line_no}: record must be a JSON object")
    index = obj.get("index")
    if not isinstance(index, int) or isinstance(index, bool):
        raise StreamError(f"line {line_no}: field 'index' must be an integer")
    where = f"record {index}"
    unknown = set(obj) - {"index", "quaternion", "translation", "phi", "wall_corner_columns", "W"}
    if unknown:
        raise StreamError(f"{where}: unknown field '{sorted(unknown)[0]}'")
    q = _numbers(obj, "quaternion", where, 4)
    norm = math.sqrt(sum(a * a for a in q))
    if abs(norm - 1.0) > QUAT_TOL:
        raise StreamError(f"{where}: field 'quaternion' has norm {norm:.6g}, expected 1")
    t = _numbers(obj, "translation", where, 3)
    phi = _numbers(obj, "phi", where)
    cols = _numbers(obj, "wall_corner_columns", where, integer=True)
    W = obj.get("W")
    if not isinstance(W, int) or isinstance(W, bool) or W <= 0:
        raise StreamError(f"{where}: field 'W' must be a positive integer")
    if len(phi) != W:
        raise StreamError(f"{where}: field 'phi' has {len(phi)} entries but W = {W}")
    bad = [j for j, a in enumerate(phi) if not 0 < a < math.pi / 2]
    if bad:
        raise StreamError(f"{where}: field 'phi' entry {bad[0]} is outside (0, pi/2)")
    if any(c < 0 or c >= W for c in cols):
        raise StreamError(f"{where}: field 'wall_corner_columns' has a column outside [0, W)")
    return KeyframeRecord(index, tuple(float(a) for a in q), tuple(float(a) for a in t),
                          tuple(float(a) for a in phi), tuple(sorted(cols)), W)


def iter_stream(fh: IO[str]) -> Iterator[KeyframeRecord]:
    """Parse records one line at a time; W must stay constant across the stream."""
    width = None
    for line_no, line in enumerate(fh, start=1):
        if not line.strip():
            continue
        rec = parse_record(line, line_no)
        if width is None:
            width = rec.W
        elif rec.W != width:
            raise StreamError(f"record {rec.index}: field 'W' is {rec.W}, stream started with {width}")
        yield rec


def read_stream(path_or_fh) -> list[KeyframeRecord]:
    if hasattr(path_or_fh, "read"):
        return list(iter_stream(path_or_fh))
    with open(path_or_fh, encoding="utf-8") as fh:
        return list(iter_stream(fh))


def write_stream(records: Iterable[KeyframeRecord | Keyframe], path_or_fh) -> None:
    lines = []
    for r in records:
        rec = r if isinstance(r, KeyframeRecord) else KeyframeRecord.from_keyframe(r)
        lines.append(rec.to_json() + "\n")
    if hasattr(path_or_fh, "write"):
        path_or_fh.writelines(lines)
    else:
        Path(path_or_fh).write_text("".join(lines), encoding="utf-8")


# --- ground truth and output ------------------------------------------------------

def _rooms_json(rooms) -> list[dict]:
    return [{"room_id": int(r.room_id), "corners": np.asarray(r.corners).tolist()} for r in rooms]


def _rooms_from_json(items) -> list[RoomPolygon]:
    return [RoomPolygon(np.asarray(it["corners"], dtype=float), int(it["room_id"])) for it in items]


def write_ground_truth(gt: GroundTruth, path) -> None:
    doc = {"rooms": _rooms_json(gt.rooms), "corners": gt.corners.tolist(), "true_scale": gt.true_scale,
           "positions": gt.positions.tolist(), "yaws": np.asarray(gt.yaws).tolist(),
           "labels": np.asarray(gt.labels).tolist()}
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def read_ground_truth(path) -> GroundTruth:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return GroundTruth(_rooms_from_json(doc["rooms"]), float(doc["true_scale"]),
                       np.asarray(doc["positions"], dtype=float), np.asarray(doc["yaws"], dtype=float),
                       np.asarray(doc["labels"], dtype=int))


@dataclass
class FloorPlanOutput:
    rooms: list[RoomPolygon]
    scale_used: float
    config_hash: str = ""
    input_hash: str = ""
    room_positions: dict | None = None  # camera (x, z) per keyframe index, at scale_used

    def __post_init__(self):
        ids = [r.room_id for r in self.rooms]
        if len(set(ids)) != len(ids):
            raise ValueError("room ids must be unique")

    @property
    def corner_counts(self) -> dict[int, int]:
        return {r.room_id: len(r) for r in self.rooms}

    def to_dict(self) -> dict:
        doc = {"rooms": [dict(item, corner_count=len(item["corners"])) for item in _rooms_json(self.rooms)],
               "scale_used": self.scale_used,
               "provenance": {"config_sha256": self.config_hash, "input_sha256": self.input_hash}}
        if self.room_positions is not None:
            doc["camera_positions"] = {str(k): list(map(float, v)) for k, v in self.room_positions.items()}
        return doc


def write_output(out: FloorPlanOutput, path) -> None:
    Path(path).write_text(json.dumps(out.to_dict(), indent=1), encoding="utf-8")


def read_output(path) -> FloorPlanOutput:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    prov = doc.get("provenance", {})
    pos = doc.get("camera_positions")
    return FloorPlanOutput(_rooms_from_json(doc["rooms"]), float(doc["scale_used"]), prov.get("config_sha256", ""),
                           prov.get("input_sha256", ""),
                           None if pos is None else {int(k): np.asarray(v) for k, v in pos.items()})


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()
