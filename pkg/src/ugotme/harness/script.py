"""Replayable labeled sessions: frames, sidecar face annotations, turns."""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..context import Turn
from ..emotions import EMOTION_NAMES, emotion_from_name
from ..percept import AnnotatedDetector, FaceBox
from ..wire import FrameMsg


@dataclass
class SessionScript:
    session_id: str
    fps: float
    frames: list[FrameMsg]
    annotations: dict[int, list[tuple[FaceBox, str]]]  # seq -> [(box, role)]
    turns: list[Turn]

    def detector(self) -> AnnotatedDetector:
        return AnnotatedDetector(self.annotations)

    def frames_in_window(self, start_ts_us: int, end_ts_us: int) -> list[FrameMsg]:
        out = [f for f in self.frames if start_ts_us <= f.timestamp_us <= end_ts_us]
        out.sort(key=lambda f: f.timestamp_us)
        return out

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.session_id.encode())
        h.update(struct.pack(">d", self.fps))
        for f in self.frames:
            h.update(f"{f.seq},{f.timestamp_us},{f.width},{f.height}".encode())
            h.update(f.pixels)
        for seq in sorted(self.annotations):
            for box, role in self.annotations[seq]:
                h.update(f"{seq}:{box.x},{box.y},{box.w},{box.h},{box.confidence},{role}".encode())
        for t in self.turns:
            h.update(
                f"{t.index}|{t.speaker}|{t.text}|{t.start_ts_us}|{t.end_ts_us}|{t.gold_emotion}".encode()
            )
        return h.hexdigest()


def save_session(script: SessionScript, out_dir) -> None:
    from PIL import Image

    out = Path(out_dir)
    frames_dir = out / "frames"
    frames_dir.mkdir(parents=True, exist_ok=True)
    frame_meta = []
    for f in script.frames:
        arr = np.frombuffer(f.pixels, dtype=np.uint8).reshape(f.height, f.width, 3)
        name = f"frame_{f.seq:06d}.png"
        Image.fromarray(arr).save(frames_dir / name)
        frame_meta.append({
            "seq": f.seq, "timestamp_us": f.timestamp_us,
            "width": f.width, "height": f.height, "file": f"frames/{name}",
        })
    ann = {
        "frames": [
            {
                "seq": seq,
                "boxes": [
                    {"x": b.x, "y": b.y, "w": b.w, "h": b.h,
                     "confidence": b.confidence, "role": role}
                    for b, role in boxes
                ],
            }
            for seq, boxes in sorted(script.annotations.items())
        ]
    }
    (out / "annotations.json").write_text(json.dumps(ann, indent=1))
    doc = {
        "session_id": script.session_id,
        "fps": script.fps,
        "frames": frame_meta,
        "annotations": "annotations.json",
        "turns": [
            {
                "index": t.index,
                "speaker": t.speaker,
                "text": t.text,
                "start_ts_us": t.start_ts_us,
                "end_ts_us": t.end_ts_us,
                "gold_emotion": EMOTION_NAMES[t.gold_emotion]
                if t.gold_emotion is not None else None,
            }
            for t in script.turns
        ],
    }
    (out / "script.json").write_text(json.dumps(doc, indent=1))


def load_annotations(path) -> dict[int, list[tuple[FaceBox, str]]]:
    doc = json.loads(Path(path).read_text())
    out: dict[int, list[tuple[FaceBox, str]]] = {}
    for entry in doc["frames"]:
        out[entry["seq"]] = [
            (FaceBox(b["x"], b["y"], b["w"], b["h"], b.get("confidence", 1.0)),
             b.get("role", "active"))
            for b in entry["boxes"]
        ]
    return out


def load_session(session_dir) -> SessionScript:
    from PIL import Image

    root = Path(session_dir)
    doc = json.loads((root / "script.json").read_text())
    frames = []
    for meta in doc["frames"]:
        arr = np.asarray(Image.open(root / meta["file"]).convert("RGB"), dtype=np.uint8)
        frames.append(FrameMsg(
            seq=meta["seq"], timestamp_us=meta["timestamp_us"],
            width=meta["width"], height=meta["height"], pixels=arr.tobytes(),
        ))
    annotations = load_annotations(root / doc["annotations"])
    turns = [
        Turn(
            index=t["index"], text=t["text"], speaker=t.get("speaker"),
            start_ts_us=t["start_ts_us"], end_ts_us=t["end_ts_us"],
            gold_emotion=emotion_from_name(t["gold_emotion"])
            if t.get("gold_emotion") else None,
        )
        for t in doc["turns"]
    ]
    return SessionScript(
        session_id=doc["session_id"], fps=doc["fps"],
        frames=frames, annotations=annotations, turns=turns,
    )
