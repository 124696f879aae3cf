"""Visual denoising: active-face selection, cropping, neutral normalization.

The active speaker is assumed to be near the horizontal center of the
frame (the capture side steers the camera toward the sound source), so
face selection reduces to picking the most-centered detection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateBox, NoFaceFound, SizeMismatch
from .wire import FrameMsg


@dataclass(frozen=True)
class FaceBox:
    x: int
    y: int
    w: int
    h: int
    confidence: float = 1.0

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ValueError("face box must have positive size")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence outside [0,1]")

    @property
    def center_x(self) -> float:
        return self.x + self.w / 2.0

    @property
    def area(self) -> int:
        return self.w * self.h

    def clamped(self, frame_w: int, frame_h: int) -> "FaceBox":
        x0 = max(0, self.x)
        y0 = max(0, self.y)
        x1 = min(frame_w, self.x + self.w)
        y1 = min(frame_h, self.y + self.h)
        if x1 - x0 <= 0 or y1 - y0 <= 0:
            raise DegenerateBox(f"box {self} degenerate after clamping to frame")
        return FaceBox(x0, y0, x1 - x0, y1 - y0, self.confidence)


@dataclass(frozen=True)
class FaceCrop:
    pixels: np.ndarray  # S x S x 3 float in [0,1]
    source_seq: int

    @property
    def side(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class DeltaSequence:
    frames: np.ndarray  # F' x S x S x 3 float in [-1,1]
    neutral_used: str   # "first-frame" | "provided"

    def __len__(self) -> int:
        return self.frames.shape[0]


@dataclass(frozen=True)
class PerceptConfig:
    crop_side: int = 64
    max_frames: int = 32
    confidence_threshold: float = 0.9

    def __post_init__(self):
        if self.crop_side < 8:
            raise ValueError("crop_side must be >= 8")
        if self.max_frames < 1:
            raise ValueError("max_frames must be >= 1")
        if not 0.0 <= self.confidence_threshold <= 1.0:
            raise ValueError("confidence_threshold outside [0,1]")


def frame_to_array(frame: FrameMsg) -> np.ndarray:
    arr = np.frombuffer(frame.pixels, dtype=np.uint8)
    return arr.reshape(frame.height, frame.width, 3)


def select_active_face(
    boxes: list[FaceBox], frame_width: int, min_confidence: float = 0.0
) -> FaceBox:
    """Pick the detection nearest the frame's horizontal center.

    Ties break toward larger area, then smaller y, then lower input index.
    """
    candidates = [
        (abs(b.center_x - frame_width / 2.0), -b.area, b.y, i, b)
        for i, b in enumerate(boxes)
        if b.confidence >= min_confidence
    ]
    if not candidates:
        raise NoFaceFound(
            f"no face with confidence >= {min_confidence} among {len(boxes)} boxes"
        )
    return min(candidates)[4]


def crop_resize(frame: FrameMsg, box: FaceBox, side: int) -> FaceCrop:
    """Bilinear resample of the box region to side x side, values in [0,1].

    Sampling uses half-pixel centers with edge clamping, so a box already
    side x side reduces to a plain copy.
    """
    box = box.clamped(frame.width, frame.height)
    img = frame_to_array(frame).astype(np.float64) / 255.0
    region = img[box.y:box.y + box.h, box.x:box.x + box.w]
    out = _bilinear(region, side, side)
    return FaceCrop(pixels=out, source_seq=frame.seq)


def _bilinear(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    h, w = img.shape[:2]
    ys = (np.arange(out_h) + 0.5) * h / out_h - 0.5
    xs = (np.arange(out_w) + 0.5) * w / out_w - 0.5
    ys = np.clip(ys, 0, h - 1)
    xs = np.clip(xs, 0, w - 1)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None, None]
    fx = (xs - x0)[None, :, None]
    tl = img[y0][:, x0]
    tr = img[y0][:, x1]
    bl = img[y1][:, x0]
    br = img[y1][:, x1]
    top = tl * (1 - fx) + tr * fx
    bot = bl * (1 - fx) + br * fx
    return top * (1 - fy) + bot * fy


def neutral_normalize(
    crops: list[FaceCrop], neutral: FaceCrop | None = None
) -> DeltaSequence:
    """Subtract the neutral face from every crop, clamped to [-1,1].

    Without a provided neutral the first crop of the sequence stands in,
    which makes the first delta identically zero.
    """
    if not crops:
        raise ValueError("crops must be non-empty")
    side = crops[0].side
    for c in crops:
        if c.side != side:
            raise SizeMismatch(f"crop side {c.side} != {side}")
    if neutral is None:
        ref = crops[0].pixels
        used = "first-frame"
    else:
        if neutral.side != side:
            raise SizeMismatch(f"neutral side {neutral.side} != {side}")
        ref = neutral.pixels
        used = "provided"
    deltas = np.stack([np.clip(c.pixels - ref, -1.0, 1.0) for c in crops])
    return DeltaSequence(frames=deltas, neutral_used=used)


def sample_utterance_frames(snapshot: list[FrameMsg], max_frames: int) -> list[FrameMsg]:
    """Uniformly subsample at most max_frames frames, order preserved."""
    n = len(snapshot)
    if n <= max_frames:
        return list(snapshot)
    if max_frames == 1:
        return [snapshot[0]]
    idx = [round(i * (n - 1) / (max_frames - 1)) for i in range(max_frames)]
    seen = set()
    out = []
    for i in idx:
        if i not in seen:
            seen.add(i)
            out.append(snapshot[i])
    return out


class FaceDetector:
    """Behavioral contract: frame -> list of FaceBox, deterministic."""

    def detect(self, frame: FrameMsg) -> list[FaceBox]:
        raise NotImplementedError


class AnnotatedDetector(FaceDetector):
    """Reads ground-truth boxes from a session's sidecar annotations.

    ``annotations`` maps frame seq -> list of (FaceBox, role) where role is
    "active" or "distractor"; the role is kept for oracle checks only.
    """

    def __init__(self, annotations: dict[int, list[tuple[FaceBox, str]]]):
        self._by_seq = annotations

    def detect(self, frame: FrameMsg) -> list[FaceBox]:
        return [box for box, _role in self._by_seq.get(frame.seq, [])]

    def role_of(self, seq: int, box: FaceBox) -> str | None:
        for b, role in self._by_seq.get(seq, []):
            if b == box:
                return role
        return None


class BlobDetector(FaceDetector):
    """Threshold detector for synthetic glyph faces on a dark background."""

    def __init__(self, luma_threshold: int = 90, min_area: int = 64):
        self.luma_threshold = luma_threshold
        self.min_area = min_area

    def detect(self, frame: FrameMsg) -> list[FaceBox]:
        from scipy import ndimage

        img = frame_to_array(frame)
        luma = img.mean(axis=2)
        mask = luma > self.luma_threshold
        labels, n = ndimage.label(mask)
        boxes = []
        for sl in ndimage.find_objects(labels):
            h = sl[0].stop - sl[0].start
            w = sl[1].stop - sl[1].start
            if w * h >= self.min_area:
                boxes.append(FaceBox(sl[1].start, sl[0].start, w, h, confidence=1.0))
        return boxes


@dataclass(frozen=True)
class ExtractionResult:
    delta: DeltaSequence
    sources: list[tuple[int, FaceBox]] = field(default_factory=list)


def extract_face_sequence(
    snapshot: list[FrameMsg],
    detector: FaceDetector,
    cfg: PerceptConfig,
    neutral: FaceCrop | None = None,
    select=None,
    normalize: bool = True,
) -> ExtractionResult | None:
    """Full denoising pass over one utterance window.

    Per sampled frame: detect -> select the active face -> crop; frames with
    no usable detection are skipped. Returns None when no frame yields a
    face (callers fall back to text-only inference). ``select`` overrides
    the centered-face choice (used by ablations).
    """
    frames = sample_utterance_frames(snapshot, cfg.max_frames)
    crops = []
    sources = []
    for frame in frames:
        boxes = detector.detect(frame)
        try:
            if select is not None:
                box = select(boxes, frame)
                if box is None:
                    continue
            else:
                box = select_active_face(
                    boxes, frame.width, cfg.confidence_threshold
                )
            crop = crop_resize(frame, box, cfg.crop_side)
        except (NoFaceFound, DegenerateBox):
            continue
        crops.append(crop)
        sources.append((frame.seq, box))
    if not crops:
        return None
    if normalize:
        delta = neutral_normalize(crops, neutral)
    else:
        # ablation path: raw crops, no neutral subtraction
        delta = DeltaSequence(
            frames=np.stack([c.pixels for c in crops]), neutral_used="none"
        )
    return ExtractionResult(delta=delta, sources=sources)
