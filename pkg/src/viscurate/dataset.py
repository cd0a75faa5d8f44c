"""Domain model and persistence for videos, detections, and training datasets.

The on-disk format is a YTVIS-style JSON extended with per-annotation
``selected`` flags and a ``source`` tag:

.. code-block:: text

    {"round": int,
     "videos": [{"id": int, "frames": int, "width": int, "height": int}, ...],
     "annotations": [{"id": int, "video_id": int, "score": float,
                      "source": "synthetic"|"pseudo"|"ground_truth",
                      "segmentations": [{"size": [h, w], "counts": [...]} | null, ...],
                      "selected": [0|1, ...]}, ...]}

A frame where the object is absent is encoded as ``null``, never as an
all-zeros mask: fusion must distinguish "not present" from "present but
empty".  Serialization is canonical (videos sorted by id, annotations by
video id then detection id, keys sorted), so ``save(load(save(ds)))``
reproduces ``save(ds)`` byte for byte.

Datasets are immutable snapshots.  A new round produces a new snapshot;
concurrent readers are always safe.
"""

import enum
import json
import os
import tempfile
from dataclasses import dataclass, replace

from .errors import InvariantViolation, ParseError, PipelineError, UnknownVideo
from .masks import Rle, rle_decode


class SourceTag(enum.Enum):
    SYNTHETIC = "synthetic"
    PSEUDO = "pseudo"
    GROUND_TRUTH = "ground_truth"


@dataclass(frozen=True)
class VideoMeta:
    video_id: int
    frame_count: int
    width: int
    height: int

    def __post_init__(self):
        if self.frame_count < 1:
            raise InvariantViolation(
                f"video {self.video_id}: frame_count must be >= 1, got {self.frame_count}"
            )
        if self.width < 1 or self.height < 1:
            raise InvariantViolation(
                f"video {self.video_id}: dimensions must be positive, "
                f"got {self.width}x{self.height}"
            )


@dataclass(frozen=True)
class Detection:
    """One object track in one video.

    ``masks`` holds one optional Rle per frame (None = absent in that
    frame); ``selected`` holds one 0/1 flag per frame.  A frame can only be
    selected if its mask is present -- the constructor enforces this, so the
    invariant holds everywhere by construction.
    """

    detection_id: int
    video_id: int
    confidence: float
    masks: tuple
    selected: tuple

    def __post_init__(self):
        masks = tuple(self.masks)
        selected = tuple(int(s) for s in self.selected)
        object.__setattr__(self, "masks", masks)
        object.__setattr__(self, "selected", selected)
        me = f"detection {self.detection_id}"
        if len(masks) != len(selected):
            raise InvariantViolation(
                f"{me}: masks ({len(masks)}) and selected ({len(selected)}) lengths differ"
            )
        if len(masks) == 0:
            raise InvariantViolation(f"{me}: must cover at least one frame")
        if not 0.0 <= self.confidence <= 1.0:
            raise InvariantViolation(f"{me}: confidence {self.confidence} outside [0, 1]")
        for t, (m, s) in enumerate(zip(masks, selected)):
            if s not in (0, 1):
                raise InvariantViolation(f"{me}: selected[{t}] must be 0 or 1, got {s}")
            if m is not None and not isinstance(m, Rle):
                raise InvariantViolation(f"{me}: masks[{t}] must be an Rle or None")
            if s == 1 and m is None:
                raise InvariantViolation(f"{me}: selected[{t}]=1 but masks[{t}] is absent")

    @property
    def frame_count(self) -> int:
        return len(self.masks)

    def present_frames(self):
        return [t for t, m in enumerate(self.masks) if m is not None]

    def selected_count(self) -> int:
        return sum(self.selected)


@dataclass(frozen=True)
class Annotation:
    detection: Detection
    source: SourceTag


@dataclass(frozen=True)
class TrainingDataset:
    """Immutable snapshot of one training round.

    The constructor normalizes ordering (videos by id, annotations by video
    id then detection id), so equal datasets compare equal regardless of
    input order.
    """

    round_index: int
    videos: tuple
    annotations: tuple

    def __post_init__(self):
        if self.round_index < 0:
            raise InvariantViolation(f"round_index must be >= 0, got {self.round_index}")
        videos = tuple(sorted(self.videos, key=lambda v: v.video_id))
        annotations = tuple(
            sorted(
                self.annotations,
                key=lambda a: (a.detection.video_id, a.detection.detection_id),
            )
        )
        object.__setattr__(self, "videos", videos)
        object.__setattr__(self, "annotations", annotations)

    def video_ids(self) -> set:
        return {v.video_id for v in self.videos}

    def videos_by_id(self) -> dict:
        return {v.video_id: v for v in self.videos}

    def annotations_for(self, video_id: int) -> list:
        return [a for a in self.annotations if a.detection.video_id == video_id]

    def detections_for(self, video_id: int) -> list:
        return [a.detection for a in self.annotations_for(video_id)]


def decode_masks(det: Detection) -> list:
    """Per-frame decoded pixel grids for a detection (None where absent)."""
    return [None if m is None else rle_decode(m).bits for m in det.masks]


def restrict_to_selected(det: Detection) -> Detection:
    """Drop masks of unselected frames, keeping only the curated labels."""
    masks = tuple(m if s == 1 else None for m, s in zip(det.masks, det.selected))
    return replace(det, masks=masks)


def validate_dataset(ds: TrainingDataset) -> list:
    """All structural violations in ``ds`` as human-readable strings.

    An empty list means every invariant holds.  Violations that are already
    impossible by construction (e.g. selected without a mask) are not
    re-derived here.
    """
    violations = []
    seen_videos = {}
    for v in ds.videos:
        if v.video_id in seen_videos:
            violations.append(f"duplicate video_id {v.video_id}")
        seen_videos[v.video_id] = v

    seen_dets = set()
    for ann in ds.annotations:
        det = ann.detection
        tag = f"detection {det.detection_id}"
        if det.detection_id in seen_dets:
            violations.append(f"duplicate detection_id {det.detection_id}")
        seen_dets.add(det.detection_id)
        video = seen_videos.get(det.video_id)
        if video is None:
            violations.append(f"{tag}: unknown video_id {det.video_id}")
            continue
        if det.frame_count != video.frame_count:
            violations.append(
                f"{tag}: covers {det.frame_count} frames but video "
                f"{video.video_id} has {video.frame_count}"
            )
        for t, m in enumerate(det.masks):
            if m is not None and (m.height, m.width) != (video.height, video.width):
                violations.append(
                    f"{tag}: masks[{t}] is {m.height}x{m.width} but video "
                    f"{video.video_id} is {video.height}x{video.width}"
                )
                break
    return violations


# --- JSON (de)serialization -------------------------------------------------

def _rle_to_obj(rle: Rle) -> dict:
    return {"size": [rle.height, rle.width], "counts": list(rle.counts)}


def _rle_from_obj(obj) -> Rle:
    if not isinstance(obj, dict) or "size" not in obj or "counts" not in obj:
        raise ParseError(f"segmentation must be an object with 'size' and 'counts', got {obj!r}")
    size = obj["size"]
    if not (isinstance(size, list) and len(size) == 2):
        raise ParseError(f"segmentation 'size' must be [height, width], got {size!r}")
    return Rle(int(size[0]), int(size[1]), tuple(int(c) for c in obj["counts"]))


def to_json_obj(ds: TrainingDataset) -> dict:
    return {
        "round": ds.round_index,
        "videos": [
            {
                "id": v.video_id,
                "frames": v.frame_count,
                "width": v.width,
                "height": v.height,
            }
            for v in ds.videos
        ],
        "annotations": [
            {
                "id": a.detection.detection_id,
                "video_id": a.detection.video_id,
                "score": float(a.detection.confidence),
                "source": a.source.value,
                "segmentations": [
                    None if m is None else _rle_to_obj(m) for m in a.detection.masks
                ],
                "selected": list(a.detection.selected),
            }
            for a in ds.annotations
        ],
    }


def from_json_obj(obj) -> TrainingDataset:
    if not isinstance(obj, dict):
        raise ParseError(f"dataset root must be an object, got {type(obj).__name__}")
    for key in ("round", "videos", "annotations"):
        if key not in obj:
            raise ParseError(f"dataset is missing required key {key!r}")

    try:
        videos = tuple(
            VideoMeta(int(v["id"]), int(v["frames"]), int(v["width"]), int(v["height"]))
            for v in obj["videos"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed video entry: {exc}") from exc

    annotations = []
    for entry in obj["annotations"]:
        try:
            det_id = int(entry["id"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"annotation missing integer 'id': {exc}") from exc
        try:
            segs = entry["segmentations"]
            masks = tuple(None if s is None else _rle_from_obj(s) for s in segs)
            det = Detection(
                detection_id=det_id,
                video_id=int(entry["video_id"]),
                confidence=float(entry["score"]),
                masks=masks,
                selected=tuple(int(s) for s in entry["selected"]),
            )
            source = SourceTag(entry["source"])
        except ParseError as exc:
            raise ParseError(f"annotation {det_id}: {exc}") from exc
        except PipelineError as exc:
            raise InvariantViolation(f"annotation {det_id}: {exc}") from exc
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"annotation {det_id}: {exc}") from exc
        annotations.append(Annotation(det, source))

    known = {v.video_id for v in videos}
    for a in annotations:
        if a.detection.video_id not in known:
            raise UnknownVideo(
                f"annotation {a.detection.detection_id} references "
                f"unknown video {a.detection.video_id}"
            )
    ds = TrainingDataset(int(obj["round"]), videos, tuple(annotations))
    violations = validate_dataset(ds)
    if violations:
        raise InvariantViolation("; ".join(violations))
    return ds


def dumps_dataset(ds: TrainingDataset) -> str:
    """Canonical textual form of a dataset (stable byte-for-byte)."""
    return json.dumps(to_json_obj(ds), sort_keys=True, separators=(",", ":")) + "\n"


def write_text_atomic(path, text: str):
    """Write via a temp file in the same directory and atomically rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_dataset(ds: TrainingDataset, path):
    """Serialize canonically; no partial file is ever left on failure."""
    write_text_atomic(path, dumps_dataset(ds))


def load_dataset(path) -> TrainingDataset:
    """Load and fully validate a dataset file.

    Raises ParseError for malformed JSON or structure, InvariantViolation
    (naming the offending detection) for well-formed files whose contents
    break the model invariants.
    """
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return from_json_obj(obj)
