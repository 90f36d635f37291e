"""Image ingestion and evaluation-protocol split construction.

Manifests are comma-delimited text with a header row and three columns:
path, subject, condition. Images are decoded with Pillow, converted to
grayscale by channel averaging, bilinearly resized and scaled to [0, 1].
"""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image


class ManifestError(ValueError):
    """Manifest rows and files on disk disagree."""


class ProtocolError(ValueError):
    """The sample collection cannot support the requested protocol."""


@dataclass(frozen=True)
class ImageSample:
    subject_id: str
    condition: str
    pixels: np.ndarray  # h x w, values in [0, 1]


@dataclass(frozen=True)
class PairedFold:
    left_train: list    # [(ImageSample, label)]
    right_train: list   # aligned with left_train
    test: list          # [(ImageSample, label)]


@dataclass(frozen=True)
class SplitPlan:
    folds: list
    protocol: str
    seed: int | None = None


def bilinear_resize(img, target_size):
    """Resize a 2-D array with bilinear interpolation at pixel centers.

    Target pixel centers map to source coordinates via
    src = (dst + 0.5) * scale - 0.5, clamped at the borders.
    """
    img = np.asarray(img, dtype=float)
    h, w = img.shape
    th, tw = target_size
    if (h, w) == (th, tw):
        return img.copy()

    def axis_coords(src, dst):
        x = (np.arange(dst) + 0.5) * (src / dst) - 0.5
        x = np.clip(x, 0.0, src - 1.0)
        lo = np.floor(x).astype(int)
        hi = np.minimum(lo + 1, src - 1)
        frac = x - lo
        return lo, hi, frac

    r_lo, r_hi, r_f = axis_coords(h, th)
    c_lo, c_hi, c_f = axis_coords(w, tw)
    top = img[r_lo][:, c_lo] * (1 - c_f) + img[r_lo][:, c_hi] * c_f
    bot = img[r_hi][:, c_lo] * (1 - c_f) + img[r_hi][:, c_hi] * c_f
    return top * (1 - r_f[:, None]) + bot * r_f[:, None]


def read_manifest(path):
    """Parse a (path, subject, condition) manifest into a list of rows."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:3]] != [
                "path", "subject", "condition"]:
            raise ManifestError(
                f"{path}: expected header 'path,subject,condition'")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 3:
                raise ManifestError(f"{path}:{lineno}: expected 3 columns")
            rows.append((row[0].strip(), row[1].strip(), row[2].strip()))
    return rows


def load_image_dir(root, manifest, target_size=(50, 50)):
    """Load all images listed in a manifest file under ``root``.

    Unreadable files are reported together at the end; readable ones are
    still returned alongside the error listing.
    """
    root = Path(root)
    rows = read_manifest(manifest)
    samples = []
    errors = []
    for rel, subject, condition in rows:
        full = root / rel
        try:
            with Image.open(full) as im:
                arr = np.asarray(im, dtype=float)
        except (OSError, ValueError) as exc:
            errors.append((str(full), str(exc)))
            continue
        if arr.ndim == 3:
            arr = arr.mean(axis=2)
        arr = bilinear_resize(arr, target_size)
        peak = 65535.0 if arr.max() > 255.0 else 255.0
        samples.append(ImageSample(
            subject_id=subject, condition=condition,
            pixels=np.clip(arr / peak, 0.0, 1.0)))
    return samples, errors


def _by_subject(samples):
    subjects = {}
    for s in samples:
        subjects.setdefault(s.subject_id, []).append(s)
    return subjects


def build_ar_folds(samples, reference_condition, varying_conditions):
    """Three-fold plan: the reference image is always the left training
    image; fold k takes varying condition k as the right training image
    and leaves the other two varying images as test."""
    if len(varying_conditions) != 3:
        raise ProtocolError("exactly three varying conditions required")
    subjects = _by_subject(samples)
    per_subject = {}
    for sid, items in sorted(subjects.items()):
        conds = {s.condition: s for s in items}
        missing = [c for c in (reference_condition, *varying_conditions)
                   if c not in conds]
        if missing:
            raise ProtocolError(f"subject {sid} missing conditions {missing}")
        per_subject[sid] = conds

    folds = []
    for k, right_cond in enumerate(varying_conditions):
        left, right, test = [], [], []
        for sid in sorted(per_subject):
            conds = per_subject[sid]
            left.append((conds[reference_condition], sid))
            right.append((conds[right_cond], sid))
            for c in varying_conditions:
                if c != right_cond:
                    test.append((conds[c], sid))
        folds.append(PairedFold(left_train=left, right_train=right, test=test))
    return SplitPlan(folds=folds, protocol="ar-threefold")


def build_umist_splits(samples, frontal_condition="frontal",
                       train_per_subject=8, repeats=20, seed=0):
    """Repeated random splits: per repeat, the frontal image pairs with
    one image randomly drawn from seven randomly selected non-frontal
    training images per subject; everything else is test."""
    subjects = _by_subject(samples)
    rng = np.random.default_rng(seed)
    pool = {}
    for sid, items in sorted(subjects.items()):
        frontal = [s for s in items if s.condition == frontal_condition]
        others = sorted((s for s in items if s.condition != frontal_condition),
                        key=lambda s: s.condition)
        if len(frontal) != 1 or len(others) < train_per_subject - 1:
            raise ProtocolError(
                f"subject {sid} needs one frontal and >= {train_per_subject - 1} "
                f"other images")
        pool[sid] = (frontal[0], others)

    folds = []
    for _ in range(repeats):
        left, right, test = [], [], []
        for sid in sorted(pool):
            frontal, others = pool[sid]
            chosen = rng.choice(len(others), size=train_per_subject - 1,
                                replace=False)
            right_pick = int(rng.integers(len(chosen)))
            train_set = set(int(i) for i in chosen)
            left.append((frontal, sid))
            right.append((others[int(chosen[right_pick])], sid))
            for i, s in enumerate(others):
                if i not in train_set:
                    test.append((s, sid))
        folds.append(PairedFold(left_train=left, right_train=right, test=test))
    return SplitPlan(folds=folds, protocol="umist-repeated", seed=seed)
