"""Turning audio, images and synthetic prototypes into fixed-length paired vectors.

Voice clips are resampled to ``input_dim`` equally spaced amplitudes; images are
bilinearly resized to 17 x 30 and their 0..255 grey levels mapped onto [-1, 1].
"""

from __future__ import annotations

import wave
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DomainError, FormatError, InvalidArgument, InvalidSpec, ShapeError

IMAGE_WIDTH = 17
IMAGE_HEIGHT = 30
INPUT_DIM = IMAGE_WIDTH * IMAGE_HEIGHT
PCM16_FULL_SCALE = 32768.0


@dataclass(frozen=True)
class AudioClip:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if len(self.samples) == 0:
            raise InvalidArgument("empty audio clip")
        if self.sample_rate <= 0:
            raise InvalidArgument(f"sample rate must be positive, got {self.sample_rate}")


@dataclass(frozen=True)
class GrayImage:
    width: int
    height: int
    pixels: np.ndarray  # row-major, uint8

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InvalidArgument("image dimensions must be positive")
        if len(self.pixels) != self.width * self.height:
            raise ShapeError(f"{len(self.pixels)} pixels for a {self.width}x{self.height} image")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.pixels, dtype=np.float64).reshape(self.height, self.width)


@dataclass(frozen=True)
class SamplePair:
    voice: np.ndarray
    image: np.ndarray
    group: str
    id: str

    def validate(self, input_dim: int = INPUT_DIM):
        for name, v in (("voice", self.voice), ("image", self.image)):
            if v.shape != (input_dim,):
                raise ShapeError(f"pair {self.id}: {name} has shape {v.shape}, expected ({input_dim},)")
            check_unit_range(v, f"pair {self.id} {name}")


def check_unit_range(x: np.ndarray, what: str = "vector"):
    if not np.all(np.isfinite(x)) or np.any(np.abs(x) > 1.0):
        raise DomainError(f"{what} has entries outside [-1, 1]")


# -- audio ------------------------------------------------------------------


def resample_linear(signal, n: int) -> np.ndarray:
    """Piecewise-linear interpolant sampled at ``n`` evenly spaced points over the whole clip."""
    signal = np.asarray(signal, dtype=np.float64)
    if signal.ndim != 1 or len(signal) < 2:
        raise InvalidArgument("signal must be 1-d with at least 2 samples")
    if n < 2:
        raise InvalidArgument(f"need n >= 2, got {n}")
    positions = np.linspace(0.0, len(signal) - 1, n)
    return np.interp(positions, np.arange(len(signal), dtype=np.float64), signal)


def read_wav(path) -> AudioClip:
    try:
        with wave.open(str(path), "rb") as w:
            if w.getnchannels() != 1 or w.getsampwidth() != 2 or w.getcomptype() != "NONE":
                raise FormatError(f"{path}: only 16-bit PCM mono WAV is supported")
            rate = w.getframerate()
            raw = w.readframes(w.getnframes())
    except (wave.Error, EOFError, OSError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / PCM16_FULL_SCALE
    return AudioClip(samples, rate)


def write_wav(path, samples, sample_rate: int = 2000):
    """Write [-1, 1] amplitudes as 16-bit PCM mono."""
    pcm = np.clip(np.round(np.asarray(samples) * PCM16_FULL_SCALE), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(sample_rate)
        w.writeframes(pcm.tobytes())


def load_voice(path, target_dim: int = INPUT_DIM) -> np.ndarray:
    return resample_linear(read_wav(path).samples, target_dim)


# -- images -----------------------------------------------------------------


def rescale_gray(intensity):
    """Map grey level 0..255 affinely onto [-1, 1] (0 -> -1, 255 -> +1). Works elementwise."""
    arr = np.asarray(intensity)
    if np.any(arr < 0) or np.any(arr > 255):
        raise InvalidArgument("grey levels must lie in 0..255")
    out = arr / 127.5 - 1.0
    return float(out) if out.ndim == 0 else out


def unscale_gray(values) -> np.ndarray:
    """Inverse of ``rescale_gray``, rounded and clipped to uint8."""
    return np.clip(np.round((np.asarray(values) + 1.0) * 127.5), 0, 255).astype(np.uint8)


def _pgm_tokens(data: bytes, count: int):
    """Pull ``count`` whitespace-separated header tokens, skipping ``#`` comments."""
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("truncated PGM header")
        tokens.append(data[start:pos])
    return tokens, pos + 1  # exactly one whitespace byte precedes the raster


def read_pgm(path) -> GrayImage:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    try:
        (magic, w, h, maxval), offset = _pgm_tokens(data, 4)
        width, height, maxval = int(w), int(h), int(maxval)
    except (FormatError, ValueError) as exc:
        raise FormatError(f"{path}: malformed PGM header") from exc
    if magic != b"P5":
        raise FormatError(f"{path}: only binary P5 PGM is supported")
    if maxval != 255:
        raise FormatError(f"{path}: maxval {maxval} unsupported, need 255")
    raster = data[offset : offset + width * height]
    if len(raster) != width * height:
        raise FormatError(f"{path}: truncated raster")
    return GrayImage(width, height, np.frombuffer(raster, dtype=np.uint8).copy())


def write_pgm(path, image: GrayImage):
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + np.asarray(image.pixels, dtype=np.uint8).tobytes())


def resize_bilinear(img: np.ndarray, width: int, height: int) -> np.ndarray:
    """Bilinear resize of a (rows, cols) array using pixel-centre alignment."""
    src_h, src_w = img.shape

    def axis(n_out, n_in):
        pos = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        pos = np.clip(pos, 0.0, n_in - 1)
        lo = np.floor(pos).astype(int)
        hi = np.minimum(lo + 1, n_in - 1)
        return lo, hi, pos - lo

    r0, r1, fr = axis(height, src_h)
    c0, c1, fc = axis(width, src_w)
    top = img[r0][:, c0] * (1 - fc) + img[r0][:, c1] * fc
    bottom = img[r1][:, c0] * (1 - fc) + img[r1][:, c1] * fc
    return top * (1 - fr)[:, None] + bottom * fr[:, None]


def load_image(path, width: int = IMAGE_WIDTH, height: int = IMAGE_HEIGHT) -> np.ndarray:
    img = read_pgm(path)
    resized = resize_bilinear(img.as_array(), width, height)
    return rescale_gray(np.clip(resized, 0.0, 255.0)).ravel()


def vector_to_image(v, width: int = IMAGE_WIDTH, height: int = IMAGE_HEIGHT) -> GrayImage:
    v = np.asarray(v)
    if v.shape != (width * height,):
        raise ShapeError(f"need a {width * height}-vector for a {width}x{height} image")
    return GrayImage(width, height, unscale_gray(v))


# -- raw vector files ---------------------------------------------------------


def read_rawvec(path, dim: int | None = None, count: int | None = None) -> np.ndarray:
    """One vector per line, whitespace-separated decimals. Returns a 2-d array."""
    try:
        lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    try:
        rows = [np.array(ln.split(), dtype=np.float64) for ln in lines]
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric entry") from exc
    if not rows:
        raise FormatError(f"{path}: no vectors")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise FormatError(f"{path}: ragged vectors")
    if dim is not None and widths != {dim}:
        raise FormatError(f"{path}: vectors have dimension {widths.pop()}, expected {dim}")
    if count is not None and len(rows) != count:
        raise FormatError(f"{path}: {len(rows)} vectors, expected {count}")
    return np.vstack(rows)


def write_rawvec(path, vectors):
    arr = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    Path(path).write_text("".join(" ".join(repr(float(x)) for x in row) + "\n" for row in arr))


def load_vector(path, kind: str, dim: int = INPUT_DIM) -> np.ndarray:
    """Load a voice or image vector, dispatching on file suffix (.wav, .pgm, else RAWVEC)."""
    suffix = Path(path).suffix.lower()
    if kind == "voice" and suffix == ".wav":
        return load_voice(path, dim)
    if kind == "image" and suffix == ".pgm":
        if dim != INPUT_DIM:
            raise InvalidArgument(f"PGM images load to {INPUT_DIM} values, not {dim}")
        return load_image(path)
    return read_rawvec(path, dim=dim, count=1)[0]


# -- manifests ---------------------------------------------------------------


def read_manifest(path, input_dim: int = INPUT_DIM) -> list[SamplePair]:
    """``<voice-path> <image-path> <group-label>`` per line; paths relative to the manifest."""
    base = Path(path).parent
    pairs = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise FormatError(f"{path}:{lineno}: expected '<voice> <image> <group>'")
        voice_path, image_path, group = parts
        voice = load_vector(base / voice_path, "voice", input_dim)
        image = load_vector(base / image_path, "image", input_dim)
        pair = SamplePair(voice, image, group, f"{Path(voice_path).stem}")
        pair.validate(input_dim)
        pairs.append(pair)
    return pairs


def write_manifest(path, records: Sequence[tuple[str, str, str]]):
    Path(path).write_text("".join(f"{v} {i} {g}\n" for v, i, g in records))


# -- synthetic data ----------------------------------------------------------


@dataclass(frozen=True)
class SyntheticSpec:
    groups: tuple[str, ...] = ("face", "window", "garden")
    pairs_per_group: int = 150
    dim: int = INPUT_DIM
    prototype_seed: int = 0
    noise_stddev: float = 0.1
    prototype_separation: float = 5.0
    prototype_amplitude: float = 0.8

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        if len(self.groups) < 2 or len(set(self.groups)) != len(self.groups):
            raise InvalidSpec("need at least two distinct group labels")
        if any(not g or any(c.isspace() for c in g) for g in self.groups):
            raise InvalidSpec("group labels must be non-empty and contain no whitespace")
        if self.pairs_per_group < 1 or self.dim < 1:
            raise InvalidSpec("pairs_per_group and dim must be positive")
        if self.noise_stddev < 0 or not self.prototype_separation > 0:
            raise InvalidSpec("need noise_stddev >= 0 and prototype_separation > 0")
        if not self.noise_stddev < self.prototype_separation:
            raise InvalidSpec("noise_stddev must be below prototype_separation")
        if not 0 < self.prototype_amplitude <= 1:
            raise InvalidSpec("prototype_amplitude must lie in (0, 1]")


def _separated_prototypes(rng, n, dim, amplitude, separation, max_tries=1000) -> np.ndarray:
    protos: list[np.ndarray] = []
    tries = 0
    while len(protos) < n:
        cand = rng.uniform(-amplitude, amplitude, size=dim)
        if all(np.linalg.norm(cand - p) >= separation for p in protos):
            protos.append(cand)
        else:
            tries += 1
            if tries > max_tries:
                raise InvalidSpec(
                    f"could not place {n} prototypes {separation} apart in {dim} dims"
                )
    return np.array(protos)


def generate_synthetic(spec: SyntheticSpec = SyntheticSpec()) -> list[SamplePair]:
    """Clamped Gaussian noise around well separated voice/image prototypes, one pair each per group."""
    rng = np.random.default_rng(spec.prototype_seed)
    n = len(spec.groups)
    voice_protos = _separated_prototypes(
        rng, n, spec.dim, spec.prototype_amplitude, spec.prototype_separation
    )
    image_protos = _separated_prototypes(
        rng, n, spec.dim, spec.prototype_amplitude, spec.prototype_separation
    )
    pairs = []
    for g, label in enumerate(spec.groups):
        for j in range(spec.pairs_per_group):
            voice = np.clip(voice_protos[g] + rng.normal(0, spec.noise_stddev, spec.dim), -1, 1)
            image = np.clip(image_protos[g] + rng.normal(0, spec.noise_stddev, spec.dim), -1, 1)
            pairs.append(SamplePair(voice, image, label, f"{label}-{j:04d}"))
    return pairs


def split(pairs: Sequence[SamplePair], train_count: int, seed: int = 0):
    """Seeded group-stratified train/test split.

    Each group gets ``floor`` or ``ceil`` of its proportional share of
    ``train_count`` (largest remainders first, ties by group order).
    """
    n = len(pairs)
    if not 0 < train_count < n:
        raise InvalidArgument(f"train_count must lie in (0, {n}), got {train_count}")
    rng = np.random.default_rng(seed)
    by_group: dict[str, list[int]] = {}
    for i, p in enumerate(pairs):
        by_group.setdefault(p.group, []).append(i)
    groups = list(by_group)
    exact = np.array([len(by_group[g]) * train_count / n for g in groups])
    quota = np.floor(exact).astype(int)
    leftover = train_count - quota.sum()
    for gi in sorted(range(len(groups)), key=lambda i: (-(exact[i] - quota[i]), i))[:leftover]:
        quota[gi] += 1
    train_idx, test_idx = [], []
    for gi, g in enumerate(groups):
        members = np.array(by_group[g])[rng.permutation(len(by_group[g]))]
        train_idx.extend(members[: quota[gi]].tolist())
        test_idx.extend(members[quota[gi] :].tolist())
    train_idx = [train_idx[i] for i in rng.permutation(len(train_idx))]
    test_idx.sort()
    return [pairs[i] for i in train_idx], [pairs[i] for i in test_idx]
