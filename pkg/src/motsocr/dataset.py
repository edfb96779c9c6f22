"""Corpus loading, word-image rendering, alphabet construction, transcript
encoding, and assembly of the multi-font experiment datasets with seeded
80/20 splits.

Rendering goes through Pillow: words are drawn dark-on-light with
anti-aliasing, then pushed through the same binarize/crop/normalize
pipeline that external scans would take.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from .imaging import (
    DEFAULT_HEIGHT,
    GrayImage,
    binarize,
    normalize_height,
    otsu_threshold,
    tight_crop_unit_pad,
)

#: Dataset labels of the six-font experiment matrix, in table order.
PAPER_FONT_NAMES = (
    "Arial_14",
    "Calibri_14",
    "Cambria_14",
    "Georgia_14",
    "LucidaFax_14",
    "TNR_14",
)

#: Fallback faces bundled with every matplotlib/DejaVu install; used when a
#: config does not point at the proprietary originals.
_DEJAVU_SUBSTITUTES = {
    "Arial_14": "DejaVuSans.ttf",
    "Calibri_14": "DejaVuSans-Bold.ttf",
    "Cambria_14": "DejaVuSerif.ttf",
    "Georgia_14": "DejaVuSerif-Bold.ttf",
    "LucidaFax_14": "DejaVuSansMono.ttf",
    "TNR_14": "DejaVuSansMono-Bold.ttf",
}

_FONT_DIRS = (
    Path("/usr/share/fonts/truetype/dejavu"),
)


class DatasetError(ValueError):
    pass


class GlyphError(DatasetError):
    """A word contains a character the font face cannot draw."""


@dataclass(frozen=True)
class Corpus:
    words: tuple[str, ...]

    def __post_init__(self):
        if not self.words:
            raise DatasetError("empty corpus")

    def __len__(self) -> int:
        return len(self.words)


@dataclass(frozen=True)
class FontSpec:
    name: str
    face_file: str
    size: int = 14

    def __post_init__(self):
        if self.size <= 0:
            raise DatasetError("font size must be positive")


@dataclass(frozen=True)
class Alphabet:
    """Ordered character set; label i+1 is chars[i], label 0 is the CTC
    blank (never a character)."""

    chars: tuple[str, ...]
    blank_index: int = 0

    def __post_init__(self):
        if len(set(self.chars)) != len(self.chars):
            raise DatasetError("alphabet characters must be distinct")

    def __len__(self) -> int:
        return len(self.chars)

    @property
    def n_classes(self) -> int:
        """Softmax width: one class per character plus the blank."""
        return len(self.chars) + 1

    def encode(self, word: str) -> list[int]:
        try:
            return [self._index()[ch] for ch in word]
        except KeyError as exc:
            raise DatasetError(f"character {exc.args[0]!r} not in alphabet") from None

    def decode(self, labels) -> str:
        chars = self.chars
        out = []
        for l in labels:
            if not 1 <= l <= len(chars):
                raise DatasetError(f"label {l} outside 1..{len(chars)}")
            out.append(chars[l - 1])
        return "".join(out)

    def _index(self) -> dict[str, int]:
        idx = getattr(self, "_idx_cache", None)
        if idx is None:
            idx = {ch: i + 1 for i, ch in enumerate(self.chars)}
            object.__setattr__(self, "_idx_cache", idx)
        return idx


@dataclass(frozen=True)
class Sample:
    image: GrayImage
    transcript: str
    font: str
    word_id: int

    def __post_init__(self):
        if not self.transcript:
            raise DatasetError("empty transcript")


@dataclass(frozen=True)
class DatasetSplit:
    dataset_name: str
    seed: int
    train: tuple[Sample, ...]
    test: tuple[Sample, ...]


def bundled_corpus_path() -> Path:
    return Path(resources.files("motsocr.data") / "french_words.txt")


def load_corpus(path, limit: int | None = None) -> Corpus:
    """One UTF-8 word per line; duplicates dropped, original order kept."""
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DatasetError(f"encoding error: {path} is not valid UTF-8") from exc
    words: list[str] = []
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        word = line.strip()
        if not word:
            continue
        if any(ch.isspace() for ch in word):
            raise DatasetError(f"line {lineno}: word contains whitespace: {word!r}")
        if word not in seen:
            seen.add(word)
            words.append(word)
    if not words:
        raise DatasetError(f"empty corpus: {path}")
    if limit is not None:
        words = words[:limit]
    return Corpus(tuple(words))


def build_alphabet(corpus: Corpus) -> Alphabet:
    """Sorted distinct characters across all corpus words."""
    return Alphabet(tuple(sorted(set("".join(corpus.words)))))


def resolve_font_file(name: str) -> str:
    """Locate the substitute face for a table font name (DejaVu family)."""
    filename = _DEJAVU_SUBSTITUTES.get(name)
    if filename is None:
        raise DatasetError(f"no bundled substitute for font {name!r}")
    for d in _FONT_DIRS:
        candidate = d / filename
        if candidate.is_file():
            return str(candidate)
    try:  # matplotlib ships the same faces
        import matplotlib

        candidate = Path(matplotlib.__file__).parent / "mpl-data" / "fonts" / "ttf" / filename
        if candidate.is_file():
            return str(candidate)
    except ImportError:
        pass
    raise DatasetError(f"font face {filename} not found on this system")


def default_fonts(names=PAPER_FONT_NAMES, size: int = 14) -> tuple[FontSpec, ...]:
    return tuple(FontSpec(n, resolve_font_file(n), size) for n in names)


@lru_cache(maxsize=32)
def _load_face(face_file: str, size: int) -> ImageFont.FreeTypeFont:
    return ImageFont.truetype(face_file, size)


def _mask_signature(face: ImageFont.FreeTypeFont, text: str):
    mask = face.getmask(text, mode="L")
    return mask.size, bytes(mask)


@lru_cache(maxsize=32)
def _notdef_signature(face_file: str, size: int):
    # U+FFFE is guaranteed unmapped, so its rendering is the face's .notdef
    # glyph; any character drawing identical to it has no glyph of its own.
    return _mask_signature(_load_face(face_file, size), "￾")


def check_glyphs(word: str, font: FontSpec) -> None:
    face = _load_face(font.face_file, font.size)
    notdef = _notdef_signature(font.face_file, font.size)
    for ch in set(word):
        if _mask_signature(face, ch) == notdef:
            raise GlyphError(f"glyph error: {ch!r} (U+{ord(ch):04X}) missing from {font.name}")


def render_word(word: str, font: FontSpec, margin: int = 2) -> GrayImage:
    """Dark anti-aliased text on a white raster, margin pixels of border."""
    if not word:
        raise DatasetError("cannot render an empty word")
    check_glyphs(word, font)
    face = _load_face(font.face_file, font.size)
    left, top, right, bottom = face.getbbox(word)
    width = max(1, right - left) + 2 * margin
    height = max(1, bottom - top) + 2 * margin
    canvas = Image.new("L", (width, height), 255)
    draw = ImageDraw.Draw(canvas)
    draw.text((margin - left, margin - top), word, font=face, fill=0)
    return GrayImage(np.asarray(canvas))


def render_line(words: list[str], font: FontSpec, margin: int = 2) -> GrayImage:
    """Render words separated by spaces as one line raster."""
    return render_word(" ".join(words), font, margin=margin)


def word_to_sample(
    word: str, word_id: int, font: FontSpec, height: int = DEFAULT_HEIGHT
) -> Sample:
    """Full preprocessing pipeline: render, Otsu-binarize, tight crop with
    unit padding, normalize height."""
    gray = render_word(word, font)
    ink = binarize(gray, otsu_threshold(gray))
    cropped = tight_crop_unit_pad(ink)
    return Sample(
        image=normalize_height(cropped, height),
        transcript=word,
        font=font.name,
        word_id=word_id,
    )


def render_samples(
    corpus: Corpus, fonts: tuple[FontSpec, ...], height: int = DEFAULT_HEIGHT
) -> dict[str, list[Sample]]:
    """All (word, font) samples, keyed by font name."""
    return {
        font.name: [
            word_to_sample(w, wid, font, height) for wid, w in enumerate(corpus.words)
        ]
        for font in fonts
    }


def split_80_20(samples, seed: int, dataset_name: str = "") -> DatasetSplit:
    """Deterministic seeded shuffle, 80% train / 20% test, rounding toward
    train. The PCG64 stream is keyed on (seed, dataset_name) so two fonts'
    datasets of equal size do not shuffle identically under one seed."""
    n = len(samples)
    if n < 5:
        raise DatasetError(f"need at least 5 samples to split, got {n}")
    order = np.random.default_rng([seed, zlib.crc32(dataset_name.encode())]).permutation(n)
    n_test = n // 5
    n_train = n - n_test
    train = tuple(samples[i] for i in order[:n_train])
    test = tuple(samples[i] for i in order[n_train:])
    return DatasetSplit(dataset_name=dataset_name, seed=seed, train=train, test=test)


def build_experiment_datasets(
    corpus: Corpus,
    fonts: tuple[FontSpec, ...],
    seeds,
    height: int = DEFAULT_HEIGHT,
    by_font: dict[str, list[Sample]] | None = None,
) -> dict[tuple[str, int], DatasetSplit]:
    """One split per (dataset, repetition seed): each font's samples plus
    the combined "all" dataset. Six fonts and five seeds give the full
    35-split matrix."""
    if len(fonts) != 6:
        raise DatasetError(f"the experiment matrix needs exactly six fonts, got {len(fonts)}")
    if len(set(f.name for f in fonts)) != len(fonts):
        raise DatasetError("font names must be distinct")
    if by_font is None:
        by_font = render_samples(corpus, fonts, height)
    all_samples = [s for font in fonts for s in by_font[font.name]]
    splits: dict[tuple[str, int], DatasetSplit] = {}
    for seed in seeds:
        for font in fonts:
            splits[(font.name, seed)] = split_80_20(by_font[font.name], seed, font.name)
        splits[("all", seed)] = split_80_20(all_samples, seed, "all")
    return splits


def dataset_names(fonts: tuple[FontSpec, ...]) -> tuple[str, ...]:
    return ("all",) + tuple(f.name for f in fonts)
