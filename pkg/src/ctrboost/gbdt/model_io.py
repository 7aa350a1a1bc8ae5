"""Versioned binary model file: save/load with integrity checking.

Layout (all integers little-endian, floats IEEE-754 binary64 little-endian):

    magic "CTRBOOST" | u32 version | u32 n_sections
    section table: 8-byte NUL-padded name, u64 offset, u64 length (offsets
    are absolute file positions)
    section payloads
    trailer: first 8 bytes of SHA-256 over everything before the trailer

See docs/MODEL_FORMAT.md for the per-section payload layout.
"""

from __future__ import annotations

import hashlib
import io
import json
import struct
from pathlib import Path

import numpy as np

from ..data import ColumnKind, ColumnMeta
from ..encode import ColumnStats, EncoderMode, EncoderSpec, FittedEncoder
from .binning import FeatureBins
from .booster import GBDTConfig, Model
from .tree import CATEGORICAL, LEAF, NUMERIC, Tree

MAGIC = b"CTRBOOST"
FORMAT_VERSION = 1
CHECKSUM_BYTES = 8

_KIND_CODES = {ColumnKind.CATEGORICAL: 0, ColumnKind.NUMERICAL: 1, ColumnKind.TARGET: 2}
_KIND_FROM_CODE = {v: k for k, v in _KIND_CODES.items()}
_MODE_CODES = {
    EncoderMode.LABEL: 0,
    EncoderMode.TARGET: 1,
    EncoderMode.KFOLD_TARGET: 2,
    EncoderMode.ORDERED_TS: 3,
    EncoderMode.NATIVE_PASSTHROUGH: 4,
}
_MODE_FROM_CODE = {v: k for k, v in _MODE_CODES.items()}


class ModelFormatError(ValueError):
    """Raised for unreadable, corrupt, or wrong-version model files."""


class _Writer:
    def __init__(self) -> None:
        self.buf = io.BytesIO()

    def u8(self, v: int) -> None:
        self.buf.write(struct.pack("<B", v))

    def u16(self, v: int) -> None:
        self.buf.write(struct.pack("<H", v))

    def u32(self, v: int) -> None:
        self.buf.write(struct.pack("<I", v))

    def u64(self, v: int) -> None:
        self.buf.write(struct.pack("<Q", v))

    def i64(self, v: int) -> None:
        self.buf.write(struct.pack("<q", v))

    def f64(self, v: float) -> None:
        self.buf.write(struct.pack("<d", v))

    def text(self, s: str) -> None:
        raw = s.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise ModelFormatError(f"string too long to serialize ({len(raw)} bytes)")
        self.u16(len(raw))
        self.buf.write(raw)

    def long_text(self, s: str) -> None:
        raw = s.encode("utf-8")
        self.u32(len(raw))
        self.buf.write(raw)

    def f64_array(self, arr: np.ndarray) -> None:
        self.buf.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())

    def u64_array(self, arr: np.ndarray) -> None:
        self.buf.write(np.ascontiguousarray(arr, dtype="<u8").tobytes())

    def i32_array(self, arr: np.ndarray) -> None:
        self.buf.write(np.ascontiguousarray(arr, dtype="<i4").tobytes())

    def bytes_value(self) -> bytes:
        return self.buf.getvalue()


class _Reader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def _take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ModelFormatError("model file truncated inside a section")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return struct.unpack("<B", self._take(1))[0]

    def u16(self) -> int:
        return struct.unpack("<H", self._take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self._take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self._take(8))[0]

    def i64(self) -> int:
        return struct.unpack("<q", self._take(8))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self._take(8))[0]

    def text(self) -> str:
        return self._take(self.u16()).decode("utf-8")

    def long_text(self) -> str:
        return self._take(self.u32()).decode("utf-8")

    def f64_array(self, n: int) -> np.ndarray:
        return np.frombuffer(self._take(8 * n), dtype="<f8").astype(np.float64)

    def u64_array(self, n: int) -> np.ndarray:
        return np.frombuffer(self._take(8 * n), dtype="<u8").astype(np.int64)

    def i32_array(self, n: int) -> np.ndarray:
        return np.frombuffer(self._take(4 * n), dtype="<i4").astype(np.int32)


def _schema_section(model: Model) -> bytes:
    w = _Writer()
    w.u32(len(model.schema))
    for meta in model.schema:
        w.text(meta.name)
        w.u8(_KIND_CODES[meta.kind])
        w.u32(meta.cardinality or 0)
    return w.bytes_value()


def _dicts_section(model: Model) -> bytes:
    w = _Writer()
    w.u32(len(model.dictionaries))
    for name, entries in model.dictionaries.items():
        w.text(name)
        w.u32(len(entries))
        for entry in entries:
            w.long_text(entry)
    return w.bytes_value()


def _config_section(model: Model) -> bytes:
    cfg = model.config
    payload = {
        "n_trees": cfg.n_trees,
        "learning_rate": cfg.learning_rate,
        "max_depth": cfg.max_depth,
        "lam": cfg.lam,
        "gamma": cfg.gamma,
        "min_child_weight": cfg.min_child_weight,
        "max_bins": cfg.max_bins,
        "early_stopping_rounds": cfg.early_stopping_rounds,
        "cat_mode": cfg.cat_mode.value,
        "seed": cfg.seed,
    }
    w = _Writer()
    w.long_text(json.dumps(payload, sort_keys=True))
    return w.bytes_value()


def _bins_section(model: Model) -> bytes:
    w = _Writer()
    w.u32(len(model.bins))
    for name, fb in model.bins.items():
        w.text(name)
        w.u32(len(fb.edges))
        w.f64_array(fb.edges)
    return w.bytes_value()


def _encoder_section(model: Model) -> bytes:
    w = _Writer()
    enc = model.encoder
    if enc is None:
        w.u8(0)
        return w.bytes_value()
    w.u8(1)
    w.u8(_MODE_CODES[enc.spec.mode])
    w.f64(enc.spec.smoothing)
    w.u32(enc.spec.k_folds)
    w.u32(enc.spec.n_permutations)
    w.i64(enc.spec.seed)
    w.f64(enc.prior)
    w.u32(len(enc.columns))
    for col in enc.columns:
        w.text(col.name)
        w.u32(col.cardinality)
        for entry in col.dictionary:
            w.long_text(entry)
        w.f64_array(col.sums)
        w.u64_array(col.counts.astype(np.uint64))
    return w.bytes_value()


def _trees_section(model: Model) -> bytes:
    name_to_index = {meta.name: i for i, meta in enumerate(model.schema)}
    w = _Writer()
    w.f64(model.base_score)
    w.f64(model.learning_rate)
    w.u32(len(model.trees))
    for tree in model.trees:
        w.u32(tree.n_nodes)
        for node in range(tree.n_nodes):
            kind = tree.kind[node]
            w.u8(kind)
            if kind == LEAF:
                w.f64(tree.weight[node])
                continue
            w.u32(name_to_index[tree.feature[node]])
            if kind == NUMERIC:
                w.u32(tree.bin[node])
                w.f64(tree.threshold[node])
            else:
                cats = tree.left_cats[node]
                w.u32(len(cats))
                w.i32_array(cats)
            w.u8(1 if tree.default_left[node] else 0)
            w.u32(tree.left[node])
            w.u32(tree.right[node])
    return w.bytes_value()


def _meta_section(model: Model) -> bytes:
    w = _Writer()
    w.long_text(json.dumps(model.metadata, sort_keys=True))
    return w.bytes_value()


_SECTION_BUILDERS = [
    ("schema", _schema_section),
    ("dicts", _dicts_section),
    ("config", _config_section),
    ("bins", _bins_section),
    ("encoder", _encoder_section),
    ("trees", _trees_section),
    ("meta", _meta_section),
]


def save(model: Model, path: str | Path) -> None:
    """Write the model file (atomic single write, trailing checksum)."""
    sections = [(name, builder(model)) for name, builder in _SECTION_BUILDERS]
    header_len = len(MAGIC) + 4 + 4 + len(sections) * (8 + 8 + 8)
    body = io.BytesIO()
    body.write(MAGIC)
    body.write(struct.pack("<I", FORMAT_VERSION))
    body.write(struct.pack("<I", len(sections)))
    offset = header_len
    for name, payload in sections:
        encoded = name.encode("ascii").ljust(8, b"\x00")
        body.write(encoded + struct.pack("<QQ", offset, len(payload)))
        offset += len(payload)
    for _, payload in sections:
        body.write(payload)
    blob = body.getvalue()
    digest = hashlib.sha256(blob).digest()[:CHECKSUM_BYTES]
    Path(path).write_bytes(blob + digest)


def _parse_sections(data: bytes) -> dict[str, bytes]:
    if len(data) < len(MAGIC) + 8 + CHECKSUM_BYTES:
        raise ModelFormatError("model file truncated: shorter than the fixed header")
    if data[: len(MAGIC)] != MAGIC:
        raise ModelFormatError(f"bad magic bytes; not a {MAGIC.decode()} model file")
    version = struct.unpack_from("<I", data, len(MAGIC))[0]
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format version {version} (expected {FORMAT_VERSION})")
    body, trailer = data[:-CHECKSUM_BYTES], data[-CHECKSUM_BYTES:]
    if hashlib.sha256(body).digest()[:CHECKSUM_BYTES] != trailer:
        raise ModelFormatError("checksum mismatch: model file is corrupt")
    n_sections = struct.unpack_from("<I", data, len(MAGIC) + 4)[0]
    table_start = len(MAGIC) + 8
    sections: dict[str, bytes] = {}
    for i in range(n_sections):
        entry = data[table_start + i * 24 : table_start + (i + 1) * 24]
        if len(entry) < 24:
            raise ModelFormatError("model file truncated inside the section table")
        name = entry[:8].rstrip(b"\x00").decode("ascii")
        off, length = struct.unpack("<QQ", entry[8:])
        if off + length > len(body):
            raise ModelFormatError(f"section {name!r} extends past the end of the file")
        sections[name] = data[off : off + length]
    return sections


def load(path: str | Path) -> Model:
    """Read and validate a model file; raises ModelFormatError on any defect."""
    data = Path(path).read_bytes()
    sections = _parse_sections(data)
    for required in ("schema", "dicts", "config", "bins", "encoder", "trees", "meta"):
        if required not in sections:
            raise ModelFormatError(f"model file is missing the {required!r} section")

    r = _Reader(sections["schema"])
    schema = []
    for _ in range(r.u32()):
        name = r.text()
        kind = _KIND_FROM_CODE[r.u8()]
        card = r.u32()
        schema.append(ColumnMeta(name, kind, card if kind is ColumnKind.CATEGORICAL else None))

    r = _Reader(sections["dicts"])
    dictionaries: dict[str, tuple[str, ...]] = {}
    for _ in range(r.u32()):
        name = r.text()
        dictionaries[name] = tuple(r.long_text() for _ in range(r.u32()))

    r = _Reader(sections["config"])
    cfg_raw = json.loads(r.long_text())
    config = GBDTConfig(**cfg_raw)

    r = _Reader(sections["bins"])
    bins: dict[str, FeatureBins] = {}
    for _ in range(r.u32()):
        name = r.text()
        bins[name] = FeatureBins(column=name, edges=r.f64_array(r.u32()))

    r = _Reader(sections["encoder"])
    encoder: FittedEncoder | None = None
    if r.u8():
        mode = _MODE_FROM_CODE[r.u8()]
        smoothing = r.f64()
        k_folds = r.u32()
        n_permutations = r.u32()
        seed = r.i64()
        prior = r.f64()
        cols = []
        for _ in range(r.u32()):
            name = r.text()
            n_codes = r.u32()
            dictionary = tuple(r.long_text() for _ in range(n_codes))
            sums = r.f64_array(n_codes)
            counts = r.u64_array(n_codes)
            cols.append(ColumnStats(name, dictionary, sums, counts))
        spec = EncoderSpec(mode=mode, smoothing=smoothing, k_folds=k_folds, n_permutations=n_permutations, seed=seed)
        encoder = FittedEncoder(spec=spec, prior=prior, columns=tuple(cols))

    r = _Reader(sections["trees"])
    base = r.f64()
    lr = r.f64()
    trees: list[Tree] = []
    for _ in range(r.u32()):
        n_nodes = r.u32()
        tree = Tree()
        for _ in range(n_nodes):
            node = tree._new_node()
            kind = r.u8()
            tree.kind[node] = kind
            if kind == LEAF:
                tree.weight[node] = r.f64()
                continue
            tree.feature[node] = schema[r.u32()].name
            if kind == NUMERIC:
                tree.bin[node] = r.u32()
                tree.threshold[node] = r.f64()
            elif kind == CATEGORICAL:
                tree.left_cats[node] = r.i32_array(r.u32())
            else:
                raise ModelFormatError(f"unknown node kind {kind}")
            tree.default_left[node] = bool(r.u8())
            tree.left[node] = r.u32()
            tree.right[node] = r.u32()
        trees.append(tree)

    r = _Reader(sections["meta"])
    metadata = json.loads(r.long_text())

    return Model(
        base_score=base,
        learning_rate=lr,
        trees=trees,
        schema=tuple(schema),
        bins=bins,
        dictionaries=dictionaries,
        encoder=encoder,
        config=config,
        metadata=metadata,
    )
