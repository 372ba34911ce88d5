"""CSV ingestion, dataset profiles, the encoded binary format and synthetic data.

Encoded dataset layout (all integers little-endian)::

    offset  size        field
    0       8           magic  b"BKMODES\\0"
    8       2           format version (u16, currently 1)
    10      2           reserved (u16, zero)
    12      8           n rows (u64)
    20      4           m attributes (u32)
    24      2*m         cardinalities (u16 each)
    ...     per attr    name length (u32) + UTF-8 name bytes
    ...     n*m         codes, row-major, one byte per cell
    end-4   4           CRC-32 of every preceding byte (u32)

The recode map lives next to it as ``<path>.recode.json``.
"""

from __future__ import annotations

import csv
import json
import struct
import zlib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .dataset import MAX_CARDINALITY, CategoricalDataset, ContractError, validate

MAGIC = b"BKMODES\0"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sHHQI")
_CRC = struct.Struct("<I")
RECODE_SUFFIX = ".recode.json"


class IngestError(ValueError):
    code = 3


class FormatError(ValueError):
    code = 4


class VersionError(FormatError):
    code = 5


class ChecksumError(FormatError):
    code = 6


@dataclass
class RecodeMap:
    """Source tokens per attribute; the token at position ``c`` encodes to code ``c``."""

    tokens: list[list[str]]

    def __post_init__(self):
        for i, toks in enumerate(self.tokens):
            if len(set(toks)) != len(toks):
                raise ContractError(f"duplicate tokens in recode map attribute {i}")

    @property
    def cardinalities(self) -> list[int]:
        return [len(t) for t in self.tokens]

    def decode_row(self, codes) -> list[str]:
        return [self.tokens[i][int(c)] for i, c in enumerate(codes)]

    def encode_row(self, values) -> list[int]:
        return [self.tokens[i].index(v) for i, v in enumerate(values)]

    def to_json(self, names) -> dict:
        return {
            "format": "bkmodes-recode",
            "version": FORMAT_VERSION,
            "attributes": [{"name": nm, "tokens": toks} for nm, toks in zip(names, self.tokens)],
        }

    @classmethod
    def from_json(cls, obj: dict) -> RecodeMap:
        if obj.get("format") != "bkmodes-recode":
            raise FormatError("not a recode map")
        if obj.get("version") != FORMAT_VERSION:
            raise VersionError(f"unsupported recode map version {obj.get('version')!r}")
        return cls([list(a["tokens"]) for a in obj["attributes"]])


@dataclass(frozen=True)
class DatasetProfile:
    """Preprocessing recipe for one source dataset.

    ``drop_columns`` are 1-based source column numbers.  After those are
    removed, a column is dropped when its distinct-token count exceeds
    ``max_cardinality`` (or reaches it, when ``drop_at_cap`` is set).
    """

    name: str
    drop_columns: tuple[int, ...] = ()
    max_cardinality: int = MAX_CARDINALITY
    drop_at_cap: bool = False
    has_header: bool = True
    delimiter: str = ","

    def __post_init__(self):
        if len(set(self.drop_columns)) != len(self.drop_columns):
            raise ContractError("drop_columns must be distinct")
        if any(c < 1 for c in self.drop_columns):
            raise ContractError("drop_columns are 1-based")
        if not 1 <= self.max_cardinality <= MAX_CARDINALITY:
            raise ContractError(f"max_cardinality must be in [1, {MAX_CARDINALITY}]")

    def too_many(self, distinct: int) -> bool:
        if self.drop_at_cap:
            return distinct >= self.max_cardinality
        return distinct > self.max_cardinality


PROFILES = {
    "us-census": DatasetProfile("us-census", drop_columns=(1,), has_header=True),
    "kdd99": DatasetProfile("kdd99", drop_columns=(1, 5, 6, 13, 14, 32, 33),
                            max_cardinality=256, drop_at_cap=True, has_header=False),
    "puf": DatasetProfile("puf", has_header=False),
    "generic": DatasetProfile("generic", has_header=True),
}


def get_profile(name: str, **overrides) -> DatasetProfile:
    try:
        base = PROFILES[name]
    except KeyError:
        raise ContractError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}") from None
    if not overrides:
        return base
    return replace(base, **{k: v for k, v in overrides.items() if v is not None})


@dataclass(frozen=True)
class DroppedColumn:
    column: int
    name: str
    reason: str
    distinct: int | None = None


@dataclass
class DropReport:
    source_columns: int
    kept: list[int] = field(default_factory=list)
    dropped: list[DroppedColumn] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "source_columns": self.source_columns,
            "kept": list(self.kept),
            "dropped": [d.__dict__ for d in self.dropped],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


class Ingested(NamedTuple):
    dataset: CategoricalDataset
    recode_map: RecodeMap
    drop_report: DropReport


def ingest_csv(path, profile: DatasetProfile | str = "generic") -> Ingested:
    """Read delimited text and recode each column in first-appearance order.

    Every distinct token, including the empty string, is its own category.
    """
    if isinstance(profile, str):
        profile = get_profile(profile)
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc

    with fh:
        reader = csv.reader(fh, delimiter=profile.delimiter)
        header = None
        width = None
        keep: list[int] = []
        maps: list[dict[str, int]] = []
        columns: list[list[int]] = []
        n_rows = 0
        for line_no, rec in enumerate(reader, start=1):
            if width is None:
                width = len(rec)
                if width == 0:
                    raise IngestError(f"{path}: line {line_no} is empty")
                drops = set(profile.drop_columns)
                keep = [c for c in range(width) if c + 1 not in drops]
                maps = [{} for _ in keep]
                columns = [[] for _ in keep]
                if profile.has_header:
                    header = rec
                    continue
            elif len(rec) != width:
                raise IngestError(
                    f"{path}: line {line_no} has {len(rec)} fields, expected {width}")
            n_rows += 1
            for slot, c in enumerate(keep):
                d = maps[slot]
                tok = rec[c]
                code = d.get(tok)
                if code is None:
                    code = d[tok] = len(d)
                columns[slot].append(code)

    if width is None:
        raise IngestError(f"{path}: no data")
    names = header if header is not None else [f"col{c + 1}" for c in range(width)]
    report = DropReport(source_columns=width)
    for c in range(width):
        if c + 1 in profile.drop_columns:
            report.dropped.append(DroppedColumn(c + 1, names[c], "profile"))

    survivors = []
    for slot, c in enumerate(keep):
        distinct = len(maps[slot])
        if profile.too_many(distinct):
            report.dropped.append(DroppedColumn(c + 1, names[c], "cardinality", distinct))
        else:
            survivors.append(slot)
            report.kept.append(c + 1)
    report.dropped.sort(key=lambda d: d.column)

    if n_rows == 0:
        raise IngestError(f"{path}: no data rows")
    if not survivors:
        raise IngestError(f"{path}: zero usable columns after preprocessing")

    codes = np.empty((n_rows, len(survivors)), dtype=np.uint8)
    for j, slot in enumerate(survivors):
        codes[:, j] = columns[slot]
    tokens = [list(maps[slot]) for slot in survivors]
    dataset = CategoricalDataset(codes, [len(t) for t in tokens],
                                 tuple(names[keep[s]] for s in survivors))
    problems = validate(dataset)
    if problems:
        raise IngestError(problems[0].message)
    return Ingested(dataset, RecodeMap(tokens), report)


def encode_dataset(dataset: CategoricalDataset) -> bytes:
    parts = [_HEADER.pack(MAGIC, FORMAT_VERSION, 0, dataset.n, dataset.m),
             struct.pack(f"<{dataset.m}H", *dataset.cardinalities.tolist())]
    for name in dataset.attribute_names:
        raw = name.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)
    parts.append(dataset.codes.tobytes(order="C"))
    body = b"".join(parts)
    return body + _CRC.pack(zlib.crc32(body))


def decode_dataset(blob: bytes) -> CategoricalDataset:
    if len(blob) < len(MAGIC) or blob[:len(MAGIC)] != MAGIC:
        raise FormatError("not an encoded bkmodes dataset (bad magic)")
    if len(blob) < _HEADER.size + _CRC.size:
        raise ChecksumError("encoded dataset truncated")
    _, version, _, n, m = _HEADER.unpack_from(blob, 0)
    if version != FORMAT_VERSION:
        raise VersionError(f"unsupported format version {version} (expected {FORMAT_VERSION})")
    body, (crc,) = blob[:-_CRC.size], _CRC.unpack_from(blob, len(blob) - _CRC.size)
    if zlib.crc32(body) != crc:
        raise ChecksumError("checksum mismatch: file is corrupt or truncated")
    try:
        off = _HEADER.size
        cards = struct.unpack_from(f"<{m}H", body, off)
        off += 2 * m
        names = []
        for _ in range(m):
            (ln,) = struct.unpack_from("<I", body, off)
            off += 4
            names.append(body[off:off + ln].decode("utf-8"))
            off += ln
        if len(body) - off != n * m:
            raise FormatError("code block size does not match the header")
    except struct.error as exc:
        raise FormatError(f"malformed header: {exc}") from exc
    codes = np.frombuffer(body, dtype=np.uint8, count=n * m, offset=off).reshape(n, m)
    dataset = CategoricalDataset(codes.copy(), cards, tuple(names))
    problems = validate(dataset)
    if problems:
        raise FormatError(problems[0].message)
    return dataset


def save_encoded(dataset: CategoricalDataset, recode_map: RecodeMap | None, path) -> None:
    path = Path(path)
    if recode_map is not None and recode_map.cardinalities != dataset.cardinalities.tolist():
        raise ContractError("recode map does not match the dataset cardinalities")
    path.write_bytes(encode_dataset(dataset))
    if recode_map is not None:
        Path(str(path) + RECODE_SUFFIX).write_text(
            json.dumps(recode_map.to_json(dataset.attribute_names), indent=1, ensure_ascii=False)
            + "\n", encoding="utf-8")


def load_encoded(path) -> tuple[CategoricalDataset, RecodeMap | None]:
    path = Path(path)
    dataset = decode_dataset(path.read_bytes())
    sidecar = Path(str(path) + RECODE_SUFFIX)
    recode = None
    if sidecar.exists():
        recode = RecodeMap.from_json(json.loads(sidecar.read_text(encoding="utf-8")))
        if recode.cardinalities != dataset.cardinalities.tolist():
            raise FormatError("recode map sidecar does not match the dataset")
    return dataset, recode


def load_dataset(path, profile: DatasetProfile | str = "generic") -> CategoricalDataset:
    """Open either an encoded dataset or a CSV file (by sniffing the magic)."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(len(MAGIC))
    if head == MAGIC:
        return load_encoded(path)[0]
    return ingest_csv(path, profile).dataset


class Synthetic(NamedTuple):
    dataset: CategoricalDataset
    modes: np.ndarray
    labels: np.ndarray


def synth_generate(k_true: int, n: int, m: int, cardinality: int, flip_prob: float,
                   seed: int) -> Synthetic:
    """Planted-mode data: balanced labels, each cell flipped to a different
    uniform category with probability ``flip_prob``.
    """
    if k_true < 1 or n < 1 or m < 1:
        raise ContractError("k_true, n and m must be >= 1")
    if not 0 <= flip_prob < 1:
        raise ContractError("flip_prob must be in [0, 1)")
    if not 1 <= cardinality <= MAX_CARDINALITY:
        raise ContractError(f"cardinality must be in [1, {MAX_CARDINALITY}]")
    if cardinality < 2 and flip_prob > 0:
        raise ContractError("flipping needs cardinality >= 2")
    rng = np.random.Generator(np.random.PCG64(seed))
    modes = rng.integers(0, cardinality, size=(k_true, m))
    labels = rng.permutation(np.arange(n) % k_true)
    codes = modes[labels]
    flip = rng.random((n, m)) < flip_prob
    if cardinality > 1:
        shift = rng.integers(1, cardinality, size=(n, m))
        codes = np.where(flip, (codes + shift) % cardinality, codes)
    ds = CategoricalDataset(codes.astype(np.uint8), [cardinality] * m)
    return Synthetic(ds, modes.astype(np.uint8), labels.astype(np.int64))
