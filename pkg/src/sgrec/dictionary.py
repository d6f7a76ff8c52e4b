"""Class-partitioned atom dictionaries and their on-disk "SGD1" format.

File layout (all integers little-endian)::

    b"SGD1"
    u32 version (=1), u32 m, u32 n, u32 L
    u8 feature kind (0 raw, 1 hog, 2 lbp), u32 cell_size, u32 height, u32 width
    L x (u16 label byte length, UTF-8 label, u32 count)
    m*n f64 atoms, column-major
    u32 CRC32 of every preceding byte
"""

import logging
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CorruptFileError,
    EmptyClassError,
    EmptyDictionaryError,
    IntegrityError,
    InvalidInputError,
)
from .features import FeatureKind, FeatureSpec, feature_dim

__all__ = [
    "PartitionedDictionary",
    "normalize_columns",
    "build_dictionary",
    "save_dictionary",
    "load_dictionary",
    "dumps",
    "loads",
]

log = logging.getLogger(__name__)

MAGIC = b"SGD1"
VERSION = 1
_NORM_FLOOR = 1e-12
_KIND_CODE = {FeatureKind.RAW: 0, FeatureKind.HOG: 1, FeatureKind.LBP: 2}
_CODE_KIND = {v: k for k, v in _KIND_CODE.items()}
_HEADER = struct.Struct("<4sIIIIBIII")


@dataclass(frozen=True, eq=False)
class PartitionedDictionary:
    """Unit-norm atoms ``(m, n)`` split into contiguous per-class blocks.

    ``class_offsets`` holds ``(label, start, count)`` triples in column
    order. ``dropped`` lists ``(label, input_index)`` of zero atoms removed
    during the build; it is diagnostic only and not persisted.
    """

    atoms: np.ndarray
    class_offsets: tuple
    feature_spec: FeatureSpec
    source_dims: tuple
    dropped: tuple = field(default=())

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float)
        if atoms.ndim != 2:
            raise InvalidInputError("atoms must be a 2-D matrix")
        offsets = tuple((str(lbl), int(s), int(c)) for lbl, s, c in self.class_offsets)
        pos = 0
        for lbl, start, count in offsets:
            if start != pos or count < 1:
                raise InvalidInputError(f"class {lbl!r} block is not contiguous/nonempty")
            pos += count
        if pos != atoms.shape[1]:
            raise InvalidInputError("class counts do not sum to the number of atoms")
        if len({lbl for lbl, _, _ in offsets}) != len(offsets):
            raise InvalidInputError("duplicate class labels")
        norms = np.linalg.norm(atoms, axis=0)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise InvalidInputError("dictionary columns must have unit L2 norm")
        atoms.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "class_offsets", offsets)
        object.__setattr__(self, "source_dims", tuple(int(d) for d in self.source_dims))

    @property
    def labels(self):
        return [lbl for lbl, _, _ in self.class_offsets]

    @property
    def m(self):
        return self.atoms.shape[0]

    @property
    def n(self):
        return self.atoms.shape[1]

    def block(self, label):
        """Sub-dictionary (a view) of one class."""
        for lbl, start, count in self.class_offsets:
            if lbl == label:
                return self.atoms[:, start : start + count]
        raise KeyError(label)

    def blocks(self):
        for lbl, start, count in self.class_offsets:
            yield lbl, self.atoms[:, start : start + count]

    def __eq__(self, other):
        if not isinstance(other, PartitionedDictionary):
            return NotImplemented
        return (
            self.atoms.shape == other.atoms.shape
            and self.atoms.tobytes() == other.atoms.tobytes()
            and self.class_offsets == other.class_offsets
            and self.feature_spec == other.feature_spec
            and self.source_dims == other.source_dims
        )


def normalize_columns(matrix):
    """Scale every column to unit L2 norm.

    Columns with norm below 1e-12 are removed.

    Returns
    -------
    normalized : ndarray
        Surviving columns, normalized, in their original order.
    dropped : list of int
        Indices of removed columns.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2:
        raise InvalidInputError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix has non-finite entries")
    norms = np.linalg.norm(a, axis=0)
    keep = norms >= _NORM_FLOOR
    dropped = [int(i) for i in np.flatnonzero(~keep)]
    if not keep.any():
        raise EmptyDictionaryError("all columns have zero norm")
    return a[:, keep] / norms[keep], dropped


def build_dictionary(class_sets):
    """Assemble a :class:`PartitionedDictionary` from feature vectors.

    Parameters
    ----------
    class_sets : mapping of str to list of FeatureVector
        Classes are laid out in sorted label order; atoms keep their
        input order within each class.
    """
    if not class_sets:
        raise EmptyDictionaryError("no classes given")
    spec = dims = length = None
    columns = []
    offsets = []
    dropped = []
    for label in sorted(class_sets):
        vecs = list(class_sets[label])
        if not vecs:
            raise EmptyClassError(label)
        for v in vecs:
            if spec is None:
                spec, dims, length = v.spec, tuple(v.source_dims), len(v)
            elif v.spec != spec or tuple(v.source_dims) != dims or len(v) != length:
                raise InvalidInputError(
                    f"class {label!r}: feature vector {v.spec}/{v.source_dims}/len {len(v)} "
                    f"inconsistent with {spec}/{dims}/len {length}"
                )
        block = np.column_stack([v.values for v in vecs])
        try:
            block, lost = normalize_columns(block)
        except EmptyDictionaryError:
            raise EmptyClassError(label, f"class {label!r} has only zero-norm atoms") from None
        if lost:
            log.warning("class %r: dropped %d zero-norm atom(s) %s", label, len(lost), lost)
            dropped.extend((label, i) for i in lost)
        offsets.append((label, sum(c for _, _, c in offsets), block.shape[1]))
        columns.append(block)
    if length != feature_dim(spec, *dims):
        raise InvalidInputError(f"feature length {length} does not match {spec} on {dims}")
    return PartitionedDictionary(
        atoms=np.hstack(columns),
        class_offsets=tuple(offsets),
        feature_spec=spec,
        source_dims=dims,
        dropped=tuple(dropped),
    )


def dumps(d):
    """Serialize to SGD1 bytes."""
    spec = d.feature_spec
    parts = [
        _HEADER.pack(
            MAGIC,
            VERSION,
            d.m,
            d.n,
            len(d.class_offsets),
            _KIND_CODE[spec.kind],
            spec.cell_size,
            d.source_dims[0],
            d.source_dims[1],
        )
    ]
    for label, _, count in d.class_offsets:
        raw = label.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise InvalidInputError(f"label too long: {label[:20]!r}...")
        parts.append(struct.pack("<H", len(raw)) + raw + struct.pack("<I", count))
    parts.append(np.asarray(d.atoms, dtype="<f8").tobytes(order="F"))
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def loads(buf):
    """Parse SGD1 bytes produced by :func:`dumps`."""
    buf = bytes(buf)
    if len(buf) < _HEADER.size + 4:
        raise CorruptFileError("file too short for an SGD1 header")
    magic, version, m, n, n_cls, kind, cell, h, w = _HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise CorruptFileError(f"bad magic {magic!r}")
    if version != VERSION:
        raise CorruptFileError(f"unsupported version {version}")
    (crc,) = struct.unpack_from("<I", buf, len(buf) - 4)
    if zlib.crc32(buf[:-4]) != crc:
        raise CorruptFileError("CRC mismatch (file truncated or damaged)")
    if kind not in _CODE_KIND:
        raise CorruptFileError(f"unknown feature kind code {kind}")

    pos = _HEADER.size
    offsets = []
    start = 0
    try:
        for _ in range(n_cls):
            (ln,) = struct.unpack_from("<H", buf, pos)
            pos += 2
            label = buf[pos : pos + ln].decode("utf-8")
            if len(label.encode("utf-8")) != ln:
                raise CorruptFileError("label runs past end of file")
            pos += ln
            (count,) = struct.unpack_from("<I", buf, pos)
            pos += 4
            offsets.append((label, start, count))
            start += count
    except (struct.error, UnicodeDecodeError) as exc:
        raise CorruptFileError(f"malformed class table: {exc}") from None
    if pos + 8 * m * n + 4 != len(buf):
        raise CorruptFileError("atom payload size does not match header")

    try:
        spec = FeatureSpec(_CODE_KIND[kind], cell)
    except InvalidInputError as exc:
        raise IntegrityError(f"stored feature spec invalid: {exc}") from None
    if m != feature_dim(spec, h, w):
        raise IntegrityError(
            f"m={m} inconsistent with {spec.kind.value} k={cell} on {h}x{w} "
            f"(expected {feature_dim(spec, h, w)})"
        )
    if start != n:
        raise IntegrityError(f"class counts sum to {start}, header says n={n}")
    atoms = np.frombuffer(buf, dtype="<f8", count=m * n, offset=pos).reshape((m, n), order="F")
    try:
        return PartitionedDictionary(
            atoms=atoms.astype(float),
            class_offsets=tuple(offsets),
            feature_spec=spec,
            source_dims=(h, w),
        )
    except InvalidInputError as exc:
        raise IntegrityError(str(exc)) from None


def save_dictionary(d, path):
    with open(path, "wb") as fh:
        fh.write(dumps(d))


def load_dictionary(path):
    with open(path, "rb") as fh:
        return loads(fh.read())
