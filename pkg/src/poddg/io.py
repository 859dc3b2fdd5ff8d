"""On-disk formats: run configs (JSON), snapshot/basis binaries and CSV tables.

Snapshot file layout, all little-endian::

    b"PODSNAP1"                      8 bytes
    version   u32                    low 16 bits: format version (1);
                                     bit 16: a mean record precedes the others
    n_elems   u32
    degree    u32
    count     u32
    tags      f64 * records          sample times (basis files: 0 for the mean,
                                     then the eigenvalue of each mode)
    coeffs    f64 * records * n_elems * (degree + 1)
                                     record-major, then element, then mode
    checksum  u64                    sum of the tag and coefficient bytes mod 2**64

``records`` is ``count + 1`` when the mean flag is set and ``count`` otherwise.
"""

import csv
import json
import os
import struct
import tempfile
from dataclasses import dataclass

import jsonschema
import numpy as np

from .discretization import build_mesh
from .fom import FomConfig, n_steps_for
from .pod import PodBasis, SnapshotSet

__all__ = [
    "MAGIC",
    "FORMAT_VERSION",
    "FLAG_MEAN",
    "ConfigError",
    "SnapshotFormatError",
    "RunConfig",
    "load_config",
    "parse_config",
    "SnapshotRecord",
    "write_snapshots",
    "read_snapshots",
    "write_snapshot_set",
    "write_basis",
    "read_basis",
    "atomic_write",
    "write_csv",
]

MAGIC = b"PODSNAP1"
FORMAT_VERSION = 1
FLAG_MEAN = 1 << 16
_HEADER = struct.Struct("<8sIIII")
_CHECKSUM = struct.Struct("<Q")


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


class SnapshotFormatError(ValueError):
    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


CONFIG_SCHEMA = {
    "type": "object",
    "required": ["n_elems", "degree", "nu", "dt", "t_end", "ic", "snapshot_count"],
    "additionalProperties": False,
    "properties": {
        "domain": {
            "type": "object",
            "properties": {"x0": {"type": "number"}, "x1": {"type": "number"}},
            "additionalProperties": False,
        },
        "n_elems": {"type": "integer", "minimum": 2},
        "degree": {"type": "integer", "minimum": 0},
        "nu": {"type": "number", "minimum": 0},
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "t_end": {"type": "number", "exclusiveMinimum": 0},
        "ic": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["step", "gaussian"]},
                "params": {"type": "object", "additionalProperties": {"type": "number"}},
            },
        },
        "snapshot_count": {"type": "integer", "minimum": 2},
        "seed": {"type": "integer"},
    },
}


@dataclass(frozen=True)
class RunConfig:
    x0: float
    x1: float
    n_elems: int
    degree: int
    nu: float
    dt: float
    t_end: float
    ic_kind: str
    ic_params: dict
    snapshot_count: int
    seed: int = 0

    @property
    def n_steps(self):
        return n_steps_for(self.t_end, self.dt)

    @property
    def snapshot_stride(self):
        return self.n_steps // (self.snapshot_count - 1)

    @property
    def sample_steps(self):
        return self.snapshot_stride * np.arange(self.snapshot_count)

    @property
    def sample_times(self):
        return self.dt * self.sample_steps

    @property
    def mesh(self):
        return build_mesh(self.x0, self.x1, self.n_elems)

    def fom_config(self):
        return FomConfig(
            n_elems=self.n_elems,
            degree=self.degree,
            nu=self.nu,
            dt=self.dt,
            t_end=self.t_end,
            ic=self.ic_kind,
            ic_params=dict(self.ic_params),
            snapshot_stride=self.snapshot_stride,
            x0=self.x0,
            x1=self.x1,
        )


def parse_config(data):
    """Validate a decoded JSON config and return a :class:`RunConfig`."""
    try:
        jsonschema.validate(data, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config field '{path}': {exc.message}") from None
    domain = data.get("domain", {})
    x0, x1 = float(domain.get("x0", 0.0)), float(domain.get("x1", 1.0))
    if not x1 > x0:
        raise ConfigError("config field 'domain': x1 must exceed x0")
    if data["nu"] > 0 and data["degree"] < 1:
        raise ConfigError("config field 'degree': diffusion needs degree >= 1")
    try:
        m = n_steps_for(data["t_end"], data["dt"])
    except ValueError as exc:
        raise ConfigError(f"config field 'dt': {exc}") from None
    count = data["snapshot_count"]
    if m % (count - 1):
        raise ConfigError(
            f"config field 'snapshot_count': {count - 1} intervals do not divide {m} steps"
        )
    ic = data["ic"]
    return RunConfig(
        x0=x0,
        x1=x1,
        n_elems=data["n_elems"],
        degree=data["degree"],
        nu=float(data["nu"]),
        dt=float(data["dt"]),
        t_end=float(data["t_end"]),
        ic_kind=ic["kind"],
        ic_params=dict(ic.get("params", {})),
        snapshot_count=count,
        seed=data.get("seed", 0),
    )


def load_config(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return parse_config(data)


def atomic_write(path, data, mode="wb"):
    """Write via a temporary file in the target directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _checksum(payload):
    return int(np.frombuffer(payload, dtype=np.uint8).sum(dtype=np.uint64))


def encode_snapshots(coeffs, tags, mean=None):
    coeffs = np.ascontiguousarray(coeffs, dtype="<f8")
    count, n_elems, nmodes = coeffs.shape
    tags = np.asarray(tags, dtype="<f8")
    version = FORMAT_VERSION
    if mean is not None:
        version |= FLAG_MEAN
        coeffs = np.concatenate([np.asarray(mean, dtype="<f8")[None], coeffs])
    if tags.shape != (coeffs.shape[0],):
        raise ValueError(f"need {coeffs.shape[0]} tags, got {tags.shape}")
    payload = tags.tobytes() + coeffs.tobytes()
    header = _HEADER.pack(MAGIC, version, n_elems, nmodes - 1, count)
    return header + payload + _CHECKSUM.pack(_checksum(payload))


@dataclass
class SnapshotRecord:
    n_elems: int
    degree: int
    tags: np.ndarray
    coeffs: np.ndarray
    mean: np.ndarray = None

    @property
    def count(self):
        return self.coeffs.shape[0]


def decode_snapshots(blob):
    if len(blob) < _HEADER.size + _CHECKSUM.size:
        raise SnapshotFormatError(f"file too short ({len(blob)} bytes)", offset=len(blob))
    magic, version, n_elems, degree, count = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise SnapshotFormatError(f"bad magic {magic!r}", offset=0)
    if version & 0xFFFF != FORMAT_VERSION:
        raise SnapshotFormatError(f"unsupported format version {version & 0xFFFF}", offset=8)
    has_mean = bool(version & FLAG_MEAN)
    records = count + has_mean
    rec_len = n_elems * (degree + 1)
    expected = _HEADER.size + 8 * records * (1 + rec_len) + _CHECKSUM.size
    if len(blob) != expected:
        raise SnapshotFormatError(
            f"file is {len(blob)} bytes but the header implies {expected}",
            offset=min(len(blob), expected),
        )
    end = len(blob) - _CHECKSUM.size
    payload = blob[_HEADER.size : end]
    (stored,) = _CHECKSUM.unpack_from(blob, end)
    computed = _checksum(payload)
    if stored != computed:
        raise SnapshotFormatError(
            f"checksum mismatch at byte offset {end}: stored {stored}, computed {computed}",
            offset=end,
        )
    tags = np.frombuffer(payload, dtype="<f8", count=records).astype(float)
    coeffs = (
        np.frombuffer(payload, dtype="<f8", offset=8 * records)
        .astype(float)
        .reshape(records, n_elems, degree + 1)
    )
    mean = None
    if has_mean:
        mean, coeffs, tags = coeffs[0], coeffs[1:], tags
    return SnapshotRecord(n_elems, degree, tags, coeffs, mean)


def write_snapshots(path, coeffs, times, mean=None):
    atomic_write(path, encode_snapshots(coeffs, times, mean))


def read_snapshots(path):
    with open(path, "rb") as fh:
        return decode_snapshots(fh.read())


def write_snapshot_set(path, snaps):
    write_snapshots(path, snaps.coeffs, snaps.times)


def snapshot_set_from_record(rec, x0=0.0, x1=1.0):
    if rec.mean is not None:
        raise SnapshotFormatError("file holds a POD basis, not snapshots")
    mesh = build_mesh(x0, x1, rec.n_elems)
    return SnapshotSet(mesh, rec.degree, rec.coeffs, rec.tags)


def write_basis(path, basis):
    """Basis file: mean as record 0 (flagged), then the modes tagged with their eigenvalues."""
    tags = np.concatenate([[0.0], basis.eigenvalues[: basis.r]])
    write_snapshots(path, basis.modes, tags, mean=basis.mean.coeffs)


def read_basis(path, x0=0.0, x1=1.0):
    from .discretization import FeField

    rec = read_snapshots(path)
    if rec.mean is None:
        raise SnapshotFormatError("file has no mean record; not a basis file", offset=8)
    mesh = build_mesh(x0, x1, rec.n_elems)
    mean = FeField(mesh, rec.degree, rec.mean)
    return PodBasis(mesh, rec.degree, rec.coeffs, rec.tags[1:].copy(), mean)


def write_csv(path, header, rows):
    """Atomically write a CSV with full float precision."""
    import io as _io

    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    atomic_write(path, buf.getvalue(), mode="w")
