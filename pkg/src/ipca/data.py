"""Dataset records, manifest ingestion and deterministic subsampling.

A dataset is one sample (e.g. one patient) stored as a ``d x n`` array, one
column per observed cell.  Files on disk are observation-per-row CSV and are
transposed on load.
"""

import csv
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class IngestionError(ValueError):
    """Raised when a manifest or data file cannot be turned into a collection."""


class ChannelMismatchError(IngestionError):
    pass


@dataclass(frozen=True)
class Dataset:
    id: str
    channels: tuple
    points: np.ndarray = field(repr=False)
    label: str | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(1, -1)
        if pts.ndim != 2:
            raise ValueError(f"dataset {self.id!r}: points must be 2-D (d x n), got ndim={pts.ndim}")
        d, n = pts.shape
        if d < 1 or n < 1:
            raise ValueError(f"dataset {self.id!r}: need d >= 1 and n >= 1, got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError(f"dataset {self.id!r}: non-finite values")
        channels = tuple(str(c) for c in self.channels)
        if len(channels) != d:
            raise ValueError(f"dataset {self.id!r}: {len(channels)} channel names for d={d}")
        if len(set(channels)) != d:
            raise ValueError(f"dataset {self.id!r}: duplicate channel names")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "channels", channels)

    @property
    def d(self):
        return self.points.shape[0]

    @property
    def n(self):
        return self.points.shape[1]

    def with_points(self, points, channels=None):
        return Dataset(self.id, self.channels if channels is None else channels, points, self.label)


@dataclass(frozen=True)
class DatasetCollection:
    datasets: tuple
    channels: tuple = None

    def __post_init__(self):
        datasets = tuple(self.datasets)
        if len(datasets) < 2:
            raise IngestionError(f"a collection needs N >= 2 datasets, got {len(datasets)}")
        channels = datasets[0].channels if self.channels is None else tuple(self.channels)
        for ds in datasets:
            if ds.channels != channels:
                raise ChannelMismatchError(
                    f"dataset {ds.id!r} has channels {list(ds.channels)}, expected {list(channels)}"
                )
        ids = [ds.id for ds in datasets]
        if len(set(ids)) != len(ids):
            raise IngestionError("dataset ids must be unique")
        object.__setattr__(self, "datasets", datasets)
        object.__setattr__(self, "channels", channels)

    def __len__(self):
        return len(self.datasets)

    def __iter__(self):
        return iter(self.datasets)

    def __getitem__(self, i):
        return self.datasets[i]

    @property
    def d(self):
        return len(self.channels)

    @property
    def ids(self):
        return [ds.id for ds in self.datasets]

    @property
    def labels(self):
        return [ds.label for ds in self.datasets]

    @property
    def point_sets(self):
        """List of the ``d x n_i`` arrays, in collection order."""
        return [ds.points for ds in self.datasets]

    def project(self, A, channel_prefix="ipc"):
        """Return the collection mapped through ``A`` (``m x d``)."""
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[1] != self.d:
            raise ValueError(f"projection of shape {A.shape} does not match d={self.d}")
        names = tuple(f"{channel_prefix}{k + 1}" for k in range(A.shape[0]))
        return DatasetCollection(tuple(ds.with_points(A @ ds.points, names) for ds in self.datasets))


def _read_csv(path, channels):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise IngestionError(f"{path}: empty file") from None
        if tuple(header) != tuple(channels):
            raise ChannelMismatchError(f"{path}: header {header} does not match manifest channels {list(channels)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(channels):
                raise IngestionError(f"{path}: row {lineno} has {len(row)} fields, expected {len(channels)}")
            values = []
            for col, cell in enumerate(row):
                try:
                    v = float(cell)
                except ValueError:
                    raise IngestionError(
                        f"{path}: row {lineno}, column {header[col]!r}: non-numeric value {cell!r}"
                    ) from None
                if not math.isfinite(v):
                    raise IngestionError(f"{path}: row {lineno}, column {header[col]!r}: non-finite value {cell!r}")
                values.append(v)
            rows.append(values)
    if not rows:
        raise IngestionError(f"{path}: no data rows")
    return np.array(rows, dtype=float).T


def load_collection(manifest_path):
    """Load a :class:`DatasetCollection` from a JSON manifest.

    The manifest has ``channels`` (list of names) and ``datasets`` (objects
    with ``id``, ``path`` relative to the manifest, optional ``label``).
    """
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise IngestionError(f"{manifest_path}: manifest not found")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise IngestionError(f"{manifest_path}: invalid JSON ({exc})") from None
    try:
        channels = tuple(manifest["channels"])
        entries = manifest["datasets"]
    except (KeyError, TypeError):
        raise IngestionError(f"{manifest_path}: manifest needs 'channels' and 'datasets'") from None
    if len(entries) < 2:
        raise IngestionError(f"{manifest_path}: a collection needs N >= 2 datasets, got {len(entries)}")
    base = manifest_path.parent
    datasets = []
    for entry in entries:
        path = base / entry["path"]
        if not path.is_file():
            raise IngestionError(f"{path}: data file not found")
        datasets.append(Dataset(str(entry["id"]), channels, _read_csv(path, channels), entry.get("label")))
    return DatasetCollection(tuple(datasets), channels)


def save_collection(collection, directory, manifest_name="manifest.json"):
    """Write ``collection`` as a manifest plus one CSV per dataset; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for ds in collection:
        fname = f"{ds.id}.csv"
        rows = [",".join(repr(float(v)) for v in col) for col in ds.points.T]
        atomic_write_text(directory / fname, ",".join(ds.channels) + "\n" + "\n".join(rows) + "\n")
        entry = {"id": ds.id, "path": fname}
        if ds.label is not None:
            entry["label"] = ds.label
        entries.append(entry)
    manifest = {"channels": list(collection.channels), "datasets": entries}
    out = directory / manifest_name
    atomic_write_text(out, json.dumps(manifest, indent=2) + "\n")
    return out


def subsample(ds, target_n, seed):
    """Uniformly sample ``target_n`` distinct columns of ``ds`` (no-op if ``n <= target_n``)."""
    if target_n < 1:
        raise ValueError(f"target_n must be >= 1, got {target_n}")
    if ds.n <= target_n:
        return ds
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(ds.n, size=target_n, replace=False))
    return ds.with_points(ds.points[:, idx])


def subsample_collection(collection, target_n, seed):
    seeds = np.random.SeedSequence(seed).spawn(len(collection))
    return DatasetCollection(
        tuple(subsample(ds, target_n, s) for ds, s in zip(collection, seeds)), collection.channels
    )


def atomic_write_text(path, text):
    # temp file in the same directory so the rename stays on one filesystem
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp{os.getpid()}")
    try:
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()
