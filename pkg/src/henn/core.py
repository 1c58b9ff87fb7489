"""Point storage, distance metrics, the brute-force oracle, and dataset I/O.

Vectors are stored as float32 rows (parity with hnswlib-class systems);
the exact-scan oracle always computes in float64. File formats: texmex
fvecs/ivecs (4-byte little-endian dimension header per record) and an
internal "HENNPTS1" dump (u32 n, u32 d, raw f32 data).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import FormatError

POINTS_MAGIC = b"HENNPTS1"


@dataclass(frozen=True)
class Metric:
    """Distance function tag: "l2", "lp" (with exponent p > 0), or "cosine".

    Cosine assumes unit-normalized rows and measures 1 - dot(a, b);
    normalize datasets at load and queries at entry (`prepare_query`).
    """

    kind: str
    p: float = 2.0

    def __post_init__(self):
        if self.kind not in ("l2", "lp", "cosine"):
            raise ValueError(f"unknown metric kind: {self.kind!r}")
        if self.kind == "lp" and not self.p > 0:
            raise ValueError("lp metric requires p > 0")

    @staticmethod
    def l2() -> "Metric":
        return Metric("l2")

    @staticmethod
    def lp(p: float) -> "Metric":
        return Metric("lp", p=p)

    @staticmethod
    def cosine() -> "Metric":
        return Metric("cosine")

    def prepare_query(self, q: np.ndarray) -> np.ndarray:
        """Return q ready for this metric (unit-normalized for cosine)."""
        q = np.asarray(q, dtype=np.float32).reshape(-1)
        if self.kind == "cosine":
            return unit_normalize(q[None, :])[0]
        return q

    def __str__(self) -> str:
        return f"lp:{self.p:g}" if self.kind == "lp" else self.kind


def unit_normalize(data: np.ndarray) -> np.ndarray:
    """Scale each row to unit L2 norm. Zero rows are rejected."""
    data = np.asarray(data, dtype=np.float32)
    norms = np.linalg.norm(data.astype(np.float64), axis=-1, keepdims=True)
    if np.any(norms == 0.0):
        raise ValueError("cannot unit-normalize a zero vector")
    return (data / norms).astype(np.float32)


class PointSet:
    """Append-only set of n points in d dimensions, ids 0..n-1.

    Rows are immutable once written; `data` is a read-only view of the
    filled prefix, so concurrent readers are safe. Appends (used by
    dynamic index updates) must be externally serialized.
    """

    def __init__(self, data: np.ndarray, copy: bool = True):
        arr = np.asarray(data, dtype=np.float32)
        if arr.ndim != 2:
            raise ValueError("point data must be a 2-d array")
        n, d = arr.shape
        if n < 1 or d < 1:
            raise ValueError("point set requires n >= 1 and d >= 1")
        if not np.all(np.isfinite(arr)):
            raise ValueError("point coordinates must be finite")
        self._buf = arr.copy() if copy else arr
        self._n = n

    @staticmethod
    def empty(d: int) -> "PointSet":
        """An empty store of dimension d, for bootstrapping dynamic indexes."""
        if d < 1:
            raise ValueError("point set requires d >= 1")
        ps = PointSet.__new__(PointSet)
        ps._buf = np.empty((0, d), dtype=np.float32)
        ps._n = 0
        return ps

    @property
    def n(self) -> int:
        return self._n

    @property
    def d(self) -> int:
        return self._buf.shape[1]

    @property
    def data(self) -> np.ndarray:
        view = self._buf[: self._n]
        view.flags.writeable = False
        return view

    def append(self, x: np.ndarray) -> int:
        """Add one point, growing the backing buffer amortized. Returns its id."""
        x = np.asarray(x, dtype=np.float32).reshape(-1)
        if x.shape[0] != self.d:
            raise ValueError(f"dimension mismatch: expected {self.d}, got {x.shape[0]}")
        if not np.all(np.isfinite(x)):
            raise ValueError("point coordinates must be finite")
        if self._n == self._buf.shape[0]:
            grown = np.empty((max(4, 2 * self._buf.shape[0]), self.d), dtype=np.float32)
            grown[: self._n] = self._buf[: self._n]
            self._buf = grown
        self._buf[self._n] = x
        self._n += 1
        return self._n - 1

    def __len__(self) -> int:
        return self._n


def distance(metric: Metric, a: np.ndarray, b: np.ndarray) -> float:
    """Distance between two points, computed in float64."""
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    if metric.kind == "l2":
        return float(np.sqrt(np.sum((a - b) ** 2)))
    if metric.kind == "lp":
        return float(np.sum(np.abs(a - b) ** metric.p) ** (1.0 / metric.p))
    return float(1.0 - np.dot(a, b))


def point_distances(metric: Metric, rows: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Distances from every row to q, in the dtype of the inputs (search hot path)."""
    if rows.shape[-1] != q.shape[-1]:
        raise ValueError(f"dimension mismatch: {rows.shape[-1]} vs {q.shape[-1]}")
    if metric.kind == "l2":
        diff = rows - q
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))
    if metric.kind == "lp":
        return np.sum(np.abs(rows - q) ** metric.p, axis=1) ** (1.0 / metric.p)
    return 1.0 - rows @ q


def pairwise_distances(metric: Metric, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full (|a|, |b|) distance matrix in float64 (oracle precision)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    if metric.kind == "l2":
        aa = np.sum(a * a, axis=1)[:, None]
        bb = np.sum(b * b, axis=1)[None, :]
        d2 = aa + bb - 2.0 * (a @ b.T)
        np.clip(d2, 0.0, None, out=d2)
        return np.sqrt(d2)
    if metric.kind == "cosine":
        return 1.0 - a @ b.T
    out = np.empty((a.shape[0], b.shape[0]), dtype=np.float64)
    block = max(1, (1 << 22) // max(1, b.shape[0] * b.shape[1]))
    for lo in range(0, a.shape[0], block):
        hi = min(lo + block, a.shape[0])
        diff = np.abs(a[lo:hi, None, :] - b[None, :, :])
        out[lo:hi] = np.sum(diff**metric.p, axis=2) ** (1.0 / metric.p)
    return out


def brute_force_knn(
    ps: PointSet, q: np.ndarray, k: int, metric: Metric
) -> tuple[np.ndarray, np.ndarray]:
    """Exact k nearest ids by full scan, tie-broken by ascending id.

    Returns (ids, dists), dists nondecreasing, float64 throughout.
    """
    if not 1 <= k <= ps.n:
        raise ValueError(f"k must be in [1, {ps.n}], got {k}")
    q64 = np.asarray(q, dtype=np.float64).reshape(-1)
    if q64.shape[0] != ps.d:
        raise ValueError(f"dimension mismatch: expected {ps.d}, got {q64.shape[0]}")
    dists = point_distances(metric, ps.data.astype(np.float64), q64)
    order = np.lexsort((np.arange(ps.n), dists))[:k]
    return order.astype(np.int64), dists[order]


def ground_truth_knn(
    ps: PointSet, queries: np.ndarray, k: int, metric: Metric, block: int = 64
) -> np.ndarray:
    """Exact k-NN ids for a batch of queries; shape (nq, k), spec tie rule."""
    if not 1 <= k <= ps.n:
        raise ValueError(f"k must be in [1, {ps.n}], got {k}")
    queries = np.asarray(queries, dtype=np.float64)
    out = np.empty((queries.shape[0], k), dtype=np.int64)
    base = ps.data.astype(np.float64)
    for lo in range(0, queries.shape[0], block):
        hi = min(lo + block, queries.shape[0])
        d = pairwise_distances(metric, queries[lo:hi], base)
        out[lo:hi] = np.argsort(d, axis=1, kind="stable")[:, :k]
    return out


def _read_vecs(path: str, dtype: np.dtype, elem_size: int) -> np.ndarray:
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) == 0:
        raise FormatError(f"empty file: {path}", 0)
    if len(raw) < 4:
        raise FormatError(f"truncated dimension header in {path}", 0)
    d = int(np.frombuffer(raw, dtype="<i4", count=1)[0])
    if d < 1:
        raise FormatError(f"invalid dimension {d} in {path}", 0)
    rec = 4 + d * elem_size
    if len(raw) % rec == 0:
        count = len(raw) // rec
        headers = np.frombuffer(raw, dtype="<i4").reshape(count, rec // 4)[:, 0]
        if np.all(headers == d):
            body = np.frombuffer(raw, dtype=dtype).reshape(count, rec // elem_size)
            skip = 4 // elem_size
            return body[:, skip:].copy()
    # damaged file: walk records to name the failing offset
    off = 0
    while off < len(raw):
        if len(raw) - off < 4:
            raise FormatError(f"truncated dimension header in {path}", off)
        d_i = int(np.frombuffer(raw, dtype="<i4", count=1, offset=off)[0])
        if d_i != d:
            raise FormatError(f"inconsistent dimension {d_i} != {d} in {path}", off)
        if len(raw) - off < rec:
            raise FormatError(f"truncated record in {path}", off)
        off += rec
    raise FormatError(f"malformed file: {path}", off)


def load_fvecs(path: str) -> PointSet:
    """Read an fvecs file (little-endian i32 dim header + f32 values per record)."""
    return PointSet(_read_vecs(path, np.dtype("<f4"), 4), copy=False)


def load_ivecs(path: str) -> np.ndarray:
    """Read an ivecs file into an (n, d) int array (ground-truth id lists)."""
    return _read_vecs(path, np.dtype("<i4"), 4).astype(np.int64)


def save_fvecs(path: str, data: np.ndarray) -> None:
    """Write rows in fvecs format (bit-exact round trip with load_fvecs)."""
    data = np.asarray(data, dtype=np.float32)
    n, d = data.shape
    rec = np.empty((n, d + 1), dtype=np.float32)
    rec[:, 0] = np.full(n, d, dtype=np.int32).view(np.float32)
    rec[:, 1:] = data
    with open(path, "wb") as f:
        rec.astype("<f4").tofile(f)


def save_ivecs(path: str, data: np.ndarray) -> None:
    """Write id rows in ivecs format."""
    data = np.asarray(data, dtype=np.int32)
    n, d = data.shape
    rec = np.empty((n, d + 1), dtype=np.int32)
    rec[:, 0] = d
    rec[:, 1:] = data
    with open(path, "wb") as f:
        rec.astype("<i4").tofile(f)


def save_points(ps: PointSet, path: str) -> None:
    """Write the internal point dump: magic, u32 n, u32 d, f32 row data."""
    with open(path, "wb") as f:
        f.write(POINTS_MAGIC)
        f.write(np.array([ps.n, ps.d], dtype="<u4").tobytes())
        f.write(np.ascontiguousarray(ps.data, dtype="<f4").tobytes())


def load_points(path: str) -> PointSet:
    """Read a "HENNPTS1" dump written by save_points."""
    size = os.path.getsize(path)
    with open(path, "rb") as f:
        magic = f.read(8)
        if magic != POINTS_MAGIC:
            raise FormatError(f"bad magic in {path}", 0)
        header = f.read(8)
        if len(header) < 8:
            raise FormatError(f"truncated header in {path}", 8)
        n, d = np.frombuffer(header, dtype="<u4")
        expected = 16 + int(n) * int(d) * 4
        if size != expected:
            raise FormatError(
                f"truncated data in {path}: expected {expected} bytes, have {size}",
                min(size, expected),
            )
        data = np.fromfile(f, dtype="<f4", count=int(n) * int(d))
    return PointSet(data.reshape(int(n), int(d)), copy=False)
