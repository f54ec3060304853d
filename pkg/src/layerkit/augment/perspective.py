"""Perspective augmentation: corner perturbation, homography solve, warp."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateQuadError, InvalidArgumentError
from .piece import ForegroundPiece

RHO_RANGE = (0.1, 0.3)


@dataclass(frozen=True)
class Homography:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.shape != (3, 3):
            raise InvalidArgumentError("homography must be 3x3")
        if abs(np.linalg.det(m)) <= 1e-9:
            raise DegenerateQuadError("homography is singular")
        m = m / m[2, 2]
        object.__setattr__(self, "matrix", m)

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        homo = np.concatenate([pts, np.ones((pts.shape[0], 1))], axis=1)
        mapped = homo @ self.matrix.T
        return mapped[:, :2] / mapped[:, 2:3]

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.matrix))


@dataclass(frozen=True)
class PerspectiveRecord:
    rho: float
    deltas: tuple  # four (dx, dy) corner displacements before clipping

    def to_json(self) -> dict:
        return {"rho": self.rho, "deltas": [list(d) for d in self.deltas]}

    @classmethod
    def from_json(cls, data: dict) -> "PerspectiveRecord":
        return cls(rho=float(data["rho"]), deltas=tuple(tuple(map(float, d)) for d in data["deltas"]))


def corner_points(w: int, h: int) -> np.ndarray:
    return np.array([(0.0, 0.0), (w, 0.0), (w, h), (0.0, h)])


def sample_perspective_record(w: int, h: int, rng: np.random.Generator) -> PerspectiveRecord:
    rho = float(rng.uniform(*RHO_RANGE))
    dx_max, dy_max = w * rho, h * rho
    deltas = tuple(
        (float(rng.uniform(-dx_max, dx_max)), float(rng.uniform(-dy_max, dy_max))) for _ in range(4)
    )
    return PerspectiveRecord(rho=rho, deltas=deltas)


def perspective_points(w: int, h: int, record: PerspectiveRecord) -> tuple[np.ndarray, np.ndarray]:
    src = corner_points(w, h)
    dst = src + np.asarray(record.deltas, dtype=np.float64)
    dst[:, 0] = np.clip(dst[:, 0], 0.0, w)
    dst[:, 1] = np.clip(dst[:, 1], 0.0, h)
    return src, dst


def sample_perspective(w: int, h: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Perturbed destination corners for a w x h box, clipped in-bounds."""
    if w < 2 or h < 2:
        raise InvalidArgumentError("box must be at least 2x2")
    return perspective_points(w, h, sample_perspective_record(w, h, rng))


def _check_not_collinear(points: np.ndarray, label: str) -> None:
    for skip in range(4):
        idx = [i for i in range(4) if i != skip]
        a, b, c = points[idx]
        cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if abs(cross) < 1e-9:
            raise DegenerateQuadError(f"three {label} points are collinear")


def solve_homography(p_src: np.ndarray, p_dst: np.ndarray) -> Homography:
    """Exact 4-point homography via the standard 8x8 linear system.

    Solved by LAPACK's partial-pivoting elimination (np.linalg.solve);
    degenerate quads raise.
    """
    src = np.asarray(p_src, dtype=np.float64).reshape(4, 2)
    dst = np.asarray(p_dst, dtype=np.float64).reshape(4, 2)
    _check_not_collinear(src, "source")
    _check_not_collinear(dst, "destination")
    A = np.zeros((8, 8))
    b = np.zeros(8)
    for i, ((x, y), (u, v)) in enumerate(zip(src, dst)):
        A[2 * i] = [x, y, 1, 0, 0, 0, -x * u, -y * u]
        b[2 * i] = u
        A[2 * i + 1] = [0, 0, 0, x, y, 1, -x * v, -y * v]
        b[2 * i + 1] = v
    try:
        coeffs = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as err:
        raise DegenerateQuadError(str(err)) from err
    matrix = np.append(coeffs, 1.0).reshape(3, 3)
    return Homography(matrix)


def warp(piece: ForegroundPiece, homography: Homography) -> ForegroundPiece:
    """Warp image (bilinear) and mask (nearest) onto the same-size canvas.

    Inverse mapping avoids holes; pixels mapping outside the source are
    transparent.  Coordinates are box coordinates: pixel (i, j) has its
    center at (j + 0.5, i + 0.5).
    """
    h, w = piece.size
    inv = homography.inverse().matrix
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    px, py = xs + 0.5, ys + 0.5
    denom = inv[2, 0] * px + inv[2, 1] * py + inv[2, 2]
    sx = (inv[0, 0] * px + inv[0, 1] * py + inv[0, 2]) / denom - 0.5
    sy = (inv[1, 0] * px + inv[1, 1] * py + inv[1, 2]) / denom - 0.5

    inside = (sx >= -0.5) & (sx <= w - 0.5) & (sy >= -0.5) & (sy <= h - 0.5)
    cx = np.clip(sx, 0, w - 1)
    cy = np.clip(sy, 0, h - 1)
    x0 = np.floor(cx).astype(int)
    y0 = np.floor(cy).astype(int)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (cx - x0)[..., None]
    fy = (cy - y0)[..., None]
    img = piece.image
    warped = (
        img[y0, x0] * (1 - fx) * (1 - fy)
        + img[y0, x1] * fx * (1 - fy)
        + img[y1, x0] * (1 - fx) * fy
        + img[y1, x1] * fx * fy
    )
    warped[~inside] = 0.0

    nx = np.clip(np.round(sx), 0, w - 1).astype(int)
    ny = np.clip(np.round(sy), 0, h - 1).astype(int)
    mask = np.where(inside, piece.mask[ny, nx], 0.0)
    if mask.sum() == 0:
        raise DegenerateQuadError("warp pushed the whole mask out of frame")
    return piece.with_rasters(warped, mask)


def perspective_aug(piece: ForegroundPiece, rng: np.random.Generator) -> tuple[ForegroundPiece, PerspectiveRecord]:
    h, w = piece.size
    record = sample_perspective_record(w, h, rng)
    return apply_perspective(piece, record), record


def apply_perspective(piece: ForegroundPiece, record: PerspectiveRecord) -> ForegroundPiece:
    h, w = piece.size
    src, dst = perspective_points(w, h, record)
    return warp(piece, solve_homography(src, dst))
