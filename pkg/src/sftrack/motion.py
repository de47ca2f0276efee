"""Camera motion estimation and ratio-preserving track compensation.

Per frame pair, corner features are detected on the previous frame
(minimum-eigenvalue response), tracked to the current frame with pyramidal
Lucas-Kanade, and a robust affine fit recovers the global transform. Before
it touches any track the transform is re-scaled to use one uniform scale
factor, the larger of its x/y factors, so box aspect ratios survive
compensation unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .kalman import KalmanState

_LUMA = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True, eq=False)
class AffineTransform2D:
    """2x2 linear part plus translation: p -> linear @ p + translation."""

    linear: np.ndarray
    translation: np.ndarray

    @staticmethod
    def identity() -> "AffineTransform2D":
        return AffineTransform2D(np.eye(2), np.zeros(2))

    @staticmethod
    def similarity(scale: float, rotation_rad: float, translation,
                   center=(0.0, 0.0)) -> "AffineTransform2D":
        """Scale+rotation about ``center`` followed by ``translation``."""
        c, s = np.cos(rotation_rad), np.sin(rotation_rad)
        a = scale * np.array([[c, -s], [s, c]])
        center = np.asarray(center, dtype=float)
        t = np.asarray(translation, dtype=float) + center - a @ center
        return AffineTransform2D(a, t)

    @property
    def scale_x(self) -> float:
        return float(np.linalg.norm(self.linear[:, 0]))

    @property
    def scale_y(self) -> float:
        return float(np.linalg.norm(self.linear[:, 1]))

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return pts @ self.linear.T + self.translation

    def compose(self, inner: "AffineTransform2D") -> "AffineTransform2D":
        """self after inner: (self o inner)(p) = self(inner(p))."""
        return AffineTransform2D(self.linear @ inner.linear,
                                 self.linear @ inner.translation + self.translation)

    def inverse(self) -> "AffineTransform2D":
        inv = np.linalg.inv(self.linear)
        return AffineTransform2D(inv, -inv @ self.translation)

    def is_identity(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.linear - np.eye(2)) <= tol)
                    and np.all(np.abs(self.translation) <= tol))


@dataclass
class FeatureTrackResult:
    prev_points: np.ndarray  # (N, 2)
    cur_points: np.ndarray   # (N, 2)
    status: np.ndarray       # (N,) bool

    def matched_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        return self.prev_points[self.status], self.cur_points[self.status]


def rgb_to_gray(image: np.ndarray) -> np.ndarray:
    """ITU-R 601 luma, rounded to the nearest integer, uint8."""
    if image.ndim == 2:
        return image.astype(np.uint8, copy=False)
    return np.rint(image.astype(np.float64) @ _LUMA).clip(0, 255).astype(np.uint8)


def downscale(gray: np.ndarray, factor: int) -> np.ndarray:
    """Box-average downsampling; trailing rows/cols beyond a multiple of
    ``factor`` are cropped."""
    if factor == 1:
        return gray.astype(np.float64)
    h, w = gray.shape
    h2, w2 = h // factor, w // factor
    cropped = gray[:h2 * factor, :w2 * factor].astype(np.float64)
    return cropped.reshape(h2, factor, w2, factor).mean(axis=(1, 3))


# ---------------------------------------------------------------------------
# Corner detection (minimum eigenvalue of the structure tensor)

def detect_features(image: np.ndarray, max_count: int = 200, quality: float = 0.01,
                    min_distance: float = 8.0, block_size: int = 3) -> np.ndarray:
    """Corner points (x, y) ranked by minimum-eigenvalue response.

    No two returned points are closer than ``min_distance``; at most
    ``max_count`` points come back. A flat image yields an empty array.
    """
    if image.size == 0:
        raise ValueError("empty image")
    img = image.astype(np.float64)
    if img.ndim == 3:
        img = img @ _LUMA
    gx = ndimage.sobel(img, axis=1, mode="nearest") / 8.0
    gy = ndimage.sobel(img, axis=0, mode="nearest") / 8.0
    sxx = ndimage.uniform_filter(gx * gx, block_size, mode="nearest")
    syy = ndimage.uniform_filter(gy * gy, block_size, mode="nearest")
    sxy = ndimage.uniform_filter(gx * gy, block_size, mode="nearest")
    trace = sxx + syy
    diff = sxx - syy
    response = 0.5 * (trace - np.sqrt(diff * diff + 4.0 * sxy * sxy))

    border = max(2, block_size // 2 + 1)
    mask = np.zeros_like(response, dtype=bool)
    mask[border:-border, border:-border] = True
    peak = float(response.max(initial=0.0, where=mask)) if mask.any() else 0.0
    if peak <= 0.0:
        return np.empty((0, 2))
    local_max = response == ndimage.maximum_filter(response, size=3, mode="nearest")
    candidate = mask & local_max & (response >= quality * peak)
    ys, xs = np.nonzero(candidate)
    if xs.size == 0:
        return np.empty((0, 2))
    order = np.argsort(-response[ys, xs], kind="stable")
    xs, ys = xs[order], ys[order]

    # Greedy suppression in response order; a cell grid of size min_distance
    # keeps the neighbor checks local.
    selected: list[tuple[float, float]] = []
    cell = max(min_distance, 1.0)
    buckets: dict[tuple[int, int], list[tuple[float, float]]] = {}
    min_d2 = min_distance * min_distance
    for x, y in zip(xs, ys):
        cx, cy = int(x / cell), int(y / cell)
        ok = True
        for bx in (cx - 1, cx, cx + 1):
            for by in (cy - 1, cy, cy + 1):
                for sx_, sy_ in buckets.get((bx, by), ()):
                    dx, dy = x - sx_, y - sy_
                    if dx * dx + dy * dy < min_d2:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            selected.append((float(x), float(y)))
            buckets.setdefault((cx, cy), []).append((float(x), float(y)))
            if len(selected) >= max_count:
                break
    return np.array(selected, dtype=float) if selected else np.empty((0, 2))


# ---------------------------------------------------------------------------
# Pyramidal Lucas-Kanade

def _pyramid(img: np.ndarray, levels: int) -> list[np.ndarray]:
    kernel = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0
    pyr = [img.astype(np.float64)]
    for _ in range(levels - 1):
        blurred = ndimage.convolve1d(pyr[-1], kernel, axis=0, mode="nearest")
        blurred = ndimage.convolve1d(blurred, kernel, axis=1, mode="nearest")
        pyr.append(blurred[::2, ::2])
    return pyr


def _sample_windows(img: np.ndarray, centers: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Bilinear samples of (N,) center points at (W,W) offsets -> (N, W, W)."""
    h, w = img.shape
    px = centers[:, 0][:, None, None] + offsets[None, :, :, 0]
    py = centers[:, 1][:, None, None] + offsets[None, :, :, 1]
    px = np.clip(px, 0.0, w - 1.001)
    py = np.clip(py, 0.0, h - 1.001)
    x0 = px.astype(int)
    y0 = py.astype(int)
    fx = px - x0
    fy = py - y0
    top = img[y0, x0] * (1 - fx) + img[y0, x0 + 1] * fx
    bot = img[y0 + 1, x0] * (1 - fx) + img[y0 + 1, x0 + 1] * fx
    return top * (1 - fy) + bot * fy


def track_features(prev: np.ndarray, cur: np.ndarray, points: np.ndarray,
                   window: int = 21, levels: int = 3, max_iterations: int = 30,
                   epsilon: float = 0.01, max_residual: float = 25.0,
                   min_eig_threshold: float = 1e-3,
                   fb_threshold: float | None = 1.0) -> FeatureTrackResult:
    """Pyramidal coarse-to-fine Lucas-Kanade refinement of sparse points.

    Status goes false when the point exits the image, its spatial-gradient
    matrix is near singular, the iteration diverges, or the final mean
    absolute residual exceeds ``max_residual`` intensity levels. Surviving
    points are re-tracked backwards and dropped when the round trip misses
    the start by more than ``fb_threshold`` pixels (None disables).
    """
    if prev.shape != cur.shape:
        raise ValueError(f"frame shapes differ: {prev.shape} vs {cur.shape}")
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(points)
    if n == 0:
        return FeatureTrackResult(points, points.copy(), np.zeros(0, dtype=bool))

    prev_pyr = _pyramid(prev, levels)
    cur_pyr = _pyramid(cur, levels)
    flow, alive = _pyramidal_lk(prev_pyr, cur_pyr, points, None, window,
                                max_iterations, epsilon, max_residual,
                                min_eig_threshold)
    cur_points = points + flow
    h0, w0 = prev.shape
    inside = ((cur_points[:, 0] >= 0) & (cur_points[:, 0] < w0)
              & (cur_points[:, 1] >= 0) & (cur_points[:, 1] < h0))
    alive &= inside

    if fb_threshold is not None and alive.any():
        idx = np.nonzero(alive)[0]
        back_flow, back_ok = _pyramidal_lk(cur_pyr, prev_pyr, cur_points[idx],
                                           -flow[idx], window, max_iterations,
                                           epsilon, max_residual, min_eig_threshold)
        round_trip = cur_points[idx] + back_flow - points[idx]
        consistent = back_ok & (np.hypot(round_trip[:, 0], round_trip[:, 1])
                                <= fb_threshold)
        alive[idx[~consistent]] = False

    return FeatureTrackResult(points, cur_points, alive)


def _pyramidal_lk(prev_pyr: list[np.ndarray], cur_pyr: list[np.ndarray],
                  points: np.ndarray, initial_flow: np.ndarray | None,
                  window: int, max_iterations: int, epsilon: float,
                  max_residual: float, min_eig_threshold: float
                  ) -> tuple[np.ndarray, np.ndarray]:
    levels = len(prev_pyr)
    grads = [np.gradient(p) for p in prev_pyr]  # (gy, gx) per level

    radius = window // 2
    rng = np.arange(-radius, radius + 1, dtype=float)
    offsets = np.stack(np.meshgrid(rng, rng, indexing="xy"), axis=-1)  # (W, W, 2)

    n = len(points)
    flow = np.zeros((n, 2)) if initial_flow is None else initial_flow.copy()
    alive = np.ones(n, dtype=bool)
    residual = np.zeros(n)

    for level in range(levels - 1, -1, -1):
        scale = 2.0 ** level
        img_p = prev_pyr[level]
        img_c = cur_pyr[level]
        gy, gx = grads[level]
        h, w = img_p.shape
        pl = points / scale

        margin = radius + 1.0
        in_bounds = ((pl[:, 0] >= margin) & (pl[:, 0] < w - margin)
                     & (pl[:, 1] >= margin) & (pl[:, 1] < h - margin))
        if level == 0:
            # Points whose window does not fit the finest level never get a
            # measurement there; they cannot be trusted.
            alive &= in_bounds
        active = alive & in_bounds
        if not active.any():
            continue

        idx = np.nonzero(active)[0]
        tmpl = _sample_windows(img_p, pl[idx], offsets)
        tx = _sample_windows(gx, pl[idx], offsets)
        ty = _sample_windows(gy, pl[idx], offsets)
        gxx = (tx * tx).sum(axis=(1, 2))
        gxy = (tx * ty).sum(axis=(1, 2))
        gyy = (ty * ty).sum(axis=(1, 2))
        det = gxx * gyy - gxy * gxy
        trace = gxx + gyy
        min_eig = 0.5 * (trace - np.sqrt((gxx - gyy) ** 2 + 4.0 * gxy * gxy))
        usable = (det > 1e-12) & (min_eig / (window * window) > min_eig_threshold)
        alive[idx[~usable]] = False
        idx = idx[usable]
        if idx.size == 0:
            continue
        tmpl, tx, ty = tmpl[usable], tx[usable], ty[usable]
        gxx, gxy, gyy, det = gxx[usable], gxy[usable], gyy[usable], det[usable]

        d = flow[idx] / scale
        converged = np.zeros(idx.size, dtype=bool)
        for _ in range(max_iterations):
            pending = ~converged
            if not pending.any():
                break
            pos = pl[idx[pending]] + d[pending]
            oob = ((pos[:, 0] < margin) | (pos[:, 0] >= w - margin)
                   | (pos[:, 1] < margin) | (pos[:, 1] >= h - margin))
            if oob.any():
                bad = np.nonzero(pending)[0][oob]
                alive[idx[bad]] = False
                converged[bad] = True
                pending = ~converged
                if not pending.any():
                    break
                pos = pl[idx[pending]] + d[pending]
            win = _sample_windows(img_c, pos, offsets)
            err = tmpl[pending] - win
            bx = (err * tx[pending]).sum(axis=(1, 2))
            by = (err * ty[pending]).sum(axis=(1, 2))
            sub_det = det[pending]
            dx = (gyy[pending] * bx - gxy[pending] * by) / sub_det
            dy = (gxx[pending] * by - gxy[pending] * bx) / sub_det
            d[pending] += np.stack([dx, dy], axis=1)
            res = np.abs(err).mean(axis=(1, 2))
            residual[idx[pending]] = res
            done = np.sqrt(dx * dx + dy * dy) < epsilon
            converged[np.nonzero(pending)[0][done]] = True

        diverged = np.abs(d - flow[idx] / scale).max(axis=1) > window
        alive[idx[diverged]] = False
        flow[idx] = d * scale

    alive &= residual <= max_residual
    return flow, alive


# ---------------------------------------------------------------------------
# Robust affine estimation

@dataclass
class AffineEstimate:
    transform: AffineTransform2D
    inlier_ratio: float = 0.0
    n_pairs: int = 0
    fallback: bool = False


def _fit_affine_lstsq(src: np.ndarray, dst: np.ndarray) -> AffineTransform2D | None:
    n = len(src)
    design = np.zeros((2 * n, 6))
    design[0::2, 0:2] = src
    design[0::2, 2] = 1.0
    design[1::2, 3:5] = src
    design[1::2, 5] = 1.0
    rhs = dst.reshape(-1)
    sol, _, rank, _ = np.linalg.lstsq(design, rhs, rcond=None)
    if rank < 6:
        return None
    a = np.array([[sol[0], sol[1]], [sol[3], sol[4]]])
    t = np.array([sol[2], sol[5]])
    return AffineTransform2D(a, t)


def estimate_affine(prev_points: np.ndarray, cur_points: np.ndarray,
                    iterations: int = 100, inlier_threshold: float = 3.0,
                    seed: int = 0) -> AffineEstimate:
    """RANSAC + least-squares affine fit from matched point pairs.

    Falls back to the identity (flagged) with fewer than 3 pairs, fewer than
    3 inliers, or all-collinear input. The sampler is seeded, so results are
    reproducible.
    """
    src = np.asarray(prev_points, dtype=float).reshape(-1, 2)
    dst = np.asarray(cur_points, dtype=float).reshape(-1, 2)
    n = len(src)
    if n < 3 or len(dst) != n:
        return AffineEstimate(AffineTransform2D.identity(), 0.0, n, fallback=True)

    rng = np.random.default_rng(seed)
    best_count = 0
    best_inliers: np.ndarray | None = None
    thr2 = inlier_threshold * inlier_threshold
    for _ in range(iterations):
        pick = rng.choice(n, size=3, replace=False)
        p = src[pick]
        # Degenerate (collinear) minimal samples cannot pin down an affine.
        area2 = abs((p[1, 0] - p[0, 0]) * (p[2, 1] - p[0, 1])
                    - (p[2, 0] - p[0, 0]) * (p[1, 1] - p[0, 1]))
        if area2 < 1e-9:
            continue
        design = np.column_stack([p, np.ones(3)])
        try:
            coef = np.linalg.solve(design, dst[pick])  # (3, 2): rows x,y,1
        except np.linalg.LinAlgError:
            continue
        warped = np.column_stack([src, np.ones(n)]) @ coef
        err2 = ((warped - dst) ** 2).sum(axis=1)
        inliers = err2 < thr2
        count = int(inliers.sum())
        if count > best_count:
            best_count = count
            best_inliers = inliers
            if count == n:
                break

    if best_inliers is None or best_count < 3:
        return AffineEstimate(AffineTransform2D.identity(), 0.0, n, fallback=True)
    fit = _fit_affine_lstsq(src[best_inliers], dst[best_inliers])
    if fit is None:
        return AffineEstimate(AffineTransform2D.identity(), 0.0, n, fallback=True)
    return AffineEstimate(fit, best_count / n, n, fallback=False)


# ---------------------------------------------------------------------------
# Ratio-preserving compensation

def constrain_scale(m: AffineTransform2D) -> AffineTransform2D:
    """Replace per-axis scale factors with the larger of the two.

    Decomposes scale as the column norms of the linear part, then rescales
    both columns to the maximum so the transform scales uniformly; the
    translation is untouched. Zero scale on either axis falls back to the
    identity.
    """
    sx, sy = m.scale_x, m.scale_y
    if sx == 0.0 or sy == 0.0:
        return AffineTransform2D.identity()
    s = max(sx, sy)
    a = m.linear @ np.diag([s / sx, s / sy])
    return AffineTransform2D(a, m.translation.copy())


def apply_to_track(m: AffineTransform2D, state: KalmanState) -> KalmanState:
    """Map a track state through a scale-constrained camera transform.

    Center and velocity rotate/scale with the linear part, height scales by
    the uniform factor, and the aspect ratio is copied through untouched.
    Covariance blocks are conjugated accordingly.
    """
    a = m.linear
    if abs(float(np.linalg.det(a))) < 1e-12:
        raise ValueError("singular camera transform")
    s = float(np.linalg.norm(a[:, 0]))

    t8 = np.zeros((8, 8))
    t8[0:2, 0:2] = a
    t8[2, 2] = 1.0
    t8[3, 3] = s
    t8[4:6, 4:6] = a
    t8[6, 6] = 1.0
    t8[7, 7] = s

    mean = t8 @ state.mean
    mean[0:2] += m.translation
    mean[2] = state.mean[2]  # aspect ratio passes through bit-identical
    mean[6] = state.mean[6]
    cov = t8 @ state.covariance @ t8.T
    return KalmanState(mean, (cov + cov.T) * 0.5)


# ---------------------------------------------------------------------------
# Frame-pair orchestration

@dataclass
class MotionEstimate:
    """Camera motion between two frames, ready to apply to tracks."""

    transform: AffineTransform2D = field(default_factory=AffineTransform2D.identity)
    raw_transform: AffineTransform2D = field(default_factory=AffineTransform2D.identity)
    inlier_ratio: float = 0.0
    n_features: int = 0
    n_tracked: int = 0
    fallback: bool = True


def estimate_camera_motion(prev_image: np.ndarray, cur_image: np.ndarray,
                           downscale_factor: int = 2, max_features: int = 200,
                           quality: float = 0.01, min_distance: float = 8.0,
                           seed: int = 0) -> MotionEstimate:
    """Full pipeline: features on the previous frame, LK tracking, robust
    affine fit, scale constraint. Frames may be RGB or grayscale."""
    prev_gray = downscale(rgb_to_gray(prev_image), downscale_factor)
    cur_gray = downscale(rgb_to_gray(cur_image), downscale_factor)
    points = detect_features(prev_gray, max_features, quality, min_distance)
    if len(points) == 0:
        return MotionEstimate()
    tracked = track_features(prev_gray, cur_gray, points)
    prev_pts, cur_pts = tracked.matched_pairs()
    estimate = estimate_affine(prev_pts * downscale_factor, cur_pts * downscale_factor,
                               seed=seed)
    constrained = constrain_scale(estimate.transform)
    return MotionEstimate(
        transform=constrained,
        raw_transform=estimate.transform,
        inlier_ratio=estimate.inlier_ratio,
        n_features=len(points),
        n_tracked=int(tracked.status.sum()),
        fallback=estimate.fallback,
    )
