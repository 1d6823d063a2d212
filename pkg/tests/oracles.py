"""Slow, obviously-correct reference implementations used to check the fast paths.

Nothing here imports the package under test.
"""

import math
from collections import deque


def _at(img, y, x):
    h, w = len(img), len(img[0])
    return img[min(max(y, 0), h - 1)][min(max(x, 0), w - 1)]


def convolve(img, kernel):
    """Quadruple loop: out[y][x] = sum k[i][j] * img[y - (i - r)][x - (j - r)], replicate border."""
    h, w = len(img), len(img[0])
    n = len(kernel)
    r = n // 2
    out = [[0.0] * w for _ in range(h)]
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for i in range(n):
                for j in range(n):
                    acc += kernel[i][j] * _at(img, y - (i - r), x - (j - r))
            out[y][x] = acc
    return out


def sobel_magnitude(img):
    h, w = len(img), len(img[0])
    out = [[0.0] * w for _ in range(h)]
    for y in range(h):
        for x in range(w):
            p = lambda dy, dx: _at(img, y + dy, x + dx)  # noqa: E731
            # convolution flips the kernel; the magnitude does not care about sign
            gx = (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1))
            gy = (p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1))
            out[y][x] = math.sqrt(gx * gx + gy * gy)
    return out


def histogram(pixels):
    bins = [0] * 256
    for v in pixels:
        bins[v] += 1
    return bins


def top_group_mean(pixels, fraction):
    n = max(1, int(math.floor(fraction * len(pixels))))
    ordered = sorted(pixels, reverse=True)
    return sum(ordered[:n]) / n


def iterative_threshold(pixels, t0=0.5, cap=256):
    """Two-class mean iteration over a plain pixel list; returns (T, iterations, converged)."""
    t = sum(pixels) / len(pixels)
    for it in range(1, cap + 1):
        g1 = [v for v in pixels if v > t]
        g2 = [v for v in pixels if v <= t]
        if not g1 or not g2:
            raise ValueError("degenerate")
        proposed = 0.5 * (sum(g1) / len(g1) + sum(g2) / len(g2))
        if abs(proposed - t) < t0:
            return t, it, True
        t = proposed
    return t, cap, False


def dilate(mask, offsets):
    """Minkowski sum over a set of (dy, dx) offsets; outside the frame is background."""
    h, w = len(mask), len(mask[0])
    ones = {(y, x) for y in range(h) for x in range(w) if mask[y][x]}
    grown = {(y + dy, x + dx) for (y, x) in ones for (dy, dx) in offsets}
    return [[(y, x) in grown for x in range(w)] for y in range(h)]


def erode(mask, offsets):
    """All translates p + b inside the set; anything outside the frame is background."""
    h, w = len(mask), len(mask[0])

    def inside(y, x):
        return 0 <= y < h and 0 <= x < w and bool(mask[y][x])

    return [[all(inside(y + dy, x + dx) for (dy, dx) in offsets) for x in range(w)]
            for y in range(h)]


def flood_fill_components(mask, connectivity=8):
    """List of pixel sets, one per component, found by BFS from each unvisited seed."""
    h, w = len(mask), len(mask[0])
    if connectivity == 8:
        steps = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dy, dx) != (0, 0)]
    else:
        steps = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    seen = set()
    comps = []
    for y in range(h):
        for x in range(w):
            if not mask[y][x] or (y, x) in seen:
                continue
            comp = set()
            queue = deque([(y, x)])
            seen.add((y, x))
            while queue:
                cy, cx = queue.popleft()
                comp.add((cy, cx))
                for dy, dx in steps:
                    ny, nx = cy + dy, cx + dx
                    if 0 <= ny < h and 0 <= nx < w and mask[ny][nx] and (ny, nx) not in seen:
                        seen.add((ny, nx))
                        queue.append((ny, nx))
            comps.append(comp)
    return comps
