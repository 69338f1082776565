"""Sampling grid generators and sample extraction.

Three grid kinds: quasi-uniform (lattice rounded to the dense grid), uniform
with jitter (one draw per lattice cell), and fully random.  All randomness
comes from numpy's PCG64 generator seeded explicitly, so any (H, W, M, seed)
tuple reproduces bit-identical positions everywhere.
"""

from dataclasses import dataclass

import numpy as np

from .imagecore import as_image


@dataclass(frozen=True)
class SampleSet:
    """M measured values on distinct nodes of a dense H x W grid."""

    height: int
    width: int
    positions: np.ndarray  # (M, 2) int rows/cols
    values: np.ndarray  # (M,) float
    grid_kind: str = "external"
    seed: int = 0

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.int64).reshape(-1, 2)
        vals = np.asarray(self.values, dtype=np.float64).ravel()
        if len(pos) != len(vals):
            raise ValueError(f"{len(pos)} positions but {len(vals)} values")
        if len(pos) < 1:
            raise ValueError("empty sample set")
        if pos[:, 0].min() < 0 or pos[:, 0].max() >= self.height \
                or pos[:, 1].min() < 0 or pos[:, 1].max() >= self.width:
            raise ValueError("sample position out of bounds")
        flat = pos[:, 0] * self.width + pos[:, 1]
        if len(np.unique(flat)) != len(flat):
            raise ValueError("duplicate sample positions")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "values", vals)

    @property
    def M(self) -> int:
        return len(self.values)


def _check_m(H, W, M):
    if not 1 <= M <= H * W:
        raise ValueError(f"M must be in [1, {H * W}], got {M}")


def grid_layout(H: int, W: int, M: int):
    """Rows x cols cell decomposition for roughly isotropic M-cell coverage."""
    rows = int(round(np.sqrt(M * H / W)))
    rows = min(max(rows, 1), H)
    cols = int(np.ceil(M / rows))
    if cols > W:
        cols = W
        rows = min(int(np.ceil(M / cols)), H)
    return rows, cols


def _round_node(x):
    return int(np.floor(x + 0.5))


def gen_quasi_uniform(H, W, M, seed=0):
    """Uniform lattice of ~M points rounded to the nearest dense-grid nodes.

    Deduplication can lose nodes after rounding; the shortage is filled with
    seeded uniform draws from unused nodes (the only use of the seed).
    """
    _check_m(H, W, M)
    rows, cols = grid_layout(H, W, M)
    taken = np.zeros(H * W, dtype=bool)
    out = []
    for i in range(rows):
        r = min(max(_round_node((i + 0.5) * H / rows - 0.5), 0), H - 1)
        for j in range(cols):
            c = min(max(_round_node((j + 0.5) * W / cols - 0.5), 0), W - 1)
            flat = r * W + c
            if not taken[flat]:
                taken[flat] = True
                out.append((r, c))
            if len(out) == M:
                return out
    shortage = M - len(out)
    if shortage > 0:
        rng = np.random.default_rng(seed)
        free = np.flatnonzero(~taken)
        extra = rng.permutation(free)[:shortage]
        out.extend((int(f) // W, int(f) % W) for f in extra)
    return out


def _ring(H, W, r0, c0, radius):
    """Nodes at Chebyshev distance exactly radius from (r0, c0)."""
    if radius == 0:
        yield r0, c0
        return
    for r in range(max(r0 - radius, 0), min(r0 + radius, H - 1) + 1):
        if abs(r - r0) == radius:
            for c in range(max(c0 - radius, 0), min(c0 + radius, W - 1) + 1):
                yield r, c
        else:
            for c in (c0 - radius, c0 + radius):
                if 0 <= c < W:
                    yield r, c


def _nearest_free(taken, H, W, r0, c0):
    """Closest free node to (r0, c0) by Euclidean distance, ties broken by
    smallest row then col.  Expanding ring search; once a candidate exists,
    rings are scanned out to its Euclidean distance before committing."""
    best = None
    for radius in range(max(H, W) + 1):
        if best is not None and radius * radius > best[0]:
            break
        for r, c in _ring(H, W, r0, c0, radius):
            if not taken[r * W + c]:
                key = ((r - r0) ** 2 + (c - c0) ** 2, r, c)
                if best is None or key < best:
                    best = key
    if best is None:
        raise RuntimeError("no free node left")
    return best[1], best[2]


def gen_jitter(H, W, M, seed=0):
    """One sample per lattice cell at a uniform intra-cell position."""
    return gen_jitter_detailed(H, W, M, seed)[0]


def gen_jitter_detailed(H, W, M, seed=0):
    """gen_jitter plus a diagnostic count of nearest-free-node fallbacks.

    Each of the first M cells (row-major) draws row and col independently
    and uniformly within the cell, rounds to the nearest node, and clamps
    back into the cell's node range.  On collision: up to 10 redraws, then
    the nearest free node.
    """
    _check_m(H, W, M)
    rows, cols = grid_layout(H, W, M)
    rng = np.random.default_rng(seed)
    taken = np.zeros(H * W, dtype=bool)
    out = []
    fallbacks = 0

    def draw(i, n_cells, size):
        lo = i * size / n_cells
        hi = (i + 1) * size / n_cells
        x = _round_node(rng.uniform(lo, hi))
        # keep the rounded node inside the generating cell
        n_lo = int(np.ceil(lo - 1e-9))
        n_hi = int(np.ceil(hi - 1e-9)) - 1
        return min(max(x, n_lo), min(n_hi, size - 1))

    cell = 0
    for i in range(rows):
        for j in range(cols):
            if cell == M:
                break
            cell += 1
            placed = False
            for _ in range(11):  # first draw + up to 10 redraws
                r = draw(i, rows, H)
                c = draw(j, cols, W)
                if not taken[r * W + c]:
                    placed = True
                    break
            if not placed:
                r, c = _nearest_free(taken, H, W, r, c)
                fallbacks += 1
            taken[r * W + c] = True
            out.append((r, c))
        if cell == M:
            break
    return out, fallbacks


def gen_random(H, W, M, seed=0):
    """M distinct nodes drawn uniformly without replacement."""
    _check_m(H, W, M)
    rng = np.random.default_rng(seed)
    flat = rng.permutation(H * W)[:M]
    return [(int(f) // W, int(f) % W) for f in flat]


GENERATORS = {
    "quasi_uniform": gen_quasi_uniform,
    "jitter": gen_jitter,
    "random": gen_random,
}


def take_samples(img, positions, grid_kind="external", seed=0) -> SampleSet:
    """Copy pixel values at the given positions into a SampleSet."""
    img = as_image(img)
    H, W = img.shape
    pos = np.asarray(positions, dtype=np.int64).reshape(-1, 2)
    vals = img[pos[:, 0], pos[:, 1]] if len(pos) else np.array([])
    return SampleSet(H, W, pos, vals, grid_kind=grid_kind, seed=seed)


def generate_samples(img, grid_kind, M, seed=0) -> SampleSet:
    """Generate a grid of the given kind and sample the image on it."""
    img = as_image(img)
    H, W = img.shape
    try:
        gen = GENERATORS[grid_kind]
    except KeyError:
        raise ValueError(f"unknown grid kind {grid_kind!r}") from None
    return take_samples(img, gen(H, W, M, seed), grid_kind=grid_kind, seed=seed)


# ---------------------------------------------------------------------------
# CSV serialization: leading comment line "# H W M grid_kind seed", then
# header "row,col,value".


def write_samples_csv(samples: SampleSet, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# {samples.height} {samples.width} {samples.M} "
                 f"{samples.grid_kind} {samples.seed}\n")
        fh.write("row,col,value\n")
        for (r, c), v in zip(samples.positions, samples.values):
            fh.write(f"{r},{c},{float(v)!r}\n")


def read_samples_csv(path) -> SampleSet:
    with open(path) as fh:
        meta = fh.readline()
        if not meta.startswith("# "):
            raise ValueError(f"{path}: missing metadata comment line")
        h_s, w_s, m_s, kind, seed_s = meta[2:].split()
        header = fh.readline().strip()
        if header != "row,col,value":
            raise ValueError(f"{path}: unexpected header {header!r}")
        rows, cols, vals = [], [], []
        for line in fh:
            r, c, v = line.rstrip("\n").split(",")
            rows.append(int(r))
            cols.append(int(c))
            vals.append(float(v))
    return SampleSet(int(h_s), int(w_s), np.stack([rows, cols], axis=1),
                     np.array(vals), grid_kind=kind, seed=int(seed_s))
