import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import bsrecon as bs
from bsrecon.sampler import (
    GENERATORS,
    SampleSet,
    gen_jitter_detailed,
    gen_quasi_uniform,
    gen_random,
    grid_layout,
    read_samples_csv,
    take_samples,
    write_samples_csv,
)


def _positions_ok(pos, H, W, M):
    pos = np.asarray(pos)
    assert len(pos) == M
    assert len({(r, c) for r, c in pos}) == M
    assert pos[:, 0].min() >= 0 and pos[:, 0].max() < H
    assert pos[:, 1].min() >= 0 and pos[:, 1].max() < W


class TestSampleSet:
    def test_valid(self):
        s = SampleSet(4, 4, [(0, 0), (3, 3)], [1.0, 2.0])
        assert s.M == 2

    @pytest.mark.parametrize("pos,vals", [
        ([(0, 0), (0, 0)], [1.0, 2.0]),  # duplicates
        ([(0, 4)], [1.0]),               # out of bounds
        ([(-1, 0)], [1.0]),
        ([(0, 0)], [1.0, 2.0]),          # length mismatch
        ([], []),                        # empty
    ])
    def test_invalid(self, pos, vals):
        with pytest.raises(ValueError):
            SampleSet(4, 4, pos, vals)


class TestGrids:
    @pytest.mark.parametrize("kind", sorted(GENERATORS))
    @pytest.mark.parametrize("H,W,M", [(16, 16, 64), (16, 24, 100), (7, 13, 1),
                                       (8, 8, 64), (5, 5, 24)])
    def test_counts_bounds_distinct(self, kind, H, W, M):
        _positions_ok(GENERATORS[kind](H, W, M, seed=3), H, W, M)

    @pytest.mark.parametrize("kind", sorted(GENERATORS))
    def test_seed_reproducible(self, kind):
        gen = GENERATORS[kind]
        assert gen(32, 32, 250, seed=11) == gen(32, 32, 250, seed=11)

    def test_random_seed_sensitivity(self):
        assert gen_random(32, 32, 250, seed=1) != gen_random(32, 32, 250, seed=2)

    @pytest.mark.parametrize("kind", sorted(GENERATORS))
    @pytest.mark.parametrize("M", [0, -1, 257])
    def test_m_out_of_range(self, kind, M):
        with pytest.raises(ValueError):
            GENERATORS[kind](16, 16, M)

    def test_full_grid(self):
        for kind in GENERATORS:
            _positions_ok(GENERATORS[kind](6, 6, 36, seed=0), 6, 6, 36)

    def test_grid_layout_covers_m(self):
        for H, W, M in [(16, 16, 64), (16, 64, 100), (100, 10, 37), (5, 5, 25)]:
            rows, cols = grid_layout(H, W, M)
            assert rows * cols >= M
            assert rows <= H and cols <= W

    def test_quasi_uniform_is_lattice(self):
        # M a perfect square on a square divisible grid: exact regular lattice
        pos = gen_quasi_uniform(16, 16, 16)
        assert pos == [(r, c) for r in (2, 6, 10, 14) for c in (2, 6, 10, 14)]

    def test_jitter_stays_in_cell(self):
        H = W = 32
        M = 64
        rows, cols = grid_layout(H, W, M)
        pos, _ = gen_jitter_detailed(H, W, M, seed=5)
        for idx, (r, c) in enumerate(pos):
            i, j = divmod(idx, cols)
            assert i * H / rows - 1 <= r <= (i + 1) * H / rows
            assert j * W / cols - 1 <= c <= (j + 1) * W / cols

    def test_jitter_dense_grid_no_infinite_loop(self):
        pos, fallbacks = gen_jitter_detailed(8, 8, 64, seed=0)
        _positions_ok(pos, 8, 8, 64)
        assert fallbacks >= 0

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_jitter_always_valid(self, seed):
        _positions_ok(GENERATORS["jitter"](13, 17, 50, seed), 13, 17, 50)


class TestTakeAndGenerate:
    def test_values_match_pixels(self):
        img = np.arange(64.0).reshape(8, 8)
        s = bs.generate_samples(img, "random", 20, seed=4)
        assert np.array_equal(s.values, img[s.positions[:, 0], s.positions[:, 1]])

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown grid kind"):
            bs.generate_samples(np.zeros((4, 4)), "sobol", 4)

    def test_take_samples_external(self):
        img = np.arange(16.0).reshape(4, 4)
        s = take_samples(img, [(1, 2), (3, 0)])
        assert s.values.tolist() == [6.0, 12.0]
        assert s.grid_kind == "external"


class TestCsv:
    def test_round_trip(self, tmp_path):
        img = np.random.default_rng(2).uniform(0, 255, (16, 16))
        s = bs.generate_samples(img, "jitter", 60, seed=9)
        p = tmp_path / "s.csv"
        write_samples_csv(s, p)
        s2 = read_samples_csv(p)
        assert (s2.height, s2.width, s2.M) == (16, 16, 60)
        assert s2.grid_kind == "jitter" and s2.seed == 9
        assert np.array_equal(s2.positions, s.positions)
        assert np.array_equal(s2.values, s.values)  # repr round trip is exact

    def test_format(self, tmp_path):
        s = SampleSet(4, 4, [(1, 2)], [3.5], grid_kind="random", seed=7)
        p = tmp_path / "s.csv"
        write_samples_csv(s, p)
        assert p.read_text() == "# 4 4 1 random 7\nrow,col,value\n1,2,3.5\n"

    def test_bad_header(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("row,col,value\n1,2,3.0\n")
        with pytest.raises(ValueError, match="metadata"):
            read_samples_csv(p)
