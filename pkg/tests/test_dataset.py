import os

import numpy as np
import pytest

from octscreen.dataset import (
    DatasetError,
    SyntheticSample,
    group_volumes,
    read_dataset,
    read_frame,
    split_samples,
    write_dataset,
    write_frame,
)
from octscreen.synthoct import GenConfig, generate_dataset


@pytest.fixture()
def small_dataset():
    return generate_dataset(GenConfig(n_volumes=2, frames_per_volume=4, seed=7))


class TestFrameFile:
    def test_size_is_header_plus_pixels(self, tmp_path):
        path = tmp_path / "f.soct"
        write_frame(path, np.zeros((64, 64), dtype=np.float32))
        # magic(4) + u32 h + u32 w + h*w float32
        assert os.path.getsize(path) == 4 + 4 + 4 + 64 * 64 * 4

    def test_round_trip_bits(self, tmp_path):
        rng = np.random.default_rng(0)
        img = rng.uniform(0, 1, size=(17, 9)).astype(np.float32)
        path = tmp_path / "f.soct"
        write_frame(path, img)
        back = read_frame(path)
        assert back.tobytes() == img.tobytes()
        assert back.shape == (17, 9)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "f.soct"
        path.write_bytes(b"XXXX" + b"\x00" * 100)
        with pytest.raises(DatasetError, match="bad magic"):
            read_frame(path)

    def test_truncated(self, tmp_path):
        path = tmp_path / "f.soct"
        write_frame(path, np.zeros((8, 8), dtype=np.float32))
        raw = path.read_bytes()
        path.write_bytes(raw[:-5])
        with pytest.raises(DatasetError, match="unexpected end"):
            read_frame(path)

    def test_trailing_bytes(self, tmp_path):
        path = tmp_path / "f.soct"
        write_frame(path, np.zeros((8, 8), dtype=np.float32))
        path.write_bytes(path.read_bytes() + b"zz")
        with pytest.raises(DatasetError, match="trailing"):
            read_frame(path)

    def test_non_2d_rejected(self, tmp_path):
        with pytest.raises(DatasetError, match="2-d"):
            write_frame(tmp_path / "f.soct", np.zeros((2, 2, 2)))


class TestDatasetRoundTrip:
    def test_bit_exact_round_trip(self, tmp_path, small_dataset):
        write_dataset(tmp_path / "d", small_dataset)
        back = read_dataset(tmp_path / "d")
        assert len(back) == len(small_dataset)
        for a, b in zip(small_dataset, back):
            assert a.volume_id == b.volume_id
            assert a.frame_index == b.frame_index
            assert a.image.tobytes() == b.image.tobytes()
            assert a.se_d == b.se_d
            assert a.se_struct_d == b.se_struct_d
            assert a.al_mm == b.al_mm
            assert a.split == b.split

    def test_missing_manifest(self, tmp_path):
        os.makedirs(tmp_path / "empty")
        with pytest.raises(DatasetError, match="manifest not found"):
            read_dataset(tmp_path / "empty")

    def test_malformed_manifest_line(self, tmp_path, small_dataset):
        write_dataset(tmp_path / "d", small_dataset)
        manifest = tmp_path / "d" / "manifest.tsv"
        manifest.write_text(manifest.read_text() + "only\ttwo\n")
        with pytest.raises(DatasetError, match="expected 7 fields"):
            read_dataset(tmp_path / "d")

    def test_unknown_split_rejected(self, tmp_path, small_dataset):
        write_dataset(tmp_path / "d", small_dataset)
        manifest = tmp_path / "d" / "manifest.tsv"
        manifest.write_text(manifest.read_text().replace("train", "training"))
        with pytest.raises(DatasetError, match="unknown split"):
            read_dataset(tmp_path / "d")


class TestGrouping:
    def test_group_volumes_orders_frames(self, small_dataset):
        shuffled = list(reversed(small_dataset))
        vols = group_volumes(shuffled)
        assert list(vols) == sorted(vols)
        for frames in vols.values():
            assert [s.frame_index for s in frames] == sorted(s.frame_index for s in frames)

    def test_split_samples_filters(self, small_dataset):
        train = split_samples(small_dataset, "train")
        assert all(s.split == "train" for s in train)
        with pytest.raises(DatasetError, match="unknown split"):
            split_samples(small_dataset, "all")
