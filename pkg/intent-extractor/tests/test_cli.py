import json

import numpy as np
import pytest

from intent_extractor import (
    compute_heatmap,
    first_frame_mask,
    get_backend,
    read_mask_file,
)
from intent_extractor.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out


def make_video(tmp_path, frames=4, h=64, w=64, seed=3):
    rng = np.random.default_rng(seed)
    stack = rng.uniform(0.0, 255.0, (frames, h, w))
    path = tmp_path / "video.npy"
    np.save(path, stack)
    return path, stack


class TestExtract:
    def test_single_frame(self, tmp_path, capsys):
        rng = np.random.default_rng(1)
        frame = rng.uniform(0.0, 255.0, (64, 64))
        video = tmp_path / "frame.npy"
        np.save(video, frame)
        out = tmp_path / "masks.pm"
        code, captured = run_cli(
            capsys,
            "--video", str(video),
            "--prompt", "the bright region",
            "--patch", "32",
            "--out", str(out),
        )
        assert code == 0
        report = json.loads(captured.out)
        assert report["frames"] == 1
        assert report["grid_h"] == report["grid_w"] == 2

        masks = read_mask_file(out)
        assert masks.shape == (1, 64, 64)
        # T=1 output is exactly the first-frame mask
        hm = compute_heatmap(frame, "the bright region", 32, get_backend("features"))
        expect, rho = first_frame_mask(hm, 0.6, 0)
        assert np.array_equal(masks[0], expect)
        assert report["rho"] == rho
        assert report["mask_areas"] == [int(expect.sum())]

    def test_stack_with_constant_flow(self, tmp_path, capsys):
        video, _ = make_video(tmp_path)
        out = tmp_path / "masks.pm"
        code, captured = run_cli(
            capsys,
            "--video", str(video),
            "--prompt", "moving subject",
            "--ell", "0.4",
            "--flow-dx", "1.0",
            "--out", str(out),
        )
        assert code == 0
        report = json.loads(captured.out)
        masks = read_mask_file(out)
        assert masks.shape == (4, 64, 64)
        assert report["mask_areas"] == [int(m.sum()) for m in masks]
        # unit x-flow: each frame is the previous one shifted right
        for k in range(1, 4):
            shifted = np.zeros_like(masks[0])
            shifted[:, k:] = masks[0][:, : 64 - k]
            assert np.array_equal(masks[k], shifted)

    def test_directory_of_frames(self, tmp_path, capsys):
        rng = np.random.default_rng(8)
        vdir = tmp_path / "frames"
        vdir.mkdir()
        for k in range(3):
            np.save(vdir / f"frame_{k:03d}.npy", rng.uniform(0, 255, (64, 96, 3)))
        out = tmp_path / "masks.pm"
        code, captured = run_cli(
            capsys,
            "--video", str(vdir),
            "--prompt", "left half",
            "--out", str(out),
        )
        assert code == 0
        report = json.loads(captured.out)
        assert (report["frames"], report["height"], report["width"]) == (3, 64, 96)

    def test_flow_file_override(self, tmp_path, capsys):
        video, _ = make_video(tmp_path, frames=3)
        flows = np.zeros((2, 64, 64, 2))
        flow_path = tmp_path / "flow.npy"
        np.save(flow_path, flows)
        out = tmp_path / "masks.pm"
        code, _ = run_cli(
            capsys,
            "--video", str(video),
            "--prompt", "anything",
            "--ell", "0.3",
            "--flow-file", str(flow_path),
            "--out", str(out),
        )
        assert code == 0
        masks = read_mask_file(out)
        assert all(np.array_equal(m, masks[0]) for m in masks)

    def test_report_is_reproducible(self, tmp_path, capsys):
        video, _ = make_video(tmp_path)
        out = tmp_path / "masks.pm"
        args = ("--video", str(video), "--prompt", "subject", "--out", str(out))
        _, first = run_cli(capsys, *args)
        first_bytes = out.read_bytes()
        _, second = run_cli(capsys, *args)
        assert first.out == second.out
        assert out.read_bytes() == first_bytes


class TestErrors:
    def test_missing_video(self, tmp_path, capsys):
        code, captured = run_cli(
            capsys,
            "--video", str(tmp_path / "nope.npy"),
            "--prompt", "x",
            "--out", str(tmp_path / "m.pm"),
        )
        assert code == 2
        assert "error:" in captured.err

    def test_empty_prompt(self, tmp_path, capsys):
        video, _ = make_video(tmp_path)
        code, captured = run_cli(
            capsys,
            "--video", str(video),
            "--prompt", "   ",
            "--out", str(tmp_path / "m.pm"),
        )
        assert code == 2
        assert "non-empty" in captured.err

    def test_frame_smaller_than_patch(self, tmp_path, capsys):
        video = tmp_path / "small.npy"
        np.save(video, np.zeros((16, 16)))
        code, captured = run_cli(
            capsys,
            "--video", str(video),
            "--prompt", "x",
            "--out", str(tmp_path / "m.pm"),
        )
        assert code == 2
        assert "smaller than one" in captured.err

    def test_flow_file_shape_mismatch(self, tmp_path, capsys):
        video, _ = make_video(tmp_path, frames=3)
        flow_path = tmp_path / "flow.npy"
        np.save(flow_path, np.zeros((1, 64, 64, 2)))
        code, captured = run_cli(
            capsys,
            "--video", str(video),
            "--prompt", "x",
            "--flow-file", str(flow_path),
            "--out", str(tmp_path / "m.pm"),
        )
        assert code == 2
        assert "does not match" in captured.err

    def test_unknown_backend(self, tmp_path, capsys):
        video, _ = make_video(tmp_path)
        code, captured = run_cli(
            capsys,
            "--video", str(video),
            "--prompt", "x",
            "--backend", "resnet",
            "--out", str(tmp_path / "m.pm"),
        )
        assert code == 2
        assert "unknown backend" in captured.err

    def test_mismatched_frame_sizes(self, tmp_path, capsys):
        vdir = tmp_path / "frames"
        vdir.mkdir()
        np.save(vdir / "a.npy", np.zeros((64, 64)))
        np.save(vdir / "b.npy", np.zeros((64, 96)))
        code, captured = run_cli(
            capsys,
            "--video", str(vdir),
            "--prompt", "x",
            "--out", str(tmp_path / "m.pm"),
        )
        assert code == 2
        assert "disagree" in captured.err
