import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lipspeech.core.types import LandmarkTrack, VideoClip
from lipspeech.preprocess import (AlignmentError, AugmentConfig, align_and_crop,
                                  augment, center_crop, load_mean_face,
                                  similarity_transform, smooth_landmarks,
                                  time_mask)
from lipspeech.training.toydata import render_face, synthetic_face_landmarks

from .oracles import windowed_mean_landmarks


class TestSmoothLandmarks:
    def test_constant_track_unchanged(self):
        pts = np.tile(np.arange(136).reshape(68, 2), (10, 1, 1)).astype(float)
        out = smooth_landmarks(LandmarkTrack(pts))
        np.testing.assert_allclose(out.points, pts)

    def test_single_frame_unchanged(self):
        pts = np.random.default_rng(0).uniform(0, 50, (1, 68, 2))
        out = smooth_landmarks(LandmarkTrack(pts))
        np.testing.assert_allclose(out.points, pts)

    def test_linear_motion_matches_direct_sum(self):
        t = np.arange(40, dtype=float)
        pts = np.zeros((40, 68, 2))
        pts[:, :, 0] = t[:, None] * 0.5 + 10
        pts[:, :, 1] = t[:, None] * -0.2 + 30
        out = smooth_landmarks(LandmarkTrack(pts), window=12)
        oracle = windowed_mean_landmarks(pts, 12)
        np.testing.assert_allclose(out.points, oracle, atol=1e-10)

    @settings(max_examples=20, deadline=None)
    @given(dx=st.floats(-50, 50), dy=st.floats(-50, 50), seed=st.integers(0, 100))
    def test_commutes_with_translation(self, dx, dy, seed):
        pts = np.random.default_rng(seed).uniform(0, 100, (7, 68, 2))
        track = LandmarkTrack(pts)
        a = smooth_landmarks(track.translated(dx, dy)).points
        b = smooth_landmarks(track).translated(dx, dy).points
        np.testing.assert_allclose(a, b, atol=1e-9)


class TestSimilarityTransform:
    def test_recovers_known_transform(self):
        rng = np.random.default_rng(3)
        src = rng.uniform(0, 100, (8, 2))
        angle = 0.3
        rot = np.array([[np.cos(angle), -np.sin(angle)],
                        [np.sin(angle), np.cos(angle)]])
        s_true, t_true = 1.4, np.array([5.0, -2.0])
        dst = s_true * src @ rot.T + t_true
        s, r, t = similarity_transform(src, dst)
        assert abs(s - s_true) < 1e-9
        np.testing.assert_allclose(r, rot, atol=1e-9)
        np.testing.assert_allclose(t, t_true, atol=1e-7)

    def test_coincident_points_rejected(self):
        pts = np.ones((8, 2))
        with pytest.raises(ValueError, match="degenerate"):
            similarity_transform(pts, pts)


def _toy_frames_and_track(num_frames=4, aperture=0.5):
    frame = render_face(aperture)
    pts = synthetic_face_landmarks(aperture)
    frames = np.tile(frame, (num_frames, 1, 1))
    track = LandmarkTrack(np.tile(pts, (num_frames, 1, 1)))
    return frames, track


class TestAlignAndCrop:
    def test_mean_face_pose_is_fixed_point(self):
        frames, track = _toy_frames_and_track()
        clip = align_and_crop(frames, track)
        assert clip.size == 96 and clip.num_frames == 4
        # mouth centroid (60, 72) lands at the crop center: dark mouth pixels there
        center = clip.frames[0, 44:52, 44:52]
        assert center.mean() < 0.2
        # crop center pixel equals the source pixel at the mouth centroid
        src = frames[0]
        np.testing.assert_allclose(clip.frames[0, 48, 48], src[72, 60], atol=1e-3)

    def test_rotated_input_matches_reference(self):
        frames, track = _toy_frames_and_track(num_frames=1)
        reference = align_and_crop(frames, track).frames[0]

        angle = np.deg2rad(10.0)
        rot = np.array([[np.cos(angle), -np.sin(angle)],
                        [np.sin(angle), np.cos(angle)]])
        center = np.array([60.0, 60.0])
        moved_pts = (track.points[0] - center) @ rot.T + center
        from scipy.ndimage import map_coordinates
        yy, xx = np.mgrid[0:120, 0:120].astype(float)
        inv = rot.T
        rel_x, rel_y = xx - center[0], yy - center[1]
        src_x = inv[0, 0] * rel_x + inv[0, 1] * rel_y + center[0]
        src_y = inv[1, 0] * rel_x + inv[1, 1] * rel_y + center[1]
        moved_frame = map_coordinates(frames[0], [src_y, src_x], order=1, mode="nearest")

        aligned = align_and_crop(moved_frame[None], LandmarkTrack(moved_pts[None])).frames[0]
        # the double bilinear resampling smears hard edges by a sub-pixel,
        # so judge by mean error and the fraction of grossly-wrong pixels
        err = np.abs(aligned[8:-8, 8:-8] - reference[8:-8, 8:-8])
        assert err.mean() < 0.02
        assert np.mean(err > 0.2) < 0.01
        assert np.quantile(err, 0.9) < 0.05

    def test_output_contract(self):
        frames, track = _toy_frames_and_track(num_frames=3)
        rgb = np.stack([frames, frames, frames], axis=-1)
        clip = align_and_crop(rgb, track)
        assert clip.frames.shape == (3, 96, 96)
        assert clip.frames.min() >= 0.0 and clip.frames.max() <= 1.0

    def test_degenerate_landmarks_flag_frame(self):
        frames, track = _toy_frames_and_track(num_frames=3)
        pts = track.points.copy()
        pts[1] = 50.0  # all landmarks coincide in frame 1
        with pytest.raises(AlignmentError) as err:
            align_and_crop(frames, LandmarkTrack(pts))
        assert err.value.frames == [1]

    def test_frame_count_mismatch(self):
        frames, track = _toy_frames_and_track(num_frames=3)
        with pytest.raises(ValueError, match="landmark count"):
            align_and_crop(frames[:2], track)

    def test_out_of_bounds_landmarks_rejected(self):
        frames, track = _toy_frames_and_track(num_frames=2)
        pts = track.points.copy()
        pts[0, 0] = (500.0, 10.0)
        with pytest.raises(ValueError, match="bounds"):
            align_and_crop(frames, LandmarkTrack(pts))

    def test_mean_face_fixture_matches_synthetic_layout(self):
        np.testing.assert_allclose(load_mean_face(),
                                   synthetic_face_landmarks(0.5), atol=1e-3)


class TestCenterCrop:
    def test_constant_frame(self):
        clip = VideoClip(np.full((2, 96, 96), 0.5))
        out = center_crop(clip)
        assert out.size == 88
        assert np.all(out.frames == 0.5)

    def test_offset_is_four(self):
        frames = np.zeros((1, 96, 96))
        frames[0, 4, 4] = 1.0
        out = center_crop(VideoClip(frames))
        assert out.frames[0, 0, 0] == 1.0

    def test_idempotent_modulo_size(self):
        clip = VideoClip(np.random.default_rng(0).uniform(0, 1, (2, 96, 96)))
        once = center_crop(clip)
        twice = center_crop(once)
        assert np.array_equal(once.frames, twice.frames)


def _random_clip(seed=0):
    return VideoClip(np.random.default_rng(seed).uniform(0, 1, (20, 96, 96)))


def _crop_only_variant(clip, seed):
    cfg = AugmentConfig(hflip_p=0.0, erase_p=0.0)
    return augment(clip, cfg, seed)


class TestAugment:
    def test_crop_only_is_subwindow(self):
        clip = _random_clip(1)
        out = _crop_only_variant(clip, seed=5)
        found = False
        for r in range(9):
            for c in range(9):
                if np.array_equal(out.frames, clip.frames[:, r:r + 88, c:c + 88]):
                    found = True
        assert found

    def test_flip_is_involution(self):
        clip = _random_clip(2)
        plain = augment(clip, AugmentConfig(hflip_p=0.0, erase_p=0.0), seed := 9)
        flipped = augment(clip, AugmentConfig(hflip_p=1.0, erase_p=0.0), seed)
        assert np.array_equal(flipped.frames[:, :, ::-1], plain.frames)

    def test_erase_rectangle_constraints(self):
        clip = _random_clip(3)
        checked = 0
        for seed in range(40):
            cfg = AugmentConfig(hflip_p=0.0, erase_p=1.0)
            out = augment(clip, cfg, seed)
            base = _crop_only_variant(clip, seed)
            diff = (out.frames[0] != base.frames[0])
            if not diff.any():
                continue
            rows = np.flatnonzero(diff.any(axis=1))
            cols = np.flatnonzero(diff.any(axis=0))
            h = rows[-1] - rows[0] + 1
            w = cols[-1] - cols[0] + 1
            assert diff.sum() == h * w  # solid rectangle
            assert 0.02 <= h * w / 88 ** 2 <= 0.33
            assert 0.3 <= h / w <= 3.3
            # fill equals the cropped-clip mean
            fill = out.frames[0][rows[0], cols[0]]
            assert abs(fill - base.frames.mean()) < 1e-5
            checked += 1
        assert checked >= 20

    def test_deterministic(self):
        clip = _random_clip(4)
        a = augment(clip, rng_seed=77)
        b = augment(clip, rng_seed=77)
        assert np.array_equal(a.frames, b.frames)

    def test_values_stay_in_unit_range(self):
        clip = _random_clip(5)
        for seed in range(30):
            out = augment(clip, rng_seed=seed)
            assert out.frames.min() >= 0.0 and out.frames.max() <= 1.0
            assert out.size == 88

    def test_draw_frequencies_rough(self):
        from .oracles import analyze_augmented
        clip = VideoClip(np.random.default_rng(8).uniform(0.2, 0.8, (1, 96, 96)))
        flips = erases = 0
        trials = 600
        for seed in range(trials):
            base = _crop_only_variant(clip, seed)
            out = augment(clip, AugmentConfig(), seed)
            flipped, rect = analyze_augmented(out.frames, base.frames)
            flips += flipped
            erases += rect is not None
        assert abs(flips / trials - 0.5) < 0.07
        assert abs(erases / trials - 0.5) < 0.07


class TestTimeMask:
    def _clip(self, seconds=2):
        return VideoClip(np.random.default_rng(6).uniform(0.1, 0.9,
                                                          (20 * seconds, 96, 96)))

    def test_runs_bounded_per_second(self):
        clip = self._clip(2)
        fill = clip.frames.mean(dtype=np.float64)
        for seed in range(30):
            out = time_mask(clip, rng_seed=seed)
            masked = np.array([np.allclose(out.frames[t], np.float32(fill))
                               for t in range(out.num_frames)])
            for sec in range(2):
                run = masked[sec * 20:(sec + 1) * 20]
                assert run.sum() <= 8
                if run.any():  # contiguity
                    idx = np.flatnonzero(run)
                    assert idx[-1] - idx[0] + 1 == len(idx)

    def test_zero_draw_leaves_clip_unchanged(self):
        clip = self._clip(1)
        unchanged = any(np.array_equal(time_mask(clip, rng_seed=s).frames, clip.frames)
                        for s in range(50))
        assert unchanged

    def test_masked_frames_equal_clip_mean(self):
        clip = self._clip(1)
        fill = np.float32(clip.frames.mean(dtype=np.float64))
        for seed in range(50):
            out = time_mask(clip, rng_seed=seed)
            changed = [t for t in range(20)
                       if not np.array_equal(out.frames[t], clip.frames[t])]
            for t in changed:
                assert np.all(out.frames[t] == fill)
            if changed:
                return
        pytest.fail("no seed produced a mask")

    def test_partial_second_untouched(self):
        clip = VideoClip(np.random.default_rng(1).uniform(0, 1, (30, 96, 96)))
        for seed in range(20):
            out = time_mask(clip, rng_seed=seed)
            np.testing.assert_array_equal(out.frames[20:], clip.frames[20:])

    def test_deterministic(self):
        clip = self._clip(1)
        assert np.array_equal(time_mask(clip, rng_seed=3).frames,
                              time_mask(clip, rng_seed=3).frames)
