import numpy as np
import pytest

from plasmodet.detect import ContourVerdict, DetectionReport
from plasmodet.imgcore import to_gray
from plasmodet.synth import (
    GroundTruth, Metrics, PlacementError, SmearObject, SmearSpec, SplitMix64, generate, score,
)
from plasmodet.texture import gradient_magnitude


def test_splitmix64_reference_values():
    # published test vector for seed 1234567
    rng = SplitMix64(1234567)
    assert [int(v) for v in rng.next_u64(5)] == [
        6457827717110365317, 3203168211198807973, 9817491932198370423,
        4593380528125082431, 16408922859458223821,
    ]


def test_splitmix64_blocks_concatenate():
    a = SplitMix64(99)
    whole = a.next_u64(10)
    b = SplitMix64(99)
    parts = np.concatenate([b.next_u64(3), b.next_u64(7)])
    assert np.array_equal(whole, parts)
    u = SplitMix64(5).uniform(1000)
    assert (u >= 0).all() and (u < 1).all()


def test_no_parasites_means_empty_truth():
    _, gt = generate(SmearSpec(parasite_count=0, seed=1))
    assert gt.parasites == [] and len(gt.rbcs) == SmearSpec().rbc_count


def test_generate_is_deterministic():
    spec = SmearSpec(parasite_count=2, seed=77)
    a, ga = generate(spec)
    b, gb = generate(spec)
    assert a.tobytes() == b.tobytes() and ga == gb
    c, _ = generate(SmearSpec(parasite_count=2, seed=78))
    assert a.tobytes() != c.tobytes()


def test_objects_inside_frame_and_parasites_disjoint():
    for seed in range(10):
        spec = SmearSpec(parasite_count=3, seed=seed)
        _, gt = generate(spec)
        for o in gt.objects:
            x, y = o.center
            assert o.radius <= x < spec.width - o.radius and o.radius <= y < spec.height - o.radius
        masks = [o.mask((spec.height, spec.width)) for o in gt.parasites]
        total = sum(m.sum() for m in masks)
        assert np.logical_or.reduce(masks).sum() == total


def test_texture_contrast_guarantee():
    spec = SmearSpec(parasite_count=2, texture_amplitude=60, noise_amplitude=2, seed=3)
    img, gt = generate(spec)
    gm = gradient_magnitude(to_gray(img))
    shape = gm.shape
    para = np.logical_or.reduce([o.mask(shape) for o in gt.parasites])
    rbc = np.logical_or.reduce([o.mask(shape) for o in gt.rbcs]) & ~para
    assert gm[para].mean() >= 5 * gm[rbc].mean()


def test_placement_error():
    with pytest.raises(PlacementError):
        generate(SmearSpec(width=40, height=40, rbc_count=50, seed=0))
    with pytest.raises(PlacementError):
        generate(SmearSpec(width=10, height=10, rbc_count=1, rbc_radius=(8, 8)))


def test_spec_validation():
    with pytest.raises(ValueError):
        SmearSpec(parasite_radius=(1, 3))
    with pytest.raises(ValueError):
        SmearSpec(rbc_count=-1)


def test_ground_truth_round_trip():
    _, gt = generate(SmearSpec(parasite_count=1, seed=4))
    assert GroundTruth.from_dict(gt.to_dict()) == gt


def _report(contours, w=20, h=20):
    return DetectionReport("t", w, h, 0.01, 50.0, contours,
                           any(c.is_plasmodium for c in contours), {})


def test_score_examples():
    gt_neg = GroundTruth(20, 20, [])
    assert score(_report([]), gt_neg).tn == 1
    gt_pos = GroundTruth(20, 20, [SmearObject("parasite", (10, 10), 3)])
    hit = ContourVerdict(1, 30, (10.2, 9.7), 0.5, True)
    m = score(_report([hit]), gt_pos)
    assert m.tp == 1 and m.parasites_matched == 1 and m.detections_matched == 1
    miss = ContourVerdict(1, 30, (2.0, 2.0), 0.5, True)
    m = score(_report([miss]), gt_pos)
    assert m.tp == 1 and m.parasites_matched == 0
    assert score(_report([]), gt_pos).fn == 1
    assert score(_report([miss]), gt_neg).fp == 1


def test_metrics_arithmetic_against_hand_tally():
    outcomes = ["tp"] * 47 + ["fn"] * 3 + ["tn"] * 48 + ["fp"] * 2
    total = Metrics()
    for o in outcomes:
        total = total + Metrics(**{o: 1})
    assert (total.tp, total.fn, total.tn, total.fp) == (47, 3, 48, 2)
    assert total.accuracy == 95 / 100
    assert total.sensitivity == 47 / 50 and total.specificity == 48 / 50
