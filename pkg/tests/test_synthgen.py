import numpy as np
import pytest

from lookforest import synthgen
from lookforest.synthgen import SynthConfig, SynthError, generate, bayes_accuracy, run_sweep
from lookforest.tuning import ParamGrid


def test_rho_one_is_deterministic_xor():
    data = generate(SynthConfig(n_samples=500, rho=1.0, n_noise=0, seed=1))
    f0, f1 = data.features[:, 0], data.features[:, 1]
    expected = ((f0 >= 0.5) != (f1 >= 0.5)).astype(int)
    np.testing.assert_array_equal(data.labels, expected)


def test_rho_one_example_points():
    # the XOR oracle itself: differing halves -> POS, equal halves -> NEG
    assert ((0.2 >= 0.5) != (0.8 >= 0.5)) is True
    assert ((0.6 >= 0.5) != (0.9 >= 0.5)) is False
    data = generate(SynthConfig(n_samples=2000, rho=1.0, n_noise=0, seed=5))
    f = data.features
    differs = (f[:, 0] >= 0.5) != (f[:, 1] >= 0.5)
    assert np.all(data.labels[differs] == 1)
    assert np.all(data.labels[~differs] == 0)


def test_rho_half_is_pure_noise_per_quadrant():
    data = generate(SynthConfig(n_samples=20000, rho=0.5, n_noise=0, seed=2))
    f = data.features
    for qx in (False, True):
        for qy in (False, True):
            mask = ((f[:, 0] >= 0.5) == qx) & ((f[:, 1] >= 0.5) == qy)
            n = mask.sum()
            p = data.labels[mask].mean()
            assert abs(p - 0.5) < 3 * np.sqrt(0.25 / n)


def test_label_agreement_rate_is_rho():
    rho = 0.8
    data = generate(SynthConfig(n_samples=50000, rho=rho, n_noise=0, seed=3))
    f = data.features
    oracle = ((f[:, 0] >= 0.5) != (f[:, 1] >= 0.5)).astype(int)
    agree = (data.labels == oracle).mean()
    assert abs(agree - rho) < 3 * np.sqrt(rho * (1 - rho) / 50000)


def test_noise_features_uniform_and_unrelated():
    data = generate(SynthConfig(n_samples=20000, rho=1.0, n_noise=3, seed=4))
    noise = data.features[:, 2:]
    assert noise.min() >= 0.0 and noise.max() <= 1.0
    # mean of U[0,1] conditional on label stays ~0.5
    for j in range(3):
        for cls in (0, 1):
            vals = noise[data.labels == cls, j]
            assert abs(vals.mean() - 0.5) < 4 * np.sqrt(1 / 12 / vals.size)


def test_linear_features_shift_with_label():
    data = generate(
        SynthConfig(n_samples=20000, rho=0.9, n_noise=0, n_linear=2, beta=0.1, seed=6)
    )
    lin = data.features[:, 2:]
    assert lin.min() >= 0.0 and lin.max() <= 1.0
    pos_mean = lin[data.labels == 1].mean()
    neg_mean = lin[data.labels == 0].mean()
    assert pos_mean - neg_mean == pytest.approx(0.2, abs=0.02)


def test_deterministic_per_seed():
    cfg = SynthConfig(n_samples=100, rho=0.7, seed=42)
    a, b = generate(cfg), generate(cfg)
    np.testing.assert_array_equal(a.features, b.features)
    np.testing.assert_array_equal(a.labels, b.labels)


def test_config_validation():
    with pytest.raises(SynthError):
        SynthConfig(rho=0.4)
    with pytest.raises(SynthError):
        SynthConfig(rho=1.1)
    with pytest.raises(SynthError):
        SynthConfig(n_samples=0)


@pytest.mark.parametrize("rho,expected", [(1.0, 1.0), (0.5, 0.5), (0.75, 0.75)])
def test_bayes_accuracy(rho, expected):
    assert bayes_accuracy(rho) == expected


def test_bayes_accuracy_range():
    with pytest.raises(SynthError):
        bayes_accuracy(0.3)


def _tiny_grids():
    g = ParamGrid(max_depth=(2,), min_samples_leaf=(5,), feature_subset_rule=("all",), n_trees=(10,))
    return {"lrf": g, "grf": g, "gdt": ParamGrid(max_depth=(2,), feature_subset_rule=("all",), n_trees=(1,))}


def test_single_cell_sweep():
    cfg = SynthConfig(n_samples=200, n_noise=1, seed=0)
    result = run_sweep([1.0], cfg, classifiers=("lrf",), n_repeats=1, grids=_tiny_grids(), n_folds=2)
    assert len(result.cells) == 1
    cell = result.cells[0]
    assert cell.classifier == "lrf" and 0.0 <= cell.accuracy <= 1.0
    assert cell.importance.shape == (3,)


def test_sweep_csv_row_count(tmp_path):
    cfg = SynthConfig(n_samples=150, n_noise=1, seed=1)
    result = run_sweep(
        [0.5, 1.0], cfg, classifiers=("lrf", "gdt"), n_repeats=2, grids=_tiny_grids(), n_folds=2
    )
    path = tmp_path / "sweep.csv"
    synthgen.sweep_to_csv(result, path)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 1 + 2 * 2 * 2
    summary = synthgen.sweep_summary(result)
    assert len(summary["cells"]) == 4


def test_sweep_repeats_share_dataset_across_classifiers():
    cfg = SynthConfig(n_samples=150, n_noise=1, seed=3)
    result = run_sweep(
        [1.0], cfg, classifiers=("lrf", "grf"), n_repeats=2, grids=_tiny_grids(), n_folds=2
    )
    # paired design: both classifiers see repeats 0 and 1
    seen = {(c.classifier, c.repeat) for c in result.cells}
    assert seen == {("lrf", 0), ("lrf", 1), ("grf", 0), ("grf", 1)}
