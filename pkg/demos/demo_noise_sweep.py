"""Accuracy as a function of the signal-to-noise level rho.

The generator's label agrees with the junction oracle with probability rho,
so no classifier can beat rho on held-out data.  This sweep compares a
lookahead forest, a greedy forest and a single greedy tree on a small grid
(scaled down from the full experiment so it finishes in about a minute).

Run: python3 demos/demo_noise_sweep.py
"""

from lookforest import ParamGrid, SynthConfig, run_sweep


def main():
    grids = {
        "lrf": ParamGrid(max_depth=(2,), feature_subset_rule=("all",), n_trees=(30,)),
        "grf": ParamGrid(max_depth=(2, 4), feature_subset_rule=("sqrt",), n_trees=(30,)),
        "gdt": ParamGrid(max_depth=(4,), feature_subset_rule=("all",), n_trees=(1,)),
    }
    rho_grid = [0.5, 0.65, 0.8, 1.0]
    cfg = SynthConfig(n_samples=600, n_noise=4, seed=11)
    result = run_sweep(rho_grid, cfg, n_repeats=3, grids=grids, n_folds=3)

    print(f"{'rho':>5} {'bayes':>6} {'lrf':>7} {'grf':>7} {'gdt':>7}")
    for rho in rho_grid:
        row = [result.mean_accuracy(rho, clf) for clf in ("lrf", "grf", "gdt")]
        print(f"{rho:>5.2f} {rho:>6.2f} " + " ".join(f"{a:>7.3f}" for a in row))

    print("\nmean importance of the two junction drivers (rho = 0.8):")
    for clf in ("lrf", "grf"):
        imp = result.mean_importance(0.8, clf)
        print(f"  {clf}: drivers {imp[:2].sum():.2f}, distractors {imp[2:].sum():.2f}")


if __name__ == "__main__":
    main()
