from splitproj.experiments import ExperimentConfig, run_exp1, run_exp2, run_exp3, run_three_lines
from splitproj.plots import RENDERERS


def test_every_renderer_writes_a_png(tmp_path):
    cfg = ExperimentConfig(seed=6, n_instances=2, n_starts=2, lambda_grid=(0.4, 0.8))
    tables = {
        "exp1": run_exp1(cfg),
        "exp2": run_exp2(cfg),
        "exp3": run_exp3(ExperimentConfig(seed=6, n_instances=1, n_starts=2)),
        "three-lines": run_three_lines(
            ExperimentConfig(lambda_grid=(0.5, 0.75), theta_grid=(0.3, 0.6))),
    }
    for name, table in tables.items():
        path = tmp_path / f"{name}.png"
        RENDERERS[name](table, path)
        assert path.exists()
        assert path.stat().st_size > 1000
