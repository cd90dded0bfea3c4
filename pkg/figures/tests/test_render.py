import matplotlib
import pandas as pd
import pytest
from matplotlib.patches import FancyArrowPatch

from tastenet_figures import render
from tastenet_figures.cli import main


def dashed_line_count(ax):
    return sum(1 for line in ax.get_lines() if line.get_linestyle() == "--")


class TestCliRendersEveryKind:
    def test_plane(self, pipeline, tmp_path):
        out = tmp_path / "plane.png"
        assert main(["--kind", "plane", "--in", str(pipeline / "plane.csv"), "--out", str(out)]) == 0
        assert out.stat().st_size > 0

    def test_performance(self, pipeline, tmp_path):
        out = tmp_path / "perf.png"
        assert main(
            ["--kind", "performance", "--in", str(pipeline / "performance_aggregate.csv"), "--out", str(out), "--rho", "1"]
        ) == 0
        assert out.stat().st_size > 0

    def test_rho_sweep(self, pipeline, tmp_path):
        out = tmp_path / "sweep.png"
        assert main(
            ["--kind", "rho-sweep", "--in", str(pipeline / "performance_aggregate.csv"), "--out", str(out)]
        ) == 0
        assert out.stat().st_size > 0

    @pytest.mark.parametrize("kind,edges", [("network", "network_influence.csv"), ("network", "network_potential.csv"), ("per-item", "network_influence_item.csv")])
    def test_network_kinds(self, pipeline, tmp_path, kind, edges):
        out = tmp_path / f"{kind}_{edges}.png"
        assert main(
            [
                "--kind", kind,
                "--in", str(pipeline / edges),
                "--nodes", str(pipeline / "network_nodes.csv"),
                "--out", str(out),
            ]
        ) == 0
        assert out.stat().st_size > 0

    @pytest.mark.parametrize("variant", ["influence", "first-calls"])
    def test_homophily(self, pipeline, tmp_path, variant):
        out = tmp_path / f"homophily_{variant}.png"
        assert main(
            ["--kind", "homophily", "--in", str(pipeline / "homophily.csv"), "--out", str(out), "--variant", variant]
        ) == 0
        assert out.stat().st_size > 0


class TestHomophilyBaselines:
    def test_both_dashed_baselines_in_every_panel(self, pipeline):
        df = render.load_table(pipeline / "homophily.csv")
        fig = render.render_homophily(df, variant="influence")
        assert len(fig.axes) >= 2  # one panel per group
        for ax in fig.axes:
            assert dashed_line_count(ax) == 2, "expected the group-weight and count-weight dashed baselines"
            labels = {line.get_label() for line in ax.get_lines()}
            assert "group weight" in labels and "count weight" in labels


class TestNetworkCutoff:
    def _tables(self):
        edges = pd.DataFrame(
            {
                "source": ["a", "a", "b", "c"],
                "target": ["b", "c", "c", "a"],
                "weight": [0.04, 0.9, 0.5, 0.049999],
            }
        )
        nodes = pd.DataFrame(
            {
                "rater_id": ["a", "b", "c"],
                "group": ["x", "y", "y"],
                "potential": [1.0, 2.0, 0.5],
                "influence": [0.5, 1.5, 1.0],
            }
        )
        return edges, nodes

    def test_edges_below_cutoff_are_omitted(self):
        edges, nodes = self._tables()
        fig = render.render_network(edges, nodes, min_weight=0.05)
        arrows = [p for p in fig.axes[0].patches if isinstance(p, FancyArrowPatch)]
        assert len(arrows) == 2  # 0.9 and 0.5 survive; 0.04 and 0.049999 are dropped

    def test_cutoff_zero_keeps_everything(self):
        edges, nodes = self._tables()
        fig = render.render_network(edges, nodes, min_weight=0.0)
        arrows = [p for p in fig.axes[0].patches if isinstance(p, FancyArrowPatch)]
        assert len(arrows) == 4

    def test_isolated_nodes_still_drawn(self):
        edges, nodes = self._tables()
        nodes = pd.concat(
            [nodes, pd.DataFrame({"rater_id": ["d"], "group": ["x"], "potential": [0.0], "influence": [0.0]})],
            ignore_index=True,
        )
        fig = render.render_network(edges, nodes, min_weight=0.05)
        offsets = fig.axes[0].collections[0].get_offsets()
        assert len(offsets) == 4


class TestErrorsAndEdgeCases:
    def test_empty_performance_gives_axes_only_figure(self, tmp_path, caplog):
        path = tmp_path / "empty.csv"
        path.write_text("k,rho,pool,target_group,mean_accuracy,n_targets,repetitions\n")
        df = render.load_table(path)
        with caplog.at_level("WARNING"):
            fig = render.render_performance(df, path=str(path))
        assert any("rendering empty axes" in rec.getMessage() for rec in caplog.records)
        assert fig.axes[0].lines  # only the chance line
        assert len([l for l in fig.axes[0].lines if l.get_marker() == "o"]) == 0

    def test_schema_mismatch_names_missing_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("k,rho,pool,mean_accuracy\n1,1,all,0.5\n")
        df = render.load_table(path)
        with pytest.raises(render.SchemaError, match="target_group"):
            render.render_performance(df, path=str(path))

    def test_cli_reports_schema_error(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("k,rho,pool,mean_accuracy\n1,1,all,0.5\n")
        code = main(["--kind", "performance", "--in", str(path), "--out", str(tmp_path / "x.png")])
        assert code == 1
        assert "target_group" in capsys.readouterr().err

    def test_network_kind_requires_nodes(self, tmp_path, capsys):
        path = tmp_path / "edges.csv"
        path.write_text("source,target,weight\na,b,0.5\n")
        code = main(["--kind", "network", "--in", str(path), "--out", str(tmp_path / "x.png")])
        assert code == 1
        assert "--nodes" in capsys.readouterr().err

    def test_missing_input_reports_cleanly(self, tmp_path, capsys):
        code = main(["--kind", "plane", "--in", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "x.png")])
        assert code == 1


class TestDeterminismAndData:
    def test_identical_inputs_identical_bytes(self, pipeline, tmp_path):
        args = lambda out: [
            "--kind", "network",
            "--in", str(pipeline / "network_influence.csv"),
            "--nodes", str(pipeline / "network_nodes.csv"),
            "--out", str(out),
        ]
        assert main(args(tmp_path / "one.png")) == 0
        assert main(args(tmp_path / "two.png")) == 0
        assert (tmp_path / "one.png").read_bytes() == (tmp_path / "two.png").read_bytes()

    def test_plane_groups_are_separated(self, dense_pipeline):
        # the planted groups differ in consistency, so the same-group
        # profile clusters sit apart on the mean-similarity axis
        df = render.load_table(dense_pipeline / "plane.csv")
        same = df[df["audience"] == "same_group"].dropna(subset=["mean_weight"])
        means = same.groupby("group")["mean_weight"].mean()
        assert means["critic"] > means["amateur"] + 0.15
        fig = render.render_plane(df)
        assert fig.axes[0].collections  # scatter drawn
