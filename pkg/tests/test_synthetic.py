import numpy as np
import pytest

from tastenet._util import RNG_SPLIT, derive_rng, stable_id_key
from tastenet.dataset import z_normalize
from tastenet.errors import ConfigError
from tastenet.evaluation import make_holdout_split, score_individual
from tastenet.recommender import KnnConfig, make_predictor
from tastenet.similarity import _pairwise_pearson, build_similarity_matrix, pairwise_correlation
from tastenet.synthetic import GroupSpec, SyntheticSpec, default_spec, generate_population, parse_spec_file

from conftest import make_normalized


class TestGeneratePopulation:
    def test_bit_identical_for_same_seed(self):
        spec = default_spec(seed=4, n_items=60)
        a, truth_a = generate_population(spec)
        b, truth_b = generate_population(spec)
        np.testing.assert_array_equal(a.values, b.values)
        np.testing.assert_array_equal(truth_a.latent, truth_b.latent)
        c, _ = generate_population(default_spec(seed=5, n_items=60))
        assert not np.array_equal(a.values, c.values)

    def test_density_one_rates_everything(self):
        spec = SyntheticSpec(groups=(GroupSpec("g", 3, 1.0, 0.1, 0.5),), n_items=20, n_archetypes=2, seed=0)
        m, _ = generate_population(spec)
        assert m.n_ratings == 3 * 20

    def test_group_density_is_floor_of_requested(self):
        spec = SyntheticSpec(groups=(GroupSpec("g", 4, 0.33, 0.1, 0.5),), n_items=50, n_archetypes=2, seed=1)
        m, _ = generate_population(spec)
        assert (m.rating_counts() == 16).all()  # floor(0.33 * 50)

    def test_zero_noise_single_archetype_gives_perfect_correlation(self):
        spec = SyntheticSpec(groups=(GroupSpec("g", 4, 1.0, 0.0, 0.7),), n_items=15, n_archetypes=1, seed=2)
        m, _ = generate_population(spec)
        norm = z_normalize(m)
        for j in range(1, 4):
            w, n = pairwise_correlation("g_000", f"g_{j:03d}", norm)
            assert n == 15
            assert w == pytest.approx(1.0, abs=1e-9)

    def test_mixes_are_convex(self):
        spec = default_spec(seed=6, n_items=30)
        _, truth = generate_population(spec)
        assert (truth.mixes >= 0).all()
        np.testing.assert_allclose(truth.mixes.sum(axis=1), 1.0, atol=1e-12)

    def test_too_sparse_group_rejected(self):
        spec = SyntheticSpec(groups=(GroupSpec("g", 2, 0.01, 0.1, 0.5),), n_items=20, n_archetypes=2, seed=0)
        with pytest.raises(ConfigError, match="below one rating"):
            generate_population(spec)

    def test_latent_and_ratings_agree_where_noiseless(self):
        spec = SyntheticSpec(groups=(GroupSpec("g", 3, 0.6, 0.0, 0.4),), n_items=30, n_archetypes=3, seed=9)
        m, truth = generate_population(spec)
        mask = np.isfinite(m.values)
        np.testing.assert_allclose(m.values[mask], truth.latent[mask], atol=1e-12)


class TestGeneratorOracle:
    """The planted structure fixes expected pairwise correlations; the
    realized data must agree with the model's own expectation."""

    def test_defaults_critic_like_group_is_more_consistent(self):
        spec = default_spec(seed=11, n_items=200)
        m, truth = generate_population(spec)
        norm = z_normalize(m)
        corr, overlap = _pairwise_pearson(norm.values)

        def group_rows(name):
            return np.array([i for i, g in enumerate(norm.groups) if g == name])

        stats = {}
        for name in ("critic", "amateur"):
            rows = group_rows(name)
            pair_corr = corr[np.ix_(rows, rows)][np.triu_indices(len(rows), 1)]
            observed = pair_corr[np.isfinite(pair_corr)]
            expected = np.mean(
                [truth.expected_correlation(i, j) for a, i in enumerate(rows) for j in rows[a + 1 :]]
            )
            stats[name] = (observed.mean(), expected)
        # realized means track the model expectation
        for name, (realized, expected) in stats.items():
            assert realized == pytest.approx(expected, abs=0.12)
        # and the planted consistency gap comes through
        assert stats["critic"][0] > stats["amateur"][0] + 0.2
        assert stats["critic"][1] > stats["amateur"][1] + 0.2

    def test_noise_washes_out_correlation(self):
        def mean_abs_corr(noise_sd, seed=13):
            spec = SyntheticSpec(
                groups=(GroupSpec("g", 10, 1.0, noise_sd, 0.8),), n_items=120, n_archetypes=2, seed=seed
            )
            m, _ = generate_population(spec)
            norm = z_normalize(m)
            corr, _ = _pairwise_pearson(norm.values)
            vals = corr[np.triu_indices(10, 1)]
            return np.nanmean(vals)

        assert mean_abs_corr(0.2) > 0.8
        assert abs(mean_abs_corr(40.0)) < 0.15

    def test_latent_truth_scores_at_least_as_high_as_noisy_holdout(self):
        # Scoring the same predictions against the noise-free latent
        # utilities beats scoring against noisy held-out ratings.
        spec = SyntheticSpec(
            groups=(GroupSpec("a", 8, 0.9, 0.6, 0.9), GroupSpec("b", 8, 0.9, 1.2, 0.5)),
            n_items=40,
            n_archetypes=3,
            seed=21,
        )
        m, truth = generate_population(spec)
        norm = z_normalize(m)
        latent_truth = make_normalized(
            truth.latent, groups=list(norm.groups), rater_ids=list(norm.rater_ids), item_ids=list(norm.item_ids)
        )
        cfg = KnnConfig(k=3, rho=1.0, overlap_threshold=3)
        noisy_scores, latent_scores = [], []
        for rep in range(6):
            for target in norm.rater_ids:
                rng = derive_rng(99, RNG_SPLIT, rep, stable_id_key(target))
                train, test_items = make_holdout_split(norm, target, 5, rng)
                sim = build_similarity_matrix(train, cfg.overlap_threshold)
                predictor = make_predictor(sim, train, cfg)
                noisy_scores.append(
                    score_individual(target, test_items, predictor, norm, np.random.default_rng(1))
                )
                latent_scores.append(
                    score_individual(target, test_items, predictor, latent_truth, np.random.default_rng(1))
                )
        assert np.mean(latent_scores) > np.mean(noisy_scores)


class TestSpecFile:
    def test_round_trip(self, tmp_path):
        text = """
        # two groups
        items = 50
        archetypes = 3
        seed = 12

        group.critic.count = 4
        group.critic.density = 0.5
        group.critic.noise_sd = 0.4
        group.critic.anchor_weight = 0.9
        group.amateur.count = 9
        group.amateur.density = 0.2
        group.amateur.noise_sd = 1.1
        """
        path = tmp_path / "pop.spec"
        path.write_text("\n".join(line.strip() for line in text.strip().splitlines()))
        spec = parse_spec_file(path)
        assert spec.n_items == 50
        assert spec.n_archetypes == 3
        assert spec.seed == 12
        assert [g.name for g in spec.groups] == ["critic", "amateur"]
        assert spec.groups[0].density == 0.5
        assert spec.groups[1].anchor_weight == 0.8  # default
        m, _ = generate_population(spec)
        assert m.n_raters == 13

    def test_missing_count_is_error(self, tmp_path):
        path = tmp_path / "bad.spec"
        path.write_text("group.g.density = 0.5\n")
        with pytest.raises(ConfigError, match="missing"):
            parse_spec_file(path)

    def test_bad_line_is_error(self, tmp_path):
        path = tmp_path / "bad.spec"
        path.write_text("items: 50\n")
        with pytest.raises(ConfigError, match="key = value"):
            parse_spec_file(path)

    def test_bad_group_key_is_error(self, tmp_path):
        path = tmp_path / "bad.spec"
        path.write_text("group.count = 5\n")
        with pytest.raises(ConfigError, match="group.<name>.<field>"):
            parse_spec_file(path)
