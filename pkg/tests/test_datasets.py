import numpy as np
import pytest

from edgecert import (
    DatasetSpec,
    dataset_stats,
    generate,
    has_motif,
    make_graph,
    motif_graph,
    motif_match,
    motif_size,
    save_dataset,
)


SMALL_HOUSE_SPEC = DatasetSpec(
    n_graphs=24, motif="house", base_nodes_min=8, base_nodes_max=12, seed=5
)


@pytest.fixture(scope="module")
def house_dataset():
    return generate(SMALL_HOUSE_SPEC)


class TestGenerate:
    def test_empty_spec(self):
        assert generate(DatasetSpec(n_graphs=0, seed=1)) == []

    def test_labels_match_motif_presence(self, house_dataset):
        motif = motif_graph("house")
        for g in house_dataset:
            assert g.label == (1 if has_motif(g, motif) else 0)

    def test_positives_ground_truth_is_a_match(self, house_dataset):
        motif = motif_graph("house")
        for g in house_dataset:
            if g.label == 1:
                assert g.gt_explanation in motif_match(g, motif)
                assert len(g.gt_explanation) == motif_size("house")
            else:
                assert g.gt_explanation == ()

    def test_motif_nodes_are_appended_last(self, house_dataset):
        # ground-truth edges live on the highest node indices by construction
        for g in house_dataset:
            if g.label == 1:
                lowest_motif_node = min(u for u, v in g.gt_explanation)
                assert lowest_motif_node >= g.num_nodes - 5

    def test_positive_fraction(self, house_dataset):
        positives = sum(1 for g in house_dataset if g.label == 1)
        assert positives == round(24 * 0.7)

    def test_deterministic_and_stable_bytes(self, tmp_path):
        a = generate(SMALL_HOUSE_SPEC)
        b = generate(SMALL_HOUSE_SPEC)
        assert a == b
        pa, pb = tmp_path / "a.json", tmp_path / "b.json"
        save_dataset(a, str(pa))
        save_dataset(b, str(pb))
        assert pa.read_bytes() == pb.read_bytes()

    def test_seed_changes_output(self):
        alt = generate(DatasetSpec(n_graphs=24, seed=6))
        assert alt != generate(SMALL_HOUSE_SPEC)

    def test_size_band_at_defaults(self, house_dataset):
        stats = dataset_stats(house_dataset)
        assert 11.0 <= stats["avg_nodes"] <= 17.0
        assert stats["avg_gt_size"] == 6.0

    def test_one_hot_degree_features(self, house_dataset):
        g = house_dataset[0]
        assert g.features.shape == (g.num_nodes, 10)
        assert np.all(g.features.sum(axis=1) == 1.0)
        deg = np.zeros(g.num_nodes)
        for u, v in g.edges:
            deg[u] += 1
            deg[v] += 1
        for node in range(g.num_nodes):
            assert g.features[node, min(int(deg[node]), 9)] == 1.0

    def test_constant_features(self):
        graphs = generate(
            DatasetSpec(n_graphs=4, feature_mode="constant", feature_dim=3, seed=2)
        )
        for g in graphs:
            assert np.all(g.features == 1.0)
            assert g.features.shape[1] == 3

    @pytest.mark.parametrize("motif", ["diamond", "wheel"])
    def test_other_motifs(self, motif):
        graphs = generate(DatasetSpec(n_graphs=6, motif=motif, seed=3))
        shape = motif_graph(motif)
        for g in graphs:
            assert g.label == (1 if has_motif(g, shape) else 0)
            if g.label == 1:
                assert len(g.gt_explanation) == motif_size(motif)

    def test_invalid_spec_params(self):
        with pytest.raises(ValueError):
            DatasetSpec(n_graphs=4, motif="pentagon")
        with pytest.raises(ValueError):
            DatasetSpec(n_graphs=4, positive_fraction=1.0)
        with pytest.raises(ValueError):
            DatasetSpec(n_graphs=4, base_density=0.0)
        with pytest.raises(ValueError):
            DatasetSpec(n_graphs=-1)

    def test_unattainable_base_errors(self):
        # density ~1 on 8+ nodes always contains a house, so motif-free
        # resampling must give up with a clear message
        spec = DatasetSpec(n_graphs=1, base_density=0.99, seed=0)
        with pytest.raises(RuntimeError, match="motif-free"):
            generate(spec)


class TestStats:
    def test_single_triangle(self):
        g = make_graph(3, [(0, 1), (0, 2), (1, 2)], label=0)
        stats = dataset_stats([g])
        assert stats["avg_nodes"] == 3.0
        assert stats["avg_edges"] == 3.0

    def test_mean_of_two(self):
        a = make_graph(4, [(0, 1)], label=0)
        b = make_graph(6, [(0, 1)], label=0)
        assert dataset_stats([a, b])["avg_nodes"] == 5.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            dataset_stats([])

    def test_repeatable(self, house_dataset):
        assert dataset_stats(house_dataset) == dataset_stats(house_dataset)
