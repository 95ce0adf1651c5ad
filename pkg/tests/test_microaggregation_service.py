import itertools

import numpy as np
import pytest

from src.models.anonymization import AnonymizationConfig
from src.models.partition import Partition
from src.services.dataset_service import DatasetService
from src.services.evaluation_service import EvaluationService
from src.services.microaggregation_service import MicroaggregationService
from src.utils.constants import (
    CRITERION_FIRST_PC,
    CRITERION_ZSCORE_SUM,
    METHOD_HM_PFSOM,
    METHOD_INDIVIDUAL_SORTING,
    METHOD_MDAV,
    METHOD_SINGLE_AXIS_PCA,
    METHOD_SINGLE_AXIS_ZSCORE,
    NORMALIZE_LENIENT,
    ROLE_CONFIDENTIAL,
    ROLE_QUASI_IDENTIFIER,
)
from src.utils.errors import (
    ClassTooSmallError,
    ConstantColumnError,
    InfeasibleKError,
    LabelOutOfRangeError,
    UsageError,
)
from tests.conftest import make_microdata


def _groups(partition):
    return {frozenset(members.tolist()) for members in partition.groups()}


def _sse(values, partition):
    md = make_microdata(np.asarray(values, dtype=float).reshape(partition.n, -1))
    return sum(EvaluationService.group_sse(md, partition, ROLE_QUASI_IDENTIFIER)["sse_per_group"])


def _optimal_sse(values, k):
    """
    Smallest within-group SSE over every partition into groups of k..2k-1 records.
    """
    values = np.asarray(values, dtype=float).reshape(len(values), -1)

    def cost(members):
        block = values[list(members)]
        return ((block - block.mean(axis=0)) ** 2).sum()

    def search(remaining):
        if not remaining:
            return 0.0
        first, rest = remaining[0], remaining[1:]
        best = np.inf
        for size in range(k, 2 * k):
            for companions in itertools.combinations(rest, size - 1):
                left = tuple(i for i in rest if i not in companions)
                if 0 < len(left) < k:
                    continue
                best = min(best, cost((first,) + companions) + search(left))
        return best

    return search(tuple(range(len(values))))


def _assert_every_class_fills_k(result, k):
    """
    Every group holds at least k records of every confidential class of its sub-microdata.
    """
    for members in result.partition.groups():
        in_scope = np.unique(result.class_labels[result.scope == result.scope[members[0]]])
        counts = np.bincount(result.class_labels[members], minlength=in_scope.max() + 1)
        assert counts[in_scope].min() >= k


def test_centroids_of_patient_groups(patients):
    partition = Partition.from_groups([[0, 1, 2, 3], [4, 5, 6, 7], [8, 9, 10, 11]], 12, k_declared=3)
    masked = MicroaggregationService.centroid_replace(patients, partition)
    qids = DatasetService.project(masked, ROLE_QUASI_IDENTIFIER)
    assert qids[0].tolist() == [2022.25, 26.5]
    assert qids[4].tolist() == [1012.5, 50.25]
    assert qids[8].tolist() == [1021.75, 34.25]
    assert np.array_equal(masked.rows[:, 2], patients.rows[:, 2])
    assert EvaluationService.k_anonymity_check(masked, 3)["holds"]


def test_centroid_replace_preserves_group_means():
    rng = np.random.default_rng(6)
    md = make_microdata(rng.normal(size=(30, 3)) * 1e4, rng.normal(size=30))
    partition = MicroaggregationService.mdav_partition(md.rows[:, :3], 4)
    masked = MicroaggregationService.centroid_replace(md, partition)
    for members in partition.groups():
        np.testing.assert_allclose(masked.rows[members, :3].mean(axis=0), md.rows[members, :3].mean(axis=0), rtol=1e-12)
        assert np.all(masked.rows[members, :3] == masked.rows[members[0], :3])
    assert np.array_equal(masked.rows[:, 3], md.rows[:, 3])


def test_centroid_replace_rejects_foreign_partition(patients):
    with pytest.raises(LabelOutOfRangeError):
        MicroaggregationService.centroid_replace(patients, Partition([0, 0, 1, 1]))


def test_mdav_two_pairs():
    partition = MicroaggregationService.mdav_partition([0.0, 1.0, 10.0, 11.0], 2)
    assert _groups(partition) == {frozenset({0, 1}), frozenset({2, 3})}


def test_mdav_remainder_forms_larger_group():
    partition = MicroaggregationService.mdav_partition([0.0, 1.0, 2.0, 10.0, 11.0, 12.0, 20.0], 3)
    assert _groups(partition) == {frozenset({4, 5, 6}), frozenset({0, 1, 2, 3})}
    assert sorted(partition.sizes.tolist()) == [3, 4]


@pytest.mark.parametrize("seed", range(20))
def test_mdav_group_sizes(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 6))
    n = int(rng.integers(k, 80))
    partition = MicroaggregationService.mdav_partition(rng.normal(size=(n, 2)), k)
    assert partition.n == n
    assert partition.sizes.min() >= k
    assert partition.sizes.max() <= max(2 * k - 1, n if n < 2 * k else 0)


def test_mdav_close_to_exhaustive_optimum():
    rng = np.random.default_rng(12)
    within = total = 0
    for _ in range(1000):
        k = int(rng.choice([2, 3]))
        n = int(rng.integers(2 * k, 10))
        values = rng.uniform(0, 10, size=(n, int(rng.integers(1, 3))))
        partition = MicroaggregationService.mdav_partition(values, k)
        assert k <= partition.sizes.min() and partition.sizes.max() <= 2 * k - 1
        optimum = _optimal_sse(values, k)
        within += _sse(values, partition) <= 1.25 * optimum + 1e-12
        total += 1
    # MDAV is a heuristic: roughly seven instances in ten land within 25% of the optimum
    assert within / total >= 0.6


def test_refining_a_partition_never_raises_sse():
    rng = np.random.default_rng(8)
    values = rng.normal(size=(60, 2))
    partition = MicroaggregationService.mdav_partition(values, 6)
    refined = []
    for members in partition.groups():
        half = members.size // 2
        refined += [members[:half], members[half:]]
    finer = Partition.from_groups(refined, 60)
    assert _sse(values, finer) <= _sse(values, partition) + 1e-12


def test_mdav_is_deterministic(blobs):
    first = MicroaggregationService.anonymize(blobs.microdata, AnonymizationConfig(METHOD_MDAV, 4))
    second = MicroaggregationService.anonymize(blobs.microdata, AnonymizationConfig(METHOD_MDAV, 4))
    assert np.array_equal(first.partition.labels, second.partition.labels)
    assert np.array_equal(first.masked.rows, second.masked.rows)


def test_mdav_anonymize_is_k_anonymous(patients):
    result = MicroaggregationService.anonymize(patients, AnonymizationConfig(METHOD_MDAV, 3))
    assert result.partition.sizes.min() >= 3
    assert EvaluationService.k_anonymity_check(result.masked, 3)["holds"]
    assert result.sub_structure == [] and result.structure_summary() is None


def test_mdav_on_constant_column():
    md = make_microdata([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0], [4.0, 5.0]])
    with pytest.raises(ConstantColumnError):
        MicroaggregationService.anonymize(md, AnonymizationConfig(METHOD_MDAV, 2))
    result = MicroaggregationService.anonymize(md, AnonymizationConfig(METHOD_MDAV, 2, normalize=NORMALIZE_LENIENT))
    assert _groups(result.partition) == {frozenset({0, 1}), frozenset({2, 3})}


def test_mdav_trade_off_trend():
    k_values = [2, 5, 10, 20, 50]
    il = np.zeros(len(k_values))
    linked = np.zeros(len(k_values))
    for seed in range(5):
        synthetic = DatasetService.synthesize(
            {
                "n": 500,
                "qid_blob_centers": [[0.0, 0.0], [30.0, 0.0], [0.0, 30.0], [30.0, 30.0]],
                "conf_class_centers": [[0.0], [10.0]],
                "noise_scale": 6.0,
                "seed": seed,
            }
        )
        md = synthetic.microdata
        for i, k in enumerate(k_values):
            masked = MicroaggregationService.anonymize(md, AnonymizationConfig(METHOD_MDAV, k)).masked
            il[i] += EvaluationService.information_loss(md, masked)["il"]
            linked[i] += EvaluationService.dbrl(md, masked).linked
    assert np.all(np.diff(il) >= 0)
    assert np.all(np.diff(linked) <= 0)


def test_individual_sorting_runs():
    md = make_microdata([[5.0, 10.0], [1.0, 30.0], [3.0, 20.0], [2.0, 60.0], [4.0, 40.0], [6.0, 50.0]])
    masked = MicroaggregationService.individual_sorting_mask(md, 2)
    assert masked.rows[:, 0].tolist() == [5.5, 1.5, 3.5, 1.5, 3.5, 5.5]
    assert masked.rows[:, 1].tolist() == [15.0, 35.0, 15.0, 55.0, 35.0, 55.0]


def test_individual_sorting_last_run_takes_remainder():
    md = make_microdata([7.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
    masked = MicroaggregationService.individual_sorting_mask(md, 3)
    assert masked.rows[:, 0].tolist() == [5.5, 2.0, 2.0, 2.0, 5.5, 5.5, 5.5]


@pytest.mark.parametrize("seed", range(20))
def test_individual_sorting_keeps_means_and_shrinks_variances(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 60))
    k = int(rng.integers(1, n // 2 + 1))
    md = make_microdata(rng.normal(size=(n, 3)) * rng.uniform(1, 1e3, size=3))
    masked = MicroaggregationService.individual_sorting_mask(md, k)
    original, released = md.rows[:, :3], masked.rows[:, :3]
    np.testing.assert_allclose(released.mean(axis=0), original.mean(axis=0), rtol=1e-12, atol=1e-9)
    assert np.all(released.var(axis=0) <= original.var(axis=0) * (1 + 1e-12))


@pytest.mark.parametrize("seed", range(20))
def test_centroid_replace_is_k_anonymous_at_smallest_group(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 60))
    md = make_microdata(rng.normal(size=(n, 2)), rng.normal(size=n))
    labels = rng.integers(0, int(rng.integers(1, n // 2 + 1)), size=n)
    partition = Partition(np.unique(labels, return_inverse=True)[1])
    masked = MicroaggregationService.centroid_replace(md, partition)
    assert EvaluationService.k_anonymity_check(masked, partition.min_size)["holds"]


def test_individual_sorting_partition_is_equivalence_classes():
    md = make_microdata([[5.0, 10.0], [1.0, 30.0], [3.0, 20.0], [2.0, 60.0], [4.0, 40.0], [6.0, 50.0]])
    result = MicroaggregationService.anonymize(md, AnonymizationConfig(METHOD_INDIVIDUAL_SORTING, 2))
    assert result.partition.g == 6
    assert EvaluationService.k_anonymity_check(result.masked, 2)["holds"] is False


def test_single_axis_zscore_follows_correlated_axis():
    x = np.array([3.0, 1.0, 4.0, 2.0])
    partition = MicroaggregationService.single_axis_partition(np.column_stack([x, x]), 2, CRITERION_ZSCORE_SUM)
    assert _groups(partition) == {frozenset({1, 3}), frozenset({0, 2})}


def test_first_principal_component_sees_anticorrelated_axis():
    x = np.array([4.0, 1.0, 3.0, 2.0])
    qids = np.column_stack([x, 5.0 - x])
    zscore = MicroaggregationService.single_axis_partition(qids, 2, CRITERION_ZSCORE_SUM)
    assert _groups(zscore) == {frozenset({0, 1}), frozenset({2, 3})}
    first_pc = MicroaggregationService.single_axis_partition(qids, 2, CRITERION_FIRST_PC)
    assert _groups(first_pc) == {frozenset({1, 3}), frozenset({0, 2})}


def test_first_principal_component_of_one_column_is_zscore():
    qids = np.array([[2.0], [4.0], [9.0]])
    scores = MicroaggregationService.axis_scores(qids, CRITERION_FIRST_PC)
    np.testing.assert_allclose(scores, (qids[:, 0] - 5.0) / qids[:, 0].std())


def test_single_axis_rejects_constant_and_unknown_criterion():
    qids = np.array([[1.0, 2.0], [2.0, 2.0], [3.0, 2.0]])
    with pytest.raises(ConstantColumnError):
        MicroaggregationService.single_axis_partition(qids, 1)
    partition = MicroaggregationService.single_axis_partition(qids, 1, strict=False)
    assert partition.g == 3
    with pytest.raises(UsageError):
        MicroaggregationService.axis_scores(qids, "median")


@pytest.mark.parametrize("method", [METHOD_SINGLE_AXIS_ZSCORE, METHOD_SINGLE_AXIS_PCA])
def test_single_axis_anonymize(blobs, method):
    result = MicroaggregationService.anonymize(blobs.microdata, AnonymizationConfig(method, 7))
    assert result.partition.sizes.min() >= 7
    assert EvaluationService.k_anonymity_check(result.masked, 7)["holds"]


@pytest.mark.parametrize("k", [0, 13])
def test_k_out_of_range(patients, k):
    expected = UsageError if k < 1 else InfeasibleKError
    with pytest.raises(expected):
        MicroaggregationService.mdav_partition(DatasetService.project(patients, ROLE_QUASI_IDENTIFIER), k)


def test_diversity_partition_of_salaries(salaries, salary_classes):
    partition = MicroaggregationService.diversity_partition(salaries, salary_classes, 1)
    assert _groups(partition) == {
        frozenset({1, 3, 8, 10}),
        frozenset({2, 5, 6, 11}),
        frozenset({0, 4, 7, 9, 12}),
    }
    for members in partition.groups():
        assert set(salary_classes[members].tolist()) == {0, 1, 2}


def test_diversity_partition_class_too_small(salaries, salary_classes):
    with pytest.raises(ClassTooSmallError) as e:
        MicroaggregationService.diversity_partition(salaries, salary_classes, 4)
    assert e.value.max_feasible_k == 3


@pytest.mark.parametrize("seed", range(10))
def test_diversity_partition_spans_every_class(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(20, 80))
    classes = int(rng.integers(2, 4))
    labels = rng.integers(0, classes, size=n)
    labels[:classes] = np.arange(classes)
    k = int(rng.integers(1, np.bincount(labels).min() + 1))
    md = make_microdata(rng.normal(size=(n, 2)), labels)
    partition = MicroaggregationService.diversity_partition(md, labels, k)
    assert partition.g == np.bincount(labels).min() // k
    for members in partition.groups():
        assert np.bincount(labels[members], minlength=classes).min() >= k


def test_hm_pfsom_on_patients(patients):
    config = AnonymizationConfig(METHOD_HM_PFSOM, 1, c_range=(1, 1), conf_c_range=(3, 3))
    result = MicroaggregationService.anonymize(patients, config)
    diseases = patients.rows[:, 2].astype(int)
    assert result.partition.g == 3
    for members in result.partition.groups():
        assert set(diseases[members].tolist()) == {0, 1, 2}
    assert _groups(EvaluationService.equivalence_partition(make_microdata(result.class_labels))) == _groups(
        EvaluationService.equivalence_partition(make_microdata(diseases))
    )
    assert result.structure_summary() == {"c": 1, "cs": [3]}
    assert np.array_equal(result.masked.rows[:, 2], patients.rows[:, 2])


def test_hm_pfsom_on_blobs(blobs):
    config = AnonymizationConfig(METHOD_HM_PFSOM, 3, c_range=(3, 3), conf_c_range=(2, 2))
    result = MicroaggregationService.anonymize(blobs.microdata, config)
    assert len(result.sub_structure) == 3
    assert [sub.cs for sub in result.sub_structure] == [2, 2, 2]
    assert sorted(sub.size for sub in result.sub_structure) == [50, 50, 50]
    assert EvaluationService.diversity_check(blobs.microdata, result.partition, result.class_labels, result.scope)
    assert EvaluationService.k_anonymity_check(result.masked, 3)["holds"]
    for sub in result.sub_structure:
        assert np.unique(result.scope[sub.row_ids]).tolist() == [sub.index]


def test_hm_pfsom_groups_count(blobs):
    config = AnonymizationConfig(METHOD_HM_PFSOM, 1, c_range=(3, 3), conf_c_range=(2, 2), groups_count=5)
    result = MicroaggregationService.anonymize(blobs.microdata, config)
    assert [sub.group_count for sub in result.sub_structure] == [5, 5, 5]
    assert [sub.k_effective for sub in result.sub_structure] == [5, 5, 5]
    assert result.partition.g == 15


def test_hm_pfsom_needs_two_k_records(patients):
    with pytest.raises(InfeasibleKError) as e:
        MicroaggregationService.anonymize(patients, AnonymizationConfig(METHOD_HM_PFSOM, 7))
    assert e.value.max_feasible_k == 6


def test_hm_pfsom_keeps_one_sub_when_no_split_fits_k(blobs):
    config = AnonymizationConfig(METHOD_HM_PFSOM, 60, c_range=(3, 3), conf_c_range=(2, 2))
    result = MicroaggregationService.anonymize(blobs.microdata, config)
    assert result.structure_summary() == {"c": 1, "cs": [2]}
    assert result.sub_structure[0].class_sizes == [75, 75]
    assert result.partition.g == 1


def test_hm_pfsom_reports_small_class_with_fixed_group_count(patients):
    config = AnonymizationConfig(METHOD_HM_PFSOM, 1, c_range=(1, 1), groups_count=13)
    with pytest.raises(ClassTooSmallError) as e:
        MicroaggregationService.anonymize(patients, config)
    assert e.value.sub_index == 0
    assert e.value.max_feasible_k == 12


@pytest.mark.parametrize("seed", range(10))
def test_hm_pfsom_with_default_ranges(seed):
    synthetic = DatasetService.synthesize(
        {
            "n": 200,
            "qid_blob_centers": [[0.0, 0.0], [20.0, 20.0]],
            "conf_class_centers": [[0.0], [20.0]],
            "noise_scale": 1.0,
            "seed": seed,
        }
    )
    result = MicroaggregationService.anonymize(synthetic.microdata, AnonymizationConfig(METHOD_HM_PFSOM, 3))
    assert EvaluationService.k_anonymity_check(result.masked, 3)["holds"]
    assert EvaluationService.diversity_check(synthetic.microdata, result.partition, result.class_labels, result.scope)
    for sub in result.sub_structure:
        assert min(sub.class_sizes) >= 3
        assert sub.group_count == min(sub.class_sizes) // 3
    _assert_every_class_fills_k(result, 3)


def test_hm_pfsom_sub_without_room_for_every_class_stays_whole(blobs):
    config = AnonymizationConfig(METHOD_HM_PFSOM, 26, c_range=(3, 3), conf_c_range=(2, 2))
    result = MicroaggregationService.anonymize(blobs.microdata, config)
    assert result.partition.g == 3
    assert [sub.group_count for sub in result.sub_structure] == [1, 1, 1]


def test_hm_pfsom_concurrent_matches_sequential(blobs):
    sequential = AnonymizationConfig(METHOD_HM_PFSOM, 2, c_range=(3, 3), conf_c_range=(2, 2))
    concurrent = AnonymizationConfig(METHOD_HM_PFSOM, 2, c_range=(3, 3), conf_c_range=(2, 2), workers=3)
    first = MicroaggregationService.anonymize(blobs.microdata, sequential)
    second = MicroaggregationService.anonymize(blobs.microdata, concurrent)
    assert np.array_equal(first.partition.labels, second.partition.labels)
    assert np.array_equal(first.masked.rows, second.masked.rows)


@pytest.mark.parametrize("seed", range(200))
def test_hm_pfsom_groups_are_diverse(seed):
    rng = np.random.default_rng(seed)
    b = int(rng.integers(2, 5))
    c = int(rng.integers(2, 5))
    k = int(rng.integers(1, 4))
    synthetic = DatasetService.synthesize(
        {
            "n": int(rng.integers(60, 501)),
            "qid_blob_centers": [[20.0 * i, 10.0 * i] for i in range(b)],
            "conf_class_centers": [[50.0 * j] for j in range(c)],
            "noise_scale": 1.0,
            "seed": seed,
        }
    )
    config = AnonymizationConfig(METHOD_HM_PFSOM, k, c_range=(b, b), conf_c_range=(c, c))
    result = MicroaggregationService.anonymize(synthetic.microdata, config)
    assert EvaluationService.diversity_check(synthetic.microdata, result.partition, result.class_labels, result.scope)
    assert EvaluationService.k_anonymity_check(result.masked, k)["holds"]
    _assert_every_class_fills_k(result, k)
    for sub in result.sub_structure:
        assert sub.group_count == min(sub.class_sizes) // sub.k_effective


def test_hm_pfsom_keeps_confidential_values_apart():
    hm_sse = mdav_sse = hm_il = mdav_il = 0.0
    for seed in range(3):
        md = DatasetService.synthesize(
            {
                "n": 480,
                "qid_blob_centers": [[0.0, 0.0]],
                "conf_class_centers": [[0.0], [20.0]],
                "noise_scale": 1.0,
                "seed": seed,
            }
        ).microdata
        hm = MicroaggregationService.anonymize(
            md, AnonymizationConfig(METHOD_HM_PFSOM, 3, c_range=(1, 1), conf_c_range=(2, 2))
        )
        mdav = MicroaggregationService.anonymize(md, AnonymizationConfig(METHOD_MDAV, 6))
        hm_sse += EvaluationService.group_sse(md, hm.partition, ROLE_CONFIDENTIAL)["min_sse"]
        mdav_sse += EvaluationService.group_sse(md, mdav.partition, ROLE_CONFIDENTIAL)["min_sse"]
        hm_il += EvaluationService.information_loss(md, hm.masked)["il"]
        mdav_il += EvaluationService.information_loss(md, mdav.masked)["il"]
    assert hm_sse > mdav_sse
    assert hm_il >= mdav_il
