import numpy as np
import pytest

from gfee import (
    EvalProtocol,
    as_labels,
    cross_validate,
    cross_validate_embedding,
    fuse,
    knn_predict,
    named_spec,
    sample_collection,
    stratified_folds,
)


def test_knn_majority():
    train = [(0, 0), (1, 1), (1, 0)]
    labels = [1, 2, 2]
    assert knn_predict(train, labels, (0.9, 0.9), k=3) == 2


def test_knn_single_point():
    assert knn_predict([(5.0, 5.0)], [3], (0.0, 0.0), k=1) == 3


def test_knn_duplicated_query_location():
    # brute-force order: three zero-distance label-1 points beat two far label-2
    train = [(1, 1), (1, 1), (1, 1), (9, 9), (9, 8)]
    labels = [1, 1, 1, 2, 2]
    assert knn_predict(train, labels, (1, 1), k=5) == 1


def test_knn_vote_tie_inverse_distance():
    # 2 votes each; class 2's neighbors are closer, so it wins the tie
    train = [(0, 0), (0, 4), (1, 0), (1, 4)]
    labels = [1, 1, 2, 2]
    assert knn_predict(train, labels, (1.5, 2.0), k=4) == 2


def test_knn_full_tie_smallest_class_index():
    train = [(0, 1), (0, -1)]
    labels = [2, 1]
    # equal distance, equal votes, equal inverse-distance: class 1 wins
    assert knn_predict(train, labels, (0, 0), k=2) == 1


def test_knn_distance_tie_stable_by_training_index():
    # four equidistant points; k=3 keeps the first three by training order
    train = [(1, 0), (0, 1), (-1, 0), (0, -1)]
    labels = [1, 1, 2, 2]
    assert knn_predict(train, labels, (0, 0), k=3) == 1


def test_knn_batch_queries():
    train = [(0, 0), (10, 10)]
    labels = [1, 2]
    preds = knn_predict(train, labels, [(1, 1), (9, 9)], k=1)
    assert list(preds) == [1, 2]


def test_knn_errors():
    with pytest.raises(ValueError, match="empty training"):
        knn_predict(np.empty((0, 2)), [], (0, 0), k=1)
    with pytest.raises(ValueError, match="exceeds"):
        knn_predict([(0, 0)], [1], (0, 0), k=2)


def test_protocol_validation():
    with pytest.raises(ValueError):
        EvalProtocol(folds=1)
    with pytest.raises(ValueError):
        EvalProtocol(replicates=0)
    with pytest.raises(ValueError):
        EvalProtocol(seed=-1)


def test_stratified_folds_balanced():
    rng = np.random.default_rng(0)
    y = np.array([1] * 20 + [2] * 10 + [0] * 5)
    assign = stratified_folds(y, 5, rng)
    assert np.all(assign[y == 0] == -1)
    for k in (1, 2):
        sizes = np.bincount(assign[y == k], minlength=5)
        assert sizes.max() - sizes.min() <= 1


def test_cv_perfectly_separated_is_zero():
    rng = np.random.default_rng(1)
    points = np.vstack([rng.normal(0, 0.1, (30, 2)), rng.normal(10, 0.1, (30, 2))])
    y = as_labels([1] * 30 + [2] * 30)
    report = cross_validate_embedding(points, y, EvalProtocol(folds=5, replicates=3, seed=4))
    assert report.mean_error == 0.0
    assert report.std_error == 0.0


def test_cv_random_labels_near_chance():
    rng = np.random.default_rng(2)
    points = rng.normal(0, 1.0, (400, 3))
    y = as_labels(rng.permutation(np.repeat([1, 2], 200)))
    report = cross_validate_embedding(points, y, EvalProtocol(folds=5, replicates=5, seed=7))
    assert abs(report.mean_error - 0.5) < 0.05


def test_cv_bounds_and_confusion_counts():
    rng = np.random.default_rng(3)
    points = rng.normal(0, 1, (60, 2))
    y = as_labels(rng.permutation([1] * 30 + [2] * 20 + [3] * 10))
    proto = EvalProtocol(folds=5, replicates=4, seed=1)
    report = cross_validate_embedding(points, y, proto)
    assert 0.0 <= report.mean_error <= 1.0
    assert report.std_error >= 0.0
    # every labeled vertex is evaluated once per replicate
    assert np.array_equal(report.confusion.sum(axis=1), np.array([30, 20, 10]) * 4)
    assert report.per_fold.shape == (4, 5)


def test_cv_deterministic():
    spec = named_spec("sim1")
    coll, y, _ = sample_collection(spec, 200, 5)
    proto = EvalProtocol(folds=5, replicates=2, seed=11)
    a = cross_validate(coll, y, proto)
    b = cross_validate(coll, y, proto)
    assert a.mean_error == b.mean_error
    assert np.array_equal(a.per_replicate, b.per_replicate)
    assert np.array_equal(a.confusion, b.confusion)
    assert a.to_json() == b.to_json()


def test_cv_reembeds_per_fold():
    # wiring check: the leak-free path must differ from embedding once with
    # all labels and reusing that matrix across folds
    spec = named_spec("sim1")
    coll, y, _ = sample_collection(spec, 500, 123)
    proto = EvalProtocol(folds=5, replicates=3, seed=9)
    sub = coll.subset([0])
    leak_free = cross_validate(sub, y, proto)
    leaky = cross_validate_embedding(fuse(sub, y).Z, y, proto)
    assert leak_free.mean_error != leaky.mean_error
    assert leak_free.mean_error - leaky.mean_error > 0.003  # leak is optimistic


def test_cv_requires_labels():
    with pytest.raises(ValueError, match="labeled"):
        cross_validate_embedding(np.zeros((4, 2)), as_labels([0, 0, 0, 0], K=1),
                                 EvalProtocol(folds=2, replicates=1))


def test_report_json_shape():
    rng = np.random.default_rng(4)
    points = rng.normal(0, 1, (40, 2))
    y = as_labels(rng.permutation([1] * 20 + [2] * 20))
    report = cross_validate_embedding(points, y, EvalProtocol(folds=4, replicates=2, seed=0))
    obj = report.to_dict()
    assert set(obj) == {"mean_error", "std_error", "per_replicate", "confusion"}
    assert len(obj["per_replicate"]) == 2
    assert len(obj["confusion"]) == 2 and len(obj["confusion"][0]) == 2
