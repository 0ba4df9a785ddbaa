import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tactile_bci.core import DomainError
from tactile_bci.evaluation import (PipelineConfig, cross_validate, format_accuracy, iter_folds,
                                    stratified_folds, summarize)

from conftest import random_epochs


@settings(max_examples=40, deadline=None)
@given(counts=st.lists(st.integers(5, 40), min_size=2, max_size=5), k=st.integers(2, 5),
       seed=st.integers(0, 2**31 - 1))
def test_folds_partition_and_stratify(counts, k, seed):
    labels = np.array([f"c{i}" for i, n in enumerate(counts) for _ in range(n)], dtype=object)
    labels = labels[np.random.default_rng(seed).permutation(labels.size)]
    fold_of = stratified_folds(labels, k, np.random.default_rng(seed))
    assert set(fold_of.tolist()) == set(range(k))
    for i, n in enumerate(counts):
        per_fold = np.bincount(fold_of[labels == f"c{i}"], minlength=k)
        assert per_fold.max() - per_fold.min() <= 1
        assert per_fold.sum() == n


def test_balanced_200_trials_give_40_per_fold():
    labels = np.repeat(np.array(["fabric", "glass", "paper", "fur"], dtype=object), 50)
    fold_of = stratified_folds(labels, 5, np.random.default_rng(0))
    for k in range(5):
        in_fold = labels[fold_of == k]
        assert in_fold.size == 40
        assert all(np.sum(in_fold == lab) == 10 for lab in ("fabric", "glass", "paper", "fur"))


def test_report_fields_and_confusion_counts(rng):
    ep = random_epochs(rng, 60, 6, 250, ("a", "b", "c"))
    rep = cross_validate(ep, PipelineConfig(n_per_side=1), n_folds=3, n_repetitions=2, seed=5)
    assert len(rep.fold_accuracies) == 6
    assert rep.mean_accuracy == pytest.approx(np.mean(rep.fold_accuracies))
    assert rep.std_accuracy == pytest.approx(np.std(rep.fold_accuracies, ddof=1))
    assert [sum(row) for row in rep.confusion] == [2 * 20] * 3
    assert rep.chance_level == pytest.approx(1 / 3)
    assert rep.config_echo["n_per_side"] == 1


def test_same_seed_same_report(rng):
    ep = random_epochs(rng, 40, 5, 250)
    cfg = PipelineConfig(n_per_side=2)
    a = cross_validate(ep, cfg, n_folds=4, n_repetitions=2, seed=11)
    b = cross_validate(ep, cfg, n_folds=4, n_repetitions=2, seed=11)
    assert a == b


def test_test_fold_perturbation_leaves_models_unchanged(rng):
    ep = random_epochs(rng, 40, 5, 250)
    cfg = PipelineConfig(n_per_side=2)
    for res in iter_folds(ep, cfg, n_folds=4, n_repetitions=1, seed=2):
        data = ep.data.copy()
        data[res.test_index] = 1e3 * rng.standard_normal(data[res.test_index].shape)
        (other,) = [r for r in iter_folds(ep.with_data(data), cfg, n_folds=4, n_repetitions=1, seed=2)
                    if r.fold == res.fold]
        assert np.array_equal(other.model.lda.weights, res.model.lda.weights)
        for band in res.model.csp:
            for (_, m1), (_, m2) in zip(res.model.csp[band], other.model.csp[band]):
                assert np.array_equal(m1.filters, m2.filters)


def test_too_few_trials_per_fold(rng):
    ep = random_epochs(rng, 12, 4, 250)
    with pytest.raises(DomainError, match="fewer than the 7 folds"):
        cross_validate(ep, n_folds=7)


@pytest.mark.parametrize("mean,std,text", [(0.7095, 0.0150, "70.95(±1.50)%"),
                                           (0.6807, 0.040, "68.07(±4.00)%"),
                                           (0.5755, 0.0183, "57.55(±1.83)%")])
def test_accuracy_format(mean, std, text):
    assert format_accuracy(mean, std) == text


def test_summary_lists_recall_in_label_order(rng):
    ep = random_epochs(rng, 40, 5, 250, ("z", "a"))
    text = summarize(cross_validate(ep, PipelineConfig(n_per_side=2), n_folds=4, n_repetitions=1), "imagery")
    lines = text.splitlines()
    assert lines[0].startswith("imagery: 2-class accuracy")
    assert lines[3].split()[0] == "z" and lines[4].split()[0] == "a"
    assert lines[3].endswith("%")


@pytest.mark.slow
def test_accuracy_monotone_in_erd_depth():
    from conftest import make_epochs
    for seed in range(3):
        weak = cross_validate(make_epochs(0.2, seed)[0], seed=seed).mean_accuracy
        strong = cross_validate(make_epochs(0.6, seed)[0], seed=seed).mean_accuracy
        assert strong >= weak, (seed, weak, strong)
