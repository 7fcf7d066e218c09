# tests/test_ingest.py
import numpy as np
import pandas as pd
import pytest

from rgd_app.errors import InvalidInputError
from rgd_app.ingest import ingest_csv, parse_class_counts, write_split


@pytest.fixture
def csv_file(tmp_path):
    def _write(text, name='datos.csv'):
        path = tmp_path / name
        path.write_text(text, encoding='utf-8')
        return path
    return _write


@pytest.fixture
def two_class_csv(tmp_path):
    rng = np.random.default_rng(5)
    frame = pd.DataFrame({
        'f1': rng.normal(size=800),
        'f2': rng.uniform(-3.0, 7.0, size=800),
        'f3': np.full(800, 4.0),
        'label': np.repeat([0, 1], 400),
    })
    path = tmp_path / 'binario.csv'
    frame.to_csv(path, index=False)
    return path


def test_minmax_scaling_to_unit_interval(csv_file):
    path = csv_file("x,c,label\n2,7,a\n4,7,b\n6,7,a\n")
    result = ingest_csv(path, 'label', test_per_class={'a': 0})
    assert result.train['x'].tolist() == [0.0, 0.5, 1.0]
    assert result.train['c'].tolist() == [0.0, 0.0, 0.0]
    assert result.classes == ['a', 'b']
    assert result.train['label'].tolist() == [0, 1, 0]
    assert result.test.empty


def test_test_split_uses_train_range_and_clips(csv_file):
    path = csv_file("x,label\n0,a\n10,a\n5,b\n20,b\n")
    result = ingest_csv(path, 'label', test_per_class={'b': 1}, train_per_class={'b': 0}, seed=1)
    assert result.train['x'].tolist() == [0.0, 1.0]
    assert len(result.test) == 1
    assert 0.0 <= result.test['x'].iloc[0] <= 1.0


def test_missing_values_list_rows(csv_file):
    path = csv_file("x,label\n1,a\n,b\n3,a\n4,\n")
    with pytest.raises(InvalidInputError, match=r'\[3, 5\]'):
        ingest_csv(path, 'label')


def test_non_numeric_feature(csv_file):
    path = csv_file("x,label\n1,a\nuno,b\n3,a\n")
    with pytest.raises(InvalidInputError, match="'x'"):
        ingest_csv(path, 'label')


def test_unknown_columns_and_unreadable_file(csv_file, tmp_path):
    path = csv_file("x,label\n1,a\n2,b\n")
    with pytest.raises(InvalidInputError):
        ingest_csv(path, 'clase')
    with pytest.raises(InvalidInputError):
        ingest_csv(path, 'label', features=['y'])
    with pytest.raises(InvalidInputError):
        ingest_csv(tmp_path / 'no_existe.csv', 'label')


def test_per_class_split_sizes(two_class_csv):
    result = ingest_csv(two_class_csv, 'label', classes=2, test_per_class={'0': 296, '1': 296}, seed=3)
    assert len(result.test) == 592
    assert len(result.train) == 208
    assert result.test['label'].value_counts().to_dict() == {0: 296, 1: 296}
    assert result.train['f3'].eq(0.0).all()
    train = result.train_dataset()
    assert train.n_classes == 2
    assert train.inputs.min() >= 0.0 and train.inputs.max() <= 1.0
    test = result.test_dataset()
    assert test.n == 592 and test.inputs.shape[1] == 3


def test_per_class_errors(two_class_csv):
    with pytest.raises(InvalidInputError):
        ingest_csv(two_class_csv, 'label', classes=2, test_per_class={'0': 401})
    with pytest.raises(InvalidInputError):
        ingest_csv(two_class_csv, 'label', classes=2, test_per_class={'7': 1})
    with pytest.raises(InvalidInputError):
        ingest_csv(two_class_csv, 'label', classes=1, test_fraction=0.5)
    with pytest.raises(InvalidInputError):
        ingest_csv(two_class_csv, 'label', test_fraction=1.0)


def test_random_split_fraction(two_class_csv):
    result = ingest_csv(two_class_csv, 'label', test_fraction=0.25, seed=9)
    assert len(result.test) == 200
    assert len(result.train) == 600


def test_same_seed_same_split(two_class_csv):
    first = ingest_csv(two_class_csv, 'label', seed=4)
    second = ingest_csv(two_class_csv, 'label', seed=4)
    other = ingest_csv(two_class_csv, 'label', seed=5)
    pd.testing.assert_frame_equal(first.train, second.train)
    assert not first.test.equals(other.test)


def test_normalized_output_is_a_fixed_point(two_class_csv, tmp_path):
    result = ingest_csv(two_class_csv, 'label', classes=2, test_per_class={'0': 50, '1': 50}, seed=2)
    paths = write_split(result, tmp_path / 'salida')
    again = ingest_csv(paths['train'], 'label', classes=2, test_per_class={'0': 0})
    pd.testing.assert_frame_equal(again.train, result.train, check_dtype=False)


def test_parse_class_counts():
    assert parse_class_counts(['a:3', 'clase b:0']) == {'a': 3, 'clase b': 0}
    assert parse_class_counts(None) == {}
    for bad in (['a'], ['a:x'], ['a:-1'], [':3']):
        with pytest.raises(InvalidInputError):
            parse_class_counts(bad)
