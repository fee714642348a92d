import numpy as np
import pytest

from incrlearn.data import DelimitedSchema, gen_synthetic, load_delimited, toy_ibench, write_delimited
from incrlearn.errors import EmptyDatasetError, MissingDataError, ParseError, ShapeError


def test_synthetic_counts_and_determinism():
    a = gen_synthetic(num_classes=5, dim=7, n_train=11, n_test=4, seed=3)
    b = gen_synthetic(num_classes=5, dim=7, n_train=11, n_test=4, seed=3)
    assert a.classes == list(range(5)) and a.input_dim == 7
    assert all(a.train[c].shape == (11, 7) and a.test[c].shape == (4, 7) for c in a.classes)
    assert all(np.array_equal(a.train[c], b.train[c]) for c in a.classes)
    c = gen_synthetic(num_classes=5, dim=7, n_train=11, n_test=4, seed=4)
    assert not np.array_equal(a.train[0], c.train[0])


def test_toy_benchmark_defaults():
    ds = toy_ibench(seed=0)
    assert ds.num_classes == 10 and ds.input_dim == 64 and ds.num_train() == 2000


def test_well_separated_classes_are_separable():
    ds = gen_synthetic(num_classes=6, dim=20, modes_per_class=1, separation=20.0, noise=0.5, seed=1)
    centroids = np.array([ds.train[c].mean(axis=0) for c in ds.classes])
    X = np.vstack([ds.test[c] for c in ds.classes])
    y = np.repeat(ds.classes, [len(ds.test[c]) for c in ds.classes])
    pred = np.argmin(((X[:, None, :] - centroids[None]) ** 2).sum(-1), axis=1)
    assert np.mean(pred == y) >= 0.99


def test_load_train_and_test_files(tmp_path):
    (tmp_path / "train.csv").write_text("cat,1.0,2.0\ndog,3.0,4.0\n")
    (tmp_path / "test.csv").write_text("dog,3.5,4.5\ncat,0.5,1.5\n")
    ds = load_delimited(tmp_path / "train.csv", tmp_path / "test.csv")
    assert ds.class_names == ["cat", "dog"] and ds.input_dim == 2
    assert np.array_equal(ds.train[1], [[3.0, 4.0]])
    assert np.array_equal(ds.test[0], [[0.5, 1.5]])


def test_header_only_is_empty(tmp_path):
    p = tmp_path / "h.csv"
    p.write_text("label,x0,x1\n")
    with pytest.raises(EmptyDatasetError):
        load_delimited(p, schema=DelimitedSchema(header=True))


def test_parse_error_reports_line(tmp_path):
    p = tmp_path / "bad.tsv"
    p.write_text("a\t1\t2\nb\t3\tx\n")
    with pytest.raises(ParseError) as err:
        load_delimited(p, schema=DelimitedSchema(delimiter="\t"))
    assert err.value.line == 2


def test_inconsistent_width(tmp_path):
    p = tmp_path / "w.csv"
    p.write_text("a,1,2\nb,3\n")
    with pytest.raises(ShapeError):
        load_delimited(p)


def test_missing_test_split(tmp_path):
    p = tmp_path / "only_train.csv"
    p.write_text("a,1,2\nb,3,4\n")
    with pytest.raises(MissingDataError):
        load_delimited(p).validate()


@pytest.mark.parametrize("schema", [DelimitedSchema(split_column=True),
                                    DelimitedSchema(delimiter=";", header=True, split_column=True)])
def test_round_trip(tmp_path, schema):
    ds = gen_synthetic(num_classes=3, dim=4, n_train=5, n_test=2, seed=9)
    p = tmp_path / "ds.txt"
    write_delimited(ds, p, schema)
    back = load_delimited(p, schema=schema)
    assert back.classes == ds.classes
    for c in ds.classes:
        assert np.array_equal(back.train[c], ds.train[c]) and np.array_equal(back.test[c], ds.test[c])
