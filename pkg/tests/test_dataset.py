import io

import numpy as np
import pytest

from fairaudit.dataset import ColumnSchema, load_dataset, load_schema_config, save_csv, stratify
from fairaudit.errors import (
    EmptyData,
    MissingColumn,
    NumericConditioning,
    ParseError,
    RoleViolation,
)


def _schema(extra=()):
    base = [
        ColumnSchema("s", "sensitive", "categorical"),
        ColumnSchema("y", "target", "categorical"),
        ColumnSchema("yhat", "prediction", "categorical"),
    ]
    return base + list(extra)


def _load(text, schema, **opts):
    return load_dataset(io.BytesIO(text.encode()), schema, **opts)


def test_minimal_load():
    ds = _load(
        "s,y,yhat,x1\na,0,0,u\nb,1,1,v\na,1,0,u\n",
        _schema([ColumnSchema("x1", "feature", "categorical")]),
    )
    assert ds.n == 3
    assert ds.s.categories == ("a", "b")
    assert list(ds.s.codes) == [0, 1, 0]
    assert ds.feature_names() == ["x1"]


def test_missing_column():
    with pytest.raises(MissingColumn):
        _load("s,y,yhat\na,0,0\n", _schema([ColumnSchema("race", "feature", "categorical")]))


def test_duplicate_role_rejected():
    schema = _schema() + [ColumnSchema("s2", "sensitive", "categorical")]
    with pytest.raises(RoleViolation):
        _load("s,y,yhat,s2\na,0,0,a\n", schema)


def test_three_category_sensitive_accepted():
    ds = _load("s,y,yhat\na,0,0\nb,1,1\nc,0,1\n", _schema())
    assert ds.s.arity == 3


def test_constant_sensitive_rejected():
    with pytest.raises(RoleViolation):
        _load("s,y,yhat\na,0,0\na,1,1\n", _schema())


def test_parse_error_reports_position():
    schema = _schema([ColumnSchema("age", "feature", "numeric")])
    with pytest.raises(ParseError) as err:
        _load("s,y,yhat,age\na,0,0,12\nb,1,1,oops\n", schema)
    assert err.value.line == 3
    assert err.value.column == "age"


def test_empty_data():
    with pytest.raises(EmptyData):
        _load("s,y,yhat\n", _schema())


def test_missing_value_error_mode():
    with pytest.raises(ParseError) as err:
        _load("s,y,yhat\na,0,0\nb,,1\n", _schema())
    assert err.value.line == 3


def test_missing_value_drop_mode():
    ds = _load("s,y,yhat\na,0,0\nb,,1\nb,1,1\n", _schema(), missing="drop")
    assert ds.n == 2
    assert ds.provenance.dropped_rows == 1


def test_numeric_prediction_binarized():
    schema = [
        ColumnSchema("s", "sensitive", "categorical"),
        ColumnSchema("y", "target", "categorical"),
        ColumnSchema("score", "prediction", "numeric"),
    ]
    ds = load_dataset(
        io.BytesIO(b"s,y,score\na,0,0.2\nb,1,0.9\na,1,0.5\n"), schema, threshold=0.5
    )
    assert ds.y_hat.kind == "categorical"
    assert list(ds.y_hat.codes) == [0, 1, 1]  # value >= threshold


def test_numeric_prediction_without_threshold_rejected():
    schema = [
        ColumnSchema("s", "sensitive", "categorical"),
        ColumnSchema("y", "target", "categorical"),
        ColumnSchema("score", "prediction", "numeric"),
    ]
    with pytest.raises(RoleViolation):
        load_dataset(io.BytesIO(b"s,y,score\na,0,0.2\nb,1,0.9\n"), schema)


def test_roundtrip_identical():
    schema = _schema([
        ColumnSchema("x1", "feature", "categorical"),
        ColumnSchema("x2", "feature", "numeric"),
    ])
    ds = _load(
        "s,y,yhat,x1,x2\na,0,0,u,0.125\nb,1,1,v,7.5\na,1,0,w,-3.25\nb,0,1,u,0.1\n",
        schema,
    )
    buf = io.StringIO()
    save_csv(ds, buf)
    ds2 = load_dataset(io.BytesIO(buf.getvalue().encode()), schema)
    assert ds.equals(ds2)


def test_load_order_stable_under_permutation():
    schema = _schema([ColumnSchema("x1", "feature", "categorical")])
    rows = ["a,0,0,u", "b,1,1,v", "a,1,0,w", "b,0,1,u"]
    ds = _load("s,y,yhat,x1\n" + "\n".join(rows) + "\n", schema)
    perm = [2, 0, 3, 1]
    ds_p = _load("s,y,yhat,x1\n" + "\n".join(rows[i] for i in perm) + "\n", schema)
    assert ds_p.s.categories == ds.s.categories
    assert ds_p.column("x1").categories == ds.column("x1").categories
    assert np.array_equal(ds_p.s.codes, ds.s.codes[perm])
    assert np.array_equal(ds_p.column("x1").codes, ds.column("x1").codes[perm])


def test_stratify_partition():
    schema = _schema([
        ColumnSchema("x1", "feature", "categorical"),
        ColumnSchema("x2", "feature", "categorical"),
    ])
    ds = _load(
        "s,y,yhat,x1,x2\n"
        "a,0,0,u,p\nb,1,1,u,q\na,1,0,v,p\nb,0,1,v,q\na,0,1,u,p\nb,1,0,v,q\n",
        schema,
    )
    strata = stratify(ds, ["x1", "x2"])
    sizes = [len(idx) for idx in strata.values()]
    assert sum(sizes) == ds.n
    seen = np.sort(np.concatenate(list(strata.values())))
    assert np.array_equal(seen, np.arange(ds.n))
    assert list(strata.keys()) == sorted(strata.keys())


def test_stratify_empty_condition_single_stratum():
    ds = _load("s,y,yhat\na,0,0\nb,1,1\n", _schema())
    strata = stratify(ds, [])
    assert list(strata.keys()) == [()]
    assert np.array_equal(strata[()], np.arange(2))


def test_stratify_numeric_column_rejected():
    schema = _schema([ColumnSchema("x1", "feature", "numeric")])
    ds = _load("s,y,yhat,x1\na,0,0,1.5\nb,1,1,2.5\n", schema)
    with pytest.raises(NumericConditioning):
        stratify(ds, ["x1"])


def test_schema_config_parsing():
    cfg = {
        "columns": [
            {"name": "s", "role": "sensitive", "kind": "categorical"},
            {"name": "y", "role": "target", "kind": "categorical"},
            {"name": "p", "role": "prediction", "kind": "numeric",
             "positive_label": "1"},
        ],
        "threshold": 0.7,
        "missing": "drop",
    }
    schema, threshold, missing = load_schema_config(cfg)
    assert len(schema) == 3
    assert threshold == 0.7
    assert missing == "drop"
    assert schema[2].positive_label == "1"
