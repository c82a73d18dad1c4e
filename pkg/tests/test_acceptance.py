"""Acceptance suite: one test per release criterion, run via

    pytest tests/test_acceptance.py -v -s

Each test prints a single PASS line when its criterion holds (pytest -v
shows the same verdict per test).  Tolerances are fixed here, not tuned.
"""

import io
import itertools
import json
import math
import time
from pathlib import Path

import numpy as np

from fairaudit.cli import main
from fairaudit.criteria import evaluate, evaluate_ftu, get_criterion
from fairaudit.dataset import ColumnSchema, load_dataset, save_csv
from fairaudit.lipschitz import audit_map
from fairaudit.measures import (
    balanced_error_ratio,
    chi2_sf,
    chi_square,
    mutual_information,
)
from fairaudit.neighborhood import NeighborhoodSpec, soft_evaluate
from fairaudit.report import AuditConfig, canonical_json, run_audit
from fairaudit.rng import CounterRng
from fairaudit.scenarios import (
    SCENARIO_NAMES,
    ScenarioSpec,
    generate,
    schema_config_for,
)
from fairaudit.tables import ContingencyTable, normalize
from fairaudit.dataset import stratify

FIXTURE = Path(__file__).parent / "data" / "criteria_registry.txt"


def _ok(label):
    print(f"ACCEPTANCE {label}: PASS")


# -- 1: registry fidelity -----------------------------------------------------------

def test_criterion_1_registry_matches_committed_fixture(capsys):
    assert main(["criteria"]) == 0
    out = capsys.readouterr().out
    assert out == FIXTURE.read_text(encoding="utf-8")
    units = [line.split()[-2] for line in out.strip().splitlines()[1:]]
    awareness = [line.split()[-1] for line in out.strip().splitlines()[1:]]
    assert units == ["group", "group", "group", "individual", "individual", "individual"]
    assert awareness == ["aware", "aware", "aware", "unaware", "aware", "aware"]
    with capsys.disabled():
        _ok("1 (registry fidelity)")


# -- 2: unawareness coincides with individual parity ----------------------------------

def _random_categorical_dataset(seed, n=1000):
    rng = CounterRng(seed)
    s = rng.integers(2 + seed % 2, n)
    y = rng.integers(2, n)
    yhat = rng.bernoulli(0.2 + 0.2 * (s % 2) + 0.3 * y)
    f0 = rng.integers(2, n)
    f1 = rng.integers(3, n)
    lines = ["s,y,yhat,x0,x1"] + [
        f"{s[i]},{y[i]},{yhat[i]},{f0[i]},{f1[i]}" for i in range(n)
    ]
    schema = [
        ColumnSchema("s", "sensitive", "categorical"),
        ColumnSchema("y", "target", "categorical"),
        ColumnSchema("yhat", "prediction", "categorical"),
        ColumnSchema("x0", "feature", "categorical"),
        ColumnSchema("x1", "feature", "categorical"),
    ]
    return load_dataset(io.BytesIO(("\n".join(lines) + "\n").encode()), schema)


def test_criterion_2_unawareness_bit_identical_to_individual_parity():
    for seed in range(50):
        ds = _random_categorical_dataset(seed)
        a = evaluate(ds, get_criterion("isp"), "mi", min_count=1)
        b = evaluate_ftu(ds, "mi", min_count=1)
        assert b.measure.value == a.measure.value, seed  # bitwise equality
    _ok("2 (unawareness == individual parity, 50 datasets)")


# -- 3: measure oracles ----------------------------------------------------------------

def _mi_oracle(probs):
    rows = probs.sum(axis=1)
    cols = probs.sum(axis=0)
    total = 0.0
    for i in range(probs.shape[0]):
        for j in range(probs.shape[1]):
            if probs[i, j] > 0:
                total += probs[i, j] * math.log(probs[i, j] / (rows[i] * cols[j]))
    return total


def _chi2_2x2_oracle(counts):
    (a, b), (c, d) = np.asarray(counts, dtype=float)
    n = a + b + c + d
    return n * (a * d - b * c) ** 2 / ((a + b) * (c + d) * (a + c) * (b + d))


def _ber_oracle(probs):
    r, k = probs.shape
    cond = probs / probs.sum(axis=0)
    best = None
    for assignment in itertools.product(range(k), repeat=r):
        err = sum(
            cond[row, cls]
            for cls in range(k)
            for row in range(r)
            if assignment[row] != cls
        ) / k
        best = err if best is None else min(best, err)
    return best


def test_criterion_3_measure_oracles_on_1000_random_tables():
    rng = np.random.default_rng(2024)
    checked = 0
    while checked < 1000:
        r = int(rng.integers(2, 5))
        c = int(rng.integers(2, 5))
        counts = rng.integers(0, 40, size=(r, c)).astype(np.int64)
        if (counts.sum(axis=0) == 0).any() or (counts.sum(axis=1) == 0).any():
            continue
        checked += 1
        joint = normalize(ContingencyTable(counts))
        mi = mutual_information(joint).value
        want_mi = _mi_oracle(joint.probs)
        assert abs(mi - want_mi) <= 1e-10 * max(1.0, abs(want_mi))
        ber = balanced_error_ratio(joint).value
        want_ber = _ber_oracle(joint.probs)
        assert abs(ber - want_ber) <= 1e-10 * max(1.0, want_ber)
        if r == 2 and c == 2:
            chi = chi_square(ContingencyTable(counts)).value
            want_chi = _chi2_2x2_oracle(counts)
            assert abs(chi - want_chi) <= 1e-10 * max(1.0, want_chi)
    # pinned known values
    uniform = normalize(ContingencyTable([[25, 25], [25, 25]]))
    assert mutual_information(uniform).value == 0.0
    assert chi_square(ContingencyTable([[25, 25], [25, 25]])).value == 0.0
    assert balanced_error_ratio(uniform).value == 0.5
    diag = normalize(ContingencyTable([[1, 0], [0, 1]]))
    mv = mutual_information(diag)
    assert abs(mv.value - math.log(2)) < 1e-12
    assert abs(mv.aux["normalized"] - 1.0) < 1e-12
    assert balanced_error_ratio(diag).value == 0.0
    _ok("3 (measure oracles, 1000 tables)")


# -- 4: chi-square tail ------------------------------------------------------------------

def test_criterion_4_chi_square_tail_oracle():
    assert abs(chi2_sf(3.841, 1) - 0.05) <= 5e-4
    for dof in (1, 2, 3, 10, 50):
        assert chi2_sf(0.0, dof) == 1.0
    _ok("4 (chi-square tail)")


# -- 5: scenario verdict loop ----------------------------------------------------------------

def test_criterion_5_scenario_verdict_loop(tmp_path):
    reports = {}
    for name in SCENARIO_NAMES:
        ds, truth = generate(ScenarioSpec(name, 100000, 7))
        data = tmp_path / f"{name}.csv"
        schema = tmp_path / f"{name}.schema.json"
        save_csv(ds, data)
        schema.write_text(canonical_json(schema_config_for(ds)), encoding="utf-8")
        config = AuditConfig(
            data=str(data), schema=str(schema),
            criteria=["sp", "eo", "suff", "isp", "ieo", "isuff", "ftu"],
        )
        report = run_audit(config)
        by_id = {r["id"]: r["passed"] for r in report.results}
        for cid, want in truth.verdicts.items():
            if want == "unconstrained":
                continue
            got = "satisfied" if by_id[cid] else "violated"
            assert got == want, (name, cid)
        reports[name] = by_id
    # the construction-specific splits, stated explicitly
    assert reports["group_fair_individual_unfair"]["sp"]
    assert not reports["group_fair_individual_unfair"]["isp"]
    assert reports["proxy_redlining"]["ftu"]
    assert not reports["proxy_redlining"]["sp"]
    assert reports["suff_holds_eo_fails"]["suff"]
    assert not reports["suff_holds_eo_fails"]["eo"]
    _ok("5 (scenario verdict loop, n=100000)")


# -- 6: soft conditioning degenerates to exact stratification -----------------------------------

def test_criterion_6_soft_degeneracy_record_for_record():
    ds, _ = generate(ScenarioSpec("direct_discrimination", 5000, 31))
    epsilon = 0.05
    min_size = 5
    soft = soft_evaluate(
        ds, get_criterion("isp"),
        NeighborhoodSpec("ball", radius=0.4),  # below 1/num_columns: exact matches only
        epsilon=epsilon, min_neighborhood=min_size,
    )
    exact = evaluate(ds, get_criterion("isp"), min_count=min_size)
    per = {key: mv for key, mv, _ in exact.per_stratum}
    flags = np.zeros(ds.n, dtype=bool)
    known = np.zeros(ds.n, dtype=bool)
    for key, idx in stratify(ds, ds.feature_names()).items():
        mv = per.get(key)
        if mv is None:
            continue
        known[idx] = True
        flags[idx] = mv.value > epsilon
    assert np.array_equal(soft.violated, flags)
    assert np.array_equal(~soft.indeterminate, known)
    _ok("6 (soft degeneracy, record-for-record)")


# -- 7: planted cluster recall -------------------------------------------------------------------

def test_criterion_7_planted_cluster_recall_and_runtime():
    ds, truth = generate(ScenarioSpec("planted_unfair_cluster", 50000, 11))
    assert abs(len(truth.planted_indices) / ds.n - 0.1) < 0.01
    started = time.monotonic()
    res = soft_evaluate(ds, get_criterion("isp"), NeighborhoodSpec("knn", k=50))
    elapsed = time.monotonic() - started
    planted = np.zeros(ds.n, dtype=bool)
    planted[truth.planted_indices] = True
    recall = res.violated[planted].mean()
    false_rate = res.violated[~planted].mean()
    assert recall >= 0.80, recall
    assert false_rate <= 0.05, false_rate
    assert elapsed <= 60.0, elapsed
    assert not res.passed
    _ok(f"7 (planted recall {recall:.3f}, false rate {false_rate:.3f}, {elapsed:.1f}s)")


# -- 8: lipschitz auditor -----------------------------------------------------------------------

def test_criterion_8_lipschitz_auditor():
    x = CounterRng(8).uniforms(2000 * 3).reshape(2000, 3)
    started = time.monotonic()
    identity = audit_map(x, x.copy())
    elapsed = time.monotonic() - started
    assert abs(identity.max_ratio - 1.0) <= 1e-9
    assert identity.passed
    assert identity.pairs_examined == 2000 * 1999 // 2
    assert elapsed <= 10.0, elapsed

    doubled = audit_map(x[:500], 2.0 * x[:500])
    assert doubled.max_ratio == 2.0
    assert not doubled.passed

    constant = audit_map(x[:500], np.ones((500, 3)))
    assert constant.max_ratio == 0.0
    assert constant.passed
    _ok(f"8 (lipschitz: identity/doubling/constant, exhaustive n=2000 in {elapsed:.1f}s)")


# -- 9: reproducibility ----------------------------------------------------------------------------

def test_criterion_9_byte_reproducibility(tmp_path):
    csv_a, csv_b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (csv_a, csv_b):
        assert main(["generate", "--scenario", "proxy_redlining", "--n", "20000",
                     "--seed", "3", "--output", str(path)]) == 0
    assert csv_a.read_bytes() == csv_b.read_bytes()

    schema = tmp_path / "schema.json"
    ds, _ = generate(ScenarioSpec("proxy_redlining", 20000, 3))
    schema.write_text(canonical_json(schema_config_for(ds)), encoding="utf-8")
    out = tmp_path / "rep.json"
    argv = ["audit", "--data", str(csv_a), "--schema", str(schema),
            "--criteria", "sp,eo,suff,isp,ieo,isuff", "--output", str(out)]
    main(argv)
    first = json.loads(out.read_text())
    main(argv)
    second = json.loads(out.read_text())
    first.pop("timing")
    second.pop("timing")
    assert json.dumps(first, sort_keys=False) == json.dumps(second, sort_keys=False)
    _ok("9 (byte reproducibility)")
