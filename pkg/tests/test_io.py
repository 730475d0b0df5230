import json
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from deltan import io as dio
from deltan.ensembles import EnergySpectrum, EnsembleConfig
from deltan.errors import BundleError, ShapeError
from deltan.significance import ReferenceMoments, p_curve
from deltan.spinchain import SpinChainConfig
from deltan.stats import DeltaSquaredEstimate, PowerSpectrumEstimate, ratio_stats
from deltan.theory import theory_curve
from deltan.unfolding import UnfoldedSpectrum

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(x=finite)
def test_fmt_round_trips_doubles(x):
    assert float(dio.fmt(x)) == x


def test_fmt_ints_and_strings():
    assert dio.fmt(7) == "7" and dio.fmt(np.int64(-3)) == "-3" and dio.fmt("a") == "a"
    assert dio.fmt(0.1) == "0.10000000000000001"


def test_spectrum_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    cfg = EnsembleConfig("GDE", 50, master_seed=11)
    s = EnergySpectrum(np.sort(rng.normal(size=50)), 6, cfg)
    p = dio.write_spectrum(tmp_path / "s.csv", s)
    lines = p.read_text().splitlines()
    assert lines[0] == "# ensemble,dim,seed,realization" and lines[1] == "# GDE,50,11,6"
    back = dio.read_spectrum(p)
    np.testing.assert_array_equal(back.levels, s.levels)
    assert back.realization_index == 6
    assert back.provenance == {"ensemble": "GDE", "dim": 50, "seed": 11}
    assert b"\r" not in p.read_bytes()


def test_chain_provenance(tmp_path):
    s = EnergySpectrum(np.arange(4.0), 2, SpinChainConfig(8, 1.5, seed=3))
    back = dio.read_spectrum(dio.write_spectrum(tmp_path / "c.csv", s))
    assert back.provenance["ensemble"] == "SpinChain:L=8:omega=1.5" and back.provenance["seed"] == 3


def test_bad_spectrum_header(tmp_path):
    (tmp_path / "bad.csv").write_text("1.0\n2.0\n")
    with pytest.raises(ShapeError):
        dio.read_spectrum(tmp_path / "bad.csv")


def test_unfolded_round_trip(tmp_path):
    u = UnfoldedSpectrum(np.array([0.3, 1.1, 2.9]), 3.0, "gaussian")
    p = dio.write_unfolded(tmp_path / "u.csv", u, {"ensemble": "GDE", "dim": 3, "seed": 1}, 4)
    back, prov, real = dio.read_unfolded(p)
    np.testing.assert_array_equal(back.levels, u.levels)
    assert back.method == "gaussian" and back.n_ref == 3.0 and real == 4 and prov["seed"] == 1


def test_power_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    est = PowerSpectrumEstimate(9, rng.random(8), rng.random(8), 123)
    back = dio.read_power(dio.write_power(tmp_path / "p.csv", est))
    assert back.dim == 9 and back.count == 123
    np.testing.assert_array_equal(back.mean, est.mean)
    np.testing.assert_array_equal(back.variance, est.variance)


def test_delta2_round_trip(tmp_path):
    est = DeltaSquaredEstimate(np.array([1.0, 2.5, 1 / 3]), np.array([0.1, 0.2, 0.3]), 40)
    back = dio.read_delta2(dio.write_delta2(tmp_path / "d.csv", est))
    np.testing.assert_array_equal(back.mean, est.mean)
    assert back.count == 40


def test_ratio_hist_round_trip(tmp_path):
    rs = ratio_stats(np.cumsum(np.random.default_rng(2).exponential(size=(5, 40)), axis=1), bins=10)
    edges, dens, meta = dio.read_ratio_hist(dio.write_ratio_hist(tmp_path / "r.csv", rs))
    np.testing.assert_array_equal(edges, rs.hist_edges)
    np.testing.assert_array_equal(dens, rs.hist_density)
    assert meta["mean_rtilde"] == rs.mean and meta["stderr"] == rs.stderr


def test_theory_round_trip(tmp_path):
    c = theory_curve("goe", 64)
    back = dio.read_theory(dio.write_theory(tmp_path / "t.csv", c))
    assert back.family == c.family and back.dim == 64
    np.testing.assert_array_equal(back.values, c.values)


def test_report_round_trip(tmp_path):
    rep = p_curve(ReferenceMoments(np.ones(3), np.ones(3), 1000), np.array([1.0, 1.2, 3.0]), [1, 100])
    cols, meta = dio.read_report(dio.write_report(tmp_path / "rep.csv", rep))
    assert list(cols["M"]) == [1, 1, 1, 100, 100, 100]
    assert list(cols["verdict"]) == ["pass" if v else "fail" for v in rep.verdict.ravel()]
    np.testing.assert_array_equal(cols["p"], rep.p.ravel())
    assert float(meta["threshold"]) == 0.05 and int(meta["source_M"]) == 1000


def test_summary_and_samples(tmp_path):
    pts = [SimpleNamespace(omega=w, mean_rtilde=0.5, stderr=0.01, matched_beta=1.0, kc=float("nan")) for w in (1, 2)]
    t = dio.read_summary(dio.write_summary(tmp_path / "s.csv", pts))
    assert list(t) == list(dio.SUMMARY_COLUMNS) and np.isnan(t["kc_estimate"]).all()
    v, k = dio.read_samples(dio.write_samples(tmp_path / "x.csv", [0.5, 2.0], 80))
    assert k == 80 and list(v) == [0.5, 2.0]


def test_unequal_columns(tmp_path):
    with pytest.raises(ShapeError):
        dio.write_table(tmp_path / "x.csv", {"a": [1, 2], "b": [1]})


def test_manifest_round_trip(tmp_path):
    f = tmp_path / "out" / "a.csv"
    f.parent.mkdir()
    f.write_text("x\n1\n")
    m = dio.RunManifest("run", {"recipe": "gde"}, 5, "0.1.0", "t0", root=str(tmp_path / "out"))
    m.add(f, "power")
    path = m.write()
    d = json.loads(path.read_text())
    assert d["outputs"][0] == {"path": "a.csv", "kind": "power", "sha256": dio.sha256_of(f)}
    back = dio.read_manifest(path)
    assert back.find("a.csv") == f and back.path_of("power") == [f] and back.seed == 5
    with pytest.raises(BundleError):
        back.find("missing.csv")
