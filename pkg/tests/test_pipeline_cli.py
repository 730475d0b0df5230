import json
import os

import numpy as np
import pytest

from deltan import io as dio
from deltan.cli import main
from deltan.errors import BundleError, ConfigError
from deltan.pipeline import (
    FIGURE_TAGS,
    config_to_text,
    emit_plot_bundle,
    load_config,
    parse_config_text,
    run_pipeline,
    validate_config,
    verify_manifest,
)

GDE_CFG = {"schema_version": 1, "recipe": "gde", "seed": 5, "dim": 100, "realizations": 300, "blocks": 100,
           "chunk": 100}
GOE_CFG = {"schema_version": 1, "recipe": "goe", "seed": 5, "dim": 60, "realizations": 1000, "chunk": 250}
CX_CFG = {"schema_version": 1, "recipe": "crossover", "seed": 5, "sites": 8, "omegas": (0.5, 8.0),
          "realizations": 20, "trim": 2, "calibration_realizations": 20, "chunk": 10, "beta_grid": (0.0, 0.5, 1.2)}


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    root = tmp_path_factory.mktemp("runs")
    return {name: run_pipeline(cfg, root / name) for name, cfg in
            (("gde", GDE_CFG), ("goe", GOE_CFG), ("crossover", CX_CFG))}


# ---------------------------------------------------------------- config


def test_parse_and_validate():
    cfg = load_config_text("schema_version = 1\nrecipe = fig3\nseed = 9  # note\ndim = 80\nM_list = 10, 100\n")
    assert cfg["recipe"] == "goe" and cfg["dim"] == 80 and cfg["M_list"] == (10, 100)
    assert validate_config(parse_config_text(config_to_text(cfg))) == cfg


def load_config_text(text):
    return validate_config(parse_config_text(text))


@pytest.mark.parametrize("text", [
    "",
    "recipe = gde\nseed = 1\n",
    "schema_version = 2\nrecipe = gde\nseed = 1\n",
    "schema_version = 1\nrecipe = nope\nseed = 1\n",
    "schema_version = 1\nrecipe = gde\n",
    "schema_version = 1\nrecipe = gde\nseed = 1\ncolour = red\n",
    "schema_version = 1\nrecipe = gde\nseed = 1\ndim = ten\n",
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        load_config_text(text)


def test_empty_config_file_writes_nothing(tmp_path):
    cfg = tmp_path / "empty.cfg"
    cfg.write_text("")
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out)]) == 2
    assert not out.exists()
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")


# ---------------------------------------------------------------- recipes


def test_gde_recipe_outputs(runs):
    m = runs["gde"]
    names = {os.path.basename(o.path) for o in m.outputs}
    assert {"power_process1.csv", "power_process2.csv", "delta2_process1.csv", "delta2_process2.csv",
            "theory_gde.csv", "theory_gde_corrected.csv"} <= names
    p2 = dio.read_power(m.find("power_process2.csv"))
    assert p2.count == 300 and p2.dim == 99
    d = json.loads((m.find("power_process2.csv").parent / "manifest.json").read_text())
    assert d["seed"] == 5 and d["config"]["recipe"] == "gde"


def test_goe_recipe_outputs(runs):
    m = runs["goe"]
    cols, meta = dio.read_report(m.find("report_goe.csv"))
    assert int(meta["source_M"]) == 1000
    assert set(cols["verdict"]) <= {"pass", "fail"}
    v, k = dio.read_samples(m.path_of("samples")[0])
    assert v.size == 1000 and k >= 1


def test_crossover_recipe_outputs(runs):
    m = runs["crossover"]
    t = dio.read_summary(m.find("summary.csv"))
    assert list(t["omega"]) == [0.5, 8.0]
    assert t["mean_rtilde"][0] > t["mean_rtilde"][1]
    assert np.all(t["beta"] >= 0)


def test_verify_is_worker_independent(runs):
    for name in ("gde", "crossover"):
        manifest = os.path.join(runs[name].root, "manifest.json")
        for workers in (1, 2):
            res = verify_manifest(manifest, workers=workers)
            assert res.ok, res


def test_verify_detects_tampering(runs, tmp_path):
    import shutil
    src = runs["goe"].root
    dst = tmp_path / "copy"
    shutil.copytree(src, dst)
    mpath = dst / "manifest.json"
    d = json.loads(mpath.read_text())
    for o in d["outputs"]:
        if o["path"] == "power_goe.csv":
            o["sha256"] = "0" * 64
    mpath.write_text(json.dumps(d))
    res = verify_manifest(mpath)
    assert not res.ok and not res.compared["power_goe.csv"]


# ---------------------------------------------------------------- plot bundles


TAGS_BY_RUN = {"gde": ("fig1", "fig2"), "goe": ("fig3", "fig4", "fig5"), "crossover": ("fig3", "fig6", "fig7", "fig8")}


@pytest.mark.parametrize("run,tag", [(r, t) for r, ts in TAGS_BY_RUN.items() for t in ts])
def test_plot_bundles(runs, run, tag, tmp_path):
    bundle = emit_plot_bundle(runs[run], tag, tmp_path)
    assert bundle.series
    d = json.loads((tmp_path / f"{tag}_bundle.json").read_text())
    assert d["tag"] == tag and all((tmp_path / s["csv"]).exists() for s in d["series"])
    assert (tmp_path / f"plot_{tag}.py").exists()


def test_plot_tags_cover_all_figures():
    assert set(FIGURE_TAGS) == {f"fig{i}" for i in range(1, 9)}


def test_unknown_or_incompatible_tag(runs, tmp_path):
    with pytest.raises(BundleError):
        emit_plot_bundle(runs["gde"], "fig9", tmp_path)
    with pytest.raises(BundleError):
        emit_plot_bundle(runs["gde"], "fig6", tmp_path)


# ---------------------------------------------------------------- CLI


def test_seed_is_required(capsys):
    with pytest.raises(SystemExit):
        main(["generate", "--ensemble", "gde", "--dim", "10", "--out", "x"])
    with pytest.raises(SystemExit):
        main(["chain", "--L", "6", "--omega", "1", "--out", "x"])


def test_cli_generate_unfold_stats_theory_ptest(tmp_path, capsys):
    gen, unf, st, ref = (tmp_path / d for d in ("gen", "unf", "st", "ref"))
    assert main(["generate", "--ensemble", "gde", "--dim", "64", "--realizations", "4", "--seed", "3",
                 "--out", str(gen)]) == 0
    assert len(list(gen.glob("spectrum_*.csv"))) == 4
    assert main(["unfold", str(gen), "--method", "gaussian", "--reunfold", "--out", str(unf)]) == 0
    assert main(["stats", str(unf), "--out", str(st)]) == 0
    p = dio.read_power(st / "power.csv")
    assert p.count == 4 and p.dim == 63
    d2 = dio.read_delta2(st / "delta2.csv")
    assert d2.mean[-1] == 0.0
    assert main(["theory", "--family", "goe", "--dim", "64", "--out", str(tmp_path / "t.csv")]) == 0
    assert dio.read_theory(tmp_path / "t.csv").values.size == 63
    assert main(["generate", "--ensemble", "goe", "--dim", "40", "--realizations", "1000", "--seed", "3",
                 "--goe-method", "tridiagonal", "--out", str(ref)]) == 0
    assert main(["unfold", str(ref), "--method", "semicircle", "--out", str(ref / "u")]) == 0
    assert main(["stats", str(ref / "u"), "--out", str(ref / "s")]) == 0
    capsys.readouterr()
    assert main(["ptest", "--reference", str(ref / "s" / "power.csv"), "--M", "10,100",
                 "--out", str(tmp_path / "rep.csv")]) == 0
    assert "pass fraction" in capsys.readouterr().out


def test_cli_chain_and_partition(tmp_path):
    assert main(["chain", "--L", "8", "--omega", "2", "--realizations", "2", "--seed", "1",
                 "--out", str(tmp_path / "c")]) == 0
    spec = dio.read_spectrum(tmp_path / "c" / "spectrum_000000.csv")
    assert spec.levels.size == 23
    assert main(["generate", "--ensemble", "poisson", "--dim", "100", "--seed", "2", "--out", str(tmp_path / "p")]) == 0
    assert main(["unfold", str(tmp_path / "p"), "--method", "poly:3", "--partition", "4",
                 "--out", str(tmp_path / "pu")]) == 0
    assert len(list((tmp_path / "pu").glob("*_part*.csv"))) == 4


def test_cli_error_exit_code(tmp_path):
    assert main(["stats", str(tmp_path / "nothing"), "--out", str(tmp_path / "o")]) == 2
    assert main(["unfold", str(tmp_path), "--out", str(tmp_path / "o")]) == 2


def test_cli_crossover(tmp_path, capsys):
    assert main(["crossover", "--L", "8", "--omegas", "0.5,8", "--realizations", "10", "--trim", "2",
                 "--calibration-realizations", "20", "--beta-grid", "0,0.5,1.2", "--seed", "4",
                 "--out", str(tmp_path / "x")]) == 0
    assert capsys.readouterr().out.startswith("omega,mean_rtilde,stderr,beta,kc_estimate")


def test_workers_flag_either_side(runs):
    manifest = os.path.join(runs["gde"].root, "manifest.json")
    assert main(["--workers", "2", "verify", manifest]) == 0
    assert main(["verify", manifest, "--workers", "2"]) == 0
