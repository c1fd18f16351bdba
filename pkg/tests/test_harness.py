import dataclasses
import json

import numpy as np
import pytest

import llgbdf.steppers
from llgbdf.harness import (
    ACCURACY_HEADER,
    ENERGY_HEADER,
    WALL_HEADER,
    ConfigError,
    PhysicalSetup,
    RunConfig,
    config_from_ini,
    config_to_ini,
    default_config,
    emit_csv,
    main,
    run_accuracy,
    run_energy_curves,
    run_neel_wall,
    run_relax_film,
    seconds_to_reach,
)
from llgbdf.mesh import load_field


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("experiment", [
    "accuracy_time", "accuracy_space", "efficiency", "relax_film", "energy_curves", "neel_wall",
])
def test_config_round_trip(experiment):
    config = default_config(experiment)
    text = config_to_ini(config)
    parsed = config_from_ini(text)
    assert parsed == config
    assert config_from_ini(config_to_ini(parsed)) == parsed


def test_config_override_parses_types():
    text = config_to_ini(default_config("accuracy_time"))
    text = text.replace("alpha = 10.0", "alpha = 2.5")
    text = text.replace("k_divisors = 8 12 16 24 32", "k_divisors = 4 8")
    config = config_from_ini(text)
    assert config.alpha == 2.5
    assert config.k_divisors == (4, 8)


def test_config_rejects_unknown_key():
    text = config_to_ini(default_config("accuracy_time")).replace(
        "[model]\n", "[model]\nturbo = yes\n"
    )
    with pytest.raises(ConfigError, match="turbo"):
        config_from_ini(text)


def test_config_rejects_unknown_experiment():
    with pytest.raises(ConfigError):
        config_from_ini("[experiment]\nexperiment = warp_drive\n")


def test_config_rejects_empty_sweeps():
    with pytest.raises(ConfigError):
        RunConfig(experiment="relax_film", alpha_list=())
    with pytest.raises(ConfigError):
        RunConfig(experiment="accuracy_time", k_divisors=())
    with pytest.raises(ConfigError):
        RunConfig(experiment="accuracy_time", schemes=("bdf7",))


def test_physical_setup_conversions():
    setup = PhysicalSetup.from_config(default_config("neel_wall"))
    assert setup.extent == pytest.approx((1.0, 1 / 8, 1 / 200))
    assert setup.epsilon == pytest.approx(2.526e-5, rel=1e-3)
    assert setup.q == pytest.approx(1.243e-4, rel=1e-3)
    # 5 mT along +x converts through B / (mu0 Ms)
    assert setup.h_ext[0] == pytest.approx(4.97e-3, rel=1e-2)
    # one dimensionless time unit is about 5.65 ps for Ms = 8e5
    assert setup.t_unit_ps == pytest.approx(5.65, rel=1e-2)


# ---------------------------------------------------------------------------
# CSV / field emission
# ---------------------------------------------------------------------------


def test_emit_csv_exact_header_and_format(tmp_path):
    path = tmp_path / "table.csv"
    emit_csv([["bdf3", 0.0125, 1e-4, 1.5e-7, 1e-7, 5e-7]], ACCURACY_HEADER, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "scheme,k,h,linf,l2,h1"
    assert lines[1].startswith("bdf3,1.250000000000e-02,")


def test_emit_csv_deterministic(tmp_path):
    rows = [[1, 0.5, -2.25e-9]]
    emit_csv(rows, "a,b,c", tmp_path / "one.csv")
    emit_csv(rows, "a,b,c", tmp_path / "two.csv")
    assert (tmp_path / "one.csv").read_bytes() == (tmp_path / "two.csv").read_bytes()


# ---------------------------------------------------------------------------
# Runners (scaled-down configs)
# ---------------------------------------------------------------------------


def _tiny_accuracy_config():
    return dataclasses.replace(
        default_config("accuracy_time"),
        h=1e-3,
        k_divisors=(8, 16, 32),
        schemes=("bdf1", "bdf3"),
    )


def test_run_accuracy_writes_table_and_orders(tmp_path):
    report = run_accuracy(_tiny_accuracy_config(), tmp_path)
    table = (tmp_path / "accuracy_time_1d.csv").read_text().splitlines()
    assert table[0] == "scheme,k,h,linf,l2,h1"
    assert len(table) == 1 + 2 * 3
    orders = (tmp_path / "orders_time_1d.csv").read_text().splitlines()
    assert orders[0] == "scheme,norm,order"
    assert report["schemes"]["bdf3"]["orders"]["linf"] == pytest.approx(3.0, abs=0.3)
    assert report["schemes"]["bdf1"]["orders"]["linf"] == pytest.approx(1.0, abs=0.2)


def test_run_accuracy_deterministic_bytes(tmp_path):
    config = dataclasses.replace(_tiny_accuracy_config(), schemes=("bdf2",), k_divisors=(8, 16))
    run_accuracy(config, tmp_path / "a")
    run_accuracy(config, tmp_path / "b")
    csv_a = (tmp_path / "a" / "accuracy_time_1d.csv").read_bytes()
    csv_b = (tmp_path / "b" / "accuracy_time_1d.csv").read_bytes()
    assert csv_a == csv_b


def _tiny_film_config(**overrides):
    base = dataclasses.replace(
        default_config("energy_curves"),
        grid=(12, 12, 2),
        size_nm=(57.6, 57.6, 9.6),
        alpha_list=(5.0,),
        k_ps=(1.0,),
        T_ns=0.02,
        schemes=("bdf1",),
    )
    return dataclasses.replace(base, **overrides)


def test_film_runner_outputs(tmp_path):
    report = run_energy_curves(_tiny_film_config(), tmp_path)
    entry = report["entries"][0]
    assert entry["status"] == "completed"
    energy_csv = (tmp_path / "bdf1_alpha5_k1ps" / "energy.csv").read_text().splitlines()
    assert energy_csv[0] == ENERGY_HEADER
    assert len(energy_csv) == 1 + 21  # initial record plus one per step
    # energy breakdown columns sum to the total
    cells = [float(v) for v in energy_csv[5].split(",")]
    assert cells[2] + cells[3] + cells[4] + cells[5] == pytest.approx(cells[6], rel=1e-9)
    assert (tmp_path / "report.json").exists()
    assert (tmp_path / "summary.csv").exists()


def test_film_runner_snapshots_and_final_field(tmp_path):
    run_energy_curves(_tiny_film_config(snapshot_cadence=10), tmp_path)
    entry_dir = tmp_path / "bdf1_alpha5_k1ps"
    m = load_field(entry_dir / "m_000010.field")
    assert m.shape == (3, 12, 12, 2)
    angle = load_field(entry_dir / "angle_000010.field")
    assert angle.shape == (1, 12, 12, 2)
    final = load_field(entry_dir / "m_final.field")
    assert np.max(np.abs(np.sqrt((final**2).sum(axis=0)) - 1.0)) <= 1e-6  # single precision run


def test_film_runner_marks_blow_up(tmp_path, monkeypatch):
    monkeypatch.setattr(llgbdf.steppers, "BLOWUP_THRESHOLD", 1e-12)
    report = run_energy_curves(_tiny_film_config(), tmp_path)
    entry = report["entries"][0]
    assert entry["status"] == "blew_up"
    assert entry["blow_up_step"] == 1
    summary = (tmp_path / "summary.csv").read_text()
    assert "blew_up" in summary


def test_wall_runner_trajectory(tmp_path):
    config = dataclasses.replace(
        default_config("neel_wall"),
        grid=(32, 8, 2),
        size_nm=(200.0, 25.0, 5.0),
        alpha_list=(5.0,),
        k_ps=(1.0,),
        T_ns=0.05,
        relax_ns=0.005,
        schemes=("bdf1",),
    )
    report = run_neel_wall(config, tmp_path)
    entry = report["entries"][0]
    assert entry["status"] == "completed"
    # the relaxed wall starts near the strip midpoint
    assert entry["wall_start"] == pytest.approx(0.5, abs=0.05)
    assert np.isfinite(entry["wall_displacement"])
    wall_csv = (tmp_path / "bdf1_alpha5_k1ps" / "wall.csv").read_text().splitlines()
    assert wall_csv[0] == WALL_HEADER


def test_seconds_to_reach():
    sweep = [
        {"linf": 1e-3, "seconds": 1.0},
        {"linf": 1e-5, "seconds": 2.0},
        {"linf": 1e-7, "seconds": 4.0},
    ]
    assert seconds_to_reach(sweep, 5e-5) == 2.0
    assert seconds_to_reach(sweep, 1e-9) == float("inf")


def test_larger_alpha_dissipates_faster(tmp_path):
    config = dataclasses.replace(
        default_config("relax_film"),
        grid=(16, 16, 2),
        size_nm=(76.8, 76.8, 9.6),
        alpha_list=(2.0, 10.0),
        k_ps=(1.0,),
        T_ns=0.1,
        schemes=("bdf1",),
    )
    run_relax_film(config, tmp_path)

    def total_at(alpha, row):
        lines = (tmp_path / f"bdf1_alpha{alpha:g}_k1ps" / "energy.csv").read_text().splitlines()
        return float(lines[1 + row].split(",")[6])

    for step_index in (10, 30, 60):
        assert total_at(10.0, step_index) < total_at(2.0, step_index)


def test_halving_k_roughly_doubles_wall_time():
    # one-point sanity on the cost model: same mesh, twice the steps
    import time as _time

    from llgbdf.harness import _manufactured_entry
    from llgbdf.steppers import Scheme

    def best(divisor):
        best_seconds = float("inf")
        for _ in range(5):
            _, _, seconds = _manufactured_entry(Scheme.BDF1, 2000, 1, 0.1 / divisor, divisor, 10.0, "unprojected")
            best_seconds = min(best_seconds, seconds)
        return best_seconds

    ratio = best(128) / best(64)
    assert 1.4 <= ratio <= 3.0


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def test_cli_runs_experiment(tmp_path):
    config_path = tmp_path / "run.ini"
    config_path.write_text(config_to_ini(_tiny_accuracy_config()))
    out_dir = tmp_path / "out"
    assert main(["accuracy-time", "--config", str(config_path), "--out", str(out_dir)]) == 0
    assert (out_dir / "accuracy_time_1d.csv").exists()
    assert (out_dir / "config.ini").exists()


def test_cli_rejects_mismatched_experiment(tmp_path):
    config_path = tmp_path / "run.ini"
    config_path.write_text(config_to_ini(_tiny_accuracy_config()))
    assert main(["efficiency", "--config", str(config_path), "--out", str(tmp_path / "o")]) == 2


def test_cli_rejects_bad_config(tmp_path):
    config_path = tmp_path / "run.ini"
    config_path.write_text("[experiment]\nexperiment = accuracy_time\n[model]\nbogus = 1\n")
    assert main(["accuracy-time", "--config", str(config_path), "--out", str(tmp_path / "o")]) == 2


def test_cli_reports_completion_despite_blow_up(tmp_path, monkeypatch):
    monkeypatch.setattr(llgbdf.steppers, "BLOWUP_THRESHOLD", 1e-12)
    config_path = tmp_path / "film.ini"
    config_path.write_text(config_to_ini(_tiny_film_config()))
    assert main(["energy-curves", "--config", str(config_path), "--out", str(tmp_path / "out")]) == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["entries"][0]["status"] == "blew_up"
