import os

import pytest

from pomfq.cli import main

TINY_CFG = """
game = multibattle
agents_per_group = 3
map_width_cells = 14
map_height_cells = 14
episodes = 2
max_steps = 10
batch_size = 8
replay_capacity = 64
sample_count = 10
updates_per_episode = 1
temperature_horizon_episodes = 4
master_seed = 9
algorithm_group_a = pomfq_for
algorithm_group_b = il
"""


@pytest.fixture
def tiny_config(tmp_path):
    path = tmp_path / "tiny.cfg"
    path.write_text(TINY_CFG)
    return str(path)


def test_train_subcommand(tiny_config, tmp_path, capsys):
    out = str(tmp_path / "run")
    assert main(["train", "--config", tiny_config, "--out", out]) == 0
    assert os.path.exists(os.path.join(out, "train.csv"))
    assert os.path.exists(os.path.join(out, "checkpoint.bin"))
    assert "train.csv" in capsys.readouterr().out


def test_train_bad_config_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("not_a_key = 1\n")
    code = main(["train", "--config", str(bad), "--out", str(tmp_path / "o")])
    assert code == 2
    assert "config error" in capsys.readouterr().err


def test_train_missing_config_exits_2(tmp_path):
    assert main(["train", "--config", str(tmp_path / "nope.cfg"),
                 "--out", str(tmp_path / "o")]) == 2


def test_faceoff_subcommand(tiny_config, tmp_path, capsys):
    out = str(tmp_path / "run")
    assert main(["train", "--config", tiny_config, "--out", out]) == 0
    ckpt = os.path.join(out, "checkpoint.bin")
    code = main(["faceoff", ckpt, ckpt, "--games", "2", "--seed", "4",
                 "--out", str(tmp_path / "fo")])
    assert code == 0
    assert os.path.exists(os.path.join(tmp_path, "fo", "faceoff.csv"))
    assert "wins_a=" in capsys.readouterr().out


def test_faceoff_garbage_checkpoint_exits_3(tmp_path, capsys):
    junk = tmp_path / "junk.bin"
    junk.write_bytes(b"garbage bytes here longer than header maybe")
    code = main(["faceoff", str(junk), str(junk), "--games", "2"])
    assert code == 3
    assert "checkpoint error" in capsys.readouterr().err


def test_ising_subcommand(tmp_path, capsys):
    code = main(["ising", "--episodes", "5", "--samples", "50",
                 "--seed", "2", "--out", str(tmp_path / "is")])
    assert code == 0
    assert os.path.exists(os.path.join(tmp_path, "is", "ising.csv"))


def test_ablate_subcommand(tiny_config, tmp_path):
    code = main(["ablate", "--config", tiny_config, "--episodes", "1",
                 "--out", str(tmp_path / "ab"), "--radii", "2,6"])
    assert code == 0
    assert os.path.exists(os.path.join(tmp_path, "ab", "ablate.csv"))


def test_bounds_subcommand(tmp_path, capsys):
    code = main(["bounds", "--n", "10,20", "--trials", "200", "--delta", "0.9",
                 "--seed", "1", "--out", str(tmp_path / "bo")])
    assert code == 0
    assert os.path.exists(os.path.join(tmp_path, "bo", "bounds.csv"))
    assert "coverage=" in capsys.readouterr().out


def test_train_resume_flow(tiny_config, tmp_path):
    out = str(tmp_path / "r")
    assert main(["train", "--config", tiny_config, "--out", out,
                 "--episodes", "1"]) == 0
    ckpt = os.path.join(out, "checkpoint.bin")
    assert main(["train", "--config", tiny_config, "--out", out,
                 "--episodes", "2", "--resume", ckpt]) == 0
    with open(os.path.join(out, "train.csv")) as fh:
        assert len(fh.read().splitlines()) == 1 + 2 * 2
