import json
from importlib import resources

import pytest

from phonoam.cli import main
from phonoam.inventory import LanguageInventory, save_inventory

PHONES = ("d", "ɛ", "ð", "ə", "i", "ʥ", "kʲ")


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """Feature table, inventories and synthetic corpora shared by CLI tests."""
    root = tmp_path_factory.mktemp("cli")
    features = root / "features.tsv"
    features.write_text(
        resources.files("phonoam.data").joinpath("core_phones.tsv").read_text("utf-8"),
        encoding="utf-8",
    )
    save_inventory(LanguageInventory("L1", PHONES[:5]), root / "L1.json")
    save_inventory(LanguageInventory("L2", PHONES[:4] + (PHONES[5],)), root / "L2.json")
    save_inventory(LanguageInventory("target", ("d", "ɛ", "kʲ")), root / "target.json")
    for lang in ("L1", "L2", "target"):
        code = main([
            "synth", "--features", str(features), "--inventory", str(root / f"{lang}.json"),
            "--dim", "6", "--utterances", "8", "--noise-std", "0.1", "--seed", "3",
            "--out", str(root / f"{lang}.jsonl"),
        ])
        assert code == 0
    return root


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_encode_prints_51_bits(workdir, capsys):
    code, out = run(capsys, "encode", "--features", str(workdir / "features.tsv"), "--phone", "d")
    assert code == 0
    bits = out.strip()
    assert len(bits) == 51 and set(bits) <= {"0", "1"}
    d_pairs = "01 01 10 01 01 01 01 00 10 01 01 10 10 01 01 01 01 01 01 01 00 01 00 00"
    assert bits == d_pairs.replace(" ", "") + "000"


def test_encode_unknown_phone_exits_2(workdir, capsys):
    code, _ = run(capsys, "encode", "--features", str(workdir / "features.tsv"), "--phone", "zz")
    assert code == 2


def test_usage_error_exits_1(capsys):
    assert main(["no-such-command"]) == 1
    assert main([]) == 1
    capsys.readouterr()


def test_phoneset_build_and_stats(workdir, capsys):
    out_path = workdir / "phoneset.json"
    code, _ = run(
        capsys, "phoneset", "build",
        "--inventories", str(workdir / "L1.json"), str(workdir / "L2.json"),
        "--out", str(out_path),
    )
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["units"][:3] == ["<blk>", "<spn>", "<nsn>"]
    assert set(doc["units"][3:]) == set(PHONES[:6])
    assert (workdir / "phoneset.json.manifest.json").exists()

    code, out = run(
        capsys, "phoneset", "stats",
        "--inventories", str(workdir / "L1.json"), str(workdir / "L2.json"),
    )
    assert code == 0
    # 4 phones in both languages, 2 in exactly one
    assert "degree 2: 4 phones" in out
    assert "degree 1: 2 phones" in out


def test_phoneset_unseen(workdir, capsys):
    code, out = run(
        capsys, "phoneset", "unseen",
        "--inventories", str(workdir / "L1.json"), str(workdir / "L2.json"),
        "--target", str(workdir / "target.json"),
    )
    assert code == 0
    assert "unseen (1): kʲ" in out
    assert "seen (2)" in out


def test_synth_manifest_written(workdir):
    manifest = json.loads((workdir / "L1.jsonl.manifest.json").read_text())
    assert manifest["subcommand"] == "synth"
    assert manifest["seed"] == 3


@pytest.fixture(scope="module")
def trained(workdir):
    ckpt = workdir / "model.npz"
    code = main([
        "train", "--features", str(workdir / "features.tsv"),
        "--inventories", str(workdir / "L1.json"), str(workdir / "L2.json"),
        "--corpus", str(workdir / "L1.jsonl"), str(workdir / "L2.jsonl"),
        "--head", "linear", "--context", "1", "--hidden", "8", "--width", "8",
        "--epochs", "2", "--seed", "1", "--out", str(ckpt),
    ])
    assert code == 0
    return ckpt


def test_train_writes_checkpoint_and_manifest(trained, workdir, capsys):
    assert trained.exists()
    assert (workdir / "model.npz.manifest.json").exists()
    capsys.readouterr()


def test_extend_finetune_eval_flow(trained, workdir, capsys):
    ext = workdir / "extended.npz"
    code, out = run(
        capsys, "extend", "--checkpoint", str(trained),
        "--features", str(workdir / "features.tsv"),
        "--target", str(workdir / "target.json"), "--out", str(ext),
    )
    assert code == 0
    assert "added 1 units: kʲ" in out

    ft = workdir / "finetuned.npz"
    code, _ = run(
        capsys, "finetune", "--checkpoint", str(ext),
        "--corpus", str(workdir / "target.jsonl"),
        "--epochs", "1", "--seed", "1", "--out", str(ft),
    )
    assert code == 0

    code, out = run(
        capsys, "eval", "--checkpoint", str(ft),
        "--corpus", str(workdir / "target.jsonl"), "--unseen", "kʲ",
    )
    assert code == 0
    assert "PER" in out and "unseen PER" in out


def test_eval_fails_cleanly_on_uncovered_corpus(trained, workdir, capsys):
    # the base model has never heard of kʲ, so the target corpus is invalid
    code, _ = run(capsys, "eval", "--checkpoint", str(trained),
                  "--corpus", str(workdir / "target.jsonl"))
    assert code == 2


def test_export_embeddings(trained, workdir, capsys):
    out_path = workdir / "emb.csv"
    code, _ = run(capsys, "export-embeddings", "--checkpoint", str(trained),
                  "--out", str(out_path))
    assert code == 0
    lines = out_path.read_text(encoding="utf-8").strip().splitlines()
    assert len(lines) == 9  # 3 specials + 6 phones
    assert lines[0].startswith("<blk>,")


def test_version_flag(capsys):
    assert main(["--version"]) == 0
    capsys.readouterr()
