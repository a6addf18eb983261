"""End-to-end command-line runs: subcommands, exit codes, output files."""

from pathlib import Path

import pytest

from sylparse.cli import main
from sylparse.corpus import read_conllu, read_segmented

DATA = Path(__file__).parent / "data"


def write_toy_config(tmp_path, **extra) -> Path:
    lines = {
        "train_seg": DATA / "toy.seg",
        "train_pos": DATA / "toy.pos",
        "train_dep": DATA / "toy.conllu",
        "dev_seg": DATA / "toy.seg",
        "dev_pos": DATA / "toy.pos",
        "dev_dep": DATA / "toy.conllu",
        "model": tmp_path / "toy.model",
        "epochs": 1,
        "seed": 5,
        "syllable_dim": 8,
        "boundary_dim": 4,
        "word_dim": 8,
        "pos_dim": 6,
        "ffnn_dim": 8,
        "lstm_hidden": 8,
        "lstm_layers": 1,
    }
    lines.update(extra)
    path = tmp_path / "train.cfg"
    path.write_text("".join(f"{k} = {v}\n" for k, v in lines.items()))
    return path


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    tmp_path = tmp_path_factory.mktemp("cli-model")
    config = write_toy_config(tmp_path, epochs=2)
    assert main(["train", "--config", str(config)]) == 0
    return tmp_path / "toy.model"


class TestTrain:
    def test_missing_config_is_usage_error(self, tmp_path, capsys):
        assert main(["train", "--config", str(tmp_path / "nope.cfg")]) == 1
        assert "no such file" in capsys.readouterr().err

    def test_bad_config_contents_is_data_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("epochs = soon\n")
        assert main(["train", "--config", str(bad)]) == 2
        assert "data error" in capsys.readouterr().err

    def test_missing_corpus_path_is_usage_error(self, tmp_path):
        config = write_toy_config(tmp_path, train_seg=tmp_path / "absent.seg")
        assert main(["train", "--config", str(config)]) == 1

    def test_flag_overrides_reach_the_checkpoint(self, tmp_path):
        config = write_toy_config(tmp_path)
        out = tmp_path / "ablation.model"
        code = main([
            "train", "--config", str(config), "--model", str(out),
            "--seed", "9", "--no-pos-embedding",
        ])
        assert code == 0
        from sylparse.model import load_checkpoint

        system, _, seed = load_checkpoint(str(out))
        assert seed == 9
        assert system.config.no_pos_embedding is True
        assert (tmp_path / "toy.model").exists() is False  # config path was overridden

    def test_unknown_flag_is_usage_error(self, capsys):
        assert main(["train", "--config", "x", "--what"]) == 1
        assert "usage" in capsys.readouterr().err


class TestPredict:
    def test_raw_input_to_conllu_stdout(self, trained, capsys):
        assert main(["predict", "--model", str(trained), "--input", str(DATA / "toy.raw")]) == 0
        out = capsys.readouterr().out
        parsed = read_conllu_text(out)
        assert len(parsed) == 20
        assert all(s.heads is not None for s in parsed)

    def test_gold_segmentation_mode(self, trained, tmp_path, capsys):
        output = tmp_path / "out.conllu"
        code = main([
            "predict", "--model", str(trained),
            "--input", str(DATA / "toy.raw"), "--gold-seg", str(DATA / "toy.seg"),
            "--output", str(output),
        ])
        assert code == 0
        gold = read_segmented(str(DATA / "toy.seg"))
        parsed = read_conllu(str(output))
        assert [s.words for s in parsed] == [s.words for s in gold]

    def test_input_gold_seg_mismatch_is_data_error(self, trained, tmp_path, capsys):
        other = tmp_path / "other.raw"
        other.write_text("toi la\n")
        code = main([
            "predict", "--model", str(trained),
            "--input", str(other), "--gold-seg", str(DATA / "toy.seg"),
        ])
        assert code == 2
        assert "data error" in capsys.readouterr().err

    def test_needs_some_input(self, trained, capsys):
        assert main(["predict", "--model", str(trained)]) == 1

    def test_garbage_checkpoint_is_data_error(self, tmp_path, capsys):
        fake = tmp_path / "fake.bin"
        fake.write_bytes(b"not a checkpoint at all")
        assert main(["predict", "--model", str(fake), "--input", str(DATA / "toy.raw")]) == 2


class TestSegment:
    def test_lexicon_only_longest_match(self, tmp_path, capsys):
        lexicon = tmp_path / "words.txt"
        lexicon.write_text("sinh_vien\nha_noi\ngiao_vien\n")
        assert main(["segment", "--input", str(DATA / "toy.raw"), "--lexicon", str(lexicon)]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 20
        assert lines[0] == "toi la sinh_vien ."

    def test_model_segmentation_writes_file(self, trained, tmp_path):
        output = tmp_path / "out.seg"
        code = main([
            "segment", "--input", str(DATA / "toy.raw"),
            "--model", str(trained), "--output", str(output),
        ])
        assert code == 0
        assert len(output.read_text().splitlines()) == 20

    def test_exactly_one_source_required(self, trained, tmp_path, capsys):
        assert main(["segment", "--input", str(DATA / "toy.raw")]) == 1
        lexicon = tmp_path / "words.txt"
        lexicon.write_text("sinh_vien\n")
        assert main([
            "segment", "--input", str(DATA / "toy.raw"),
            "--model", str(trained), "--lexicon", str(lexicon),
        ]) == 1


class TestEval:
    def test_self_eval_is_all_hundreds(self, capsys):
        gold = str(DATA / "toy.conllu")
        assert main(["eval", "--gold", gold, "--system", gold]) == 0
        out = capsys.readouterr().out
        assert out.count("100.00") >= 12  # P/R/F1 for all four tasks
        assert "task=las" in out

    def test_records_file_output(self, tmp_path, capsys):
        gold = str(DATA / "toy.conllu")
        output = tmp_path / "report.txt"
        assert main(["eval", "--gold", gold, "--system", gold, "--output", str(output)]) == 0
        records = output.read_text().splitlines()
        assert records[0] == "sentences=20"
        assert any(line.startswith("task=wseg") for line in records)
        assert "WSeg" in capsys.readouterr().out  # text report still on stdout

    def test_refuses_to_overwrite_input(self, tmp_path, capsys):
        gold = str(DATA / "toy.conllu")
        assert main(["eval", "--gold", gold, "--system", gold, "--output", gold]) == 1
        assert "refusing" in capsys.readouterr().err


def read_conllu_text(text):
    import tempfile

    with tempfile.NamedTemporaryFile("w", suffix=".conllu", delete=False) as handle:
        handle.write(text)
        path = handle.name
    try:
        return read_conllu(path)
    finally:
        import os

        os.unlink(path)
