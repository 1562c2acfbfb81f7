import itertools
import json

import pytest

from vocablab.datamix import Bitext, MixManifest, MixRequest, check_parallel, mix
from vocablab.errors import AlignmentError, ConfigurationError, QuotaError
from vocablab.textio import read_lines


def write_pair(tmp_path, name, src_lines, trg_lines):
    src = tmp_path / f"{name}.src"
    trg = tmp_path / f"{name}.trg"
    src.write_text("".join(line + "\n" for line in src_lines), encoding="utf-8")
    trg.write_text("".join(line + "\n" for line in trg_lines), encoding="utf-8")
    return str(src), str(trg)


def numbered(prefix, n):
    return [f"{prefix} line {i}" for i in range(n)]


class TestBitext:
    def test_ragged_rejected(self):
        with pytest.raises(AlignmentError, match="3.*2"):
            Bitext(["a", "b", "c"], ["x", "y"])

    def test_embedded_newline_rejected(self):
        with pytest.raises(Exception, match="line 1"):
            Bitext(["bad\nline"], ["ok"])


class TestMix:
    def test_five_line_exhaustive(self, tmp_path):
        # Every shuffle of 5 lines must keep the 2 validation pairs out of
        # the 3 training pairs and preserve pairing between sides.
        src, trg = write_pair(tmp_path, "a", numbered("s", 5), numbered("t", 5))
        for seed in range(30):
            out = tmp_path / f"out{seed}"
            manifest = MixManifest(
                components=[MixRequest(src, trg, 3)],
                validation=[MixRequest(src, trg, 2)],
                seed=seed,
            )
            mix(manifest, out)
            train_src = read_lines(out / "train.src")
            train_trg = read_lines(out / "train.trg")
            valid_src = read_lines(out / "valid.src")
            assert len(train_src) == 3 and len(valid_src) == 2
            assert set(train_src) & set(valid_src) == set()
            assert set(train_src) | set(valid_src) == set(numbered("s", 5))
            for s, t in zip(train_src, train_trg):
                assert s.split()[-1] == t.split()[-1]

    def test_determinism(self, tmp_path):
        src, trg = write_pair(tmp_path, "a", numbered("s", 50), numbered("t", 50))
        manifest = MixManifest(components=[MixRequest(src, trg, 30)], seed=9)
        mix(manifest, tmp_path / "one")
        mix(manifest, tmp_path / "two")
        assert (tmp_path / "one/train.src").read_bytes() == (tmp_path / "two/train.src").read_bytes()
        other = MixManifest(components=[MixRequest(src, trg, 30)], seed=10)
        mix(other, tmp_path / "three")
        assert (tmp_path / "one/train.src").read_bytes() != (tmp_path / "three/train.src").read_bytes()

    def test_conservation_multi_component(self, tmp_path):
        a = write_pair(tmp_path, "a", numbered("a", 40), numbered("ta", 40))
        b = write_pair(tmp_path, "b", numbered("b", 40), numbered("tb", 40))
        manifest = MixManifest(
            components=[MixRequest(*a, 25), MixRequest(*b, 15)],
            validation=[MixRequest(*a, 5), MixRequest(*b, 5)],
            seed=2,
        )
        mix(manifest, tmp_path / "out")
        train = read_lines(tmp_path / "out/train.src")
        assert len(train) == 40
        assert sum(1 for line in train if line.startswith("a ")) == 25
        assert sum(1 for line in train if line.startswith("b ")) == 15
        assert len(read_lines(tmp_path / "out/valid.src")) == 10
        assert len(set(train)) == 40  # the mixer never duplicates pairs

    def test_quota_error(self, tmp_path):
        src, trg = write_pair(tmp_path, "a", numbered("s", 4), numbered("t", 4))
        manifest = MixManifest(
            components=[MixRequest(src, trg, 4)],
            validation=[MixRequest(src, trg, 2)],
        )
        with pytest.raises(QuotaError):
            mix(manifest, tmp_path / "out")

    def test_ragged_error(self, tmp_path):
        src, trg = write_pair(tmp_path, "a", numbered("s", 5), numbered("t", 4))
        manifest = MixManifest(components=[MixRequest(src, trg, 2)])
        with pytest.raises(AlignmentError):
            mix(manifest, tmp_path / "out")

    def test_head_mode(self, tmp_path):
        src, trg = write_pair(tmp_path, "a", numbered("s", 10), numbered("t", 10))
        manifest = MixManifest(
            components=[MixRequest(src, trg, 3)],
            validation=[MixRequest(src, trg, 2)],
            sample="head",
            seed=5,
        )
        mix(manifest, tmp_path / "out")
        assert read_lines(tmp_path / "out/valid.src") == ["s line 0", "s line 1"]
        assert sorted(read_lines(tmp_path / "out/train.src")) == ["s line 2", "s line 3", "s line 4"]

    def test_dedup_filters_duplicate_sources(self, tmp_path):
        lines = ["dup", "dup", "dup", "u1", "u2", "u3", "u4", "u5"]
        src, trg = write_pair(tmp_path, "a", lines, numbered("t", 8))
        for seed in range(20):
            manifest = MixManifest(
                components=[MixRequest(src, trg, 4)],
                validation=[MixRequest(src, trg, 2)],
                seed=seed,
                dedup=True,
            )
            out = tmp_path / f"d{seed}"
            mix(manifest, out)
            valid = set(read_lines(out / "valid.src"))
            train = read_lines(out / "train.src")
            assert len(train) == 4
            assert not valid & set(train)

    def test_resolved_manifest(self, tmp_path):
        src, trg = write_pair(tmp_path, "a", numbered("s", 6), numbered("t", 6))
        manifest = MixManifest(components=[MixRequest(src, trg, 3)], seed=7)
        resolved = mix(manifest, tmp_path / "out")
        on_disk = json.loads((tmp_path / "out/manifest.resolved.json").read_text())
        assert on_disk == resolved
        assert on_disk["seed"] == 7
        assert on_disk["outputs"]["train.src"]["lines"] == 3
        assert len(on_disk["components"][0]["source_sha256"]) == 64

    def test_duplicate_pair_rejected(self, tmp_path):
        src, trg = write_pair(tmp_path, "a", numbered("s", 5), numbered("t", 5))
        with pytest.raises(ConfigurationError, match="duplicate"):
            MixManifest(components=[MixRequest(src, trg, 1), MixRequest(src, trg, 2)])

    def test_bad_sample_mode(self):
        with pytest.raises(ConfigurationError):
            MixManifest(components=[], sample="sideways")


class TestCheckParallel:
    def test_ok(self, tmp_path):
        src, trg = write_pair(tmp_path, "a", numbered("s", 10), numbered("t", 10))
        diag = check_parallel(src, trg)
        assert diag.ok and diag.aligned
        assert diag.source_count == diag.target_count == 10

    def test_misaligned(self, tmp_path):
        src, trg = write_pair(tmp_path, "a", numbered("s", 10), numbered("t", 9))
        diag = check_parallel(src, trg)
        assert not diag.aligned
        assert any("alignment" in issue for issue in diag.issues)

    def test_invalid_utf8_reports_offset(self, tmp_path):
        src = tmp_path / "bad.src"
        src.write_bytes(b"good line\nbad \xff byte\n")
        trg = tmp_path / "b.trg"
        trg.write_text("x\ny\n", encoding="utf-8")
        diag = check_parallel(src, trg)
        assert any("byte offset 14" in issue for issue in diag.issues)

    def test_empty_line_diagnostic(self, tmp_path):
        src, trg = write_pair(tmp_path, "a", ["x", "", "z"], ["1", "2", "3"])
        diag = check_parallel(src, trg)
        assert any("empty line 2" in issue for issue in diag.issues)
        assert diag.aligned
