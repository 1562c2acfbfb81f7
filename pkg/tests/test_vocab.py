import random

import pytest
import yaml
from hypothesis import given, settings
from hypothesis import strategies as st

from vocablab.bpe import TokenizedCorpus
from vocablab.errors import FormatError, InputError
from vocablab.vocab import Vocabulary, VocabEntry, extract_vocab, read_vocab, write_vocab


def corpus(*lines, lang="xx"):
    return TokenizedCorpus(language=lang, lines=[list(line) for line in lines])


def random_corpus(rng, n_lines=40, alphabet="abcdefg", max_len=3):
    lines = []
    for _ in range(n_lines):
        lines.append(
            [
                "".join(rng.choice(alphabet) for _ in range(rng.randint(1, max_len)))
                for _ in range(rng.randint(0, 8))
            ]
        )
    return corpus(*lines)


class TestExtraction:
    def test_toy_counts(self):
        v = extract_vocab(corpus(["a", "b", "a"]))
        assert [tuple(e) for e in v.entries] == [
            ("</s>", 0, 0),
            ("<unk>", 1, 0),
            ("a", 2, 2),
            ("b", 3, 1),
        ]

    def test_specials_observed_counts(self):
        v = extract_vocab(corpus(["a", "<unk>", "</s>", "</s>"]))
        assert v.count_of("</s>") == 2
        assert v.count_of("<unk>") == 1
        assert v.entries[0].token == "</s>"
        assert v.size == 3  # the two specials plus "a", not re-listed

    def test_all_empty_is_error(self):
        with pytest.raises(InputError):
            extract_vocab(corpus([], []))
        with pytest.raises(InputError):
            extract_vocab()

    def test_tie_break_first_occurrence(self):
        v = extract_vocab(corpus(["z", "y", "z", "y", "x"]))
        tokens = [e.token for e in v.entries[2:]]
        assert tokens == ["z", "y", "x"]

    def test_shards_equal_single_pass(self):
        rng = random.Random(4)
        data = random_corpus(rng, 60)
        half = len(data.lines) // 2
        sharded = extract_vocab(
            corpus(*data.lines[:half]), corpus(*data.lines[half:])
        )
        assert sharded == extract_vocab(data)

    def test_multi_corpus_counts_sum(self):
        a = corpus(["a", "b"])
        b = corpus(["b", "c"])
        v = extract_vocab(a, b)
        assert v.count_of("b") == 2
        assert v.count_of("a") == 1

    @pytest.mark.parametrize("seed", range(6))
    def test_inclusion_exclusion(self, seed):
        rng = random.Random(seed)
        a = random_corpus(rng)
        b = random_corpus(rng)
        va, vb = extract_vocab(a), extract_vocab(b)
        joint = extract_vocab(a, b)
        assert joint.size == va.size + vb.size - len(va.tokens() & vb.tokens())

    def test_count_permutation_invariance(self):
        rng = random.Random(8)
        data = random_corpus(rng, 50)
        shuffled_lines = list(data.lines)
        rng.shuffle(shuffled_lines)
        v1 = extract_vocab(data)
        v2 = extract_vocab(corpus(*shuffled_lines))
        assert {e.token: e.count for e in v1.entries} == {
            e.token: e.count for e in v2.entries
        }


class TestSerialization:
    def test_canonical_round_trip(self, tmp_path):
        rng = random.Random(1)
        for trial in range(20):
            v = extract_vocab(random_corpus(rng))
            path = tmp_path / f"v{trial}.vocab"
            write_vocab(v, path)
            assert read_vocab(path) == v

    def test_separator_tokens_round_trip(self, tmp_path):
        v = extract_vocab(corpus(['a\tb', '"quoted"', "colon:ed", "back\\slash", "\r"]))
        path = tmp_path / "nasty.vocab"
        write_vocab(v, path)
        assert read_vocab(path) == v

    def test_compat_shape(self, tmp_path):
        v = extract_vocab(corpus(["a", "b", "a"]))
        path = tmp_path / "v.yml"
        write_vocab(v, path, format="compat")
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == '"</s>": 0'
        assert len(lines) == 4
        parsed = yaml.safe_load(path.read_text(encoding="utf-8"))
        assert parsed == {"</s>": 0, "<unk>": 1, "a": 2, "b": 3}

    @given(st.text(min_size=1, max_size=10).filter(lambda t: t not in ("</s>", "<unk>")))
    @settings(max_examples=150, deadline=None)
    def test_compat_escaping_fuzz(self, token):
        import tempfile
        from pathlib import Path

        v = Vocabulary(
            entries=(
                VocabEntry("</s>", 0, 0),
                VocabEntry("<unk>", 1, 0),
                VocabEntry(token, 2, 1),
            )
        )
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "v.yml"
            write_vocab(v, path, format="compat")
            parsed = yaml.safe_load(path.read_text(encoding="utf-8"))
        assert parsed[token] == 2

    def test_duplicate_token_rejected(self, tmp_path):
        path = tmp_path / "dup.vocab"
        path.write_text("</s>\t0\t0\n<unk>\t1\t0\na\t2\t5\na\t3\t4\n", encoding="utf-8")
        with pytest.raises(FormatError, match="duplicate"):
            read_vocab(path)

    def test_id_gap_rejected(self, tmp_path):
        path = tmp_path / "gap.vocab"
        path.write_text("</s>\t0\t0\n<unk>\t1\t0\na\t3\t5\n", encoding="utf-8")
        with pytest.raises(FormatError, match="id gap"):
            read_vocab(path)

    def test_malformed_line_number(self, tmp_path):
        path = tmp_path / "bad.vocab"
        path.write_text("</s>\t0\t0\n<unk>\t1\t0\nbroken line\n", encoding="utf-8")
        with pytest.raises(FormatError, match="line 3"):
            read_vocab(path)

    def test_missing_specials_rejected(self, tmp_path):
        path = tmp_path / "nospecials.vocab"
        path.write_text("a\t0\t4\nb\t1\t2\n", encoding="utf-8")
        with pytest.raises(FormatError):
            read_vocab(path)
