import hashlib
import io
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from naab_clean.charsets import default_ruleset
from naab_clean.corpus_io import (
    ShardManifest,
    SplitSpec,
    clean_bytes,
    is_test,
    manifest_name,
    read_blocks,
    read_lines,
    split,
    split_hash,
    split_to_shards,
    test_mask as mask_for,
    verify,
    write_shards,
)
from naab_clean.errors import InvalidUTF8Error
from naab_clean.pipeline import clean_stream

from strategies import line_lists

DENSE = "سلام‌ها 😀 ۱۲۳ آبادی\tيكة\n" * 40 + "é€𝄞\r\nپایان\rبی‌پایان"


def _lines(data: bytes, chunk: int, **kw):
    return list(read_lines(io.BytesIO(data), chunk, **kw))


@pytest.mark.parametrize("chunk", [4, 5, 7, 64, 4096])
def test_chunk_sizes_agree(chunk):
    data = DENSE.encode()
    expected = DENSE.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    assert _lines(data, chunk) == expected


@settings(max_examples=60)
@given(line_lists, st.integers(4, 64), st.sampled_from(["\n", "\r\n"]))
def test_chunk_independence_property(batch, chunk, term):
    data = "".join(x + term for x in batch).encode()
    assert _lines(data, chunk) == batch


def test_crlf_split_exactly_at_chunk_edge():
    assert _lines(b"abc\r\ndef", 4) == ["abc", "def"]
    assert _lines(b"abc\r", 4) == ["abc"]
    assert _lines(b"a\r\r\nb", 4) == ["a", "", "b"]


def test_unterminated_and_empty():
    assert _lines(b"", 4) == []
    assert _lines(b"x", 4) == ["x"]
    assert _lines(b"\n", 4) == [""]
    assert _lines(b"x\n\n", 4) == ["x", ""]


def test_chunk_too_small():
    with pytest.raises(ValueError):
        _lines(b"x", 3)


@pytest.mark.parametrize("chunk", [4, 6, 1024])
def test_invalid_utf8_offset(chunk):
    data = "سلام\n".encode() + b"ab\xffcd"
    with pytest.raises(InvalidUTF8Error) as info:
        _lines(data, chunk)
    assert info.value.offset == len("سلام\n".encode()) + 2


def test_truncated_sequence_at_eof():
    data = "س".encode() + "ل".encode()[:1]
    with pytest.raises(InvalidUTF8Error) as info:
        _lines(data, 4)
    assert info.value.offset == 2


def test_lossy_mode():
    assert _lines(b"ab\xffc\n", 4, lossy=True) == ["ab�c"]


def test_blocks_end_on_lf():
    data = DENSE.encode()
    blocks = list(read_blocks(io.BytesIO(data), 16))
    assert b"".join(b.data for b in blocks) == data
    assert all(b.data.endswith(b"\n") for b in blocks[:-1])
    for b in blocks:
        b.decode()


def test_block_error_offset():
    data = b"abc\n" * 10 + b"x\xc3(\n"
    with pytest.raises(InvalidUTF8Error) as info:
        for b in read_blocks(io.BytesIO(data), 8):
            b.decode()
    assert info.value.offset == 41


def test_clean_bytes_matches_clean_stream():
    from naab_clean.synthetic import mixed_lines

    R = default_ruleset()
    src = mixed_lines(3000, seed=9)
    raw = "".join(x + "\n" for x in src).encode()
    a, b = io.BytesIO(), io.BytesIO()
    rep_a = clean_bytes(io.BytesIO(raw), a, R, chunk_size=1000)
    rep_b = clean_stream(src, b, R)
    assert a.getvalue() == b.getvalue()
    assert rep_a.bytes_in == len(raw)
    assert rep_a.lines_in == rep_b.lines_in == 3000


# -- split -------------------------------------------------------------------


def test_splitmix_reference_vector():
    # published SplitMix64 outputs for state 0
    assert split_hash(0, 0) == 0xE220A8397B1DCDAF
    assert split_hash(0, 1) == 0x6E789E6AA1B965F4
    assert split_hash(0, 2) == 0x06C45D188009454F


@given(st.integers(0, 2**64 - 1), st.integers(0, 2**40), st.floats(0, 1))
def test_mask_agrees_with_scalar(seed, start, frac):
    spec = SplitSpec(frac, seed)
    mask = mask_for(start, 16, spec)
    assert mask.tolist() == [is_test(start + i, spec) for i in range(16)]


def test_split_edges():
    lines = [str(i) for i in range(500)]
    assert split(lines, SplitSpec(0.0)) == (lines, [])
    assert split(lines, SplitSpec(1.0)) == ([], lines)
    with pytest.raises(ValueError):
        SplitSpec(1.5)
    with pytest.raises(ValueError):
        SplitSpec(0.5, -1)


@given(st.lists(st.text(max_size=5), max_size=300), st.floats(0, 1), st.integers(0, 2**64 - 1))
def test_split_partition(lines, frac, seed):
    spec = SplitSpec(frac, seed)
    train, test = split(lines, spec)
    it_train, it_test = iter(train), iter(test)
    rebuilt = [next(it_test) if is_test(i, spec) else next(it_train) for i in range(len(lines))]
    assert rebuilt == lines
    assert len(train) + len(test) == len(lines)


def test_split_seed_changes_assignment():
    a = mask_for(0, 10_000, SplitSpec(0.5, 1))
    b = mask_for(0, 10_000, SplitSpec(0.5, 2))
    assert (a != b).any()
    assert np.array_equal(a, mask_for(0, 10_000, SplitSpec(0.5, 1)))


def test_split_batches_do_not_matter():
    from naab_clean.corpus_io import split_stream

    lines = [str(i) for i in range(1000)]
    spec = SplitSpec(0.3, 7)
    assert list(split_stream(lines, spec, batch=7)) == list(split_stream(lines, spec, batch=4096))


# -- shards ------------------------------------------------------------------


def test_shard_rolling_example(tmp_path):
    lines = ["x" * 9] * 10  # 10 bytes each with LF
    m = write_shards(lines, 35, tmp_path)
    assert [s.paragraphs for s in m.shards] == [3, 3, 3, 1]
    assert [s.bytes for s in m.shards] == [30, 30, 30, 10]
    assert [s.file for s in m.shards] == [f"none-{i:05d}.txt" for i in range(4)]
    assert (tmp_path / manifest_name("none")).is_file()
    assert verify(m, tmp_path).ok


def test_shard_empty(tmp_path):
    m = write_shards([], 35, tmp_path)
    assert m.shards == [] and m.total_paragraphs == 0
    assert verify(m, tmp_path).ok


def test_oversized_line_gets_its_own_shard(tmp_path):
    m = write_shards(["a", "b" * 100, "c"], 10, tmp_path)
    assert [s.paragraphs for s in m.shards] == [1, 1, 1]


@settings(max_examples=25, deadline=None)
@given(line_lists, st.integers(1, 200))
def test_shard_round_trip(tmp_path_factory, batch, limit):
    d = tmp_path_factory.mktemp("sh")
    m = write_shards(batch, limit, d)
    joined = b"".join((d / s.file).read_bytes() for s in m.shards)
    assert joined == "".join(x + "\n" for x in batch).encode()
    assert m.total_paragraphs == len(batch)
    assert all(s.bytes <= limit or s.paragraphs == 1 for s in m.shards)


def test_manifest_reload(tmp_path):
    m = write_shards(["سلام دنیا"] * 5, 40, tmp_path, ruleset_fingerprint="f" * 64)
    again = ShardManifest.load(tmp_path / m.file_name)
    assert again == m
    assert again.ruleset_fingerprint == "f" * 64


def test_verify_flip_and_delete(tmp_path):
    m = write_shards([f"خط {i}" for i in range(40)], 64, tmp_path)
    victim = tmp_path / m.shards[2].file
    data = bytearray(victim.read_bytes())
    data[1] ^= 0x01
    victim.write_bytes(bytes(data))
    rep = verify(m, tmp_path)
    assert [(c.file, c.problem) for c in rep.failures()] == [(m.shards[2].file, "checksum")]
    (tmp_path / m.shards[0].file).unlink()
    rep = verify(m, tmp_path)
    assert {(c.file, c.problem) for c in rep.failures()} == {
        (m.shards[0].file, "missing"), (m.shards[2].file, "checksum")}


def test_verify_size_and_count(tmp_path):
    m = write_shards(["یک", "دو", "سه"], 1000, tmp_path)
    path = tmp_path / m.shards[0].file
    path.write_bytes(path.read_bytes() + b"x")
    assert verify(m, tmp_path).failures()[0].problem == "size"
    # make size and checksum agree so only the line count is wrong
    m.shards[0].bytes += 1
    m.shards[0].sha256 = hashlib.sha256(path.read_bytes()).hexdigest()
    m.shards[0].paragraphs = 4
    assert verify(m, tmp_path).failures()[0].problem == "count"


def test_verify_incomplete_manifest(tmp_path):
    m = write_shards(["یک"], 1000, tmp_path)
    m.incomplete = True
    assert not verify(m, tmp_path).ok


def test_split_to_shards(tmp_path):
    rng = random.Random(4)
    lines = ["".join(rng.choice("ابپت ") for _ in range(rng.randint(0, 30))) for _ in range(2000)]
    spec = SplitSpec(0.25, 99)
    train, test = split_to_shards(lines, spec, tmp_path, max_shard_bytes=4096)
    assert train.total_paragraphs + test.total_paragraphs == len(lines)
    assert verify(train, tmp_path).ok and verify(test, tmp_path).ok
    assert train.seed == 99 and test.test_fraction == 0.25
    exp_train, exp_test = split(lines, spec)
    got_test = b"".join((tmp_path / s.file).read_bytes() for s in test.shards).decode()
    assert got_test == "".join(x + "\n" for x in exp_test)
