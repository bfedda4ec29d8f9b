import io

import pytest
from hypothesis import given, settings, strategies as st

from naab_clean.charsets import default_ruleset, parse_rules
from naab_clean.errors import PartialOutputError
from naab_clean.pipeline import (
    PipelineReport,
    clean_block,
    clean_line,
    clean_lines,
    clean_stream,
    count_tokens,
    filter_words,
    is_empty,
    meets_min_tokens,
    unify_chars,
    unify_spaces,
)

from reference import policy_of, reference_clean
from strategies import line_lists, lines

R = default_ruleset()
ZW = "‌"


def test_filter_words():
    assert filter_words("سلام hello دنیا", R) == ("سلام دنیا", 1)
    assert filter_words("", R) == ("", 0)
    assert filter_words("کتاب" + ZW + "ها .", R) == ("کتاب" + ZW + "ها .", 0)
    # whole word goes, no fragments left behind
    assert filter_words("سلامhello", R) == ("", 1)
    assert filter_words("a   b  سلام", R) == ("سلام", 2)


def test_filter_words_zwnj_tokens():
    assert filter_words(ZW + " سلام " + ZW * 3, R) == ("سلام", 2)
    assert filter_words(ZW + "سلام" + ZW, R) == (ZW + "سلام" + ZW, 0)


def test_unify_chars():
    assert unify_chars("علي", R) == ("علی", 1)
    assert unify_chars("علي"[-1], R)[0] == "ی"
    assert unify_chars("مدرسة", R) == ("مدرسه", 1)
    assert unify_chars("کتاب", R) == ("کتاب", 0)
    out, n = unify_chars("كيإ", R)
    assert (out, n) == ("کیا", 3) and len(out) == 3


def test_unify_spaces():
    assert unify_spaces("سلام   دنیا") == "سلام دنیا"
    assert unify_spaces("  سلام\tدنیا  ") == "سلام دنیا"
    assert unify_spaces("سلام دنیا") == "سلام دنیا"
    assert unify_spaces("ها" + ZW * 3 + "ی") == "ها" + ZW + "ی"
    assert unify_spaces(ZW + " " + ZW) == ZW + " " + ZW


def test_gates():
    assert is_empty("")
    assert not is_empty("ی")
    assert not is_empty(".")
    assert meets_min_tokens("سلام دنیا", 2)
    assert not meets_min_tokens("سلام", 2)
    assert meets_min_tokens("سلام دنیا", 0)
    assert count_tokens("? ?") == 2


def test_clean_line_examples():
    assert clean_line("ok ok ok", R).text is None
    assert clean_line("ok ok ok", R).reason == "empty"
    assert clean_line("ok ok ok", R).words_dropped == 3
    # hand-applied: no word dropped, ي->ی, double space collapsed, 2 tokens kept
    assert reference_clean("علي  رفت", *policy_of(R)) == "علی رفت"
    res = clean_line("علي  رفت", R)
    assert res.text == "علی رفت" and res.substitutions == 1 and res.words_dropped == 0
    assert clean_line("سلام", R).reason == "short"
    assert clean_line(". .", R).text == ". ."


def _run(lines, rules=R, **kw):
    out = io.BytesIO()
    rep = clean_stream(lines, out, rules, **kw)
    return out.getvalue().decode("utf-8"), rep


def test_clean_stream_fixture():
    out, rep = _run(["hello", "سلام دنیا", ""])
    assert out == "سلام دنیا\n"
    assert (rep.lines_in, rep.lines_out, rep.lines_dropped_empty, rep.lines_dropped_short) == (3, 1, 2, 0)
    assert rep.words_dropped_non_farsi == 1
    assert rep.words_out == 2
    assert rep.bytes_out == len("سلام دنیا\n".encode())


def test_clean_stream_empty():
    out, rep = _run([])
    assert out == ""
    assert rep.to_dict() | {"elapsed": 0} == PipelineReport().to_dict()


def test_second_run_is_noop():
    from naab_clean.synthetic import mixed_lines

    first, rep1 = _run(mixed_lines(2000, seed=11))
    assert rep1.substitutions_applied > 0 and rep1.words_dropped_non_farsi > 0
    second, rep2 = _run(first.splitlines())
    assert second == first
    assert rep2.substitutions_applied == 0 and rep2.words_dropped_non_farsi == 0
    assert rep2.lines_out == rep2.lines_in


def test_line_terminators_rejected():
    with pytest.raises(ValueError):
        _run(["a\nb"])
    with pytest.raises(ValueError):
        _run(["a\rb"])


@given(lines)
def test_differential_against_reference(line):
    assert clean_line(line, R).text == reference_clean(line, *policy_of(R))


@given(lines)
def test_idempotent(line):
    once = clean_line(line, R).text
    if once is not None:
        again = clean_line(once, R)
        assert again.text == once
        assert again.words_dropped == 0 and again.substitutions == 0


@given(lines)
def test_output_invariants(line):
    out = clean_line(line, R).text
    if out is None:
        return
    assert all(ord(c) in R.allowed for c in out)
    assert not any(ord(c) in R.substitutions for c in out)
    assert not out.startswith(" ") and not out.endswith(" ") and "  " not in out
    assert count_tokens(out) >= R.min_tokens


@given(line_lists, st.integers(0, 4))
def test_block_kernel_matches_per_line(batch, min_tokens):
    rules = R.with_min_tokens(min_tokens)
    res = clean_block("\n".join(batch), rules, want_reasons=True)
    per_line = [clean_line(x, rules) for x in batch] if batch else [clean_line("", rules)]
    assert res.text == "".join(r.text + "\n" for r in per_line if r.text is not None)
    assert res.words_dropped == sum(r.words_dropped for r in per_line)
    assert res.substitutions == sum(r.substitutions for r in per_line)
    assert res.lines_in == len(per_line)
    assert res.dropped_empty == sum(r.reason == "empty" for r in per_line)
    assert res.dropped_short == sum(r.reason == "short" for r in per_line)
    assert res.words_out == sum(count_tokens(r.text) for r in per_line if r.text)
    assert (res.drop_reasons or []) == [(i, r.reason) for i, r in enumerate(per_line) if r.reason]


WIDE = parse_rules("allow U+1F600\nallow 'a'..'c'\nsub 'a' 'ب'\nmin_tokens 1\n")


@given(line_lists)
def test_block_kernel_wide_rules(batch):
    res = clean_block("\n".join(batch), WIDE)
    per_line = [clean_line(x, WIDE) for x in batch] if batch else [clean_line("", WIDE)]
    assert res.text == "".join(r.text + "\n" for r in per_line if r.text is not None)
    for r in per_line:
        if r.text is not None:
            assert r.text == reference_clean_wide(r.text)


def reference_clean_wide(text):
    return reference_clean(text, *policy_of(WIDE))


@settings(max_examples=30, deadline=None)
@given(line_lists)
def test_report_balance(batch):
    _, rep = _run(batch, batch_lines=7)
    assert rep.balanced


def test_workers_byte_identical():
    from naab_clean.synthetic import mixed_lines

    src = mixed_lines(6000, seed=5)
    one, rep1 = _run(src, batch_lines=500)
    three, rep3 = _run(src, workers=3, batch_lines=500)
    assert one == three
    assert rep1.to_dict() | {"elapsed": 0} == rep3.to_dict() | {"elapsed": 0}
    unordered, _ = _run(src, workers=3, ordered=False, batch_lines=500)
    assert sorted(unordered.splitlines()) == sorted(one.splitlines())


def test_reject_channel():
    rej = io.BytesIO()
    out = io.BytesIO()
    clean_stream(["hello", "سلام دنیا", "", "سلام x", "سلام\tدنیا"], out, R, reject=rej)
    rows = rej.getvalue().decode().splitlines()
    # a tab glued between words makes one token with a disallowed character
    assert rows == ["empty\thello", "empty\t", "short\tسلام x", "empty\tسلام\tدنیا"]


class _BrokenSink:
    def __init__(self, after):
        self.after = after

    def write(self, data):
        if self.after == 0:
            raise OSError("disk full")
        self.after -= 1


def test_sink_failure_carries_report():
    src = ["سلام دنیا"] * 100
    with pytest.raises(PartialOutputError) as info:
        clean_stream(src, _BrokenSink(after=2), R, batch_lines=10)
    rep = info.value.report
    assert rep.balanced
    assert rep.lines_in == 30


def test_report_merge_monoid():
    a = PipelineReport(3, 1, 1, 1, 4, 2, 2, 30, 10, 0.5)
    b = PipelineReport(5, 5, 0, 0, 0, 1, 9, 50, 50, 0.25)
    z = PipelineReport()
    assert a.merge(z) == a
    assert a.merge(b) == b.merge(a)
    m = a + b
    assert m.lines_in == 8 and m.elapsed == 0.5 and m.balanced


def test_clean_lines_generator():
    assert list(clean_lines(["hello", "سلام دنیا"], R)) == ["سلام دنیا"]
