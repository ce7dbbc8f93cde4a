import pytest
from hypothesis import given, strategies as st

from phonaudit.errors import EmptyTranscript
from phonaudit.features import default_table, nfd
from phonaudit.transcripts import Phone, Transcript, tokenize


def surfaces(raw: str) -> list[list[str]]:
    return [[p.surface for p in word] for word in tokenize(raw).words]


def test_single_phone() -> None:
    assert surfaces("p") == [["p"]]


def test_plain_words() -> None:
    assert surfaces("pa ta") == [["p", "a"], ["t", "a"]]


def test_modifier_letter_attaches() -> None:
    assert surfaces("pʰa") == [["pʰ", "a"]]


def test_two_modifiers_attach() -> None:
    assert surfaces("kʰʲa") == [["kʰʲ", "a"]]


def test_combining_mark_attaches() -> None:
    assert surfaces("ã") == [["ã"]]


def test_length_mark_attaches() -> None:
    assert surfaces("aː") == [["aː"]]


def test_tone_bar_attaches() -> None:
    assert surfaces("a˥") == [["a˥"]]


def test_tie_bar_joins_next_base() -> None:
    # t͡ʃ is one phone; the tie bar pulls the second base in.
    assert surfaces("t͡ʃa") == [["t͡ʃ", "a"]]
    phone = tokenize("t͡ʃ").phones()[0]
    assert phone.base == "t͡ʃ"
    assert phone.diacritics == ()


def test_tie_bar_with_following_diacritic() -> None:
    assert surfaces("t͡ʃʲa") == [["t͡ʃʲ", "a"]]
    phone = tokenize("t͡ʃʲ").phones()[0]
    assert phone.base == "t͡ʃ"
    assert phone.diacritics == ("ʲ",)


def test_undertie_variant_joins() -> None:
    assert surfaces("d͜ʒ") == [["d͜ʒ"]]


def test_trailing_tie_bar_stays_attached() -> None:
    # A tie bar with nothing to join is just a stranded mark on its base.
    assert surfaces("t͡") == [["t͡"]]


def test_orphan_leading_marks_form_one_phone() -> None:
    assert surfaces("ʰa") == [["ʰ", "a"]]
    assert surfaces("̃ː") == [["̃ː"]]


def test_nfc_input_decomposed() -> None:
    t = tokenize("ça")  # precomposed c-cedilla
    assert t.phones()[0].surface == "ç"


def test_whitespace_separators() -> None:
    assert surfaces("pa\tta\n ka") == [["p", "a"], ["t", "a"], ["k", "a"]]


def test_empty_raises() -> None:
    with pytest.raises(EmptyTranscript):
        tokenize("")
    with pytest.raises(EmptyTranscript):
        tokenize("   \t\n")


def test_metadata_carried() -> None:
    t = tokenize("pa", "xx", "u1")
    assert t.language_code == "xx"
    assert t.utterance_id == "u1"


def test_render_round_trip() -> None:
    raw = "pʰa t͡ʃaː kʰʲi"
    t = tokenize(raw)
    assert t.render() == nfd(raw)
    again = tokenize(t.render())
    assert [[p.surface for p in w] for w in again.words] == [
        [p.surface for p in w] for w in t.words
    ]


def test_phone_surface_invariant() -> None:
    for word in tokenize("pʰa t͡ʃiː").words:
        for p in word:
            assert p.surface == p.base + "".join(p.diacritics)


def test_phones_flattens_in_order() -> None:
    t = tokenize("pa ta")
    assert [p.surface for p in t.phones()] == ["p", "a", "t", "a"]


def test_phone_rejects_inconsistent_fields() -> None:
    with pytest.raises(AssertionError):
        Phone(surface="pa", base="p", diacritics=("x",))


@st.composite
def phone_words(draw):
    keys = sorted(default_table().entries)
    bases = [k for k in keys if len(k) <= 3]
    n_words = draw(st.integers(1, 4))
    return " ".join(
        "".join(draw(st.sampled_from(bases))
                for _ in range(draw(st.integers(1, 4))))
        for _ in range(n_words)
    )


@given(phone_words())
def test_round_trip_property(raw: str) -> None:
    t = tokenize(raw)
    rendered = t.render()
    assert tokenize(rendered).render() == rendered
    # Flattening matches the per-word segmentation.
    assert sum(len(w) for w in t.words) == len(t.phones())
    assert all(w for w in t.words)


@given(phone_words())
def test_no_content_lost(raw: str) -> None:
    t = tokenize(raw)
    assert t.render().replace(" ", "") == nfd(raw).replace(" ", "")


def test_empty_transcript_renders_empty() -> None:
    assert Transcript(words=[]).render() == ""
    assert Transcript(words=[]).phones() == []
