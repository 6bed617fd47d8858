import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcpss.errors import ConfigError
from mcpss.ingest import ProteinRecord, normalize_sequence
from mcpss.windowing import dataset_windows, make_windows


def test_one_window_per_residue():
    rec = ProteinRecord("p", "ACDEFGHIKL", "HHHHEEEECC")
    assert len(make_windows(rec, 17)) == 10


def test_edge_padding():
    w = make_windows(ProteinRecord("p", "AAC", "HHC"), 5)[0]
    assert w.window == "XXAAC"
    assert w.center_label == "H"
    assert w.position == 0
    assert make_windows(ProteinRecord("p", "AAC", "HHC"), 5)[2].window == "AACXX"


def test_edge_padding_after_ingest():
    # B is an ambiguity code, so it is already X by the time windows are cut
    w = make_windows(ProteinRecord("p", normalize_sequence("AAB"), "HHC"), 5)[0]
    assert w.window == "XXAAX"


@pytest.mark.parametrize("h", [4, 3, 1, 0, 16])
def test_bad_window_size(h):
    with pytest.raises(ConfigError):
        make_windows(ProteinRecord("p", "ACD", "HHH"), h)


seqs = st.text(alphabet="ACDEFGHIKLMNPQRSTVWY", min_size=1, max_size=60)


@given(seqs, st.sampled_from([5, 7, 9, 17]))
def test_window_properties(seq, h):
    rec = ProteinRecord("p", seq, "C" * len(seq))
    half = (h - 1) // 2
    windows = make_windows(rec, h)
    assert "".join(w.center for w in windows) == seq
    for w in windows:
        assert len(w.window) == h
        if half <= w.position < len(seq) - half:
            assert w.window == seq[w.position - half:w.position + half + 1]


def test_total_windows_equals_residue_count(toy_dataset):
    assert len(dataset_windows(toy_dataset, 9)) == toy_dataset.residue_count
