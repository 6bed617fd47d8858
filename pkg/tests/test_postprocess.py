from itertools import product

import numpy as np
import pytest

from mcpss.postprocess import DEFAULT_RULES, FilterRuleSet, filter_structure, has_forbidden


@pytest.mark.parametrize("raw, clean", [
    ("EHE", "EEE"),
    ("HEH", "HHH"),
    ("HCH", "HHH"),
    ("ECE", "EEE"),
    ("HEEH", "HHHH"),
    ("CCCC", "CCCC"),
    ("", ""),
])
def test_examples(raw, clean):
    assert filter_structure(raw) == clean


def test_rule_order_within_a_pass():
    # HEH at position 0 fires before EHE at position 1 is reached
    assert filter_structure("HEHE") == "HHHE"


def test_cascading_rewrites_reach_fixpoint():
    # one rewrite can create a pattern to its left, so passes repeat
    out = filter_structure("HEHEEH")
    assert not has_forbidden(out)
    assert filter_structure(out) == out


def test_exhaustive_short_strings():
    for n in range(8):
        for t in product("HEC", repeat=n):
            s = "".join(t)
            out = filter_structure(s)
            assert len(out) == n
            assert not has_forbidden(out)
            assert filter_structure(out) == out


def test_random_long_strings_terminate(rng):
    alphabet = np.array(list("HEC"))
    for _ in range(2000):
        s = "".join(rng.choice(alphabet, rng.integers(8, 80)))
        out = filter_structure(s, max_passes=len(s) + 1)
        assert not has_forbidden(out)


def test_illegal_character():
    with pytest.raises(ValueError, match="position 2"):
        filter_structure("HHX")


def test_empty_rule_set_is_identity():
    assert filter_structure("EHE", FilterRuleSet.none()) == "EHE"


def test_custom_rules_are_data():
    rules = FilterRuleSet((("CC", "HH"),))
    assert filter_structure("ECCE", rules) == "EHHE"
    assert FilterRuleSet().rules == DEFAULT_RULES


def test_unequal_rule_lengths_rejected():
    with pytest.raises(ValueError):
        FilterRuleSet((("EHE", "EE"),))


def test_pass_limit():
    with pytest.raises(RuntimeError):
        filter_structure("HEHEHEHE", max_passes=1)
