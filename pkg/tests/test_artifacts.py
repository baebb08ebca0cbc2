import numpy as np
import pytest

from wearsched import ArtifactParseError, MissingArtifactError, Policy
from wearsched.artifacts import (
    read_policy_csv,
    read_q_csv,
    read_value_csv,
    write_policy_csv,
    write_q_csv,
    write_value_csv,
)


def test_policy_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    pol = Policy(actions=rng.integers(0, 3, size=(13, 9)).astype(np.int8))
    path = tmp_path / "policy.csv"
    write_policy_csv(path, pol)
    assert read_policy_csv(path) == pol


def test_value_round_trip_exact(tmp_path):
    rng = np.random.default_rng(1)
    v = rng.normal(scale=1e7, size=(6, 11)) * 10.0 ** rng.integers(-12, 12, size=(6, 11))
    path = tmp_path / "value.csv"
    write_value_csv(path, v)
    np.testing.assert_array_equal(read_value_csv(path), v)


def test_q_round_trip_exact(tmp_path):
    rng = np.random.default_rng(2)
    q = rng.normal(size=(5, 4, 3))
    path = tmp_path / "q.csv"
    write_q_csv(path, q)
    np.testing.assert_array_equal(read_q_csv(path), q)


def test_write_is_deterministic(tmp_path):
    pol = Policy(actions=np.ones((4, 4), dtype=np.int8))
    write_policy_csv(tmp_path / "a.csv", pol)
    write_policy_csv(tmp_path / "b.csv", pol)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_missing_file_raises(tmp_path):
    with pytest.raises(MissingArtifactError):
        read_policy_csv(tmp_path / "nope.csv")


def test_bad_header_raises(tmp_path):
    p = tmp_path / "p.csv"
    p.write_text("foo,bar\n1,1,0\n")
    with pytest.raises(ArtifactParseError, match="header"):
        read_policy_csv(p)


def test_missing_state_raises(tmp_path):
    p = tmp_path / "p.csv"
    p.write_text("tau,delta,action\n1,1,0\n1,2,1\n2,1,2\n")  # 2x2 grid minus (2,2)
    with pytest.raises(ArtifactParseError, match="expected 4 rows|missing state"):
        read_policy_csv(p)


def test_bad_action_raises(tmp_path):
    p = tmp_path / "p.csv"
    p.write_text("tau,delta,action\n1,1,7\n")
    with pytest.raises(ArtifactParseError, match="actions must be"):
        read_policy_csv(p)


def test_unparseable_value_raises(tmp_path):
    p = tmp_path / "v.csv"
    p.write_text("tau,delta,value\n1,1,abc\n")
    with pytest.raises(ArtifactParseError):
        read_value_csv(p)
