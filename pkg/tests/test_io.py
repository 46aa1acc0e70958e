import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aclab.graphs import Digraph, Graph, InvariantError, Tournament
from aclab.instance_io import InstanceFile, ParseError, read_instance, write_instance
from aclab.rng import Rng


def test_graph_round_trip(tmp_path):
    g = Graph(4, [(0, 1), (2, 3), (1, 2)])
    path = tmp_path / "g.ins"
    write_instance(path, g, {"seed": "7", "generator": "test"})
    back, meta = read_instance(path)
    assert back == g
    assert meta == {"seed": "7", "generator": "test"}


def test_canonical_file_round_trips_bytewise(tmp_path):
    g = Digraph(3, [(2, 0), (0, 1)])
    path = tmp_path / "d.ins"
    write_instance(path, g, {"a": "1"})
    text = path.read_text()
    assert InstanceFile.loads(text).dumps() == text


def test_tournament_kind_restored(tmp_path):
    t = Tournament.from_order(range(4))
    path = tmp_path / "t.ins"
    write_instance(path, t)
    back, _ = read_instance(path)
    assert isinstance(back, Tournament)


def test_tournament_missing_pair_is_invariant_error(tmp_path):
    path = tmp_path / "bad.ins"
    path.write_text("p tournament 3 2\ne 0 1\ne 1 2\n")
    with pytest.raises(InvariantError):
        read_instance(path)


def test_self_loop_named_in_error(tmp_path):
    path = tmp_path / "loop.ins"
    path.write_text("p digraph 2 1\ne 1 1\n")
    with pytest.raises(InvariantError, match="self-loop"):
        read_instance(path)


def test_parse_error_carries_line_number(tmp_path):
    path = tmp_path / "syntax.ins"
    path.write_text("p graph 2 1\nq 0 1\n")
    with pytest.raises(ParseError, match=":2:"):
        read_instance(path)


def test_header_record_count_checked():
    with pytest.raises(ParseError, match="promises"):
        InstanceFile.loads("p graph 2 2\ne 0 1\n")


def test_missing_header():
    with pytest.raises(ParseError, match="header"):
        InstanceFile.loads("e 0 1\n")


def test_comment_lines_allowed_anywhere():
    inst = InstanceFile.loads("c top=1\np graph 2 1\nc mid=2\ne 0 1\nc tail=3\n")
    assert inst.metadata == {"top": "1", "mid": "2", "tail": "3"}


def test_writer_sorts_records():
    g = Graph(4, [(3, 2), (1, 0)])
    text = InstanceFile.of(g).dumps()
    lines = [l for l in text.splitlines() if l.startswith("e")]
    assert lines == ["e 0 1", "e 2 3"]


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 9), st.integers(0, 2**32), st.booleans())
def test_round_trip_identity_property(n, seed, directed):
    rng = Rng(seed)
    pairs = [
        (i, j) for i in range(n) for j in range(n) if i != j and rng.take_bits(1)
    ]
    g = Digraph(n, pairs) if directed else Graph(n, pairs)
    inst = InstanceFile.of(g, {"seed": str(seed)})
    assert InstanceFile.loads(inst.dumps()).build() == g
