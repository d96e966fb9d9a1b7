import numpy as np
import pytest

from edmtools.instances import (
    Instance,
    Metadata,
    format_number,
    parse_instance,
    read_cover,
    read_instance,
    serialize_instance,
    write_instance,
)
from edmtools.matrix import PartialMatrix
from edmtools.utils import AsymmetryError, InstanceError, ParseError


ANNOTATED = """3 1
0 1 *
1 0 1
* 1 0
#meta
generator masked
seed 7
mask per-row 1
clique 0 0 1
clique 1 1 2
kept 0 2 5
removed 4 1 3
point 0 0
point 1 1
point 2 2
note hand made
"""


def test_parse_worked(datapath):
    with open(datapath["worked.edm"]) as inp:
        text = inp.read()
    instance = parse_instance(text)
    assert instance.n == 4
    assert instance.d == 2
    assert instance.matrix[0, 2] == 1.25
    assert instance.matrix.unspecified_pairs() == [(0, 3), (1, 3)]
    assert instance.metadata.is_empty
    assert serialize_instance(instance) == text


def test_parse_metadata():
    instance = parse_instance(ANNOTATED)
    meta = instance.metadata
    assert meta.generator == "masked"
    assert meta.seed == 7
    assert meta.mask == ("per-row", "1")
    assert meta.cliques == ((0, 1), (1, 2))
    assert instance.cover.cliques == ((0, 1), (1, 2))
    assert meta.kept == (0, 2, 5)
    assert meta.removed == (4, 1, 3)
    assert np.array_equal(meta.points, [[0.0], [1.0], [2.0]])
    assert meta.extra == (("note", "hand made"),)
    assert serialize_instance(instance) == ANNOTATED
    assert instance.redacted().metadata.points is None
    assert instance.redacted().metadata.seed == 7


@pytest.mark.parametrize(
    "text,line",
    [
        pytest.param("", 1, id="empty"),
        pytest.param("2\n0 1\n1 0\n", 1, id="short_header"),
        pytest.param("2 x\n0 1\n1 0\n", 1, id="bad_dim"),
        pytest.param("3 1\n0 1 1\n1 0 1\n", 4, id="missing_row"),
        pytest.param("2 1\n0 1\n1 zero\n", 3, id="bad_number"),
        pytest.param("2 1\n0 inf\ninf 0\n", 2, id="infinite"),
        pytest.param("2 1\n0 1\n1 0\ntrailing\n", 4, id="no_marker"),
        pytest.param("2 1\n0 1\n1 0\n#meta\npoint 0 0\n", 4, id="missing_points"),
        pytest.param("2 1\n0 1\n1 0\n#meta\npoint 0 0\npoint 1 3\n", 4, id="wrong_points"),
    ],
)
def test_parse_errors(text, line):
    with pytest.raises(ParseError) as err:
        parse_instance(text)
    assert err.value.line == line


def test_malformed_file(datapath):
    with pytest.raises(ParseError) as err:
        read_instance(datapath["malformed.edm"])
    assert err.value.line == 3
    assert err.value.column == 3


def test_invalid_entries():
    with pytest.raises(AsymmetryError):
        parse_instance("2 1\n0 1\n2 0\n")
    with pytest.raises(InstanceError):
        parse_instance("2 1\n0 -1\n-1 0\n")


def test_write_compressed(tmp_path):
    matrix = PartialMatrix([[0.0, 0.5, np.nan], [0.5, 0.0, 2.0], [np.nan, 2.0, 0.0]])
    instance = Instance(matrix, 3, Metadata(generator="test", kept=(1, 2, 3)))
    path = tmp_path / "instance.edm.gz"
    write_instance(instance, path)
    loaded = read_instance(path)
    assert loaded.matrix == matrix
    assert loaded.d == 3
    assert loaded.metadata == instance.metadata


def test_read_redacts(tmp_path):
    path = tmp_path / "annotated.edm"
    path.write_text(ANNOTATED)
    assert read_instance(path).metadata.points is None
    assert read_instance(path, redact=False).metadata.points.shape == (3, 1)


def test_format_number():
    assert format_number(4.0) == "4"
    assert format_number(4.25) == "4.25"
    assert format_number(0.1) == "0.1"
    assert format_number(2.0 ** 60) == repr(2.0 ** 60)


def test_read_cover(datapath, tmp_path):
    cover = read_cover(datapath["worked.cover"])
    assert cover.cliques == ((0, 1, 2), (2, 3))
    cover.validate(read_instance(datapath["worked.edm"]).matrix)
    empty = tmp_path / "empty.cover"
    empty.write_text("# nothing\n\n")
    with pytest.raises(InstanceError):
        read_cover(empty)
