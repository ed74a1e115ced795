import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tpcr.errors import MalformedMatrixError
from tpcr.io import format_matrix, parse_matrix, read_matrix, read_vector, write_matrix


@settings(max_examples=80, deadline=None)
@given(
    st.tuples(st.integers(1, 5), st.integers(1, 5)).flatmap(
        lambda s: arrays(np.float64, s, elements=st.floats(allow_nan=False, allow_infinity=False))
    )
)
def test_round_trip_is_bit_exact(M):
    back = parse_matrix(format_matrix(M))
    assert back.shape == M.shape
    assert back.tobytes() == M.tobytes()


def test_header_format():
    assert format_matrix([[1.0, 2.0]]).splitlines()[0] == "# rows=1 cols=2"


def test_vector_written_as_column(tmp_path):
    p = tmp_path / "v.csv"
    write_matrix(p, np.array([1.5, -2.0, 0.1]))
    assert read_matrix(p).shape == (3, 1)
    np.testing.assert_array_equal(read_vector(p), [1.5, -2.0, 0.1])


@pytest.mark.parametrize(
    "text",
    [
        "",
        "1,2\n",
        "# rows=2 cols=2\n1,2\n",
        "# rows=1 cols=2\n1,2,3\n",
        "# rows=1 cols=2\n1,abc\n",
        "# rows=1 cols=1\nnan\n",
    ],
)
def test_malformed_inputs(text):
    with pytest.raises(MalformedMatrixError):
        parse_matrix(text)


def test_read_vector_rejects_wide(tmp_path):
    p = tmp_path / "m.csv"
    write_matrix(p, np.eye(2))
    with pytest.raises(MalformedMatrixError):
        read_vector(p)


def test_error_names_source():
    with pytest.raises(MalformedMatrixError, match="thing.csv"):
        parse_matrix("bad", source="thing.csv")
