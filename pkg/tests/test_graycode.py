import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graysl import DomainError, GrayCodeConfig, decode_gray, encode_gray, make_pattern_set, stack_to_code
from graysl.graycode import decode_gray_array, write_pattern_images


def reflect_gray_table(num_bits: int) -> list[int]:
    """Independent oracle: build the code by the reflect-and-prefix recursion,
    not by the XOR shortcut the implementation uses."""
    table = [0, 1]
    while len(table) < (1 << num_bits):
        half = len(table)
        table = table + [half + code for code in reversed(table)]
    return table


def test_reflect_oracle_agrees_with_encode():
    for num_bits in range(1, 11):
        table = reflect_gray_table(num_bits)
        assert len(table) == 1 << num_bits
        for k, expected in enumerate(table):
            assert encode_gray(k, num_bits) == expected


def test_encode_examples():
    assert encode_gray(0, 4) == 0
    assert encode_gray(5, 4) == 7  # 101 -> 111, checked against the reflect oracle
    assert encode_gray(2, 4) == 3  # 010 -> 011


def test_decode_examples():
    assert decode_gray(0, 4) == 0
    assert decode_gray(7, 4) == 5
    assert decode_gray(8, 4) == 15


@pytest.mark.parametrize("num_bits", [1, 2, 5, 8, 12])
def test_roundtrip_and_bijectivity_exhaustive(num_bits):
    codes = [encode_gray(k, num_bits) for k in range(1 << num_bits)]
    assert sorted(codes) == list(range(1 << num_bits))  # bijection
    for k, code in enumerate(codes):
        assert decode_gray(code, num_bits) == k


@pytest.mark.parametrize("num_bits", [1, 3, 8, 12])
def test_single_bit_adjacency_exhaustive(num_bits):
    for k in range((1 << num_bits) - 1):
        diff = encode_gray(k, num_bits) ^ encode_gray(k + 1, num_bits)
        assert bin(diff).count("1") == 1


@pytest.mark.parametrize("value,num_bits", [(-1, 4), (16, 4), (1 << 12, 12)])
def test_out_of_range_raises(value, num_bits):
    with pytest.raises(DomainError):
        encode_gray(value, num_bits)
    with pytest.raises(DomainError):
        decode_gray(value, num_bits)


def test_decode_gray_array_matches_scalar():
    codes = np.arange(64, dtype=np.int32)
    decoded = decode_gray_array(codes, 6)
    assert [decode_gray(int(c), 6) for c in codes] == decoded.tolist()


# --- configs -----------------------------------------------------------------

def test_config_validation():
    with pytest.raises(Exception):
        GrayCodeConfig(num_bits=0, num_columns=1)
    with pytest.raises(Exception):
        GrayCodeConfig(num_bits=4, num_columns=15)
    with pytest.raises(Exception):
        GrayCodeConfig(num_bits=4, num_columns=16, column_offset=-1)
    with pytest.raises(Exception):
        GrayCodeConfig(num_bits=17, num_columns=1 << 17)


@pytest.mark.parametrize("columns,expected_bits", [(2, 1), (16, 4), (512, 9), (1024, 10)])
def test_pattern_count_is_log2_columns(columns, expected_bits):
    # encoding efficiency: log2(c) patterns versus c timestamps for point scanning
    config = GrayCodeConfig.for_columns(columns)
    assert config.num_bits == expected_bits
    assert expected_bits == int(np.ceil(np.log2(columns)))
    assert columns > expected_bits  # the point-scanning timestamp count always loses
    patterns = make_pattern_set(config, proj_width=columns + 8, proj_height=4)
    assert patterns.patterns.shape[0] == expected_bits


# --- pattern sets -------------------------------------------------------------

def test_one_bit_pattern_halves():
    config = GrayCodeConfig(num_bits=1, num_columns=2)
    ps = make_pattern_set(config, proj_width=2, proj_height=3)
    # gray(0)=0, gray(1)=1: left column dark, right column lit
    assert ps.patterns.shape == (1, 3, 2)
    assert np.all(ps.patterns[0][:, 0] == 0)
    assert np.all(ps.patterns[0][:, 1] == 1)


def test_column5_reads_0111_msb_first():
    config = GrayCodeConfig(num_bits=4, num_columns=16)
    ps = make_pattern_set(config, proj_width=20, proj_height=2)
    bits = [int(ps.patterns[i][0, 5]) for i in range(4)]
    assert bits == [0, 1, 1, 1]  # encode_gray(5) = 7 = 0b0111


def test_patterns_dark_outside_covered_range():
    config = GrayCodeConfig(num_bits=3, num_columns=8, column_offset=4)
    ps = make_pattern_set(config, proj_width=20, proj_height=2)
    outside = np.r_[0:4, 12:20]
    assert np.all(ps.patterns[:, :, outside] == 0)


def test_pattern_width_overflow_raises():
    config = GrayCodeConfig(num_bits=4, num_columns=16, column_offset=8)
    with pytest.raises(Exception):
        make_pattern_set(config, proj_width=20, proj_height=2)


@given(num_bits=st.integers(1, 8), offset=st.integers(0, 5), msb=st.booleans())
def test_pattern_code_consistency(num_bits, offset, msb):
    """Reading the pattern stack at any covered column recovers the column index."""
    config = GrayCodeConfig(num_bits=num_bits, num_columns=1 << num_bits,
                            column_offset=offset, msb_first=msb)
    width = offset + (1 << num_bits) + 3
    ps = make_pattern_set(config, proj_width=width, proj_height=1)
    stack = [ps.patterns[i][0] for i in range(num_bits)]
    decoded = stack_to_code(stack, config)
    covered = np.arange(width) - offset
    inside = (covered >= 0) & (covered < (1 << num_bits))
    assert np.array_equal(decoded[inside], covered[inside])


# --- stacking ------------------------------------------------------------------

def test_stack_examples():
    config = GrayCodeConfig(num_bits=4, num_columns=16)
    assert stack_to_code([0, 0, 0, 0], config) == 0
    assert stack_to_code([0, 1, 1, 1], config) == 5
    assert stack_to_code([1, 0, 0, 0], config) == 15


def test_stack_lsb_first_ordering():
    config = GrayCodeConfig(num_bits=4, num_columns=16, msb_first=False)
    assert stack_to_code([1, 1, 1, 0], config) == 5  # same bits, reversed plane order


def test_stack_rejects_bad_input():
    config = GrayCodeConfig(num_bits=4, num_columns=16)
    with pytest.raises(DomainError):
        stack_to_code([0, 1, 1], config)
    with pytest.raises(DomainError):
        stack_to_code([0, 1, 2, 0], config)


def test_stack_enumerates_all_codes():
    config = GrayCodeConfig(num_bits=4, num_columns=16)
    seen = set()
    for packed in range(16):
        bits = [(packed >> (3 - i)) & 1 for i in range(4)]
        seen.add(stack_to_code(bits, config))
    assert seen == set(range(16))


# --- export --------------------------------------------------------------------

def test_pattern_pbm_roundtrip(tmp_path):
    config = GrayCodeConfig(num_bits=3, num_columns=8)
    ps = make_pattern_set(config, proj_width=11, proj_height=5)
    paths = write_pattern_images(ps, tmp_path)
    assert len(paths) == 3
    for i, path in enumerate(paths):
        data = path.read_bytes()
        assert data.startswith(b"P4\n11 5\n")
        rows = np.unpackbits(
            np.frombuffer(data[len(b"P4\n11 5\n"):], dtype=np.uint8).reshape(5, -1),
            axis=1,
        )[:, :11]
        assert np.array_equal(rows, ps.patterns[i])
