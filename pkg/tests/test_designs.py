"""Tests for block design construction and validation."""
import pytest
from pathlib import Path
import sys

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from src.core.designs import (
    DesignParseError,
    DesignValidationError,
    affine_plane,
    block_intersection_sizes,
    complement,
    cyclic_design,
    decode,
    dual,
    dual_with_maps,
    encode,
    is_symmetric,
    load_design,
    make_design,
    point_set,
    projective_plane,
    relabel,
    residual,
    save_design,
    validate,
)
from src.core.finite_field import FieldError

FANO_LINES = [{0, 1, 3}, {1, 2, 4}, {2, 3, 5}, {3, 4, 6}, {0, 4, 5}, {1, 5, 6}, {0, 2, 6}]


def fano():
    return cyclic_design(7, [[0, 1, 3]], name='fano')


class TestValidate:
    """Test suite for validate()."""

    def test_fano_parameters(self):
        params = validate(7, [point_set(line) for line in FANO_LINES])
        assert params.as_tuple() == (7, 3, 1, 7, 3)

    def test_pair_coverage_mismatch(self):
        blocks = [point_set(line) for line in FANO_LINES[:-1]] + [point_set({0, 2, 5})]
        with pytest.raises(DesignValidationError) as exc_info:
            validate(7, blocks)
        assert exc_info.value.pair is not None
        assert 'Pair coverage mismatch' in str(exc_info.value)

    def test_uneven_block_sizes(self):
        blocks = [point_set(line) for line in FANO_LINES[:-1]] + [point_set({0, 2, 6, 5})]
        with pytest.raises(DesignValidationError):
            validate(7, blocks)

    def test_points_outside_range(self):
        with pytest.raises(DesignValidationError):
            validate(3, [point_set({0, 1, 5})])

    def test_empty_block_list(self):
        with pytest.raises(DesignValidationError):
            validate(7, [])

    def test_pair_not_covered(self):
        with pytest.raises(DesignValidationError) as exc_info:
            validate(4, [point_set({0, 2}), point_set({1, 3})])
        assert exc_info.value.coverage == 0

    def test_make_design_is_canonical(self):
        a = make_design(7, [point_set(line) for line in FANO_LINES])
        b = make_design(7, [point_set(line) for line in reversed(FANO_LINES)])
        assert a == b


class TestPlanes:
    """Test suite for projective and affine planes."""

    @pytest.mark.parametrize('q', [2, 3, 4, 5, 7, 8, 9])
    def test_projective_parameters(self, q):
        d = projective_plane(q)
        v = q * q + q + 1
        assert d.params.as_tuple() == (v, q + 1, 1, v, q + 1)

    @pytest.mark.parametrize('q', [2, 3, 4, 5])
    def test_two_lines_meet_once(self, q):
        assert block_intersection_sizes(projective_plane(q)) == [1]

    @pytest.mark.parametrize('q', [2, 3, 4, 5, 7, 8, 9])
    def test_affine_parameters(self, q):
        d = affine_plane(q)
        assert d.params.as_tuple() == (q * q, q, 1, q * q + q, q + 1)

    @pytest.mark.parametrize('q', [2, 3, 4])
    def test_affine_lines_parallel_or_meeting(self, q):
        assert block_intersection_sizes(affine_plane(q)) == [0, 1]

    def test_non_prime_power_order(self):
        with pytest.raises(FieldError):
            projective_plane(6)

    def test_order_beyond_capacity(self):
        with pytest.raises(FieldError):
            affine_plane(67)


class TestCyclicDesigns:
    """Test suite for cyclic development."""

    def test_fano(self):
        d = fano()
        assert d.params.as_tuple() == (7, 3, 1, 7, 3)
        assert d.params == projective_plane(2).params

    def test_paley_biplane(self):
        d = cyclic_design(11, [[1, 3, 4, 5, 9]])
        assert d.params.as_tuple() == (11, 5, 2, 11, 5)
        assert block_intersection_sizes(d) == [2]

    def test_sts13(self):
        d = cyclic_design(13, [[0, 1, 4], [0, 2, 7]])
        assert d.params.as_tuple() == (13, 3, 1, 26, 6)

    def test_sts15_short_orbit(self):
        d = cyclic_design(15, [[0, 1, 4], [0, 2, 8], [0, 5, 10]])
        assert d.params.as_tuple() == (15, 3, 1, 35, 7)

    def test_not_a_difference_set(self):
        with pytest.raises(DesignValidationError):
            cyclic_design(7, [[0, 1, 2]])

    def test_base_out_of_range(self):
        with pytest.raises(DesignValidationError):
            cyclic_design(7, [[0, 1, 9]])

    def test_base_is_everything(self):
        with pytest.raises(DesignValidationError):
            cyclic_design(5, [range(5)])


class TestDerivedDesigns:
    """Test suite for complement, residual and dual."""

    def test_complement_of_fano_is_biplane(self):
        d = complement(fano())
        assert d.params.as_tuple() == (7, 4, 2, 7, 4)
        assert complement(d) == fano()

    def test_complement_lambda_formula(self):
        d = affine_plane(3)
        c = complement(d)
        p = d.params
        assert c.params.lam == p.b - 2 * p.r + p.lam

    def test_residual_of_projective_plane(self):
        for q in (2, 3, 4):
            res = residual(projective_plane(q), 0)
            assert res.design.params == affine_plane(q).params
            assert res.removed_block == 0
            assert len(res.point_map) == q * q
            assert 0 not in res.block_map

    def test_residual_maps_back_to_parent(self):
        d = cyclic_design(11, [[1, 3, 4, 5, 9]])
        res = residual(d, 3)
        removed = d.blocks[3]
        for j, blk in enumerate(res.design.blocks):
            parent = d.blocks[res.block_map[j]]
            lifted = point_set(res.point_map[x] for x in range(res.design.v) if blk >> x & 1)
            assert lifted == parent & ~removed

    def test_residual_of_small_biplane_repeats_blocks(self):
        res = residual(complement(fano()), 0)
        assert res.design.params.as_tuple() == (3, 2, 2, 6, 4)
        assert res.design.has_repeated_blocks()

    def test_residual_needs_symmetric_design(self):
        with pytest.raises(DesignValidationError):
            residual(affine_plane(3), 0)

    def test_residual_block_out_of_range(self):
        with pytest.raises(DesignValidationError):
            residual(fano(), 7)
        with pytest.raises(DesignValidationError):
            residual(fano(), -1)

    def test_dual_of_symmetric_design(self):
        d = cyclic_design(11, [[1, 3, 4, 5, 9]])
        dd = dual(d)
        assert dd.params == d.params
        assert block_intersection_sizes(dd) == [2]
        assert is_symmetric(dd)

    @pytest.mark.parametrize('design', [
        fano(),
        complement(fano()),
        projective_plane(3),
        cyclic_design(11, [[1, 3, 4, 5, 9]]),
    ], ids=['fano', 'biplane7', 'PG3', 'biplane11'])
    def test_dual_of_dual_is_the_design(self, design):
        first = dual_with_maps(design)
        assert relabel(dual(first.design), first.block_map) == design

    def test_dual_maps(self):
        d = projective_plane(3)
        first = dual_with_maps(d)
        assert first.point_map == tuple(range(d.b))
        assert sorted(first.block_map) == list(range(d.v))
        for i, x in enumerate(first.block_map):
            # dual block i is the pencil of parent point x
            assert first.design.blocks[i] == point_set(j for j in range(d.b) if d.blocks[j] >> x & 1)
            assert first.block_of_point(x) == i

    def test_relabel_needs_permutation(self):
        with pytest.raises(DesignValidationError):
            relabel(fano(), [0, 0, 1, 2, 3, 4, 5])

    def test_dual_needs_symmetric_design(self):
        with pytest.raises(DesignValidationError):
            dual(affine_plane(2))


class TestSerialization:
    """Test suite for the text format."""

    def test_header(self):
        assert encode(projective_plane(2)).splitlines()[0] == '7 3 1 7'
        assert encode(affine_plane(3)).splitlines()[0] == '9 3 1 12'
        assert encode(cyclic_design(11, [[1, 3, 4, 5, 9]])).splitlines()[0] == '11 5 2 11'

    def test_decode_restores_design(self):
        d = projective_plane(3)
        assert decode(encode(d)) == d

    def test_comments_and_blank_lines(self):
        text = "# Fano plane\n7 3 1 7\n\n" + "\n".join(
            ' '.join(str(x) for x in sorted(line)) + '  # line' for line in FANO_LINES) + "\n"
        assert decode(text) == fano()

    def test_non_integer_token(self):
        with pytest.raises(DesignParseError) as exc_info:
            decode("7 3 1 7\n0 1 x\n")
        assert exc_info.value.line_no == 2

    def test_bad_header(self):
        with pytest.raises(DesignParseError) as exc_info:
            decode("7 3 1\n")
        assert exc_info.value.line_no == 1

    def test_unsorted_block(self):
        with pytest.raises(DesignParseError):
            decode("7 3 1 7\n1 0 3\n")

    def test_point_out_of_range(self):
        with pytest.raises(DesignParseError):
            decode("7 3 1 7\n0 1 7\n")

    def test_too_few_blocks(self):
        with pytest.raises(DesignParseError):
            decode("7 3 1 7\n0 1 3\n")

    def test_header_point_count_must_match_blocks(self):
        text = encode(fano()).replace('7 3 1 7', '1000000000 3 1 7', 1)
        with pytest.raises(DesignParseError):
            decode(text)

    def test_missing_header(self):
        with pytest.raises(DesignParseError):
            decode("# nothing here\n")

    def test_wrong_lambda_in_header(self):
        text = encode(fano()).replace('7 3 1 7', '7 3 2 7', 1)
        with pytest.raises(DesignParseError):
            decode(text)

    def test_corrupted_block_is_a_validation_error(self):
        lines = encode(fano()).splitlines()
        lines[-1] = '0 2 5'
        with pytest.raises(DesignValidationError):
            decode('\n'.join(lines))

    def test_save_and_load(self, tmp_path):
        path = tmp_path / 'pg3.txt'
        save_design(projective_plane(3), path)
        loaded = load_design(path)
        assert loaded == projective_plane(3)
        assert loaded.name == 'pg3'
