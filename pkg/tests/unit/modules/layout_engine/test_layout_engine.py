import pytest
import numpy as np

from npu_gemm_workbench.common.matrix import Matrix, ROW_MAJOR
from npu_gemm_workbench.common.exceptions import NotInvertible, MisalignedGranule, SizeMismatch, LayoutError
from npu_gemm_workbench.modules.tiling_planner.planner import TileShape
from npu_gemm_workbench.modules.layout_engine.patterns import (AccessPattern, apply, invert, is_permutation,
                                                               element_permutation, byte_pair_fixup)
from npu_gemm_workbench.modules.layout_engine.transforms import (tile_pattern, micro_tile_permutation,
                                                                 micro_tile_oracle, micro_tile, untile_micro,
                                                                 layout_path, path_permutation, run_path,
                                                                 TileWindow)

TILE = TileShape(64, 64, 32)

def blocked_order(index, tr, tc, mr, mc):

    """
    Positions of index's entries after tiling by (tr, tc) and
    micro-tiling by (mr, mc), both in row-of-blocks order
    """

    rows, cols = index.shape
    tiles = index.reshape(rows // tr, tr, cols // tc, tc).transpose(0, 2, 1, 3)
    micro = tiles.reshape(rows // tr, cols // tc, tr // mr, mr, tc // mc, mc).transpose(0, 1, 2, 4, 3, 5)
    return micro.reshape(-1)

def test_tile_pattern_identity():

    p = tile_pattern(64, 64, 64, 64, 2)
    assert(np.array_equal(element_permutation(p, 2), np.arange(64 * 64)))

    p = tile_pattern(4, 8, 4, 8, 2)
    assert(np.array_equal(element_permutation(p, 2), np.arange(32)))

def test_tile_pattern_offsets():

    perm = element_permutation(tile_pattern(128, 128, 64, 64, 2), 2)

    # element (0, 64) opens the second tile
    assert(np.where(perm == 64)[0][0] == 64 * 64)
    # element (64, 0) opens the third: tiles go row by row, so it is at
    # 8192, not the 64*64 a column-of-tiles order would give
    assert(np.where(perm == 64 * 128)[0][0] == 2 * 64 * 64)
    assert(np.where(perm == 64 * 128)[0][0] != 64 * 64)

    index = np.arange(128 * 128).reshape(128, 128)
    oracle = index.reshape(2, 64, 2, 64).transpose(0, 2, 1, 3).reshape(-1)
    assert(np.array_equal(perm, oracle))

def test_tile_pattern_alignment():

    with pytest.raises(MisalignedGranule):
        tile_pattern(4, 6, 4, 3, 2)

    with pytest.raises(SizeMismatch):
        tile_pattern(100, 64, 64, 64, 2)

def test_micro_tile_identity():

    perm = micro_tile_permutation(TileShape(4, 8, 4), 'A')

    assert(np.array_equal(perm, np.arange(32)))

def test_micro_tile_offsets():

    perm = micro_tile_permutation(TILE, 'A')

    # element (0, 8) opens the second micro-tile
    assert(np.where(perm == 8)[0][0] == 32)

@pytest.mark.parametrize('operand', ['A', 'B', 'C'])
def test_micro_tile_matches_oracle(operand):

    for tile in (TILE, TileShape(32, 64, 64), TileShape(16, 16, 16)):
        assert(np.array_equal(micro_tile_permutation(tile, operand), micro_tile_oracle(tile, operand)))

def test_micro_tile_round_trip():

    data = np.random.RandomState(0).random_sample(64 * 32).astype(np.float32)

    assert(np.array_equal(untile_micro(TILE, 'C', micro_tile(TILE, 'C', data)), data))

def test_apply_identity():

    values = np.random.RandomState(1).random_sample((8, 8)).astype(np.float32)
    m = Matrix.from_array(values)

    out = apply(AccessPattern([(64, 1)]), m)

    assert(np.array_equal(out.to_array(), values))

def test_invert_round_trip():

    values = np.random.RandomState(2).random_sample((64, 64)).astype(np.float32)
    m = Matrix.from_array(values)
    p = tile_pattern(64, 64, 32, 32, 4)

    tiled = apply(p, m)
    back = apply(invert(p), tiled)

    assert(is_permutation(p))
    assert(back.layout == ROW_MAJOR)
    assert(np.array_equal(back.data, m.data))
    assert(not np.array_equal(tiled.data, m.data))

def test_invert_repeat():

    with pytest.raises(NotInvertible):
        invert(AccessPattern([(4, 0), (2, 1)]))

def test_apply_checks():

    m = Matrix.from_array(np.zeros((4, 4), dtype=np.float32))

    with pytest.raises(SizeMismatch):
        apply(AccessPattern([(8, 1)]), m)

    with pytest.raises(LayoutError):
        apply(tile_pattern(4, 4, 2, 2, 4), m.transposed())

def test_granule_size():

    assert(AccessPattern([(4, 1)], elem_bytes=4).is_dma)
    assert(not AccessPattern([(4, 1)], elem_bytes=2).is_dma)

def test_byte_pair_fixup():

    buffer = np.array([0x0a0b, 0x0c0d], dtype=np.uint16)

    assert(byte_pair_fixup(buffer) is buffer)
    assert(byte_pair_fixup(buffer, np.arange(2)) is buffer)

    swapped = byte_pair_fixup(buffer, np.array([1, 0]))
    assert(swapped.tobytes() == buffer[::-1].tobytes())

    with pytest.raises(SizeMismatch):
        byte_pair_fixup(np.zeros(3, dtype=np.uint16), np.array([1, 0]))

def test_a_path():

    M, K = 128, 128
    perm = path_permutation(layout_path('A', M, K, TILE), M * K, 2)

    index = np.arange(M * K).reshape(M, K)
    assert(np.array_equal(perm, blocked_order(index, 64, 64, 4, 8)))

def test_b_path():

    K, N = 128, 64
    perm = path_permutation(layout_path('B', K, N, TILE), K * N, 2)

    # column-major storage: logical (r, c) sits at c * K + r; tiles go
    # column block by column block
    index = np.arange(K * N).reshape(N, K).T
    tiles = index.reshape(K // 64, 64, N // 32, 32).transpose(2, 0, 1, 3)
    oracle = tiles.reshape(N // 32, K // 64, 8, 8, 8, 4).transpose(0, 1, 2, 4, 3, 5).reshape(-1)

    assert(np.array_equal(perm, oracle))

def test_c_path():

    M, N = 128, 64
    values = np.random.RandomState(3).random_sample((M, N)).astype(np.float32)

    micro_tiled = values.reshape(-1)[blocked_order(np.arange(M * N).reshape(M, N), 64, 32, 4, 4)]
    src = Matrix(micro_tiled, M, N, 'float32', layout_path('C', M, N, TILE)[0].pattern.src_tag)

    out = run_path(layout_path('C', M, N, TILE), src)

    assert(out.layout == ROW_MAJOR)
    assert(np.array_equal(out.to_array(), values))

def test_tile_window():

    values = np.arange(16 * 8, dtype=np.float32)
    window = TileWindow(16, 8, 4, 4, 4)

    tile = window.read(values, 2, 1)

    assert(np.array_equal(tile.reshape(4, 4), values.reshape(16, 8)[8:12, 4:8]))

    out = np.zeros_like(values)
    window.write(out, 2, 1, tile)
    assert(np.array_equal(out.reshape(16, 8)[8:12, 4:8], tile.reshape(4, 4)))
