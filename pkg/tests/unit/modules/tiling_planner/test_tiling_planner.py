import pytest
import numpy as np
import collections

from npu_gemm_workbench.modules.core_arch.grid import build_grid, core_id
from npu_gemm_workbench.modules.tiling_planner.planner import (plan, ProblemSize, TileShape, TileRef,
                                                               shim_stream_sequence, distribute_map, join_map,
                                                               replay_core, emit_schedule, l1_footprint,
                                                               l2_footprint, parse_problem_size)
from npu_gemm_workbench.common.exceptions import (ColumnOutOfRange, TileTooLarge, MisalignedTile,
                                                  InvalidProblemSize)

TILE = TileShape(64, 64, 32)

def test_padding():

    p = plan(ProblemSize(50304, 256, 768), TILE, build_grid())

    assert(p.problem == ProblemSize(50432, 256, 768))
    assert(p.padding.pad_m == 128)
    assert(p.padding.pad_k == 0)
    assert(p.padding.pad_n == 0)
    assert(p.original == ProblemSize(50304, 256, 768))

def test_runtime_params():

    p = plan(ProblemSize(256, 768, 2304), TILE, build_grid())

    assert(p.acc_depth == 12)
    assert(p.out_tiles == 288)
    assert(p.runtime_params == (12, 288))
    assert(p.out_tiles_per_core * build_grid().n_compute == p.out_tiles)

def test_no_repeats():

    p = plan(ProblemSize(256, 256, 128), TILE, build_grid())

    assert(p.repeat_a == 1)
    assert(p.repeat_b == 1)

def test_footprints():

    assert(l1_footprint(TILE) == 40960)
    assert(l2_footprint(TILE, 4) == 4 * 40960)

def test_bad_tiles():

    grid = build_grid()

    with pytest.raises(TileTooLarge):
        plan(ProblemSize(256, 256, 256), TileShape(128, 128, 128), grid)

    with pytest.raises(MisalignedTile):
        plan(ProblemSize(256, 256, 256), TileShape(62, 64, 32), grid)

    with pytest.raises(InvalidProblemSize):
        parse_problem_size('0x256x256')

def test_column_three_stream():

    p = plan(ProblemSize(256, 768, 2304), TILE, build_grid())
    a = shim_stream_sequence(p, 3, 'A')
    depth = p.acc_depth

    assert(a[0] == TileRef('A', 3, 0))
    assert(a[depth - 1] == TileRef('A', 3, depth - 1))
    # the row block repeats once per column group
    assert(a[depth] == TileRef('A', 3, 0))
    assert(len(a) == depth * p.repeat_a)

    b = shim_stream_sequence(p, 3, 'B')
    assert(b[0] == TileRef('B', 0, 3))
    assert(b[depth] == TileRef('B', 0, 7))

def test_single_block_stream():

    p = plan(ProblemSize(256, 64, 128), TILE, build_grid())

    assert(shim_stream_sequence(p, 0, 'A') == [TileRef('A', 0, 0)])
    assert(shim_stream_sequence(p, 0, 'B') == [TileRef('B', 0, 0)])
    assert(shim_stream_sequence(p, 0) == [TileRef('A', 0, 0), TileRef('B', 0, 0)])

def test_column_out_of_range():

    p = plan(ProblemSize(256, 64, 128), TILE, build_grid())

    with pytest.raises(ColumnOutOfRange):
        shim_stream_sequence(p, 4)

    with pytest.raises(ColumnOutOfRange):
        distribute_map(p, -1)

def test_distribute_map():

    p = plan(ProblemSize(256, 256, 128), TILE, build_grid())

    # compute core (row, column) is CoreId(x=column, y=row)
    assert(distribute_map(p, 1).a[0] == core_id(0, 3))
    assert(distribute_map(p, 0).b[3] == core_id(0, 5))

def test_join_map():

    grid = build_grid()
    p = plan(ProblemSize(256, 256, 256), TILE, grid)

    join = join_map(p, 1)
    assert(join.slot_of(grid.compute_core(2, 1)) == 0)

    with pytest.raises(ColumnOutOfRange):
        join.slot_of(grid.compute_core(2, 0))

    # second column group: the block sits 4n columns further right
    assert(join_map(p, 3).block_origin(0) == (0, 3 * 32))
    assert(join_map(p, 3).block_origin(1) == (0, 7 * 32))

def test_replay_covers_every_output_tile():

    grid = build_grid()
    p = plan(ProblemSize(512, 192, 384), TILE, grid)

    produced = collections.Counter()
    for core in grid.compute_cores:
        pairs = replay_core(p, core)
        assert(len(pairs) == p.passes * p.acc_depth)
        for start in range(0, len(pairs), p.acc_depth):
            group = pairs[start:start + p.acc_depth]
            rows = set(a.row_block for a, _ in group)
            cols = set(b.col_block for _, b in group)
            assert(len(rows) == 1 and len(cols) == 1)
            # k blocks arrive in order and match between A and B
            assert([a.col_block for a, _ in group] == list(range(p.acc_depth)))
            assert([b.row_block for _, b in group] == list(range(p.acc_depth)))
            produced[(rows.pop(), cols.pop())] += 1

    assert(len(produced) == p.out_tiles)
    assert(set(produced.values()) == {1})

def test_replay_matches_join():

    grid = build_grid()
    p = plan(ProblemSize(512, 128, 256), TILE, grid)

    for core in grid.compute_cores:
        pairs = replay_core(p, core)
        join = join_map(p, core.x)
        for pass_index in range(p.passes):
            a, b = pairs[pass_index * p.acc_depth]
            assert(join.tile_origin(core, pass_index) == (a.row_block, b.col_block))

def test_emit_schedule():

    p = plan(ProblemSize(256, 128, 256), TILE, build_grid())

    lines = emit_schedule(p)

    assert(lines[0] == 'SHIM 0 A 0 0')
    assert(lines[1] == 'SHIM 0 B 0 0')
    assert(len(lines) == sum(len(shim_stream_sequence(p, i)) for i in range(4)))

def test_summary():

    summary = plan(ProblemSize(50304, 256, 768), TILE, build_grid()).summary()

    assert(summary['padded'] == '50432x256x768')
    assert(summary['pad_m'] == 128)
    assert(summary['shims']['3']['first_a'] == [3, 0])
