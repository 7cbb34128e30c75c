import pytest
import numpy as np

from npu_gemm_workbench.common.exceptions import InvalidArchConfig
from npu_gemm_workbench.modules.core_arch.grid import (build_grid, peak_flops, MemorySpec, ComputeSpec,
                                                       SHIM, MEMORY, COMPUTE, core_id)

def test_default_grid():

    grid = build_grid()

    assert(len(grid.cores) == 24)
    assert(grid.n_compute == 16)
    assert(set(c.kind for c in grid.shim_cores) == {SHIM})
    assert(set(c.kind for c in grid.memory_cores) == {MEMORY})
    assert(set(c.kind for c in grid.compute_cores) == {COMPUTE})

def test_peak_flops():

    grid = build_grid()

    per_core, aggregate = peak_flops(grid)

    assert(per_core == 256e9)
    assert(aggregate == 16 * 2 * 128 * 1e9)
    assert(peak_flops(grid, cores=1)[1] == 256e9)

    half = build_grid(cspec=ComputeSpec(clock_hz=0.5e9))
    assert(peak_flops(half)[1] == 2e12)

    stopped = build_grid(cspec=ComputeSpec(clock_hz=0))
    assert(peak_flops(stopped) == (0.0, 0.0))

def test_invalid_specs():

    with pytest.raises(InvalidArchConfig):
        MemorySpec(l1_bytes=0)

    with pytest.raises(InvalidArchConfig):
        ComputeSpec(fma_per_cycle=64)

    with pytest.raises(InvalidArchConfig):
        build_grid(columns=4, compute_rows=3)

def test_routes():

    grid = build_grid()

    for core in grid.compute_cores:
        # one A source in the core's row, one B source in its column
        a_src = grid.routes.sources(core, 'A')
        b_src = grid.routes.sources(core, 'B')
        assert(a_src == [grid.memory_cores[core.y - 2]])
        assert(b_src == [grid.memory_cores[core.x]])
        assert(grid.routes.fan_out(core, 'C') == [grid.memory_cores[core.x]])

    # every (A source, B source) pair reaches exactly one compute core
    pairs = [(grid.routes.sources(c, 'A')[0], grid.routes.sources(c, 'B')[0]) for c in grid.compute_cores]
    assert(len(set(pairs)) == grid.n_compute)

def test_fan_out():

    grid = build_grid()

    a_dst = grid.routes.fan_out(grid.memory_cores[1], 'A')
    b_dst = grid.routes.fan_out(grid.memory_cores[0], 'B')

    assert(a_dst == [core_id(x, 3) for x in range(4)])
    assert(b_dst == [core_id(0, y) for y in range(2, 6)])

def test_to_text():

    text = build_grid().to_text()

    assert('compute_cores = 16' in text)
    assert('peak_flops_aggregate = 4096000000000.0' in text)
    assert(text.count(' -> ') == len(build_grid().routes))
