import pytest
import numpy as np

from npu_gemm_workbench.common.matrix import Matrix, COL_MAJOR
from npu_gemm_workbench.common.schemas import CostParams
from npu_gemm_workbench.common.utils import load_with_schema
from npu_gemm_workbench.common.exceptions import (TileShapeMismatch, TracingDisabled, ShapeMismatch,
                                                  LayoutError, SimulationError, Deadlock)
from npu_gemm_workbench.modules.core_arch.grid import build_grid, peak_flops, core_label
from npu_gemm_workbench.modules.tiling_planner.planner import plan, ProblemSize, TileShape
from npu_gemm_workbench.modules.kernel_emulator.kernel import evaluate_plan
from npu_gemm_workbench.modules.npu_simulator.simulator import run, trace, format_trace, EVENT_KINDS
from npu_gemm_workbench.modules.npu_simulator.reconfig import reconfigure, compare, MINIMAL, FULL
from npu_gemm_workbench.modules.npu_simulator.explore import explore_tiles
from npu_gemm_workbench.modules.gpt2_workbench.flops import gpt2_gemm_sizes

TILE = TileShape(64, 64, 32)

def default_cost():
    return dict(load_with_schema(CostParams, {}))

def operands(problem, rng):

    M, K, N = problem
    a = rng.random_sample((M, K)).astype(np.float32)
    b = rng.random_sample((K, N)).astype(np.float32)
    return a, b, Matrix.from_array(a), Matrix.from_array(b, layout=COL_MAJOR)

def test_ones():

    grid = build_grid()
    problem = ProblemSize(256, 256, 128)
    a = Matrix.from_array(np.ones((256, 256), dtype=np.float32))
    b = Matrix.from_array(np.ones((256, 128), dtype=np.float32), layout=COL_MAJOR)

    report = run(plan(problem, TILE, grid), grid, a, b, default_cost())

    assert(np.all(report.output.to_array() == 256.0))

def test_matches_functional_path():

    grid = build_grid()
    problem = ProblemSize(300, 200, 136)
    p = plan(problem, TILE, grid)
    a, b, am, bm = operands(problem, np.random.RandomState(0))

    report = run(p, grid, am, bm, default_cost())

    assert(report.output.shape == (300, 136))
    assert(np.array_equal(report.output.to_array(), evaluate_plan(p, a, b)))

def test_bytes_moved():

    grid = build_grid()
    problem = ProblemSize(512, 128, 256)
    p = plan(problem, TILE, grid)
    M, K, N = p.problem

    report = run(p, grid, None, None, default_cost())

    assert(report.bytes_moved['L3->L2 A'] == M * K * 2 * (N // (4 * TILE.n)))
    assert(report.bytes_moved['L3->L2 B'] == K * N * 2 * (M // (4 * TILE.m)))
    assert(report.bytes_moved['L2->L3 C'] == M * N * 4)
    assert(report.bytes_moved['L1->L2 C'] == M * N * 4)

def test_utilization_bounds():

    grid = build_grid()
    p = plan(ProblemSize(256, 768, 2304), TILE, grid)

    report = run(p, grid, None, None, default_cost())

    assert(all(0.0 <= u <= 1.0 for u in report.utilization.values()))
    assert(report.effective_flops <= peak_flops(grid)[1])
    # compute bound: the DMAs keep up with the kernel
    assert(report.aggregate_utilization >= 0.9)

def test_operand_checks():

    grid = build_grid()
    p = plan(ProblemSize(256, 64, 128), TILE, grid)
    a = Matrix.from_array(np.ones((256, 64), dtype=np.float32))
    b = Matrix.from_array(np.ones((64, 128), dtype=np.float32), layout=COL_MAJOR)

    with pytest.raises(LayoutError):
        run(p, grid, a, Matrix.from_array(np.ones((64, 128), dtype=np.float32)), default_cost())

    with pytest.raises(ShapeMismatch):
        run(p, grid, a, None, default_cost())

    with pytest.raises(SimulationError):
        run(p, build_grid(), a, b, default_cost())

def test_trace():

    grid = build_grid()
    p = plan(ProblemSize(256, 128, 128), TILE, grid)

    first = run(p, grid, None, None, default_cost(), trace=True)
    second = run(p, grid, None, None, default_cost(), trace=True)

    events = trace(first)

    assert(format_trace(events) == format_trace(trace(second)))
    assert(all(e.kind in EVENT_KINDS for e in events))
    assert(all(x.time <= y.time for x, y in zip(events[:-1], events[1:])))

    # every DMA and compute step ends after it begins
    begins = {}
    for e in events:
        if e.kind in ('dma_begin', 'compute_begin'):
            begins.setdefault(e.subject, []).append(e.time)
        elif e.kind in ('dma_end', 'compute_end'):
            assert(begins[e.subject].pop(0) <= e.time)

def dma_intervals(events):

    begins = {}
    intervals = []
    for e in events:
        if e.kind == 'dma_begin':
            begins.setdefault(e.subject, []).append(e.time)
        elif e.kind == 'dma_end':
            intervals.append((e.subject, begins[e.subject].pop(0), e.time))
    return intervals

def l1_deliveries(events, core, op):

    """
    End times of the memory-to-compute transfers of one operand that reach
    a compute core, in order.
    """

    label = core_label(core)
    return [e.time for e in events if e.kind == 'dma_end' and e.subject.startswith('memory')
            and label in e.subject.split(' ')[0] and ' {}['.format(op) in e.subject]

def test_trace_causality():

    grid = build_grid()
    p = plan(ProblemSize(512, 128, 256), TILE, grid)

    events = trace(run(p, grid, None, None, default_cost(), trace=True))

    for core in grid.compute_cores:
        label = core_label(core)
        starts = [e.time for e in events if e.kind == 'compute_begin' and e.subject.startswith(label + ' ')]
        a_ready = l1_deliveries(events, core, 'A')
        b_ready = l1_deliveries(events, core, 'B')

        assert(len(starts) == len(a_ready) == len(b_ready) == p.acc_depth * p.out_tiles_per_core)
        # step n multiplies the n-th A and B tiles to arrive
        for start, a_time, b_time in zip(starts, a_ready, b_ready):
            assert(start >= a_time and start >= b_time)

def test_dma_overlaps_compute():

    grid = build_grid()
    p = plan(ProblemSize(256, 256, 128), TILE, grid)

    report = run(p, grid, None, None, default_cost(), trace=True)
    computes = [interval for intervals in report.intervals.values() for interval in intervals]

    assert(any(begin < dma_begin and dma_end < end
               for _, dma_begin, dma_end in dma_intervals(trace(report))
               for begin, end in computes))

def test_slow_dma():

    grid = build_grid()
    problem = ProblemSize(256, 128, 128)
    p = plan(problem, TILE, grid)
    a, b, am, bm = operands(problem, np.random.RandomState(9))

    slow_cost = default_cost()
    slow_cost['l3_l2_bytes_per_cycle'] = 2.0
    slow_cost['l2_l1_bytes_per_cycle'] = 2.0

    fast = run(p, grid, am, bm, default_cost())
    slow = run(p, grid, am, bm, slow_cost)

    assert(slow.total_cycles > fast.total_cycles)
    assert(slow.aggregate_utilization < fast.aggregate_utilization)
    assert(np.array_equal(slow.output.to_array(), fast.output.to_array()))

def test_l1_bytes_per_core():

    grid = build_grid()
    p = plan(ProblemSize(512, 128, 256), TILE, grid)
    m, k, n = TILE
    per_core = p.acc_depth * p.out_tiles_per_core * (m * k + k * n) * 2

    report = run(p, grid, None, None, default_cost(), trace=True)
    events = trace(report)

    for core in grid.compute_cores:
        received = (len(l1_deliveries(events, core, 'A')) * m * k * 2 +
                    len(l1_deliveries(events, core, 'B')) * k * n * 2)
        assert(received == per_core)

    assert(report.bytes_moved['L2->L1 A'] + report.bytes_moved['L2->L1 B'] == grid.n_compute * per_core)

def test_lost_transfer_deadlocks():

    grid = build_grid()
    p = plan(ProblemSize(256, 128, 128), TILE, grid)
    # column 0 never sends its last A tile, so row 0 of the array starves
    p.shim_sequences[0]['A'] = p.shim_sequences[0]['A'][:-1]

    with pytest.raises(Deadlock):
        run(p, grid, None, None, default_cost())

def test_trace_disabled():

    grid = build_grid()
    report = run(plan(ProblemSize(256, 64, 128), TILE, grid), grid, None, None, default_cost())

    with pytest.raises(TracingDisabled):
        trace(report)

def test_reconfigure():

    grid = build_grid()
    cost = default_cost()
    sizes = gpt2_gemm_sizes()
    first = plan(sizes[0], TILE, grid)
    second = plan(sizes[1], TILE, grid)

    assert(reconfigure(first, first, MINIMAL, cost) == 16 * 2 * cost['param_write_cycles'])
    assert(reconfigure(first, second, MINIMAL, cost) == 2320)
    assert(reconfigure(first, second, FULL, cost) == 8320)
    assert(reconfigure(None, second, MINIMAL, cost) == 8320)

    with pytest.raises(TileShapeMismatch):
        reconfigure(first, plan(sizes[1], TileShape(32, 64, 32), grid), MINIMAL, cost)

def test_reconfigure_ratio():

    grid = build_grid()
    cost = default_cost()
    plans = [plan(size, TILE, grid) for size in gpt2_gemm_sizes()]

    for before, after in zip(plans[:-1], plans[1:]):
        assert(compare(before, after, cost)['ratio'] >= 3.0)

def test_reconfig_delays_start():

    grid = build_grid()
    p = plan(ProblemSize(256, 64, 128), TILE, grid)

    plain = run(p, grid, None, None, default_cost())
    delayed = run(p, grid, None, None, default_cost(), reconfig_cycles=2320)

    assert(delayed.total_cycles == plain.total_cycles + 2320)

def test_explore_tiles():

    grid = build_grid()

    table = explore_tiles(ProblemSize(256, 256, 256), grid, default_cost())

    assert(len(table) > 0)
    assert('64x64x32' in set(table['tile']))
    assert(table['cycles'].iloc[0] == table['cycles'].min())

@pytest.mark.slow
def test_random_plans():

    grid = build_grid()
    rng = np.random.RandomState(7)
    tiles = [TileShape(64, 64, 32), TileShape(32, 32, 32), TileShape(16, 64, 16)]

    for _ in range(100):
        problem = ProblemSize(*rng.randint(1, 300, size=3))
        tile = tiles[rng.randint(len(tiles))]
        p = plan(problem, tile, grid)
        a, b, am, bm = operands(problem, rng)

        report = run(p, grid, am, bm, default_cost())

        assert(np.array_equal(report.output.to_array(), evaluate_plan(p, a, b)))
