import pytest
import numpy as np

from npu_gemm_workbench.common.bfloat16 import bf16_round
from npu_gemm_workbench.common.exceptions import HazardUnavoidable, ShapeMismatch, MisalignedTile
from npu_gemm_workbench.modules.core_arch.grid import ComputeSpec, build_grid
from npu_gemm_workbench.modules.tiling_planner.planner import TileShape, ProblemSize, plan
from npu_gemm_workbench.modules.layout_engine.transforms import micro_tile, untile_micro
from npu_gemm_workbench.modules.kernel_emulator.kernel import (micro_vmac, tile_matmul_accumulate, matmul_bf16,
                                                               evaluate_plan, tile_micro_values,
                                                               untile_micro_values)
from npu_gemm_workbench.modules.kernel_emulator.schedule import schedule_kernel, check_hazards, VMAC

TILE = TileShape(64, 64, 32)

def test_micro_vmac_zero():

    rng = np.random.RandomState(0)
    b = rng.random_sample((8, 4)).astype(np.float32)
    acc = rng.random_sample((4, 4)).astype(np.float32)

    out = micro_vmac(np.zeros((4, 8), dtype=np.float32), b, acc)

    assert(np.array_equal(out, acc))

def test_micro_vmac_identity():

    b = bf16_round(np.random.RandomState(1).random_sample((8, 4)).astype(np.float32))
    a = np.eye(8, dtype=np.float32)[:4]

    out = micro_vmac(a, b, np.zeros((4, 4), dtype=np.float32))

    assert(np.array_equal(out, b[:4]))

def test_micro_vmac_error_bound():

    rng = np.random.RandomState(2)
    a = rng.random_sample((4, 8)).astype(np.float32)
    b = rng.random_sample((8, 4)).astype(np.float32)

    out = micro_vmac(a, b, np.zeros((4, 4), dtype=np.float32))
    reference = np.matmul(a.astype(np.float64), b.astype(np.float64))

    assert(np.all(np.abs(out - reference) / np.abs(reference) <= 2.0 ** -7 * 8))

def test_micro_vmac_shapes():

    with pytest.raises(ShapeMismatch):
        micro_vmac(np.zeros((4, 4)), np.zeros((8, 4)), np.zeros((4, 4)))

def test_tile_identity():

    b = bf16_round(np.random.RandomState(3).random_sample((64, 32)).astype(np.float32))
    a = np.eye(64, dtype=np.float32)

    c = tile_matmul_accumulate(micro_tile(TILE, 'A', a.reshape(-1)),
                               micro_tile(TILE, 'B', b.T.reshape(-1)),
                               np.zeros(64 * 32, dtype=np.float32), TILE)

    assert(np.array_equal(untile_micro(TILE, 'C', c).reshape(64, 32), b))

def test_tile_equals_vmac_loop():

    rng = np.random.RandomState(8)
    a = bf16_round(rng.random_sample((64, 64)).astype(np.float32))
    b = bf16_round(rng.random_sample((64, 32)).astype(np.float32))
    c = rng.random_sample((64, 32)).astype(np.float32)

    out = tile_matmul_accumulate(micro_tile(TILE, 'A', a.reshape(-1)),
                                 micro_tile(TILE, 'B', b.T.reshape(-1)),
                                 tile_micro_values(c, 4, 4), TILE)

    expected = c.copy()
    for kb in range(64 // 8):
        for i in range(64 // 4):
            for j in range(32 // 4):
                rows, cols, ks = slice(4 * i, 4 * i + 4), slice(4 * j, 4 * j + 4), slice(8 * kb, 8 * kb + 8)
                expected[rows, cols] = micro_vmac(a[rows, ks], b[ks, cols], expected[rows, cols])

    assert(np.array_equal(untile_micro_values(out, 64, 32, 4, 4), expected))

def test_tile_accumulates():

    rng = np.random.RandomState(4)
    a = [bf16_round(rng.random_sample((64, 64)).astype(np.float32)) for _ in range(2)]
    b = [bf16_round(rng.random_sample((64, 32)).astype(np.float32)) for _ in range(2)]

    c = np.zeros(64 * 32, dtype=np.float32)
    for x, y in zip(a, b):
        c = tile_matmul_accumulate(micro_tile(TILE, 'A', x.reshape(-1)), micro_tile(TILE, 'B', y.T.reshape(-1)),
                                   c, TILE)

    expected = matmul_bf16(np.hstack(a), np.vstack(b))
    assert(np.array_equal(untile_micro(TILE, 'C', c).reshape(64, 32), expected))

def test_tile_error_bound():

    rng = np.random.RandomState(5)
    a = rng.random_sample((64, 64)).astype(np.float32)
    b = rng.random_sample((64, 32)).astype(np.float32)

    c = matmul_bf16(a, b)
    reference = np.matmul(a.astype(np.float64), b.astype(np.float64))
    error = np.abs(c - reference) / np.abs(reference)

    assert(error.max() <= 1e-2)
    assert(error.mean() <= 1e-3)

def test_matmul_bf16_k_padding():

    rng = np.random.RandomState(6)
    a = rng.random_sample((8, 40)).astype(np.float32)
    b = rng.random_sample((40, 8)).astype(np.float32)

    assert(np.array_equal(matmul_bf16(a, b), matmul_bf16(a, b, k_pad=24)))

def test_evaluate_plan_shapes():

    p = plan(ProblemSize(256, 64, 128), TILE, build_grid())

    with pytest.raises(ShapeMismatch):
        evaluate_plan(p, np.zeros((256, 64)), np.zeros((128, 64)))

def test_schedule_steady_state():

    schedule = schedule_kernel(TILE, ComputeSpec())

    assert(schedule.steady_cycles == 1024)
    assert(schedule.vmac_count == 1024)
    assert(schedule.nop_count == 0)
    assert(schedule.utilization == 1.0)
    assert(check_hazards(schedule, 4) == [])

def test_schedule_single_accumulator():

    schedule = schedule_kernel(TILE, ComputeSpec(), accumulators=1)
    vmacs = [op.issue_cycle for op in schedule.ops if op.kind == VMAC]

    assert(all(later - earlier >= 4 for earlier, later in zip(vmacs[:-1], vmacs[1:])))
    assert(schedule.nop_count >= 3 * (len(vmacs) - 1))
    assert(check_hazards(schedule, 4) == [])

def test_schedule_too_few_outputs():

    with pytest.raises(HazardUnavoidable):
        schedule_kernel(TileShape(4, 8, 4), ComputeSpec())

    with pytest.raises(MisalignedTile):
        schedule_kernel(TileShape(6, 8, 4), ComputeSpec())

def test_check_hazards_finds_violations():

    schedule = schedule_kernel(TILE, ComputeSpec())

    # each accumulator is reused after 4 cycles
    violations = check_hazards(schedule_kernel(TileShape(8, 16, 8), ComputeSpec(), accumulators=4), 5)

    assert(check_hazards(schedule, 4) == [])
    assert(len(violations) > 0)
