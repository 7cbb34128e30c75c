import pytest
import json
import os

import numpy as np

from npu_gemm_workbench.common.matrix import Matrix, write_matrix
from npu_gemm_workbench.cli import main, normalize_argv, bool_flags, SUBCOMMANDS
from npu_gemm_workbench.modules.tiling_planner._schemas import InputParameters

def read_report(path):

    with open(path) as f:
        return json.load(f)

def test_usage():

    assert(main([]) == 1)
    assert(main(['-h']) == 0)
    assert(main(['partition']) == 1)

def test_subcommands():

    assert(list(SUBCOMMANDS) == ['plan', 'layout', 'kernel', 'simulate', 'gemm', 'train-toy', 'flops'])

def test_normalize_argv():

    booleans = bool_flags(InputParameters)

    assert('--dump_arch' in booleans)
    assert(normalize_argv(['--size', '4x4x4', '--dump-arch'], booleans) == ['--size', '4x4x4', '--dump_arch', 'True'])
    assert(normalize_argv(['--dump-arch', '--size', '4x4x4'], booleans) == ['--dump_arch', 'True', '--size', '4x4x4'])
    assert(normalize_argv(['--dump-arch', 'False'], booleans) == ['--dump_arch', 'False'])
    assert(normalize_argv(['--max-core-steps=10'], booleans) == ['--max_core_steps=10'])

def test_plan_report(tmpdir):

    path = os.path.join(str(tmpdir), 'plan.json')

    assert(main(['plan', '--size', '50304x256x768', '--report', path]) == 0)

    report = read_report(path)
    assert(report['pad_m'] == 128)
    assert(report['padded'] == '50432x256x768')
    assert(report['manifest']['subcommand'] == 'plan')

def test_plan_dump_arch(tmpdir):

    path = os.path.join(str(tmpdir), 'plan.json')

    assert(main(['plan', '--size', '256x768x2304', '--dump-arch', '--report', path]) == 0)

    report = read_report(path)
    assert(report['acc_depth'] == 12)
    assert(report['out_tiles'] == 288)
    assert('peak_flops_aggregate' in report['arch'])

def test_module_errors(tmpdir):

    path = os.path.join(str(tmpdir), 'plan.json')

    # 128x128x128 does not fit in L1
    assert(main(['plan', '--size', '256x256x256', '--tile', '128x128x128', '--report', path]) == 2)
    assert(main(['plan', '--size', '256x0x256', '--report', path]) == 2)
    assert(not os.path.exists(path))

def test_bad_flags():

    assert(main(['plan', '--no-such-flag', '1']) == 1)

def test_flops_report(tmpdir):

    path = os.path.join(str(tmpdir), 'flops.json')

    assert(main(['flops', '--report', path]) == 0)

    report = read_report(path)
    assert(abs(report['total_gflops'] - 197.0) <= 0.05 * 197.0)
    assert(len(report['gemm_sizes']) == 12)
    assert(report['total_flops'] == report['forward_flops'] + report['backward_flops'])

def test_train_toy_report(tmpdir):

    paths = [os.path.join(str(tmpdir), name) for name in ('first.json', 'second.json')]

    for path in paths:
        assert(main(['train-toy', '--steps', '2', '--corpus-tokens', '2048', '--report', path]) == 0)

    first, second = [read_report(path) for path in paths]
    assert(len(first['metrics']) == 2)
    assert(first['final_val_loss'] is not None)
    assert(first['initial_logits_checksum'] == second['initial_logits_checksum'])
    assert(first['final_loss'] == second['final_loss'])

def test_invalid_arch(tmpdir):

    path = os.path.join(str(tmpdir), 'plan.json')

    assert(main(['plan', '--size', '256x64x128', '--arch_params.fma_per_cycle', '64', '--report', path]) == 2)
    assert(main(['plan', '--size', '256x64x128', '--arch_params.compute_rows', '3', '--report', path]) == 2)
    assert(not os.path.exists(path))

def test_simulate_needs_both_operand_files(tmpdir):

    a_file = os.path.join(str(tmpdir), 'a.mat')
    path = os.path.join(str(tmpdir), 'sim.json')
    write_matrix(a_file, Matrix.from_array(np.ones((256, 64), dtype=np.float32)))

    assert(main(['simulate', '--size', '256x64x128', '--a_file', a_file, '--report', path]) == 2)
    assert(not os.path.exists(path))
