import pytest
import json
import os
import subprocess

from tests.integration import entrypoint_exists

from npu_gemm_workbench.scripts.create_input_json import createInputJson
from npu_gemm_workbench.scripts.gpt2_size_sweep import sweep
from npu_gemm_workbench.modules.npu_simulator.__main__ import main as simulate_main

def test_simulate_from_input_json(tmpdir):

    input_json = os.path.join(str(tmpdir), 'input.json')
    output_json = os.path.join(str(tmpdir), 'output.json')

    createInputJson(input_json, 'simulate', size='256x128x256', tile='64x64x32', inputs='ones')
    simulate_main(['--input_json', input_json, '--output_json', output_json])

    with open(output_json) as f:
        report = json.load(f)

    assert(report['total_cycles'] > 0)
    assert(0.0 < report['aggregate_utilization'] <= 1.0)
    assert(report['manifest']['subcommand'] == 'simulate')

@pytest.mark.slow
def test_toy_size_sweep(tmpdir):

    summary_file = os.path.join(str(tmpdir), 'toy_sizes.csv')

    table = sweep('toy', os.path.join(str(tmpdir), 'json'), summary_file)

    assert(os.path.exists(summary_file))
    assert(len(table) == len(set(table['size'])))
    assert((table['total_cycles'] > 0).all())

@pytest.mark.skipif(not entrypoint_exists('npu-gemm'), reason='console scripts not installed')
def test_console_script():

    assert(subprocess.call(['npu-gemm', 'plan', '--size', '256x64x128', '--log_level', 'ERROR']) == 0)
    assert(subprocess.call(['npu-gemm', 'plan', '--size', '256x64x128', '--tile', '6x8x4']) == 2)
