import os
import argparse

import pandas as pd

from npu_gemm_workbench.modules.gpt2_workbench.config import load_model_config
from npu_gemm_workbench.modules.gpt2_workbench.flops import extract_gemm_sizes
from npu_gemm_workbench.modules.tiling_planner.planner import format_size
from npu_gemm_workbench.scripts.helpers.run_one_size import runOne
from npu_gemm_workbench.scripts.helpers.log_from_json import summaryRow

# plans and simulates every GEMM size of a model config, one process per
# module run, and collects the reports into one CSV table


def sweep(config_name, json_directory, summary_file, tile='64x64x32', inputs='none'):

    config = load_model_config(config_name)
    sizes = [format_size(s) for s in extract_gemm_sizes(config)]

    if not os.path.exists(json_directory):
        os.makedirs(json_directory)

    rows = []
    for size in sizes:
        reports = runOne(size, json_directory, ['plan', 'simulate'], size, tile,
                         simulate={'inputs': inputs})
        rows.append(summaryRow(size, reports))

    table = pd.DataFrame(rows)
    table.to_csv(summary_file, index=False)

    return table


def main():

    parser = argparse.ArgumentParser(description='Plan and simulate every GEMM size of a GPT-2 config')
    parser.add_argument('--config', default='gpt2-124m')
    parser.add_argument('--json_directory', default='sweep_json')
    parser.add_argument('--summary_file', default='gpt2_sizes.csv')
    parser.add_argument('--tile', default='64x64x32')
    parser.add_argument('--inputs', default='none', choices=['none', 'random', 'ones'])
    args = parser.parse_args()

    print(sweep(args.config, args.json_directory, args.summary_file, args.tile, args.inputs).to_string(index=False))


if __name__ == '__main__':
    main()
