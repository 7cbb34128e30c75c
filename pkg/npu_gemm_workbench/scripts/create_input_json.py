import os
import io
import json

from dotenv import load_dotenv

# subcommand : module package under npu_gemm_workbench.modules
MODULES = {'plan': 'tiling_planner',
           'layout': 'layout_engine',
           'kernel': 'kernel_emulator',
           'simulate': 'npu_simulator',
           'gemm': 'gemm_offload',
           'train-toy': 'gpt2_workbench'}


def createInputJson(output_file,
                    subcommand='simulate',
                    size=None,
                    tile=None,
                    backend=None,
                    seed=0,
                    cost_config=None,
                    report=None,
                    columns=4,
                    compute_rows=4,
                    clock_hz=1e9,
                    **module_args):

    """
    Writes the input JSON of one module run

    Values not given fall back to the environment, loaded from
    config/workbench.env when that file exists (NPU_GEMM_TILE,
    NPU_GEMM_BACKEND, NPU_GEMM_COST_CONFIG).
    """

    dot_env_path = os.path.join('config', 'workbench.env')
    if os.path.exists(dot_env_path):
        load_dotenv(dot_env_path)

    tile = tile or os.getenv('NPU_GEMM_TILE', '64x64x32')
    backend = backend or os.getenv('NPU_GEMM_BACKEND')
    cost_config = cost_config or os.getenv('NPU_GEMM_COST_CONFIG')

    dictionary = {
        "seed": seed,
        "tile": tile,
        "arch_params": {
            "columns": columns,
            "compute_rows": compute_rows,
            "clock_hz": clock_hz
        }
    }

    if size is not None:
        dictionary["size"] = size
    if report is not None:
        dictionary["report"] = report
    if cost_config:
        dictionary["cost_config"] = cost_config
    if backend and subcommand in ('gemm', 'train-toy'):
        dictionary["backend"] = backend

    dictionary.update(module_args)

    with io.open(output_file, 'w', encoding='utf-8') as f:
        f.write(json.dumps(dictionary, ensure_ascii=False, sort_keys=True, indent=4))

    return dictionary
