import os
import sys
import subprocess

from npu_gemm_workbench.scripts.create_input_json import createInputJson, MODULES


def runOne(size_name, json_directory, subcommands, size, tile=None, **module_args):

    """
    Runs each subcommand on one problem size in its own process and
    returns the report paths, keyed by subcommand.
    """

    reports = {}

    for subcommand in subcommands:
        input_json = os.path.join(json_directory, size_name + '-' + subcommand + '-input.json')
        output_json = os.path.join(json_directory, size_name + '-' + subcommand + '-output.json')

        createInputJson(input_json, subcommand, size=size, tile=tile, **module_args.get(subcommand, {}))

        command = [sys.executable, '-W', 'ignore', '-m', 'npu_gemm_workbench.modules.' + MODULES[subcommand],
                   '--input_json', input_json, '--output_json', output_json]
        print(' '.join(command))
        subprocess.check_call(command)

        reports[subcommand] = output_json

    return reports
