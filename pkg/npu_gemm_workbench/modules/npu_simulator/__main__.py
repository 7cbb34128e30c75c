from argschema import ArgSchemaParser
import time
import logging

import numpy as np

from npu_gemm_workbench.common.matrix import Matrix, ROW_MAJOR, COL_MAJOR, read_matrix, write_matrix
from npu_gemm_workbench.common.exceptions import ShapeMismatch
from npu_gemm_workbench.common.utils import (resolve_cost, build_manifest, write_report,
                                             log_execution_time, configure_logging)
from npu_gemm_workbench.modules.core_arch.grid import grid_from_params
from npu_gemm_workbench.modules.tiling_planner.planner import (plan, parse_problem_size, parse_tile_shape,
                                                               format_size)
from npu_gemm_workbench.modules.kernel_emulator.kernel import evaluate_plan
from npu_gemm_workbench.modules.npu_simulator.simulator import run, trace, format_trace
from npu_gemm_workbench.modules.npu_simulator.reconfig import reconfigure, compare, FULL, MINIMAL
from npu_gemm_workbench.modules.gpt2_workbench.flops import gpt2_gemm_sizes

logger = logging.getLogger(__name__)


def previous_problem(problem, previous=None):

    """
    The size assumed to be loaded before this one: the given one, else
    the GPT-2 size preceding it in call order.
    """

    if previous:
        return parse_problem_size(previous)

    sizes = gpt2_gemm_sizes()
    if problem in sizes and sizes.index(problem) > 0:
        return sizes[sizes.index(problem) - 1]
    return sizes[0] if sizes[0] != problem else sizes[1]


def load_operands(args, problem, rng):

    """
    A (row-major) and B (column-major) for the run, or (None, None) for a
    timing-only run.
    """

    M, K, N = problem

    if args.get('a_file') or args.get('b_file'):
        if not (args.get('a_file') and args.get('b_file')):
            raise ShapeMismatch('a_file and b_file must be given together')
        a = read_matrix(args['a_file'])
        b = read_matrix(args['b_file'])
        b = Matrix.from_array(b.to_array(), b.dtype, COL_MAJOR)
    elif args['inputs'] == 'none':
        return None, None
    elif args['inputs'] == 'ones':
        a = Matrix.from_array(np.ones((M, K), dtype=np.float32))
        b = Matrix.from_array(np.ones((K, N), dtype=np.float32), layout=COL_MAJOR)
    else:
        a = Matrix.from_array(rng.random_sample((M, K)).astype(np.float32))
        b = Matrix.from_array(rng.random_sample((K, N)).astype(np.float32), layout=COL_MAJOR)

    if a.shape != (M, K) or b.shape != (K, N):
        raise ShapeMismatch('operands {} and {} do not match {}'.format(a.shape, b.shape, format_size(problem)))

    return a, b


def run_simulate(args):

    logger.info('npu gemm workbench: simulate module')

    start = time.time()

    grid = grid_from_params(args['arch_params'])
    cost = resolve_cost(args)
    problem = parse_problem_size(args['size'])
    tile = parse_tile_shape(args['tile'])

    p = plan(problem, tile, grid)

    reconfig_cycles = 0
    comparison = None

    if args['reconfig'] != 'none' or args['compare_reconfig']:
        before = plan(previous_problem(problem, args.get('previous_size')), tile, grid)
        if args['reconfig'] == FULL:
            reconfig_cycles = reconfigure(before, p, FULL, cost)
        elif args['reconfig'] == MINIMAL:
            reconfig_cycles = reconfigure(before, p, MINIMAL, cost)
        if args['compare_reconfig']:
            comparison = compare(before, p, cost)
            comparison['previous_size'] = format_size(before.original)

    a, b = load_operands(args, problem, np.random.RandomState(args['seed']))

    report = run(p, grid, a, b, cost, reconfig_cycles, trace=bool(args.get('trace')))

    output = {"problem": format_size(p.original),
              "padded": format_size(p.problem),
              "tile": format_size(p.tile)}
    output.update(report.to_dict())

    if report.output is not None:
        reference = evaluate_plan(p, a.to_array(), b.to_array())
        output["matches_functional"] = bool(np.array_equal(report.output.to_array(), reference))
        if args.get('output_file'):
            write_matrix(args['output_file'], report.output)

    if comparison is not None:
        kernel_cycles = report.total_cycles - reconfig_cycles
        comparison['full_total_cycles'] = kernel_cycles + comparison['full_cycles']
        comparison['minimal_total_cycles'] = kernel_cycles + comparison['minimal_cycles']
        output["reconfig_comparison"] = comparison

    if args.get('trace'):
        with open(args['trace'], 'w') as f:
            f.write('\n'.join(format_trace(trace(report))) + '\n')

    if args.get('core_table'):
        report.core_table().to_csv(args['core_table'], index=False)

    if args['save_figure']:
        from npu_gemm_workbench.modules.npu_simulator.plotting import plot_utilization
        plot_utilization(report, grid, args['figure_location'])

    logger.info('{} cycles, aggregate utilization {:.3f}'.format(report.total_cycles, report.aggregate_utilization))

    log_execution_time(start)

    return output


def main(argv=None):

    from npu_gemm_workbench.modules.npu_simulator._schemas import InputParameters, OutputParameters

    mod = ArgSchemaParser(schema_type=InputParameters,
                          output_schema_type=OutputParameters,
                          args=argv)

    configure_logging(mod.args)

    output = run_simulate(mod.args)

    output.update({"manifest": build_manifest('simulate', mod.args, ['a_file', 'b_file', 'cost_config'])})
    output.update({"input_parameters": mod.args})

    write_report(mod, output)


if __name__ == "__main__":
    main()
