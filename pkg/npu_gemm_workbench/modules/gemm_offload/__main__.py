from argschema import ArgSchemaParser
import time
import logging

import numpy as np

from npu_gemm_workbench.common.matrix import Matrix, COL_MAJOR, read_matrix, write_matrix
from npu_gemm_workbench.common.exceptions import ShapeMismatch
from npu_gemm_workbench.common.utils import (divergence_stats, resolve_cost, build_manifest, write_report,
                                             log_execution_time, configure_logging)
from npu_gemm_workbench.modules.core_arch.grid import grid_from_params
from npu_gemm_workbench.modules.tiling_planner.planner import parse_problem_size, parse_tile_shape, format_size
from npu_gemm_workbench.modules.gemm_offload.offload import init, matmul, GemmRequest
from npu_gemm_workbench.modules.gemm_offload.oracle import compare_oracle
from npu_gemm_workbench.modules.gpt2_workbench.flops import gpt2_gemm_sizes

logger = logging.getLogger(__name__)


def parse_size_list(text):

    if text == 'gpt2':
        return gpt2_gemm_sizes()
    return [parse_problem_size(s.strip()) for s in text.split(',') if s.strip()]


def build_request(args, problem, rng):

    """
    The GemmRequest for this run, from files or drawn from the seed. Drawn
    operands are stored so that no transpose is needed unless a flag asks
    for the transposed operand.
    """

    if args.get('a_file') or args.get('b_file'):
        if not (args.get('a_file') and args.get('b_file')):
            raise ShapeMismatch('a_file and b_file must be given together')
        a = read_matrix(args['a_file'])
        b = read_matrix(args['b_file'])
        return GemmRequest(a, b, args['transpose_a'], args['transpose_b'])

    M, K, N = problem
    a = rng.random_sample((M, K)).astype(np.float32)
    b = rng.random_sample((K, N)).astype(np.float32)

    a = Matrix.from_array(a.T) if args['transpose_a'] else Matrix.from_array(a)
    b = Matrix.from_array(b.T) if args['transpose_b'] else Matrix.from_array(b, layout=COL_MAJOR)

    return GemmRequest(a, b, args['transpose_a'], args['transpose_b'])


def logical_operand(matrix, transpose):
    values = matrix.to_array()
    return values.T if transpose else values


def run_gemm(args):

    logger.info('npu gemm workbench: gemm module')

    start = time.time()

    grid = grid_from_params(args['arch_params'])
    cost = resolve_cost(args)
    problem = parse_problem_size(args['size'])
    tile = parse_tile_shape(args['tile'])

    ctx = init([problem], tile, grid, cost, args['backend'],
               simulate_values=args['simulate_values'], wallclock=args['wallclock'])

    req = build_request(args, problem, np.random.RandomState(args['seed']))
    c, report, breakdown = matmul(ctx, req)

    if args.get('output_file'):
        write_matrix(args['output_file'], c)

    reference = np.matmul(logical_operand(req.a, req.transpose_a).astype(np.float32),
                          logical_operand(req.b, req.transpose_b).astype(np.float32))

    stages = breakdown.to_dict()

    output = {"size": format_size((c.rows, req.a.rows if req.transpose_a else req.a.cols, c.cols)),
              "backend": args['backend'],
              "stages": stages,
              "total_seconds": stages['total'],
              "reconfig_cycles": stages['reconfig_cycles'],
              "kernel_cycles": stages['kernel_cycles'],
              "divergence": divergence_stats(c.to_array(), reference)}

    if breakdown.wallclock is not None:
        output["wallclock"] = breakdown.wallclock

    if args['compare_oracle']:
        table = compare_oracle(parse_size_list(args['oracle_sizes']), args['seed'], args['backend'], tile, grid)
        if args.get('divergence_file'):
            table.to_csv(args['divergence_file'], index=False)
        output["oracle"] = table.to_dict('records')

    log_execution_time(start)

    return output


def main(argv=None):

    from npu_gemm_workbench.modules.gemm_offload._schemas import InputParameters, OutputParameters

    mod = ArgSchemaParser(schema_type=InputParameters,
                          output_schema_type=OutputParameters,
                          args=argv)

    configure_logging(mod.args)

    output = run_gemm(mod.args)

    output.update({"manifest": build_manifest('gemm', mod.args, ['a_file', 'b_file', 'cost_config'])})
    output.update({"input_parameters": mod.args})

    write_report(mod, output)


if __name__ == "__main__":
    main()
