from argschema import ArgSchemaParser
import time
import logging

import numpy as np

from npu_gemm_workbench.common.utils import (divergence_stats, resolve_cost, build_manifest, write_report,
                                             log_execution_time, configure_logging)
from npu_gemm_workbench.modules.core_arch.grid import grid_from_params, MICRO_M, MICRO_K, MICRO_N
from npu_gemm_workbench.modules.tiling_planner.planner import parse_tile_shape
from npu_gemm_workbench.modules.kernel_emulator.kernel import (tile_matmul_accumulate, tile_micro_values,
                                                               untile_micro_values, as_bf16_values)
from npu_gemm_workbench.modules.kernel_emulator.schedule import schedule_kernel, check_hazards

logger = logging.getLogger(__name__)


def check_numerics(tile, rng):

    """
    Runs one random tile pair through the kernel and compares it with a
    float64 product of the unrounded inputs.
    """

    m, k, n = tile
    a = rng.random_sample((m, k)).astype(np.float32)
    b = rng.random_sample((k, n)).astype(np.float32)

    c = tile_matmul_accumulate(tile_micro_values(a, MICRO_M, MICRO_K),
                               tile_micro_values(b, MICRO_K, MICRO_N),
                               np.zeros(m * n, dtype=np.float32), tile)

    reference = a.astype('float64') @ b.astype('float64')

    return divergence_stats(untile_micro_values(c, m, n, MICRO_M, MICRO_N), reference)


def run_kernel(args):

    logger.info('npu gemm workbench: kernel module')

    start = time.time()

    tile = parse_tile_shape(args['shape'])
    grid = grid_from_params(args['arch_params'])
    cost = resolve_cost(args)

    stats = check_numerics(tile, np.random.RandomState(args['seed']))

    output = {"shape": args['shape'],
              "max_rel_error": stats['max'],
              "mean_rel_error": stats['mean']}

    if args['check_schedule']:
        schedule = schedule_kernel(tile, grid.compute, args['accumulators'],
                                   cost['preamble_cycles'], cost['postamble_cycles'])
        hazards = check_hazards(schedule, grid.compute.vmac_latency_cycles)

        logger.info('NOPs: {}, cycles per tile pair: {}, utilization: {:.3f}'.format(
            schedule.nop_count, schedule.cycles_per_tile_pair, schedule.utilization))

        output.update({"vmac_count": schedule.vmac_count,
                       "nop_count": schedule.nop_count,
                       "hazards": len(hazards),
                       "steady_cycles": schedule.steady_cycles,
                       "cycles_per_tile_pair": schedule.cycles_per_tile_pair,
                       "output_tile_cycles": schedule.output_tile_cycles(args['acc_depth']),
                       "utilization": schedule.utilization})

    log_execution_time(start)

    return output


def main(argv=None):

    from npu_gemm_workbench.modules.kernel_emulator._schemas import InputParameters, OutputParameters

    mod = ArgSchemaParser(schema_type=InputParameters,
                          output_schema_type=OutputParameters,
                          args=argv)

    configure_logging(mod.args)

    output = run_kernel(mod.args)

    output.update({"manifest": build_manifest('kernel', mod.args, ['cost_config'])})
    output.update({"input_parameters": mod.args})

    write_report(mod, output)


if __name__ == "__main__":
    main()
