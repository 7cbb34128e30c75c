from argschema import ArgSchemaParser
import time
import logging

from npu_gemm_workbench.common.utils import (resolve_cost, build_manifest, write_report,
                                             log_execution_time, configure_logging)
from npu_gemm_workbench.modules.core_arch.grid import grid_from_params
from npu_gemm_workbench.modules.tiling_planner.planner import (plan, parse_problem_size, parse_tile_shape,
                                                               emit_schedule)

logger = logging.getLogger(__name__)


def run_plan(args):

    logger.info('npu gemm workbench: plan module')

    start = time.time()

    grid = grid_from_params(args['arch_params'])
    problem = parse_problem_size(args['size'])
    tile = parse_tile_shape(args['tile'])

    p = plan(problem, tile, grid)

    output = p.summary()

    if p.padding != (0, 0, 0):
        logger.info('padded {} to {}'.format(output['problem'], output['padded']))

    if args['dump_arch']:
        output['arch'] = grid.to_text()
        if args.get('arch_file'):
            with open(args['arch_file'], 'w') as f:
                f.write(output['arch'])

    if args['emit_schedule']:
        print('\n'.join(emit_schedule(p)))

    if args['explore']:
        from npu_gemm_workbench.modules.npu_simulator.explore import explore_tiles

        table = explore_tiles(problem, grid, resolve_cost(args), args['max_core_steps'])
        if args.get('explore_table'):
            table.to_csv(args['explore_table'], index=False)
        # NaN is not valid JSON
        output['exploration'] = [dict((key, None if value != value else value) for key, value in row.items())
                                 for row in table.astype(object).to_dict('records')]

    log_execution_time(start)

    return output


def main(argv=None):

    from npu_gemm_workbench.modules.tiling_planner._schemas import InputParameters, OutputParameters

    mod = ArgSchemaParser(schema_type=InputParameters,
                          output_schema_type=OutputParameters,
                          args=argv)

    configure_logging(mod.args)

    output = run_plan(mod.args)

    output.update({"manifest": build_manifest('plan', mod.args, ['cost_config'])})
    output.update({"input_parameters": mod.args})

    # the schedule dump owns standard output
    if not mod.args['emit_schedule'] or mod.args.get('report'):
        write_report(mod, output)


if __name__ == "__main__":
    main()
