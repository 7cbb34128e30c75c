from argschema import ArgSchemaParser
import time
import logging

import numpy as np

from npu_gemm_workbench.common.utils import (parse_dims, build_manifest, write_report,
                                             log_execution_time, configure_logging)
from npu_gemm_workbench.modules.core_arch.grid import MICRO_M, MICRO_K, MICRO_N
from npu_gemm_workbench.modules.tiling_planner.planner import TileShape
from npu_gemm_workbench.modules.layout_engine.transforms import (micro_tile_pattern, micro_tile_residue,
                                                                 micro_tile_oracle, micro_tile_permutation,
                                                                 micro_tile, untile_micro)

logger = logging.getLogger(__name__)


def tile_for_operand(op, rows, cols):

    """
    A TileShape whose op tile is rows x cols (the third dimension is
    one micro-tile).
    """

    return {'A': TileShape(rows, cols, MICRO_N),
            'B': TileShape(MICRO_M, rows, cols),
            'C': TileShape(rows, MICRO_K, cols)}[op]


def format_permutation(perm):

    """
    'src_index -> dst_index' lines, in source order.
    """

    dst = np.argsort(perm)
    return ['{} -> {}'.format(s, d) for s, d in enumerate(dst)]


def run_layout(args):

    logger.info('npu gemm workbench: layout module')

    start = time.time()

    op = args['op']
    rows, cols = parse_dims(args['tile'], 2)
    tile = tile_for_operand(op, rows, cols)

    pattern = micro_tile_pattern(tile, op)
    residue = micro_tile_residue(op)
    perm = micro_tile_permutation(tile, op)

    rng = np.random.RandomState(args['seed'])
    sample = rng.randint(0, 1 << 15, size=rows * cols).astype('uint16' if op != 'C' else 'uint32')
    restored = untile_micro(tile, op, micro_tile(tile, op, sample))

    if args['dump']:
        print('\n'.join(format_permutation(perm)))

    log_execution_time(start)

    return {"op": op,
            "tile": args['tile'],
            "n_elements": int(perm.size),
            "dma_granule_bytes": int(pattern.elem_bytes),
            "pattern_dims": [[e, s] for e, s in pattern.dims],
            "residue": [] if residue is None else [int(v) for v in residue],
            "exact": bool(np.array_equal(perm, micro_tile_oracle(tile, op))),
            "round_trip": bool(np.array_equal(restored, sample))}


def main(argv=None):

    from npu_gemm_workbench.modules.layout_engine._schemas import InputParameters, OutputParameters

    mod = ArgSchemaParser(schema_type=InputParameters,
                          output_schema_type=OutputParameters,
                          args=argv)

    configure_logging(mod.args)

    output = run_layout(mod.args)

    output.update({"manifest": build_manifest('layout', mod.args)})
    output.update({"input_parameters": mod.args})

    # the permutation dump owns standard output
    if not mod.args['dump'] or mod.args.get('report'):
        write_report(mod, output)


if __name__ == "__main__":
    main()
