import logging

import numpy as np
import pandas as pd

from ...common.utils import divergence_stats, printProgressBar
from ..core_arch.grid import build_grid
from ..tiling_planner.planner import ProblemSize, DEFAULT_TILE, plan, format_size
from ..kernel_emulator.kernel import evaluate_plan
from .offload import REFERENCE, EMULATED

logger = logging.getLogger(__name__)


def draw_operands(problem, rng, fill='random'):

    """
    float32 operands for a problem: U[0,1) from rng, or zeros.
    """

    M, K, N = problem
    if fill == 'zeros':
        return np.zeros((M, K), dtype=np.float32), np.zeros((K, N), dtype=np.float32)
    return rng.random_sample((M, K)).astype(np.float32), rng.random_sample((K, N)).astype(np.float32)


def compare_oracle(sizes, seed=0, backend=EMULATED, tile=DEFAULT_TILE, grid=None, fill='random'):

    """
    Relative divergence of a backend from the float32 reference, per size

    Inputs:
    -------
    sizes : list of ProblemSize
    seed : Int
        Operands for every size are drawn in order from one generator
    backend : 'emulated-npu' or 'reference-f32'
    tile : TileShape
    fill : 'random' or 'zeros'

    Outputs:
    --------
    table : pandas.DataFrame
        size, mean, max, std of |x - r| / max(|r|, rms(r))

    """

    grid = grid if grid is not None else build_grid()
    rng = np.random.RandomState(seed)
    rows = []

    for index, size in enumerate(sizes):
        size = ProblemSize(*size)
        a, b = draw_operands(size, rng, fill)

        reference = np.matmul(a, b)

        if backend == REFERENCE:
            values = np.matmul(a, b)
        elif backend == EMULATED:
            values = evaluate_plan(plan(size, tile, grid), a, b)
        else:
            raise ValueError('unrecognized backend: {}'.format(backend))

        stats = divergence_stats(values, reference)
        rows.append({'size': format_size(size), 'mean': stats['mean'], 'max': stats['max'], 'std': stats['std']})

        logger.debug('{}: mean {:.2e}, max {:.2e}'.format(rows[-1]['size'], stats['mean'], stats['max']))
        printProgressBar(index + 1, len(sizes), prefix='comparing')

    return pd.DataFrame(rows, columns=['size', 'mean', 'max', 'std'])
