"""
Ranks candidate tile shapes for one problem by simulated cycles.
"""

import itertools
import logging

import numpy as np
import pandas as pd

from ...common.exceptions import TileTooLarge, MisalignedTile
from ...common.utils import printProgressBar
from ..tiling_planner.planner import TileShape, plan, check_tile, l1_footprint, l2_footprint, format_size
from .simulator import run

logger = logging.getLogger(__name__)

EXPLORE_DIMS = (16, 32, 64, 128)

COLUMNS = ['tile', 'l1_footprint', 'l2_footprint', 'padded', 'core_steps', 'cycles', 'utilization', 'effective_flops']


def candidate_tiles(grid, dims=EXPLORE_DIMS):

    """
    Tile shapes that fit both L1 and L2, in lexicographic order.
    """

    for m, k, n in itertools.product(dims, dims, dims):
        tile = TileShape(m, k, n)
        try:
            check_tile(tile, grid)
        except (TileTooLarge, MisalignedTile):
            continue
        if l2_footprint(tile, grid.columns) <= grid.memory.l2_bytes:
            yield tile


def explore_tiles(problem, grid, cost, max_core_steps=50000):

    """
    Simulates (timing only) the problem with every candidate tile shape

    Inputs:
    -------
    problem : ProblemSize
    grid : Grid
    cost : dict
    max_core_steps : Int
        Candidates needing more tile pairs per core are listed without
        being simulated

    Outputs:
    --------
    table : pandas.DataFrame
        One row per candidate, fastest first

    """

    tiles = list(candidate_tiles(grid))
    rows = []

    for index, tile in enumerate(tiles):
        p = plan(problem, tile, grid)
        steps = p.passes * p.acc_depth
        row = {'tile': format_size(tile),
               'l1_footprint': l1_footprint(tile),
               'l2_footprint': l2_footprint(tile, grid.columns),
               'padded': format_size(p.problem),
               'core_steps': steps,
               'cycles': np.nan,
               'utilization': np.nan,
               'effective_flops': np.nan}

        if steps <= max_core_steps:
            report = run(p, grid, None, None, cost)
            row.update({'cycles': report.total_cycles,
                        'utilization': report.aggregate_utilization,
                        'effective_flops': report.effective_flops})
        else:
            logger.info('skipping tile {}: {} tile pairs per core'.format(row['tile'], steps))

        rows.append(row)
        printProgressBar(index + 1, len(tiles), prefix='exploring tiles')

    table = pd.DataFrame(rows, columns=COLUMNS)
    return table.sort_values(['cycles', 'tile'], na_position='last').reset_index(drop=True)
