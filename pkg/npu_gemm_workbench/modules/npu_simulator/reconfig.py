"""
Cost of switching the array from one GEMM size to the next.

The minimal protocol keeps the tile shape, so cores, memory cores and
switch boxes keep their configuration: only the shim descriptors are
reloaded and every compute core gets its two runtime parameters
(accumulation depth and output tile count). A full reconfiguration
re-walks the configuration of every core and switch box.
"""

import collections

from ...common.exceptions import TileShapeMismatch

MINIMAL = 'minimal'
FULL = 'full'

RUNTIME_PARAMS_PER_CORE = 2

ReconfigMode = collections.namedtuple('ReconfigMode', ['mode'])


def parameter_write_cycles(grid, cost):
    return grid.n_compute * RUNTIME_PARAMS_PER_CORE * cost['param_write_cycles']


def minimal_cycles(grid, cost):
    return grid.columns * cost['shim_descriptor_cycles'] + parameter_write_cycles(grid, cost)


def full_cycles(grid, cost):

    return (len(grid.shim_cores) * cost['shim_descriptor_cycles']
            + len(grid.memory_cores) * cost['memory_config_cycles']
            + grid.n_compute * cost['compute_config_cycles']
            + len(grid.cores) * cost['switchbox_config_cycles']
            + parameter_write_cycles(grid, cost))


def reconfigure(from_plan, to_plan, mode, cost):

    """
    Cycles added before to_plan can run

    Inputs:
    -------
    from_plan : TilingPlan or None
        Plan currently loaded; None when the array holds no design, which
        always needs the full configuration
    to_plan : TilingPlan
    mode : 'minimal', 'full' or ReconfigMode
    cost : dict
        CostParams values

    Outputs:
    --------
    cycles : float

    """

    mode = getattr(mode, 'mode', mode)
    grid = to_plan.grid

    if mode == FULL or from_plan is None:
        return full_cycles(grid, cost)

    if mode != MINIMAL:
        raise ValueError('unrecognized reconfiguration mode: {}'.format(mode))

    if from_plan.tile != to_plan.tile:
        raise TileShapeMismatch('minimal reconfiguration needs one tile shape, got {} and {}'.format(
            'x'.join(map(str, from_plan.tile)), 'x'.join(map(str, to_plan.tile))))

    if from_plan.key == to_plan.key:
        return parameter_write_cycles(grid, cost)

    return minimal_cycles(grid, cost)


def compare(from_plan, to_plan, cost):

    """
    Full and minimal reconfiguration cycles for one size change, and
    their ratio.
    """

    full = reconfigure(from_plan, to_plan, FULL, cost)
    minimal = reconfigure(from_plan, to_plan, MINIMAL, cost)

    return {'full_cycles': full,
            'minimal_cycles': minimal,
            'ratio': full / float(minimal) if minimal else float('inf')}
