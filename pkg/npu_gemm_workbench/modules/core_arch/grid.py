"""
Static model of the accelerator partition: a row of shim cores (y=0), a
row of memory cores (y=1) and a block of compute cores above them (y>=2),
with the stream routes the GEMM design uses between them.
"""

import collections

from ...common.exceptions import InvalidArchConfig

SHIM = 'shim'
MEMORY = 'memory'
COMPUTE = 'compute'

FIRST_COMPUTE_ROW = 2

# VMAC operand shapes: (4 x 8) . (8 x 4) -> (4 x 4)
MICRO_M = 4
MICRO_K = 8
MICRO_N = 4

CoreId = collections.namedtuple('CoreId', ['x', 'y', 'kind'])

Route = collections.namedtuple('Route', ['operand', 'src', 'src_channel', 'dst', 'dst_channel'])


def core_kind(y):

    if y == 0:
        return SHIM
    elif y == 1:
        return MEMORY
    elif y >= FIRST_COMPUTE_ROW:
        return COMPUTE
    else:
        raise InvalidArchConfig('invalid core row: {}'.format(y))


def core_id(x, y):
    return CoreId(x, y, core_kind(y))


def core_label(core):
    return '{}({},{})'.format(core.kind, core.x, core.y)


class MemorySpec(object):

    def __init__(self, l1_bytes=65536, l2_bytes=524288):

        if l1_bytes <= 0 or l2_bytes <= 0:
            raise InvalidArchConfig('memory capacities must be positive: l1={} l2={}'.format(l1_bytes, l2_bytes))

        self.l1_bytes = int(l1_bytes)
        self.l2_bytes = int(l2_bytes)


class ComputeSpec(object):

    def __init__(self, fma_per_cycle=128, clock_hz=1e9, vmac_latency_cycles=4):

        if fma_per_cycle != MICRO_M * MICRO_K * MICRO_N:
            raise InvalidArchConfig('fma_per_cycle must equal the VMAC size {}, got {}'.format(
                MICRO_M * MICRO_K * MICRO_N, fma_per_cycle))
        if clock_hz < 0:
            raise InvalidArchConfig('clock_hz must be non-negative: {}'.format(clock_hz))
        if vmac_latency_cycles < 1:
            raise InvalidArchConfig('vmac_latency_cycles must be >= 1: {}'.format(vmac_latency_cycles))

        self.fma_per_cycle = int(fma_per_cycle)
        self.clock_hz = float(clock_hz)
        self.vmac_latency_cycles = int(vmac_latency_cycles)

    @property
    def peak_flops(self):
        return 2.0 * self.fma_per_cycle * self.clock_hz


class RouteMap(object):

    def __init__(self, edges):
        self.edges = frozenset(edges)

    def fan_out(self, src, operand):
        return sorted((r.dst for r in self.edges if r.src == src and r.operand == operand),
                      key=lambda c: (c.y, c.x))

    def sources(self, dst, operand):
        return sorted((r.src for r in self.edges if r.dst == dst and r.operand == operand),
                      key=lambda c: (c.y, c.x))

    def ordered(self):
        return sorted(self.edges, key=lambda r: (r.operand, r.src.y, r.src.x, r.src_channel,
                                                 r.dst.y, r.dst.x, r.dst_channel))

    def __len__(self):
        return len(self.edges)


class Grid(object):

    """
    Immutable description of the core array used by the GEMM design.
    """

    def __init__(self, memory, compute, columns=4, compute_rows=4):

        if columns < 1 or compute_rows < 1:
            raise InvalidArchConfig('grid needs at least one column and one compute row')
        if columns != compute_rows:
            # memory column i feeds compute row i+2
            raise InvalidArchConfig('compute rows ({}) must equal columns ({})'.format(compute_rows, columns))

        self.memory = memory
        self.compute = compute
        self.columns = int(columns)
        self.compute_rows = int(compute_rows)

        self.shim_cores = [core_id(x, 0) for x in range(columns)]
        self.memory_cores = [core_id(x, 1) for x in range(columns)]
        self.compute_cores = [core_id(x, y) for y in range(FIRST_COMPUTE_ROW, FIRST_COMPUTE_ROW + compute_rows)
                              for x in range(columns)]
        self.cores = self.shim_cores + self.memory_cores + self.compute_cores

        self.routes = RouteMap(build_routes(self))
        check_routes(self)

    def compute_core(self, row, column):
        return core_id(column, row)

    @property
    def n_compute(self):
        return len(self.compute_cores)

    def to_text(self):

        per_core, aggregate = peak_flops(self)

        lines = ['columns = {}'.format(self.columns),
                 'compute_rows = {}'.format(self.compute_rows),
                 'cores = {}'.format(len(self.cores)),
                 'compute_cores = {}'.format(self.n_compute),
                 'l1_bytes = {}'.format(self.memory.l1_bytes),
                 'l2_bytes = {}'.format(self.memory.l2_bytes),
                 'fma_per_cycle = {}'.format(self.compute.fma_per_cycle),
                 'clock_hz = {!r}'.format(self.compute.clock_hz),
                 'vmac_latency_cycles = {}'.format(self.compute.vmac_latency_cycles),
                 'peak_flops_per_core = {!r}'.format(per_core),
                 'peak_flops_aggregate = {!r}'.format(aggregate),
                 '[routes]']

        for r in self.routes.ordered():
            lines.append('{} {}.{} -> {}.{}'.format(r.operand, core_label(r.src), r.src_channel,
                                                    core_label(r.dst), r.dst_channel))

        return '\n'.join(lines) + '\n'


def build_routes(grid):

    edges = []

    for i in range(grid.columns):
        shim = grid.shim_cores[i]
        mem = grid.memory_cores[i]

        edges.append(Route('A', shim, 'mm2s0', mem, 's2mm0'))
        edges.append(Route('B', shim, 'mm2s1', mem, 's2mm1'))
        edges.append(Route('C', mem, 'mm2s2', shim, 's2mm0'))

        for t in range(grid.columns):
            # A: memory column i -> every core of hardware row i+2
            edges.append(Route('A', mem, 'mm2s0', core_id(t, FIRST_COMPUTE_ROW + i), 's2mm0'))

        for t in range(grid.compute_rows):
            # B: memory column i -> every core of hardware column i
            edges.append(Route('B', mem, 'mm2s1', core_id(i, FIRST_COMPUTE_ROW + t), 's2mm1'))
            # C: every core of hardware column i -> memory column i
            edges.append(Route('C', core_id(i, FIRST_COMPUTE_ROW + t), 'mm2s0', mem, 's2mm{}'.format(2 + t)))

    return edges


def check_routes(grid):

    for core in grid.compute_cores:
        for operand in ('A', 'B'):
            if len(grid.routes.sources(core, operand)) != 1:
                raise InvalidArchConfig('{} does not receive exactly one {} stream'.format(core_label(core), operand))
        if len(grid.routes.fan_out(core, 'C')) != 1:
            raise InvalidArchConfig('{} does not emit exactly one C stream'.format(core_label(core)))

    for mem in grid.memory_cores:
        a_dst = grid.routes.fan_out(mem, 'A')
        b_dst = grid.routes.fan_out(mem, 'B')
        if len(a_dst) != grid.columns or len(set(c.y for c in a_dst)) != 1:
            raise InvalidArchConfig('A stream of {} does not cover one row'.format(core_label(mem)))
        if len(b_dst) != grid.compute_rows or len(set(c.x for c in b_dst)) != 1:
            raise InvalidArchConfig('B stream of {} does not cover one column'.format(core_label(mem)))


def build_grid(spec=None, cspec=None, columns=4, compute_rows=4):

    """
    Builds the shim, memory and compute cores plus their routes

    Inputs:
    -------
    spec : MemorySpec (optional)
    cspec : ComputeSpec (optional)
    columns, compute_rows : Int

    Outputs:
    --------
    grid : Grid

    """

    return Grid(spec if spec is not None else MemorySpec(),
                cspec if cspec is not None else ComputeSpec(),
                columns, compute_rows)


def grid_from_params(arch_params):

    """
    Builds a Grid from an 'arch_params' argument group.
    """

    return build_grid(MemorySpec(arch_params['l1_bytes'], arch_params['l2_bytes']),
                      ComputeSpec(arch_params['fma_per_cycle'], arch_params['clock_hz'],
                                  arch_params['vmac_latency_cycles']),
                      arch_params['columns'], arch_params['compute_rows'])


def peak_flops(grid, cores=None):

    """
    Peak bfloat16 throughput: 2 FLOPs per FMA, fma_per_cycle FMAs per cycle

    Inputs:
    -------
    grid : Grid
    cores : Int (optional)
        Number of compute cores to count; all compute cores by default

    Outputs:
    --------
    per_core : float
        FLOP/s of one compute core
    aggregate : float
        FLOP/s of the counted cores

    """

    per_core = grid.compute.peak_flops
    n = grid.n_compute if cores is None else cores

    return per_core, per_core * n
