"""
Static mapping of one GEMM onto the array.

Shim column i streams the A tiles of row blocks i, i+C, i+2C, ... (C is
the number of columns) and the B tiles of column blocks i, i+C, ...
Memory core i hands every A tile to all cores of compute row i+2 and every
B tile to all cores of compute column i. Each compute core accumulates
K/k tile pairs in place per output tile, and the cores of compute column i
send their finished tiles back through memory core i, which joins them
into a (C*m) x n block for shim i.

One "pass" is one output tile per compute core; pass p covers row group
p // col_groups and column group p % col_groups.
"""

import collections

import numpy as np

from ...common.exceptions import InvalidProblemSize, TileTooLarge, MisalignedTile, ColumnOutOfRange
from ...common.utils import parse_dims
from ..core_arch.grid import MICRO_M, MICRO_K, MICRO_N, FIRST_COMPUTE_ROW

ProblemSize = collections.namedtuple('ProblemSize', ['M', 'K', 'N'])
TileShape = collections.namedtuple('TileShape', ['m', 'k', 'n'])
PaddingRecord = collections.namedtuple('PaddingRecord', ['pad_m', 'pad_k', 'pad_n'])
TileRef = collections.namedtuple('TileRef', ['matrix', 'row_block', 'col_block'])
DistributeMap = collections.namedtuple('DistributeMap', ['column', 'a', 'b'])

DEFAULT_TILE = (64, 64, 32)

BF16_BYTES = 2
F32_BYTES = 4


def problem_size(M, K, N):

    if min(M, K, N) < 1:
        raise InvalidProblemSize('problem dimensions must be >= 1, got {}x{}x{}'.format(M, K, N))
    return ProblemSize(int(M), int(K), int(N))


def parse_problem_size(text):
    return problem_size(*parse_dims(text, 3))


def tile_shape(m, k, n):

    if min(m, k, n) < 1:
        raise MisalignedTile('tile dimensions must be >= 1, got {}x{}x{}'.format(m, k, n))
    return TileShape(int(m), int(k), int(n))


def parse_tile_shape(text):
    return tile_shape(*parse_dims(text, 3))


def format_size(size):
    return 'x'.join(str(v) for v in size)


def l1_footprint(tile):

    """
    Double-buffered L1 bytes: bfloat16 A' and B' tiles, float32 C' tile.
    """

    return 2 * (tile.m * tile.k * BF16_BYTES + tile.k * tile.n * BF16_BYTES + tile.m * tile.n * F32_BYTES)


def l2_footprint(tile, columns=4):

    """
    Double-buffered L2 bytes per memory core: a block of one tile slot per
    destination core for A and for B, and a joined block of C tiles.
    """

    return 2 * columns * (tile.m * tile.k * BF16_BYTES + tile.k * tile.n * BF16_BYTES + tile.m * tile.n * F32_BYTES)


def check_tile(tile, grid):

    if tile.m % MICRO_M or tile.k % MICRO_K or tile.n % MICRO_N:
        raise MisalignedTile('tile {} must have m divisible by {}, k by {}, n by {}'.format(
            format_size(tile), MICRO_M, MICRO_K, MICRO_N))

    footprint = l1_footprint(tile)
    if footprint > grid.memory.l1_bytes:
        raise TileTooLarge('tile {} needs {} bytes of L1, only {} available'.format(
            format_size(tile), footprint, grid.memory.l1_bytes))


def round_up(value, quantum):
    return ((value + quantum - 1) // quantum) * quantum


class TilingPlan(object):

    def __init__(self, problem, original, tile, grid):

        self.problem = problem
        self.original = original
        self.tile = tile
        self.grid = grid
        self.columns = grid.columns

        self.padding = PaddingRecord(problem.M - original.M, problem.K - original.K, problem.N - original.N)

        self.row_blocks = problem.M // tile.m
        self.col_blocks = problem.N // tile.n
        self.acc_depth = problem.K // tile.k
        self.out_tiles = self.row_blocks * self.col_blocks

        self.row_groups = problem.M // (self.columns * tile.m)
        self.col_groups = problem.N // (self.columns * tile.n)
        self.passes = self.row_groups * self.col_groups

        self.repeat_a = self.col_groups
        self.repeat_b = self.row_groups

        self.runtime_params = (self.acc_depth, self.out_tiles)

        self.shim_sequences = dict((i, {'A': self._a_sequence(i), 'B': self._b_sequence(i)})
                                   for i in range(self.columns))

        self.distribute = dict((i, DistributeMap(i,
                                                 grid.routes.fan_out(grid.memory_cores[i], 'A'),
                                                 grid.routes.fan_out(grid.memory_cores[i], 'B')))
                               for i in range(self.columns))

        self.join = dict((i, JoinMap(self, i)) for i in range(self.columns))

    @property
    def key(self):
        return (self.original, self.tile)

    @property
    def out_tiles_per_core(self):
        return self.passes

    def _a_sequence(self, i):

        rows = i + self.columns * np.repeat(np.arange(self.row_groups), self.col_groups * self.acc_depth)
        kbs = np.tile(np.arange(self.acc_depth), self.row_groups * self.col_groups)
        return np.stack([rows, kbs], axis=1)

    def _b_sequence(self, i):

        # the full sweep of this shim's column blocks, once per row group
        cols = i + self.columns * np.tile(np.repeat(np.arange(self.col_groups), self.acc_depth), self.row_groups)
        kbs = np.tile(np.arange(self.acc_depth), self.row_groups * self.col_groups)
        return np.stack([kbs, cols], axis=1)

    def pass_groups(self, pass_index):
        return divmod(pass_index, self.col_groups)

    def summary(self):

        shims = {}
        for i in range(self.columns):
            a = self.shim_sequences[i]['A']
            b = self.shim_sequences[i]['B']
            shims[str(i)] = {'a_transfers': int(len(a)),
                             'b_transfers': int(len(b)),
                             'first_a': [int(v) for v in a[0]],
                             'last_a': [int(v) for v in a[-1]],
                             'first_b': [int(v) for v in b[0]],
                             'last_b': [int(v) for v in b[-1]]}

        return {'problem': format_size(self.original),
                'padded': format_size(self.problem),
                'tile': format_size(self.tile),
                'pad_m': self.padding.pad_m,
                'pad_k': self.padding.pad_k,
                'pad_n': self.padding.pad_n,
                'acc_depth': self.acc_depth,
                'out_tiles': self.out_tiles,
                'out_tiles_per_core': self.out_tiles_per_core,
                'runtime_params': list(self.runtime_params),
                'repeat_a': self.repeat_a,
                'repeat_b': self.repeat_b,
                'l1_footprint': l1_footprint(self.tile),
                'l2_footprint': l2_footprint(self.tile, self.columns),
                'shims': shims}


class JoinMap(object):

    """
    Where the output tiles of compute column i land: slot t of memory
    core i's joined block holds the tile of the core in row t+2, and the
    block for pass p sits at rows [C*m*jA, C*m*(jA+1)) and columns
    [(i + C*jB)*n, (i + C*jB + 1)*n) of C.
    """

    def __init__(self, plan, column):

        self.plan = plan
        self.column = column
        self.slots = [plan.grid.compute_core(FIRST_COMPUTE_ROW + t, column) for t in range(plan.grid.compute_rows)]
        self.block_rows = plan.columns * plan.tile.m
        self.block_cols = plan.tile.n

    def slot_of(self, core):

        if core not in self.slots:
            raise ColumnOutOfRange('{} does not send output to memory column {}'.format(core, self.column))
        return self.slots.index(core)

    def block_origin(self, pass_index):

        ja, jb = self.plan.pass_groups(pass_index)
        return (ja * self.block_rows, (self.column + self.plan.columns * jb) * self.plan.tile.n)

    def tile_origin(self, core, pass_index):

        """
        (row block, column block) of the output tile the core emits in
        the given pass.
        """

        ja, jb = self.plan.pass_groups(pass_index)
        return (self.slot_of(core) + self.plan.columns * ja, self.column + self.plan.columns * jb)

    def placements(self):
        return [(core, p) + self.tile_origin(core, p) for p in range(self.plan.passes) for core in self.slots]


def plan(problem, tile, grid):

    """
    Pads a problem to the tiling quanta and builds its static mapping

    Inputs:
    -------
    problem : ProblemSize
    tile : TileShape
    grid : Grid

    Outputs:
    --------
    plan : TilingPlan

    """

    problem = ProblemSize(*problem)
    tile = TileShape(*tile)
    check_tile(tile, grid)

    c = grid.columns
    padded = ProblemSize(round_up(problem.M, c * tile.m),
                         round_up(problem.K, tile.k),
                         round_up(problem.N, c * tile.n))

    return TilingPlan(padded, problem, tile, grid)


def _check_column(plan, column):

    if not 0 <= column < plan.columns:
        raise ColumnOutOfRange('column {} outside 0..{}'.format(column, plan.columns - 1))


def shim_stream_sequence(plan, column, matrix=None):

    """
    Ordered tile transfers issued by one shim column

    Inputs:
    -------
    plan : TilingPlan
    column : Int
    matrix : 'A', 'B' or None
        One stream, or both streams interleaved one transfer at a time
        (A first), the order the shim's DMA issues them in

    Outputs:
    --------
    transfers : list of TileRef
        Block coordinates in tile units

    """

    _check_column(plan, column)

    seqs = plan.shim_sequences[column]
    a = [TileRef('A', int(r), int(c)) for r, c in seqs['A']]
    b = [TileRef('B', int(r), int(c)) for r, c in seqs['B']]

    if matrix == 'A':
        return a
    elif matrix == 'B':
        return b
    elif matrix is None:
        out = []
        for i in range(max(len(a), len(b))):
            if i < len(a):
                out.append(a[i])
            if i < len(b):
                out.append(b[i])
        return out
    else:
        raise ValueError('unrecognized matrix: {}'.format(matrix))


def distribute_map(plan, mem_column):

    """
    Slot t of memory core i's A block feeds compute core (row i+2, column t);
    slot t of its B block feeds compute core (row 2+t, column i).
    """

    _check_column(plan, mem_column)
    return plan.distribute[mem_column]


def join_map(plan, mem_column):

    _check_column(plan, mem_column)
    return plan.join[mem_column]


def replay_core(plan, core):

    """
    Replays the shim streams through the distribute maps for one compute
    core, returning the (A tile, B tile) pairs it receives, in order.
    """

    a_column = [i for i in range(plan.columns) if core in plan.distribute[i].a]
    b_column = [i for i in range(plan.columns) if core in plan.distribute[i].b]

    a_refs = shim_stream_sequence(plan, a_column[0], 'A')
    b_refs = shim_stream_sequence(plan, b_column[0], 'B')

    return list(zip(a_refs, b_refs))


def emit_schedule(plan):

    """
    Line-oriented dump of every shim's transfers:
    SHIM <col> <A|B> <rowblk> <colblk>
    """

    lines = []
    for column in range(plan.columns):
        for ref in shim_stream_sequence(plan, column):
            lines.append('SHIM {} {} {} {}'.format(column, ref.matrix, ref.row_block, ref.col_block))
    return lines
