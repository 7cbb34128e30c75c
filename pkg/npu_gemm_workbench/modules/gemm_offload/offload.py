"""
Host side of GEMM offload.

An OffloadContext keeps one tiling plan and one set of zero-padded shared
buffers per problem size, the way the host runtime keeps one instruction
stream and buffer set per size. A call copies its operands into the
buffers (transposing on the way when a layout does not match what the
plan expects: row-major A, column-major B), runs the kernel and copies
the result out.

Stage times are model costs, not measurements: bytes over the configured
host bandwidths for copies and transposes, simulated cycles over the
array clock for the kernel. Reconfiguration is added to the kernel stage:
a full configuration on first use, the minimal protocol when the size
changes, nothing when it repeats.
"""

import collections
import logging
import threading
import time

import numpy as np
import pandas as pd

from ...common.matrix import Matrix, ROW_MAJOR, COL_MAJOR, is_linear
from ...common.bfloat16 import float_to_bf16_bits
from ...common.schemas import CostParams
from ...common.exceptions import ShapeMismatch, LayoutError
from ...common.utils import load_with_schema
from ..core_arch.grid import build_grid
from ..tiling_planner.planner import ProblemSize, DEFAULT_TILE, plan, format_size, BF16_BYTES, F32_BYTES
from ..kernel_emulator.kernel import matmul_bf16
from ..npu_simulator.simulator import run
from ..npu_simulator.reconfig import reconfigure, MINIMAL
from .transpose import transpose_copy

logger = logging.getLogger(__name__)

REFERENCE = 'reference-f32'
EMULATED = 'emulated-npu'
BACKENDS = (REFERENCE, EMULATED)

STAGES = ('input_copy', 'transpose', 'input_sync', 'kernel', 'output_sync', 'output_copy')


class GemmRequest(collections.namedtuple('GemmRequest', ['a', 'b', 'transpose_a', 'transpose_b'])):

    """
    C = op(a) op(b), where op transposes when the flag is set.
    """

    def __new__(cls, a, b, transpose_a=False, transpose_b=False):
        return super(GemmRequest, cls).__new__(cls, a, b, transpose_a, transpose_b)


class StageTimings(object):

    def __init__(self, **stages):

        for stage in STAGES:
            setattr(self, stage, float(stages.get(stage, 0.0)))
        self.reconfig_cycles = stages.get('reconfig_cycles', 0)
        self.kernel_cycles = stages.get('kernel_cycles', 0)
        self.wallclock = None

    @property
    def total(self):
        return sum(getattr(self, stage) for stage in STAGES)

    def to_dict(self):
        out = dict((stage, getattr(self, stage)) for stage in STAGES)
        out.update({'total': self.total,
                    'reconfig_cycles': int(self.reconfig_cycles),
                    'kernel_cycles': int(self.kernel_cycles)})
        return out


class CacheEntry(object):

    """
    Plan, shared buffers and (once known) kernel timing for one size.
    """

    def __init__(self, plan):

        Mp, Kp, Np = plan.problem
        self.plan = plan
        self.a_buffer = np.zeros((Mp, Kp), dtype=np.uint16)
        # column-major B: N rows of K
        self.b_buffer = np.zeros((Np, Kp), dtype=np.uint16)
        self.c_buffer = np.zeros((Mp, Np), dtype=np.float32)
        self.timing = None


class OffloadContext(object):

    def __init__(self, grid=None, cost=None, backend=EMULATED, tile=DEFAULT_TILE,
                 simulate_values=False, wallclock=False, n_jobs=None):

        if backend not in BACKENDS:
            raise ValueError('unrecognized backend: {}'.format(backend))

        self.grid = grid if grid is not None else build_grid()
        self.cost = cost if cost is not None else dict(load_with_schema(CostParams, {}))
        self.backend = backend
        self.tile = tile
        self.simulate_values = simulate_values
        self.wallclock = wallclock
        self.n_jobs = n_jobs

        self.plan_cache = collections.OrderedDict()
        self.last_plan = None
        self.plans_built = 0
        self.stats = collections.OrderedDict()
        # one call at a time: calls share the per-size buffers and the array
        self.lock = threading.RLock()

    def entry(self, problem):

        problem = ProblemSize(*problem)
        with self.lock:
            if problem not in self.plan_cache:
                self.plan_cache[problem] = CacheEntry(plan(problem, self.tile, self.grid))
                self.plans_built += 1
                logger.debug('planned {}'.format(format_size(problem)))
            return self.plan_cache[problem]

    def record(self, problem, breakdown):

        key = format_size(problem)
        if key not in self.stats:
            self.stats[key] = dict([('calls', 0)] + [(stage, 0.0) for stage in STAGES] + [('reconfig_cycles', 0)])

        s = self.stats[key]
        s['calls'] += 1
        for stage in STAGES:
            s[stage] += getattr(breakdown, stage)
        s['reconfig_cycles'] += int(breakdown.reconfig_cycles)

    @property
    def total_seconds(self):
        return sum(s[stage] for s in self.stats.values() for stage in STAGES)

    def size_table(self):

        """
        Calls and accumulated stage times per problem size.
        """

        rows = [dict(size=key, **values) for key, values in self.stats.items()]
        return pd.DataFrame(rows, columns=['size', 'calls'] + list(STAGES) + ['reconfig_cycles'])


def init(sizes, tile=DEFAULT_TILE, grid=None, cost=None, backend=EMULATED, **options):

    """
    Builds an OffloadContext with every listed size planned up front

    Inputs:
    -------
    sizes : list of ProblemSize
        Duplicates share one entry; an empty list plans lazily
    tile : TileShape

    Outputs:
    --------
    ctx : OffloadContext

    """

    ctx = OffloadContext(grid, cost, backend, tile, **options)
    for size in sizes:
        ctx.entry(size)
    return ctx


def effective_operands(req, n_jobs=None):

    """
    Applies the transpose flags and brings A to row-major and B to
    column-major

    Outputs:
    --------
    a : Matrix (row-major)
    b : Matrix (column-major)
    transposed_bytes : Int
        Bytes that needed a transposing copy

    """

    a = req.a.transposed() if req.transpose_a else req.a
    b = req.b.transposed() if req.transpose_b else req.b

    for name, m in (('a', a), ('b', b)):
        if not is_linear(m.layout):
            raise LayoutError('operand {} is {}; only row-major and column-major are accepted'.format(name, m.layout))

    if a.cols != b.rows:
        raise ShapeMismatch('cannot multiply {}x{} by {}x{}'.format(a.rows, a.cols, b.rows, b.cols))

    transposed = 0
    if a.layout != ROW_MAJOR:
        a = transpose_copy(a, n_jobs)
        transposed += a.nbytes
    if b.layout != COL_MAJOR:
        b = transpose_copy(b, n_jobs)
        transposed += b.nbytes

    return a, b, transposed


def _bf16_storage(matrix):
    return matrix.data if matrix.dtype == 'bfloat16' else float_to_bf16_bits(matrix.data)


def _kernel_timing(ctx, entry):

    if entry.timing is None:
        entry.timing = run(entry.plan, ctx.grid, None, None, ctx.cost).total_cycles
    return entry.timing


def _reconfig_cycles(ctx, p):

    if ctx.last_plan is not None and ctx.last_plan.key == p.key:
        return 0
    return reconfigure(ctx.last_plan, p, MINIMAL, ctx.cost)


def _reference(ctx, a, b):

    dtype = np.float64 if a.dtype == 'float64' and b.dtype == 'float64' else np.float32
    start = time.perf_counter()
    c = np.matmul(a.to_array().astype(dtype), b.to_array().astype(dtype))
    elapsed = time.perf_counter() - start

    M, K = a.shape
    N = b.cols
    breakdown = StageTimings(kernel=2.0 * M * K * N / (ctx.cost['host_gflops'] * 1e9))
    if ctx.wallclock:
        breakdown.wallclock = {'kernel': elapsed}

    out = Matrix(np.ascontiguousarray(c).reshape(-1), M, N, 'float64' if dtype == np.float64 else 'float32')
    return out, None, breakdown


def matmul(ctx, req):

    """
    Runs one GEMM through the context's backend

    Inputs:
    -------
    ctx : OffloadContext
    req : GemmRequest

    Outputs:
    --------
    c : Matrix (row-major)
        float32, or float64 from the reference backend when both inputs
        are float64
    report : SimReport or None
        Simulator report (timing only unless the context simulates values)
    breakdown : StageTimings

    """

    clock = time.perf_counter
    t0 = clock()
    a, b, transposed = effective_operands(req, ctx.n_jobs)
    t_transpose = clock() - t0

    problem = ProblemSize(a.rows, a.cols, b.cols)

    with ctx.lock:
        if ctx.backend == REFERENCE:
            c, report, breakdown = _reference(ctx, a, b)
        else:
            c, report, breakdown = _emulated(ctx, problem, a, b, transposed, t_transpose)
        ctx.record(problem, breakdown)

    return c, report, breakdown


def _emulated(ctx, problem, a, b, transposed, t_transpose):

    clock = time.perf_counter
    cost = ctx.cost
    entry = ctx.entry(problem)
    p = entry.plan
    M, K, N = problem

    t0 = clock()
    entry.a_buffer[:M, :K] = _bf16_storage(a).reshape(M, K)
    entry.b_buffer[:N, :K] = _bf16_storage(b).reshape(N, K)
    t_input = clock() - t0

    reconfig = _reconfig_cycles(ctx, p)
    ctx.last_plan = p

    t0 = clock()
    if ctx.simulate_values:
        report = run(p, ctx.grid, a, b, cost, reconfig)
        entry.timing = report.total_cycles - reconfig
        values = report.output.to_array()
    else:
        report = None
        # padded K rows and columns are zero, as on the array
        values = matmul_bf16(entry.a_buffer, entry.b_buffer.T)[:M, :N]
    kernel_cycles = _kernel_timing(ctx, entry)
    t_kernel = clock() - t0

    t0 = clock()
    entry.c_buffer[:M, :N] = values
    c = Matrix(np.ascontiguousarray(entry.c_buffer[:M, :N]).reshape(-1), M, N, 'float32', ROW_MAJOR)
    t_output = clock() - t0

    clock_hz = ctx.grid.compute.clock_hz
    breakdown = StageTimings(input_copy=(M * K + K * N) * BF16_BYTES / cost['host_copy_bytes_per_s'],
                             transpose=transposed / cost['host_transpose_bytes_per_s'],
                             input_sync=cost['host_sync_input_s'],
                             kernel=(kernel_cycles + reconfig) / clock_hz,
                             output_sync=cost['host_sync_output_s'],
                             output_copy=M * N * F32_BYTES / cost['host_copy_bytes_per_s'],
                             reconfig_cycles=reconfig,
                             kernel_cycles=kernel_cycles)

    if ctx.wallclock:
        breakdown.wallclock = {'transpose': t_transpose, 'input_copy': t_input,
                               'kernel': t_kernel, 'output_copy': t_output}

    return c, report, breakdown
