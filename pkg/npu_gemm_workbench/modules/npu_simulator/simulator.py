"""
Event-driven execution of a TilingPlan on the array, built on simpy.

Every DMA channel and compute core is a simpy process. Buffers are
simpy Stores of slot indices: a producer takes a free slot, fills it and
hands it to the consumer's full queue; the consumer returns it when done.
Compute cores hold two slots per role (A-in, B-in, C-out), memory cores two
L2 buffers per operand and two joined C blocks.

Transfers cost dma_setup_cycles + bytes / bandwidth. A compute step costs
m*k*n/128 cycles, plus the preamble on the first tile pair of an output
tile and the postamble on the last. Values are computed when a compute
step ends, with the same kernel numerics as the functional path, so the
timing model never changes results.

Ties between events at the same time resolve in scheduling order (simpy
orders its queue by time, priority, then insertion), which makes traces
reproducible.
"""

import math
import logging

import numpy as np
import pandas as pd
import simpy

from ...common.matrix import Matrix, ROW_MAJOR, COL_MAJOR
from ...common.exceptions import Deadlock, CapacityExceeded, SimulationError, TracingDisabled, LayoutError, ShapeMismatch
from ..core_arch.grid import core_label, peak_flops
from ..tiling_planner.planner import shim_stream_sequence, l2_footprint, BF16_BYTES, F32_BYTES
from ..layout_engine.transforms import TileWindow, micro_tile, untile_micro
from ..kernel_emulator.kernel import tile_matmul_accumulate
from ..kernel_emulator.schedule import steady_cycles

logger = logging.getLogger(__name__)

A_IN = 'A-in'
B_IN = 'B-in'
C_OUT = 'C-out'

EVENT_KINDS = ('dma_begin', 'dma_end', 'lock_acquire', 'lock_release', 'compute_begin', 'compute_end', 'reconfig')

LINKS = ('L3->L2 A', 'L3->L2 B', 'L2->L1 A', 'L2->L1 B', 'L1->L2 C', 'L2->L3 C')

# allowed slot transitions; entering an active state takes the slot's lock
INPUT_TRANSITIONS = {'empty': 'filling', 'filling': 'full', 'full': 'computing', 'computing': 'empty'}
OUTPUT_TRANSITIONS = {'empty': 'computing', 'computing': 'full', 'full': 'draining', 'draining': 'empty'}
ACTIVE_STATES = ('filling', 'computing', 'draining')


def format_time(t):
    return str(int(t)) if float(t).is_integer() else '{:.3f}'.format(t)


class SimEvent(object):

    __slots__ = ('time', 'kind', 'subject')

    def __init__(self, time, kind, subject):
        self.time = time
        self.kind = kind
        self.subject = subject

    def to_line(self):
        return '{} {} {}'.format(format_time(self.time), self.kind, self.subject)

    def __eq__(self, other):
        return (self.time, self.kind, self.subject) == (other.time, other.kind, other.subject)

    def __repr__(self):
        return 'SimEvent({})'.format(self.to_line())


class BufferSlot(object):

    def __init__(self, core, role, index):

        self.core = core
        self.role = role
        self.index = index
        self.state = 'empty'
        self.transitions = OUTPUT_TRANSITIONS if role == C_OUT else INPUT_TRANSITIONS

    @property
    def name(self):
        return '{}.{}[{}]'.format(core_label(self.core), self.role, self.index)

    def advance(self, state):

        """
        Moves the slot to its next state. Returns 'lock_acquire' or
        'lock_release' for the lock event the move implies.
        """

        if self.transitions[self.state] != state:
            raise SimulationError('{} cannot go from {} to {}'.format(self.name, self.state, state))

        self.state = state
        return 'lock_acquire' if state in ACTIVE_STATES else 'lock_release'


class SimReport(object):

    def __init__(self, plan, total_cycles, busy_cycles, bytes_moved, reconfig_cycles, output, events,
                 intervals, clock_hz, peak):

        self.plan = plan
        self.total_cycles = total_cycles
        self.busy_cycles = busy_cycles
        self.bytes_moved = bytes_moved
        self.reconfig_cycles = reconfig_cycles
        self.output = output
        self.events = events
        self.intervals = intervals
        self.clock_hz = clock_hz
        self.peak_flops = peak

    @property
    def utilization(self):
        total = float(self.total_cycles)
        return dict((core, busy / total if total else 0.0) for core, busy in self.busy_cycles.items())

    @property
    def aggregate_utilization(self):
        values = list(self.utilization.values())
        return float(np.mean(values)) if values else 0.0

    @property
    def flops(self):
        M, K, N = self.plan.original
        return 2.0 * M * K * N

    @property
    def model_seconds(self):
        return self.total_cycles / self.clock_hz if self.clock_hz else 0.0

    @property
    def effective_flops(self):
        return self.flops / self.model_seconds if self.model_seconds else 0.0

    def core_table(self):

        """
        Per-core busy cycles and utilization as a DataFrame.
        """

        utilization = self.utilization
        rows = [{'core': core, 'busy_cycles': busy, 'utilization': utilization[core]}
                for core, busy in self.busy_cycles.items()]
        return pd.DataFrame(rows, columns=['core', 'busy_cycles', 'utilization'])

    def to_dict(self):

        return {'total_cycles': int(self.total_cycles),
                'reconfig_cycles': int(self.reconfig_cycles),
                'busy_cycles': dict((k, float(v)) for k, v in self.busy_cycles.items()),
                'utilization': dict((k, float(v)) for k, v in self.utilization.items()),
                'aggregate_utilization': self.aggregate_utilization,
                'bytes_moved': dict((k, int(v)) for k, v in self.bytes_moved.items()),
                'model_seconds': self.model_seconds,
                'effective_flops': self.effective_flops,
                'peak_flops': self.peak_flops}


class Simulation(object):

    def __init__(self, plan, cost, a_data=None, b_data=None, reconfig_cycles=0, tracing=False):

        self.plan = plan
        self.grid = plan.grid
        self.cost = cost
        self.tile = plan.tile
        self.functional = a_data is not None
        self.reconfig_cycles = reconfig_cycles
        self.tracing = tracing

        self.env = simpy.Environment()
        self.events = [] if tracing else None
        self.intervals = dict((core_label(c), []) for c in self.grid.compute_cores)
        self.busy = dict((core_label(c), 0.0) for c in self.grid.compute_cores)
        self.bytes_moved = dict((link, 0) for link in LINKS)
        self.processes = []

        m, k, n = self.tile
        Mp, Kp, Np = plan.problem
        C = plan.columns

        self.steady = steady_cycles(self.tile)
        self.a_bytes = m * k * BF16_BYTES
        self.b_bytes = k * n * BF16_BYTES
        self.c_bytes = m * n * F32_BYTES

        self.a_data = a_data
        self.b_data = b_data
        self.c_data = np.zeros(Mp * Np, dtype=np.float32) if self.functional else None

        self.windows = {'A': TileWindow(Mp, Kp, m, k, BF16_BYTES),
                        'B': TileWindow(Np, Kp, n, k, BF16_BYTES),
                        'C': TileWindow(Mp, Np, C * m, n, F32_BYTES)}

        env = self.env
        self.l2_free = dict((i, {'A': simpy.Store(env), 'B': simpy.Store(env)}) for i in range(C))
        self.l2_full = dict((i, {'A': simpy.Store(env), 'B': simpy.Store(env)}) for i in range(C))
        self.join_free = dict((i, simpy.Store(env)) for i in range(C))
        self.join_full = dict((i, simpy.Store(env)) for i in range(C))

        for i in range(C):
            for op in ('A', 'B'):
                self.l2_free[i][op].items.extend([0, 1])
            self.join_free[i].items.extend([0, 1])

        self.slots = {}
        self.free = {}
        self.full = {}
        for core in self.grid.compute_cores:
            for role in (A_IN, B_IN, C_OUT):
                for index in (0, 1):
                    self.slots[(core, role, index)] = BufferSlot(core, role, index)
                self.free[(core, role)] = simpy.Store(env)
                self.free[(core, role)].items.extend([0, 1])
                self.full[(core, role)] = simpy.Store(env)

    def _emit(self, kind, subject):
        if self.events is not None:
            self.events.append(SimEvent(self.env.now, kind, subject))

    def _advance(self, core, role, index, state):
        slot = self.slots[(core, role, index)]
        self._emit(slot.advance(state), slot.name)

    def _dma_cycles(self, nbytes, bytes_per_cycle):
        return self.cost['dma_setup_cycles'] + nbytes / float(bytes_per_cycle)

    def _launch(self):

        if self.reconfig_cycles:
            self._emit('reconfig', 'array {} cycles'.format(format_time(self.reconfig_cycles)))
            yield self.env.timeout(self.reconfig_cycles)

        for i in range(self.plan.columns):
            self._start(self._shim_mm2s(i), 'shim {} mm2s'.format(i))
            self._start(self._distribute(i, 'A'), 'memory {} A'.format(i))
            self._start(self._distribute(i, 'B'), 'memory {} B'.format(i))
        for core in self.grid.compute_cores:
            self._start(self._compute(core), core_label(core))
        for i in range(self.plan.columns):
            self._start(self._join(i), 'memory {} C'.format(i))
            self._start(self._shim_s2mm(i), 'shim {} s2mm'.format(i))

    def _start(self, generator, name):
        self.processes.append((name, self.env.process(generator)))

    def _shim_mm2s(self, i):

        shim = core_label(self.grid.shim_cores[i])
        mem = core_label(self.grid.memory_cores[i])

        for ref in shim_stream_sequence(self.plan, i):
            op = ref.matrix
            nbytes = self.a_bytes if op == 'A' else self.b_bytes
            channel = 'mm2s0' if op == 'A' else 'mm2s1'
            subject = '{}.{}->{} {}[{},{}]'.format(shim, channel, mem, op, ref.row_block, ref.col_block)

            buffer = yield self.l2_free[i][op].get()

            self._emit('dma_begin', subject)
            yield self.env.timeout(self._dma_cycles(nbytes, self.cost['l3_l2_bytes_per_cycle']))

            data = None
            if self.functional:
                if op == 'A':
                    data = self.windows['A'].read(self.a_data, ref.row_block, ref.col_block)
                else:
                    # column-major B is a row-major N x K buffer
                    data = self.windows['B'].read(self.b_data, ref.col_block, ref.row_block)

            self.bytes_moved['L3->L2 ' + op] += nbytes
            self._emit('dma_end', subject)

            yield self.l2_full[i][op].put((buffer, ref, data))

    def _distribute(self, i, op):

        mem = self.grid.memory_cores[i]
        dests = self.plan.distribute[i].a if op == 'A' else self.plan.distribute[i].b
        role = A_IN if op == 'A' else B_IN
        nbytes = self.a_bytes if op == 'A' else self.b_bytes
        count = len(self.plan.shim_sequences[i][op])

        for _ in range(count):
            buffer, ref, data = yield self.l2_full[i][op].get()

            taken = []
            for core in dests:
                index = yield self.free[(core, role)].get()
                self._advance(core, role, index, 'filling')
                taken.append((core, index))

            subject = '{}.{}->{} {}[{},{}]'.format(core_label(mem), 'mm2s0' if op == 'A' else 'mm2s1',
                                                   ','.join(core_label(c) for c in dests),
                                                   op, ref.row_block, ref.col_block)
            self._emit('dma_begin', subject)
            yield self.env.timeout(self._dma_cycles(nbytes, self.cost['l2_l1_bytes_per_cycle']))

            micro = micro_tile(self.tile, op, data) if data is not None else None
            self.bytes_moved['L2->L1 ' + op] += nbytes * len(dests)
            self._emit('dma_end', subject)

            for core, index in taken:
                self._advance(core, role, index, 'full')
                yield self.full[(core, role)].put((index, ref, micro))

            yield self.l2_free[i][op].put(buffer)

    def _compute(self, core):

        label = core_label(core)
        plan = self.plan
        m, k, n = self.tile
        last = plan.acc_depth - 1

        for p in range(plan.passes):
            c_index = yield self.free[(core, C_OUT)].get()
            self._advance(core, C_OUT, c_index, 'computing')
            acc = np.zeros(m * n, dtype=np.float32) if self.functional else None

            for kb in range(plan.acc_depth):
                a_index, a_ref, a_tile = yield self.full[(core, A_IN)].get()
                b_index, b_ref, b_tile = yield self.full[(core, B_IN)].get()

                if a_ref.col_block != kb or b_ref.row_block != kb:
                    raise SimulationError('{} received A{} and B{} for k block {}'.format(
                        label, tuple(a_ref[1:]), tuple(b_ref[1:]), kb))

                self._advance(core, A_IN, a_index, 'computing')
                self._advance(core, B_IN, b_index, 'computing')

                cycles = self.steady
                if kb == 0:
                    cycles += self.cost['preamble_cycles']
                if kb == last:
                    cycles += self.cost['postamble_cycles']

                subject = '{} C[{},{}] k{}'.format(label, a_ref.row_block, b_ref.col_block, kb)
                begin = self.env.now
                self._emit('compute_begin', subject)
                yield self.env.timeout(cycles)

                if acc is not None:
                    acc = tile_matmul_accumulate(a_tile, b_tile, acc, self.tile)

                self.busy[label] += cycles
                self.intervals[label].append((begin, self.env.now))
                self._emit('compute_end', subject)

                self._advance(core, A_IN, a_index, 'empty')
                self._advance(core, B_IN, b_index, 'empty')
                yield self.free[(core, A_IN)].put(a_index)
                yield self.free[(core, B_IN)].put(b_index)

            self._advance(core, C_OUT, c_index, 'full')
            yield self.full[(core, C_OUT)].put((c_index, p, acc, (a_ref.row_block, b_ref.col_block)))

    def _join(self, i):

        join = self.plan.join[i]
        C = self.plan.columns

        for p in range(self.plan.passes):
            block_index = yield self.join_free[i].get()
            block = np.zeros(C * self.tile.m * self.tile.n, dtype=np.float32) if self.functional else None

            drains = [self.env.process(self._drain(i, core, t, p, block)) for t, core in enumerate(join.slots)]
            yield self.env.all_of(drains)

            yield self.join_full[i].put((block_index, p, block))

    def _drain(self, i, core, t, p, block):

        c_index, tile_pass, acc, origin = yield self.full[(core, C_OUT)].get()

        expected = self.plan.join[i].tile_origin(core, p)
        if tile_pass != p or tuple(origin) != expected:
            raise SimulationError('{} produced C{} in pass {}, expected C{} in pass {}'.format(
                core_label(core), tuple(origin), tile_pass, expected, p))

        self._advance(core, C_OUT, c_index, 'draining')

        subject = '{}.mm2s0->{}.s2mm{} C[{},{}]'.format(core_label(core), core_label(self.grid.memory_cores[i]),
                                                        2 + t, expected[0], expected[1])
        self._emit('dma_begin', subject)
        yield self.env.timeout(self._dma_cycles(self.c_bytes, self.cost['l2_l1_bytes_per_cycle']))

        if acc is not None:
            size = self.tile.m * self.tile.n
            block[t * size:(t + 1) * size] = untile_micro(self.tile, 'C', acc)

        self.bytes_moved['L1->L2 C'] += self.c_bytes
        self._emit('dma_end', subject)

        self._advance(core, C_OUT, c_index, 'empty')
        yield self.free[(core, C_OUT)].put(c_index)

    def _shim_s2mm(self, i):

        join = self.plan.join[i]
        nbytes = self.plan.columns * self.c_bytes

        for _ in range(self.plan.passes):
            block_index, p, block = yield self.join_full[i].get()
            ja, jb = self.plan.pass_groups(p)

            subject = '{}.mm2s2->{}.s2mm0 C block {}'.format(core_label(self.grid.memory_cores[i]),
                                                            core_label(self.grid.shim_cores[i]), p)
            self._emit('dma_begin', subject)
            yield self.env.timeout(self._dma_cycles(nbytes, self.cost['l3_l2_bytes_per_cycle']))

            if block is not None:
                self.windows['C'].write(self.c_data, ja, join.column + self.plan.columns * jb, block)

            self.bytes_moved['L2->L3 C'] += nbytes
            self._emit('dma_end', subject)

            yield self.join_free[i].put(block_index)

    def run(self):

        self._start(self._launch(), 'launch')
        self.env.run()

        stalled = [name for name, proc in self.processes if proc.is_alive]
        if stalled:
            raise Deadlock('simulation stopped at cycle {} with blocked processes: {}'.format(
                format_time(self.env.now), ', '.join(stalled)))

        return self.env.now


def _l3_buffer(matrix, layout, rows, cols, padded_rows, padded_cols):

    """
    Zero-padded bfloat16 storage of an operand in its main-memory layout.
    """

    if matrix.layout != layout:
        raise LayoutError('expected a {} operand, got {}'.format(layout, matrix.layout))
    if matrix.shape != (rows, cols):
        raise ShapeMismatch('operand is {}x{}, plan expects {}x{}'.format(matrix.rows, matrix.cols, rows, cols))

    bits = matrix.astype('bfloat16').data
    stored = (rows, cols) if layout == ROW_MAJOR else (cols, rows)
    padded = (padded_rows, padded_cols) if layout == ROW_MAJOR else (padded_cols, padded_rows)

    out = np.zeros(padded, dtype=np.uint16)
    out[:stored[0], :stored[1]] = bits.reshape(stored)
    return out.reshape(-1)


def run(plan, grid, a, b, cost, reconfig_cycles=0, trace=False):

    """
    Simulates one GEMM

    Inputs:
    -------
    plan : TilingPlan
    grid : Grid
        Must be the grid the plan was built for
    a : Matrix (row-major, M x K) or None
    b : Matrix (column-major, K x N) or None
        With both None, only timing is simulated
    cost : dict
        CostParams values
    reconfig_cycles : float
        Reconfiguration cost paid before the first transfer
    trace : Bool
        Record the event trace

    Outputs:
    --------
    report : SimReport

    """

    if grid is not plan.grid:
        raise SimulationError('plan was built for a different grid')

    needed = l2_footprint(plan.tile, plan.columns)
    if needed > grid.memory.l2_bytes:
        raise CapacityExceeded('tile {}x{}x{} needs {} bytes of L2 per memory core, only {} available'.format(
            plan.tile.m, plan.tile.k, plan.tile.n, needed, grid.memory.l2_bytes))

    M, K, N = plan.original
    Mp, Kp, Np = plan.problem

    if (a is None) != (b is None):
        raise ShapeMismatch('give both operands or neither')

    a_data = b_data = None
    if a is not None:
        a_data = _l3_buffer(a, ROW_MAJOR, M, K, Mp, Kp)
        b_data = _l3_buffer(b, COL_MAJOR, K, N, Kp, Np)

    sim = Simulation(plan, cost, a_data, b_data, reconfig_cycles, trace)
    end = sim.run()

    output = None
    if sim.functional:
        c = sim.c_data.reshape(Mp, Np)[:M, :N]
        output = Matrix(np.ascontiguousarray(c).reshape(-1), M, N, 'float32', ROW_MAJOR)

    logger.debug('simulated {} in {} cycles'.format(plan.summary()['problem'], format_time(end)))

    return SimReport(plan, int(math.ceil(end)), sim.busy, sim.bytes_moved, reconfig_cycles, output,
                     sim.events, sim.intervals, grid.compute.clock_hz, peak_flops(grid)[1])


def trace(report):

    """
    The ordered event list of a traced run.
    """

    if report.events is None:
        raise TracingDisabled('run the simulation with trace=True to record events')
    return list(report.events)


def format_trace(events):
    return [event.to_line() for event in events]
