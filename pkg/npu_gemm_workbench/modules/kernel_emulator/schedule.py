"""
Static issue schedule of the tile kernel.

The inner loop rotates over a group of output micro-tiles, one VMAC per
accumulator, so consecutive VMACs are independent. Loads and the B
shuffle go to their own issue slots alongside the VMACs and add no
cycles. An accumulator may only be written vmac_latency_cycles after its
previous write; when the rotation is too short a NOP fills the gap.
"""

import collections

from ...common.exceptions import HazardUnavoidable, MisalignedTile
from ..core_arch.grid import MICRO_M, MICRO_K, MICRO_N

VMAC = 'VMAC'
VLOAD = 'VLOAD'
VSTORE = 'VSTORE'
VSHUFFLE = 'VSHUFFLE'
NOP = 'NOP'

DEFAULT_ACCUMULATORS = 4

MicroOp = collections.namedtuple('MicroOp', ['kind', 'accumulator_id', 'issue_cycle'])


class KernelSchedule(object):

    def __init__(self, tile, ops, preamble_cycles, steady_cycles, postamble_cycles, accumulators):

        self.tile = tile
        self.ops = ops
        self.preamble_cycles = preamble_cycles
        self.steady_cycles = steady_cycles
        self.postamble_cycles = postamble_cycles
        self.accumulators = accumulators

        self.vmac_count = sum(1 for op in ops if op.kind == VMAC)
        self.nop_count = sum(1 for op in ops if op.kind == NOP)

    @property
    def cycles_per_tile_pair(self):
        return self.preamble_cycles + self.steady_cycles + self.postamble_cycles

    @property
    def utilization(self):
        return self.vmac_count / float(self.steady_cycles) if self.steady_cycles else 0.0

    def output_tile_cycles(self, acc_depth):

        """
        Cycles for one output tile: acc_depth tile pairs accumulated in
        place, with a single pipeline fill and drain.
        """

        return acc_depth * self.steady_cycles + self.preamble_cycles + self.postamble_cycles

    def summary(self):
        return {'vmac_count': self.vmac_count,
                'nop_count': self.nop_count,
                'accumulators': self.accumulators,
                'preamble_cycles': self.preamble_cycles,
                'steady_cycles': self.steady_cycles,
                'postamble_cycles': self.postamble_cycles,
                'cycles_per_tile_pair': self.cycles_per_tile_pair,
                'utilization': self.utilization}


def steady_cycles(tile):
    m, k, n = tile
    return m * k * n // (MICRO_M * MICRO_K * MICRO_N)


def schedule_kernel(tile, cspec, accumulators=DEFAULT_ACCUMULATORS, preamble_cycles=8, postamble_cycles=8):

    """
    Builds the issue schedule of one tile pair

    Inputs:
    -------
    tile : TileShape
    cspec : ComputeSpec
        Supplies vmac_latency_cycles
    accumulators : Int
        Accumulator registers rotated through; fewer than the VMAC latency
        is a diagnostic mode that shows the NOPs it costs
    preamble_cycles, postamble_cycles : Int
        Pipeline fill and drain around the steady loop

    Outputs:
    --------
    schedule : KernelSchedule

    """

    m, k, n = tile
    if m % MICRO_M or k % MICRO_K or n % MICRO_N:
        raise MisalignedTile('tile {}x{}x{} is not a whole number of micro-tiles'.format(m, k, n))
    if accumulators < 1:
        raise ValueError('accumulators must be >= 1, got {}'.format(accumulators))

    latency = cspec.vmac_latency_cycles
    outputs = (m // MICRO_M) * (n // MICRO_N)
    k_blocks = k // MICRO_K

    if accumulators >= latency and (outputs < accumulators or outputs % accumulators):
        raise HazardUnavoidable('{} output micro-tiles cannot be rotated over {} accumulators'.format(
            outputs, accumulators))

    ops = []
    last_write = {}
    cycle = preamble_cycles

    for group in range(0, outputs, accumulators):
        width = min(accumulators, outputs - group)
        for kb in range(k_blocks):
            for acc in range(width):
                ready = last_write.get(acc, cycle - latency) + latency
                while cycle < ready:
                    ops.append(MicroOp(NOP, acc, cycle))
                    cycle += 1
                if acc == 0:
                    # operands of this k block, issued alongside the VMAC
                    ops.append(MicroOp(VLOAD, acc, cycle))
                    ops.append(MicroOp(VLOAD, acc, cycle))
                    ops.append(MicroOp(VSHUFFLE, acc, cycle))
                ops.append(MicroOp(VMAC, acc, cycle))
                last_write[acc] = cycle
                cycle += 1
        for acc in range(width):
            ops.append(MicroOp(VSTORE, acc, max(cycle, last_write[acc] + latency)))

    steady = cycle - preamble_cycles
    ops.sort(key=lambda op: op.issue_cycle)

    return KernelSchedule(tile, ops, preamble_cycles, steady, postamble_cycles, accumulators)


def check_hazards(schedule, latency):

    """
    Scans a schedule for VMACs that write an accumulator too soon.

    Outputs:
    --------
    violations : list of (accumulator_id, previous_cycle, cycle)

    """

    violations = []
    last_write = {}

    for op in schedule.ops:
        if op.kind != VMAC:
            continue
        prev = last_write.get(op.accumulator_id)
        if prev is not None and op.issue_cycle - prev < latency:
            violations.append((op.accumulator_id, prev, op.issue_cycle))
        last_write[op.accumulator_id] = op.issue_cycle

    return violations
