"""
Operation counts for one GPT-2 training step.

GEMMs are counted as 2*M*K*N. Each GEMM call site has two gradient GEMMs
of the same size in the backward pass, one for the input and one for the
weight. Attention (QK^T, softmax, AV) runs on the host and is counted as
dense T x T products. Other operations use fixed per-element costs.
"""

import collections
import functools

import pandas as pd

from ..tiling_planner.planner import ProblemSize
from .config import load_model_config

GELU = 8
SOFTMAX = 5
LAYERNORM = 5

# backward cost relative to forward, for every operation
BACKWARD_FACTOR = 2

FORWARD = 'forward'
BACKWARD_INPUT = 'backward-input'
BACKWARD_WEIGHT = 'backward-weight'

GemmCall = collections.namedtuple('GemmCall', ['site', 'phase', 'size', 'count'])


def flops_matmul(m, k, n):
    return 2 * m * k * n


def linear_sites(config):

    """
    (name, in_channels, out_channels, calls per step) of every linear layer
    """

    C = config.d_model
    L = config.n_layers
    return [('qkv', C, 3 * C, L),
            ('attproj', C, C, L),
            ('fc', C, config.d_ff, L),
            ('fcproj', config.d_ff, C, L),
            ('logits', C, config.vocab_size, 1)]


def gemm_calls(config):

    """
    Every offloaded GEMM of one training step

    Outputs:
    --------
    calls : list of GemmCall
        Forward out = inp W, then dinp = dout W^T and dW = dout^T inp

    """

    BT = config.tokens
    calls = []

    for site, C, OC, count in linear_sites(config):
        calls.append(GemmCall(site, FORWARD, ProblemSize(BT, C, OC), count))
        calls.append(GemmCall(site, BACKWARD_INPUT, ProblemSize(BT, OC, C), count))
        calls.append(GemmCall(site, BACKWARD_WEIGHT, ProblemSize(OC, BT, C), count))

    return calls


def extract_gemm_sizes(config):

    """
    Distinct GEMM problem sizes of a training step, in call order
    """

    sizes = []
    for call in sorted(gemm_calls(config), key=lambda c: c.phase != FORWARD):
        if call.size not in sizes:
            sizes.append(call.size)
    return sizes


@functools.lru_cache(maxsize=None)
def gpt2_gemm_sizes(name='gpt2-124m'):
    return tuple(extract_gemm_sizes(load_model_config(name)))


class FlopLedger(object):

    """
    Per-operation forward and backward FLOPs for one step.
    """

    def __init__(self):
        self.entries = collections.OrderedDict()
        self.gemm_ops = set()

    def add(self, op, forward, backward=None, gemm=False):

        backward = BACKWARD_FACTOR * forward if backward is None else backward
        fwd, bwd = self.entries.get(op, (0, 0))
        self.entries[op] = (fwd + int(forward), bwd + int(backward))
        if gemm:
            self.gemm_ops.add(op)

    @property
    def forward(self):
        return sum(f for f, _ in self.entries.values())

    @property
    def backward(self):
        return sum(b for _, b in self.entries.values())

    @property
    def total(self):
        return self.forward + self.backward

    @property
    def gemm_total(self):
        return sum(f + b for op, (f, b) in self.entries.items() if op in self.gemm_ops)

    def table(self):
        rows = [{'operation': op, 'forward': f, 'backward': b, 'total': f + b, 'gemm': op in self.gemm_ops}
                for op, (f, b) in self.entries.items()]
        return pd.DataFrame(rows, columns=['operation', 'forward', 'backward', 'total', 'gemm'])

    def summary(self):
        return {'forward_flops': self.forward,
                'backward_flops': self.backward,
                'total_flops': self.total,
                'gemm_flops': self.gemm_total,
                'operations': self.table().to_dict('records')}


def count_flops(config):

    """
    Counts the FLOPs of one training step of a model

    Inputs:
    -------
    config : ModelConfig

    Outputs:
    --------
    ledger : FlopLedger

    """

    B, T, C = config.batch_size, config.seq_len, config.d_model
    L, NH, V = config.n_layers, config.n_heads, config.vocab_size
    BT = B * T

    ledger = FlopLedger()

    ledger.add('encoder', BT * C)
    ledger.add('layernorm', LAYERNORM * BT * C * (2 * L + 1))

    for call in gemm_calls(config):
        if call.phase == FORWARD:
            size = flops_matmul(*call.size) * call.count
            ledger.add(call.site, size, BACKWARD_FACTOR * size, gemm=True)

    ledger.add('attention', L * B * (flops_matmul(T, C, T) + flops_matmul(T, T, C) + SOFTMAX * NH * T * T))
    ledger.add('gelu', L * GELU * BT * config.d_ff)
    ledger.add('residual', 2 * L * BT * C)
    ledger.add('crossentropy', SOFTMAX * BT * V)

    return ledger
