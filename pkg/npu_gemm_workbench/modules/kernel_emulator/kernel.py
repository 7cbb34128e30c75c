"""
Numeric model of the compute-core kernel: bfloat16 inputs, float32
products and float32 accumulation.

Accumulation order is fixed: input-tile pairs outermost (k-outer), then
the 8 products of one VMAC in order (k-inner). Every output element is
therefore the float32 sum a[i,0]*b[0,j] + a[i,1]*b[1,j] + ... taken left
to right, which is what lets the tile path, the full-matrix path and the
simulator agree bit for bit. Products of two bfloat16 values are exact in
float32, so only the additions round.
"""

import numpy as np

from ...common.bfloat16 import bf16_round, bf16_bits_to_float
from ...common.exceptions import ShapeMismatch
from ..core_arch.grid import MICRO_M, MICRO_K, MICRO_N

# output elements per row chunk of the full-matrix evaluation
CHUNK_ELEMENTS = 1 << 18


def as_bf16_values(x):

    """
    float32 values of bfloat16 operands: uint16 arrays are taken as bit
    patterns, anything else is rounded.
    """

    x = np.asarray(x)
    if x.dtype == np.uint16:
        return bf16_bits_to_float(x)
    return bf16_round(x)


def micro_vmac(a, b, acc):

    """
    One VMAC: acc + a @ b for a 4x8 and an 8x4 bfloat16 operand

    Inputs:
    -------
    a : numpy.ndarray (4 x 8)
    b : numpy.ndarray (8 x 4)
    acc : numpy.ndarray (4 x 4, float32)

    Outputs:
    --------
    acc : numpy.ndarray (4 x 4, float32)
        New accumulator value; the input is not modified

    """

    a = as_bf16_values(a)
    b = as_bf16_values(b)
    acc = np.asarray(acc, dtype=np.float32)

    if a.shape != (MICRO_M, MICRO_K) or b.shape != (MICRO_K, MICRO_N) or acc.shape != (MICRO_M, MICRO_N):
        raise ShapeMismatch('VMAC operands must be {}x{}, {}x{} and {}x{}; got {}, {}, {}'.format(
            MICRO_M, MICRO_K, MICRO_K, MICRO_N, MICRO_M, MICRO_N, a.shape, b.shape, acc.shape))

    out = acc.copy()
    for t in range(MICRO_K):
        out += np.outer(a[:, t], b[t, :])

    return out


def untile_micro_values(buffer, rows, cols, micro_rows, micro_cols):

    """
    Micro-tiled (row-of-micro-tiles) flat buffer -> rows x cols array.
    """

    return (np.asarray(buffer).reshape(rows // micro_rows, cols // micro_cols, micro_rows, micro_cols)
            .transpose(0, 2, 1, 3).reshape(rows, cols))


def tile_micro_values(values, micro_rows, micro_cols):

    rows, cols = values.shape
    return (values.reshape(rows // micro_rows, micro_rows, cols // micro_cols, micro_cols)
            .transpose(0, 2, 1, 3).reshape(-1))


def accumulate(a, b, c):

    """
    c += a @ b in place, rank-1 update per k index (float32 throughout).
    """

    scratch = np.empty_like(c)
    for t in range(a.shape[1]):
        np.multiply(a[:, t:t + 1], b[t:t + 1, :], out=scratch)
        np.add(c, scratch, out=c)
    return c


def tile_matmul_accumulate(a_tile, b_tile, c_tile, tile):

    """
    Multiplies one pair of micro-tiled input tiles into a micro-tiled
    output tile

    Inputs:
    -------
    a_tile : numpy.ndarray
        m*k bfloat16 elements in 4x8 micro-tiled order
    b_tile : numpy.ndarray
        k*n bfloat16 elements in 8x4 micro-tiled order
    c_tile : numpy.ndarray
        m*n float32 elements in 4x4 micro-tiled order
    tile : TileShape

    Outputs:
    --------
    c_tile : numpy.ndarray
        c + a @ b, micro-tiled; equal to looping micro_vmac over every
        output micro-tile and k block

    """

    m, k, n = tile

    if np.size(a_tile) != m * k or np.size(b_tile) != k * n or np.size(c_tile) != m * n:
        raise ShapeMismatch('tiles of {}, {}, {} elements do not match a {}x{}x{} tile'.format(
            np.size(a_tile), np.size(b_tile), np.size(c_tile), m, k, n))

    a = untile_micro_values(as_bf16_values(a_tile), m, k, MICRO_M, MICRO_K)
    b = untile_micro_values(as_bf16_values(b_tile), k, n, MICRO_K, MICRO_N)
    c = np.array(untile_micro_values(c_tile, m, n, MICRO_M, MICRO_N), dtype=np.float32)

    return tile_micro_values(accumulate(a, b, c), MICRO_M, MICRO_N)


def matmul_bf16(a, b, k_pad=0):

    """
    Full-matrix GEMM with the kernel's numerics

    Inputs:
    -------
    a : numpy.ndarray (M x K)
    b : numpy.ndarray (K x N)
    k_pad : Int
        Zero columns/rows appended to K, matching the padded hardware run

    Outputs:
    --------
    c : numpy.ndarray (M x N, float32)

    """

    a = as_bf16_values(a)
    b = as_bf16_values(b)

    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeMismatch('cannot multiply {} by {}'.format(a.shape, b.shape))

    if k_pad:
        a = np.pad(a, ((0, 0), (0, k_pad)))
        b = np.pad(b, ((0, k_pad), (0, 0)))

    M, N = a.shape[0], b.shape[1]
    c = np.zeros((M, N), dtype=np.float32)
    chunk = max(1, CHUNK_ELEMENTS // max(N, 1))

    for r0 in range(0, M, chunk):
        accumulate(a[r0:r0 + chunk], b, c[r0:r0 + chunk])

    return c


def evaluate_plan(plan, a, b):

    """
    Untimed functional result of running a plan: the value the simulator
    must reproduce

    Inputs:
    -------
    plan : TilingPlan
    a : numpy.ndarray (M x K)
    b : numpy.ndarray (K x N)
        Logical (unpadded) operands

    Outputs:
    --------
    c : numpy.ndarray (M x N, float32)

    """

    M, K, N = plan.original
    if np.shape(a) != (M, K) or np.shape(b) != (K, N):
        raise ShapeMismatch('operands {} and {} do not match a {}x{}x{} plan'.format(
            np.shape(a), np.shape(b), M, K, N))

    return matmul_bf16(a, b, k_pad=plan.padding.pad_k)
