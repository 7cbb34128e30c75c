"""
The three-level layout paths of the GEMM design.

A: row-major (L3) -> m x k tiles (L2) -> 4 x 8 micro-tiles (L1)
B: col-major (L3) -> k x n tiles (L2, column-major inside) -> 8 x 4 micro-tiles (L1)
C: 4 x 4 micro-tiles (L1) -> m x n tiles (L2) -> row-major (L3)

Tiles and micro-tiles are both laid out in row-of-tiles order. The B
micro-tiling cannot be expressed with 4-byte granules alone: the DMA
moves vertically adjacent bfloat16 pairs and byte_pair_fixup puts each
element in place within a 32-element register window.
"""

import collections
import functools

import numpy as np

from ...common.matrix import ROW_MAJOR, COL_MAJOR, tiled_tag, micro_tiled_tag
from ...common.exceptions import MisalignedGranule, SizeMismatch
from ..core_arch.grid import MICRO_M, MICRO_K, MICRO_N
from .patterns import (AccessPattern, PatternChain, DMA_GRANULE_BYTES, apply, invert,
                       byte_pair_fixup, element_permutation)

BF16_BYTES = 2
F32_BYTES = 4

# operand : (micro rows, micro cols, element bytes)
MICRO_SHAPES = {'A': (MICRO_M, MICRO_K, BF16_BYTES),
                'B': (MICRO_K, MICRO_N, BF16_BYTES),
                'C': (MICRO_M, MICRO_N, F32_BYTES)}

LayoutHop = collections.namedtuple('LayoutHop', ['pattern', 'residue'])


def tile_shape_of(tile, operand):

    """
    (rows, cols) of an operand's tile for TileShape(m, k, n).
    """

    m, k, n = tile
    return {'A': (m, k), 'B': (k, n), 'C': (m, n)}[operand]


def tile_pattern(rows, cols, tile_r, tile_c, elem_bytes, granule_bytes=DMA_GRANULE_BYTES):

    """
    Reads a row-major matrix tile by tile, emitting tiles contiguously in
    row-of-tiles order. For 64x64 tiles of a 128x128 matrix, element (0, 64)
    lands at offset 4096 and element (64, 0) at 8192.

    Inputs:
    -------
    rows, cols : Int
        Matrix shape
    tile_r, tile_c : Int
        Tile shape; must divide the matrix shape
    elem_bytes : Int
        Bytes per element
    granule_bytes : Int
        Bytes moved per address

    Outputs:
    --------
    pattern : AccessPattern

    """

    if rows % tile_r or cols % tile_c:
        raise SizeMismatch('{}x{} tiles do not divide a {}x{} matrix'.format(tile_r, tile_c, rows, cols))
    if (tile_c * elem_bytes) % granule_bytes or (cols * elem_bytes) % granule_bytes:
        raise MisalignedGranule('tile rows of {} bytes are not {}-byte aligned'.format(
            tile_c * elem_bytes, granule_bytes))

    g = tile_c * elem_bytes // granule_bytes
    row_stride = cols * elem_bytes // granule_bytes

    dims = [(rows // tile_r, tile_r * row_stride),
            (cols // tile_c, g),
            (tile_r, row_stride),
            (g, 1)]

    return AccessPattern(dims, granule_bytes, 0, ROW_MAJOR, tiled_tag(tile_r, tile_c))


def tile_transfer_pattern(rows, cols, tile_r, tile_c, elem_bytes, row_block, col_block,
                          granule_bytes=DMA_GRANULE_BYTES):

    """
    Shim DMA descriptor moving one tile out of a row-major matrix.
    """

    if (tile_c * elem_bytes) % granule_bytes or (cols * elem_bytes) % granule_bytes:
        raise MisalignedGranule('tile rows of {} bytes are not {}-byte aligned'.format(
            tile_c * elem_bytes, granule_bytes))

    g = tile_c * elem_bytes // granule_bytes
    row_stride = cols * elem_bytes // granule_bytes
    base = row_block * tile_r * row_stride + col_block * g

    return AccessPattern([(tile_r, row_stride), (g, 1)], granule_bytes, base)


def micro_tile_pattern(tile, operand):

    """
    Within-tile DMA pattern placing every micro-tile contiguously in
    row-of-micro-tiles order

    Inputs:
    -------
    tile : TileShape
    operand : 'A', 'B' or 'C'

    Outputs:
    --------
    pattern : AccessPattern
        Exact for A and C. For B the pattern moves element pairs and
        micro_tile_residue gives the in-register shuffle that completes it.

    """

    if operand not in MICRO_SHAPES:
        raise ValueError('unrecognized operand: {}'.format(operand))

    rows, cols = tile_shape_of(tile, operand)
    mr, mc, eb = MICRO_SHAPES[operand]

    if rows % mr or cols % mc:
        raise MisalignedGranule('{} tile {}x{} is not a whole number of {}x{} micro-tiles'.format(
            operand, rows, cols, mr, mc))

    per = DMA_GRANULE_BYTES // eb

    if operand == 'B':
        # column-major k x n source: a granule is the pair (r, c), (r+1, c)
        col_stride = rows // per
        dims = [(rows // mr, mr // per),
                (cols // mc, mc * col_stride),
                (mr // per, 1),
                (mc, col_stride)]
    else:
        g = mc // per
        row_stride = cols // per
        dims = [(rows // mr, mr * row_stride),
                (cols // mc, g),
                (mr, row_stride),
                (g, 1)]

    return AccessPattern(dims, DMA_GRANULE_BYTES, 0, tiled_tag(rows, cols), micro_tiled_tag(mr, mc))


def micro_tile_residue(operand):

    """
    Element permutation left after micro_tile_pattern, within one
    micro-tile: out[t] = in[residue[t]]. None when the DMA is exact.
    """

    if operand != 'B':
        return None

    mr, mc, _ = MICRO_SHAPES['B']
    rr, cc = np.meshgrid(np.arange(mr), np.arange(mc), indexing='ij')
    # the DMA left element (rr, cc) in granule (rr // 2) * mc + cc, half rr % 2
    return ((rr // 2) * 2 * mc + 2 * cc + rr % 2).reshape(-1)


def micro_tile_oracle(tile, operand):

    """
    Element-level micro-tiling permutation computed by index arithmetic:
    out[j] = src[perm[j]], src in the tile's L2 order.
    """

    rows, cols = tile_shape_of(tile, operand)
    mr, mc, _ = MICRO_SHAPES[operand]

    if operand == 'B':
        index = np.arange(rows * cols).reshape(cols, rows).T
    else:
        index = np.arange(rows * cols).reshape(rows, cols)

    return index.reshape(rows // mr, mr, cols // mc, mc).transpose(0, 2, 1, 3).reshape(-1)


@functools.lru_cache(maxsize=64)
def micro_tile_permutation(tile, operand):

    """
    Element-level permutation actually produced by the DMA pattern
    followed by byte_pair_fixup.
    """

    _, _, eb = MICRO_SHAPES[operand]
    perm = element_permutation(micro_tile_pattern(tile, operand), eb)
    return byte_pair_fixup(perm, micro_tile_residue(operand))


def micro_tile(tile, operand, buffer):

    """
    Rearranges one L2 tile buffer into its L1 micro-tiled order. Same as the
    DMA pattern followed by byte_pair_fixup, through the cached
    element permutation.
    """

    return np.asarray(buffer)[micro_tile_permutation(tile, operand)]


def untile_micro(tile, operand, buffer):

    """
    Inverse of micro_tile: micro-tiled L1 order back to the L2 tile order.
    """

    out = np.empty_like(buffer)
    out[micro_tile_permutation(tile, operand)] = buffer
    return out


def _per_tile_chain(tile, operand, n_tiles, inverse=False):

    pattern = micro_tile_pattern(tile, operand)
    if inverse:
        pattern = invert(pattern)
    span = pattern.size
    return PatternChain([pattern.rebased(t * span) for t in range(n_tiles)],
                        pattern.src_tag, pattern.dst_tag)


def layout_path(operand, rows, cols, tile):

    """
    The full L3 <-> L1 path of one operand as a list of hops

    Inputs:
    -------
    operand : 'A', 'B' or 'C'
    rows, cols : Int
        Logical matrix shape
    tile : TileShape

    Outputs:
    --------
    hops : list of LayoutHop
        Each hop is a DMA pattern (or chain) plus an optional in-register
        residue; the A and B paths run L3 -> L1, the C path L1 -> L3

    """

    tr, tc = tile_shape_of(tile, operand)
    n_tiles = (rows // tr) * (cols // tc) if rows % tr == 0 and cols % tc == 0 else None

    if n_tiles is None:
        raise SizeMismatch('{}x{} tiles do not divide a {}x{} {} matrix'.format(tr, tc, rows, cols, operand))

    if operand == 'A':
        return [LayoutHop(tile_pattern(rows, cols, tr, tc, BF16_BYTES), None),
                LayoutHop(_per_tile_chain(tile, 'A', n_tiles), None)]

    elif operand == 'B':
        # a column-major k x n matrix is a row-major n x k buffer
        first = tile_pattern(cols, rows, tc, tr, BF16_BYTES)
        first.src_tag = COL_MAJOR
        first.dst_tag = tiled_tag(tr, tc)
        return [LayoutHop(first, None),
                LayoutHop(_per_tile_chain(tile, 'B', n_tiles), micro_tile_residue('B'))]

    elif operand == 'C':
        return [LayoutHop(_per_tile_chain(tile, 'C', n_tiles, inverse=True), None),
                LayoutHop(invert(tile_pattern(rows, cols, tr, tc, F32_BYTES)), None)]

    raise ValueError('unrecognized operand: {}'.format(operand))


def run_path(hops, matrix):

    """
    Applies each hop of a layout path to a Matrix in turn.
    """

    for hop in hops:
        matrix = apply(hop.pattern, matrix)
        if hop.residue is not None:
            matrix.data = byte_pair_fixup(matrix.data, hop.residue)
    return matrix


def path_permutation(hops, n_elements, elem_bytes):

    """
    Element-level permutation of a whole path: out[j] = src[perm[j]].
    """

    perm = np.arange(n_elements)
    for hop in hops:
        perm = perm[element_permutation(hop.pattern, elem_bytes)]
        if hop.residue is not None:
            perm = byte_pair_fixup(perm, hop.residue)
    return perm


class TileWindow(object):

    """
    One shim descriptor re-based for every tile it moves between a
    row-major matrix buffer and a contiguous tile buffer.
    """

    def __init__(self, rows, cols, tile_r, tile_c, elem_bytes):

        self.pattern = tile_transfer_pattern(rows, cols, tile_r, tile_c, elem_bytes, 0, 0)
        self.per = self.pattern.elem_bytes // elem_bytes
        self.tile_r = tile_r
        self.row_stride = cols * elem_bytes // self.pattern.elem_bytes
        self.g = tile_c * elem_bytes // self.pattern.elem_bytes

    def base(self, row_block, col_block):
        return row_block * self.tile_r * self.row_stride + col_block * self.g

    def read(self, data, row_block, col_block):
        index = self.pattern.offsets() + self.base(row_block, col_block)
        return data.reshape(-1, self.per)[index].reshape(-1)

    def write(self, data, row_block, col_block, values):
        index = self.pattern.offsets() + self.base(row_block, col_block)
        data.reshape(-1, self.per)[index] = np.asarray(values).reshape(-1, self.per)
