"""
Strided access patterns: the n-D DMA descriptor form.

A pattern reads a flat source buffer one granule at a time. dims lists
(extent, stride) pairs, outermost first, strides in granules; the i-th
granule written is read from base_offset + sum(d_j * stride_j). DMA
patterns move 4-byte granules; finer placement is left to
byte_pair_fixup.
"""

import numpy as np

from ...common.matrix import Matrix
from ...common.exceptions import MisalignedGranule, SizeMismatch, NotInvertible, LayoutError

MAX_DIMS = 4
DMA_GRANULE_BYTES = 4


class AccessPattern(object):

    def __init__(self, dims, elem_bytes=DMA_GRANULE_BYTES, base_offset=0, src_tag=None, dst_tag=None):

        dims = [(int(e), int(s)) for e, s in dims]

        if len(dims) > MAX_DIMS:
            raise ValueError('{} dimensions given; descriptors hold at most {} (chain patterns instead)'.format(
                len(dims), MAX_DIMS))
        if any(e < 1 for e, _ in dims):
            raise ValueError('extents must be >= 1: {}'.format(dims))

        self.dims = dims
        self.elem_bytes = int(elem_bytes)
        self.base_offset = int(base_offset)
        self.src_tag = src_tag
        self.dst_tag = dst_tag
        self._offsets = None

    @property
    def size(self):
        return int(np.prod([e for e, _ in self.dims])) if self.dims else 1

    @property
    def nbytes(self):
        return self.size * self.elem_bytes

    @property
    def is_dma(self):
        return self.elem_bytes >= DMA_GRANULE_BYTES and self.elem_bytes % DMA_GRANULE_BYTES == 0

    def offsets(self):

        if self._offsets is None:
            idx = np.array([self.base_offset], dtype=np.int64)
            for extent, stride in self.dims:
                idx = (idx[:, None] + np.arange(extent, dtype=np.int64)[None, :] * stride).reshape(-1)
            self._offsets = idx
        return self._offsets

    def rebased(self, base_offset):
        return AccessPattern(self.dims, self.elem_bytes, base_offset, self.src_tag, self.dst_tag)

    def __repr__(self):
        return 'AccessPattern(dims={}, elem_bytes={}, base_offset={})'.format(self.dims, self.elem_bytes, self.base_offset)


class PatternChain(object):

    """
    Descriptors executed back to back; the output is the concatenation of
    each descriptor's output.
    """

    def __init__(self, patterns, src_tag=None, dst_tag=None):

        if not patterns:
            raise ValueError('empty pattern chain')
        if len(set(p.elem_bytes for p in patterns)) != 1:
            raise MisalignedGranule('chained descriptors must share one granule size')

        self.patterns = list(patterns)
        self.elem_bytes = patterns[0].elem_bytes
        self.src_tag = src_tag if src_tag is not None else patterns[0].src_tag
        self.dst_tag = dst_tag if dst_tag is not None else patterns[0].dst_tag
        self._offsets = None

    @property
    def size(self):
        return sum(p.size for p in self.patterns)

    @property
    def nbytes(self):
        return self.size * self.elem_bytes

    @property
    def is_dma(self):
        return all(p.is_dma for p in self.patterns)

    def offsets(self):

        if self._offsets is None:
            self._offsets = np.concatenate([p.offsets() for p in self.patterns])
        return self._offsets


def is_permutation(pattern):

    offsets = pattern.offsets()
    return bool(np.array_equal(np.sort(offsets), np.arange(pattern.size)))


def granules_per_element_block(pattern, element_bytes):

    if pattern.elem_bytes % element_bytes:
        raise MisalignedGranule('granule of {} bytes does not hold whole {}-byte elements'.format(
            pattern.elem_bytes, element_bytes))
    return pattern.elem_bytes // element_bytes


def element_permutation(pattern, element_bytes):

    """
    Expands a granule pattern to element level: out[j] = src[perm[j]].
    """

    per = granules_per_element_block(pattern, element_bytes)
    offsets = pattern.offsets()
    return (offsets[:, None] * per + np.arange(per)[None, :]).reshape(-1)


def gather(pattern, data):

    """
    Reads a flat storage buffer through a pattern (no size check).
    """

    per = granules_per_element_block(pattern, data.itemsize)
    return data.reshape(-1, per)[pattern.offsets()].reshape(-1)


def scatter(pattern, data, values):

    """
    Writes values to the granules a pattern addresses, in pattern order.
    """

    per = granules_per_element_block(pattern, data.itemsize)
    data.reshape(-1, per)[pattern.offsets()] = values.reshape(-1, per)


def apply(pattern, src, layout=None):

    """
    Applies a permutation pattern to a whole matrix buffer

    Inputs:
    -------
    pattern : AccessPattern or PatternChain
    src : Matrix
        Its layout tag must match the pattern's declared source tag
    layout : String (optional)
        Tag for the result; defaults to the pattern's destination tag

    Outputs:
    --------
    out : Matrix

    """

    if pattern.src_tag is not None and src.layout != pattern.src_tag:
        raise LayoutError('pattern expects a {} source, got {}'.format(pattern.src_tag, src.layout))

    per = granules_per_element_block(pattern, src.elem_bytes)
    if pattern.size * per != src.data.size:
        raise SizeMismatch('pattern moves {} elements, matrix holds {}'.format(pattern.size * per, src.data.size))

    out = gather(pattern, src.data)
    tag = layout if layout is not None else (pattern.dst_tag if pattern.dst_tag is not None else src.layout)

    return Matrix(out, src.rows, src.cols, src.dtype, tag)


def _invert_strided(pattern):

    if pattern.base_offset != 0:
        raise NotInvertible('pattern with base offset {} is not a permutation of its buffer'.format(pattern.base_offset))

    dims = pattern.dims
    weights = []
    w = 1
    for extent, _ in reversed(dims):
        weights.append(w)
        w *= extent
    weights = list(reversed(weights))

    live = [(e, s, wt) for (e, s), wt in zip(dims, weights) if e > 1]

    if any(s == 0 for _, s, _ in live):
        raise NotInvertible('pattern repeats granules (zero stride)')

    expected = 1
    for extent, stride, _ in sorted(live, key=lambda d: d[1]):
        if stride != expected:
            raise NotInvertible('strides {} do not form a permutation'.format(dims))
        expected *= extent

    inverse = [(e, wt) for e, s, wt in sorted(live, key=lambda d: -d[1])]

    return AccessPattern(inverse, pattern.elem_bytes, 0, pattern.dst_tag, pattern.src_tag)


def invert(pattern):

    """
    Inverse of a permutation pattern, so that
    apply(invert(p), apply(p, x)) == x.

    A chain whose descriptors each read one contiguous block inverts to a
    chain of inverted descriptors.
    """

    if isinstance(pattern, AccessPattern):
        return _invert_strided(pattern)

    blocks = []
    out_start = 0
    for p in pattern.patterns:
        offsets = p.offsets()
        lo = int(offsets.min())
        if int(offsets.max()) - lo + 1 != p.size:
            raise NotInvertible('chained descriptor does not read a contiguous block')
        inverse = _invert_strided(p.rebased(p.base_offset - lo))
        blocks.append((lo, inverse.rebased(out_start)))
        out_start += p.size

    blocks.sort(key=lambda b: b[0])
    expected = 0
    for lo, inverse in blocks:
        if lo != expected:
            raise NotInvertible('chained descriptors do not cover their source exactly once')
        expected += inverse.size

    return PatternChain([inverse for _, inverse in blocks], pattern.dst_tag, pattern.src_tag)


def byte_pair_fixup(buffer, pattern_residue=None):

    """
    In-register shuffle finishing a 4-byte-granule DMA whose elements are
    2 bytes wide

    Inputs:
    -------
    buffer : numpy.ndarray (uint16)
        Data as placed by the DMA pattern
    pattern_residue : numpy.ndarray (optional)
        Element permutation within one register window: out[t] = in[residue[t]].
        None (or an identity residue) leaves the buffer untouched.

    Outputs:
    --------
    buffer : numpy.ndarray

    """

    if pattern_residue is None:
        return buffer

    residue = np.asarray(pattern_residue)
    if np.array_equal(residue, np.arange(residue.size)):
        return buffer

    if buffer.size % residue.size:
        raise SizeMismatch('buffer of {} elements is not a whole number of {}-element windows'.format(
            buffer.size, residue.size))

    return buffer.reshape(-1, residue.size)[:, residue].reshape(-1)
