"""
Dense 2-D buffers with an element type and a layout tag, plus the small
binary matrix file format used by the command-line tools.

File format: 16-byte header (magic 'MAT0', then dtype code, rows, cols as
little-endian uint32) followed by the little-endian row-major payload.
"""

import numpy as np

from .bfloat16 import float_to_bf16_bits, bf16_bits_to_float
from .exceptions import LayoutError, MatrixFormatError, ShapeMismatch

ROW_MAJOR = 'row-major'
COL_MAJOR = 'col-major'

MAGIC = b'MAT0'

# name : (storage dtype, file dtype code)
ELEMENT_TYPES = {'float32': (np.float32, 0),
                 'bfloat16': (np.uint16, 1),
                 'float64': (np.float64, 2)}


def tiled_tag(rows, cols):
    return 'tiled({},{})'.format(rows, cols)


def micro_tiled_tag(rows, cols):
    return 'micro-tiled({},{})'.format(rows, cols)


def is_linear(layout):
    return layout in (ROW_MAJOR, COL_MAJOR)


def encode_values(values, dtype):

    if dtype == 'bfloat16':
        return float_to_bf16_bits(values)
    elif dtype in ELEMENT_TYPES:
        return np.asarray(values, dtype=ELEMENT_TYPES[dtype][0])
    else:
        raise ValueError('unrecognized element type: {}'.format(dtype))


def decode_values(data, dtype):

    if dtype == 'bfloat16':
        return bf16_bits_to_float(data)
    return data


class Matrix(object):

    """
    A rows x cols matrix held as a flat storage buffer.

    bfloat16 elements are stored as uint16 bit patterns (2 bytes each), so
    byte-level layout transforms see the same granules the hardware does.
    """

    def __init__(self, data, rows, cols, dtype='float32', layout=ROW_MAJOR):

        if dtype not in ELEMENT_TYPES:
            raise ValueError('unrecognized element type: {}'.format(dtype))

        data = np.asarray(data).reshape(-1)

        if data.dtype != ELEMENT_TYPES[dtype][0]:
            raise ShapeMismatch('storage dtype {} does not match element type {}'.format(data.dtype, dtype))
        if data.size != rows * cols:
            raise ShapeMismatch('buffer holds {} elements, expected {}x{}'.format(data.size, rows, cols))

        self.data = data
        self.rows = int(rows)
        self.cols = int(cols)
        self.dtype = dtype
        self.layout = layout

    @classmethod
    def from_array(cls, values, dtype='float32', layout=ROW_MAJOR):

        values = np.asarray(values)
        if values.ndim != 2:
            raise ShapeMismatch('expected a 2-D array, got shape {}'.format(values.shape))

        rows, cols = values.shape

        if layout == ROW_MAJOR:
            ordered = np.ascontiguousarray(values)
        elif layout == COL_MAJOR:
            ordered = np.ascontiguousarray(values.T)
        else:
            raise LayoutError('cannot build a {} matrix from a plain array'.format(layout))

        return cls(encode_values(ordered, dtype).reshape(-1), rows, cols, dtype, layout)

    @classmethod
    def zeros(cls, rows, cols, dtype='float32', layout=ROW_MAJOR):
        return cls(np.zeros(rows * cols, dtype=ELEMENT_TYPES[dtype][0]), rows, cols, dtype, layout)

    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def elem_bytes(self):
        return self.data.itemsize

    @property
    def nbytes(self):
        return self.data.nbytes

    def to_array(self):

        """
        Logical values as a rows x cols array (float32, or float64 for
        float64 matrices). Only linear layouts can be read this way.
        """

        values = decode_values(self.data, self.dtype)

        if self.layout == ROW_MAJOR:
            return values.reshape(self.rows, self.cols)
        elif self.layout == COL_MAJOR:
            return values.reshape(self.cols, self.rows).T
        else:
            raise LayoutError('matrix is {}; apply the inverse pattern first'.format(self.layout))

    def retag(self, layout, rows=None, cols=None):
        return Matrix(self.data, self.rows if rows is None else rows,
                      self.cols if cols is None else cols, self.dtype, layout)

    def transposed(self):

        """
        The transpose of a linear-layout matrix, reinterpreting the same
        buffer: a row-major M x K buffer is a column-major K x M matrix.
        """

        if self.layout == ROW_MAJOR:
            return Matrix(self.data, self.cols, self.rows, self.dtype, COL_MAJOR)
        elif self.layout == COL_MAJOR:
            return Matrix(self.data, self.cols, self.rows, self.dtype, ROW_MAJOR)
        else:
            raise LayoutError('cannot reinterpret a {} matrix as its transpose'.format(self.layout))

    def astype(self, dtype):

        if dtype == self.dtype:
            return self
        return Matrix(encode_values(decode_values(self.data, self.dtype), dtype).reshape(-1),
                      self.rows, self.cols, dtype, self.layout)

    def copy(self):
        return Matrix(self.data.copy(), self.rows, self.cols, self.dtype, self.layout)

    def __repr__(self):
        return 'Matrix({}x{}, {}, {})'.format(self.rows, self.cols, self.dtype, self.layout)


def write_matrix(output_file, matrix):

    """
    Writes a matrix in the MAT0 binary format (row-major payload)

    Inputs:
    -------
    output_file : file path
    matrix : Matrix
        Any linear layout; column-major matrices are reordered on write

    """

    code = ELEMENT_TYPES[matrix.dtype][1]
    payload = encode_values(matrix.to_array(), matrix.dtype)
    storage = np.dtype(ELEMENT_TYPES[matrix.dtype][0]).newbyteorder('<')

    with open(output_file, 'wb') as f:
        f.write(MAGIC)
        f.write(np.array([code, matrix.rows, matrix.cols], dtype='<u4').tobytes())
        f.write(np.ascontiguousarray(payload, dtype=storage).tobytes())


def read_matrix(input_file):

    """
    Reads a MAT0 file into a row-major Matrix

    Outputs:
    --------
    matrix : Matrix

    """

    with open(input_file, 'rb') as f:
        raw = f.read()

    if len(raw) < 16 or raw[:4] != MAGIC:
        raise MatrixFormatError('{} is not a MAT0 matrix file'.format(input_file))

    code, rows, cols = np.frombuffer(raw[4:16], dtype='<u4')

    names = [name for name, (_, c) in ELEMENT_TYPES.items() if c == code]
    if not names:
        raise MatrixFormatError('unknown dtype code {} in {}'.format(code, input_file))

    dtype = names[0]
    storage = np.dtype(ELEMENT_TYPES[dtype][0]).newbyteorder('<')
    expected = int(rows) * int(cols) * storage.itemsize

    if len(raw) - 16 != expected:
        raise MatrixFormatError('{} has {} payload bytes, expected {}'.format(input_file, len(raw) - 16, expected))

    data = np.frombuffer(raw[16:], dtype=storage).astype(ELEMENT_TYPES[dtype][0])

    return Matrix(data, int(rows), int(cols), dtype, ROW_MAJOR)
