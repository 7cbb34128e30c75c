import numpy as np
import psutil
from joblib import Parallel, delayed

from ...common.matrix import Matrix, ROW_MAJOR, COL_MAJOR
from ...common.exceptions import LayoutError

# below this many elements a single thread is faster
PARALLEL_THRESHOLD = 1 << 20


def default_workers():
    return psutil.cpu_count(logical=False) or 1


def _copy_rows(src, dst, r0, r1):
    dst[r0:r1] = src[:, r0:r1].T


def transpose_copy(src, n_jobs=None):

    """
    Copies a matrix into the other linear layout: column-major to
    row-major, or row-major to column-major. The logical matrix is
    unchanged.

    Inputs:
    -------
    src : Matrix
        Row-major or column-major
    n_jobs : Int (optional)
        Worker threads; physical core count by default

    Outputs:
    --------
    dst : Matrix
        Bitwise identical for any number of workers

    """

    if src.layout == ROW_MAJOR:
        stored, layout = (src.rows, src.cols), COL_MAJOR
    elif src.layout == COL_MAJOR:
        stored, layout = (src.cols, src.rows), ROW_MAJOR
    else:
        raise LayoutError('transpose_copy needs a linear layout, got {}'.format(src.layout))

    buffer = src.data.reshape(stored)
    out = np.empty((stored[1], stored[0]), dtype=src.data.dtype)

    n_jobs = default_workers() if n_jobs is None else n_jobs

    if n_jobs <= 1 or src.data.size < PARALLEL_THRESHOLD:
        out[:] = buffer.T
    else:
        bounds = np.linspace(0, out.shape[0], n_jobs + 1).astype(int)
        Parallel(n_jobs=n_jobs, backend='threading')(
            delayed(_copy_rows)(buffer, out, r0, r1) for r0, r1 in zip(bounds[:-1], bounds[1:]) if r1 > r0)

    return Matrix(out.reshape(-1), src.rows, src.cols, src.dtype, layout)
