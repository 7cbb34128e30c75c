import numpy as np

# bfloat16 values are carried as the upper 16 bits of an IEEE float32

BF16_POS_ZERO = 0x0000
BF16_NEG_ZERO = 0x8000
BF16_INF_POS = 0x7F80
BF16_INF_NEG = 0xFF80
BF16_QNAN = 0x7FC0


def float_to_bf16_bits(x):

    """
    Rounds float32 values to bfloat16 (round to nearest, ties to even)

    Inputs:
    -------
    x : numpy.ndarray or scalar
        Values to convert (cast to float32 first)

    Outputs:
    --------
    bits : numpy.ndarray (uint16)
        bfloat16 bit patterns, same shape as x

    """

    x = np.asarray(x, dtype=np.float32)
    u32 = np.ascontiguousarray(x).reshape(-1).view(np.uint32)

    lsb = (u32 >> np.uint32(16)) & np.uint32(1)
    bits = ((u32 + np.uint32(0x7FFF) + lsb) >> np.uint32(16)).astype(np.uint16)

    nan = np.isnan(x.reshape(-1))
    if np.any(nan):
        # keep the sign, force a quiet NaN
        bits[nan] = ((u32[nan] >> np.uint32(16)) | np.uint32(0x0040)).astype(np.uint16)

    return bits.reshape(x.shape)


def bf16_bits_to_float(bits):

    bits = np.asarray(bits, dtype=np.uint16)
    u32 = np.ascontiguousarray(bits).reshape(-1).astype(np.uint32) << np.uint32(16)
    return u32.view(np.float32).reshape(bits.shape)


def bf16_round(x):

    """
    Returns float32 values that are exactly representable in bfloat16,
    using round-to-nearest-even on the 8-bit significand. NaN propagates,
    infinities and signed zeros are preserved.
    """

    return bf16_bits_to_float(float_to_bf16_bits(x))
