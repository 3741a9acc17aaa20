import sys

# binary64 environment
OMEGA = sys.float_info.max
SQRT_OMEGA = 1.34078079299425956e154  # fl(sqrt(OMEGA)), exactly representable
MU_CHECK = 5e-324  # smallest positive subnormal
EPS = 2.0 ** -53
ETA = 1020.0  # (DBL_MAX_EXP - 1) - 3
ETA_HAT = 1023.0  # largest exponent of a finite double
P_BITS = 52

DEFAULT_LANES = 8

# Lane permutations for splitting interleaved complex data into (re, im)
# halves and back, listed from the highest lane down.
SPLIT_PERMUTATION = (7, 5, 3, 1, 6, 4, 2, 0)
MERGE_PERMUTATION = (7, 3, 6, 2, 5, 1, 4, 0)

# Bitonic network for s = 8: (permutation listed from the highest lane down,
# bitmask of the lanes that keep the maximum).
BITONIC8_STAGES = (
    ((6, 7, 4, 5, 2, 3, 0, 1), 0xAA),
    ((4, 5, 6, 7, 0, 1, 2, 3), 0xCC),
    ((6, 7, 4, 5, 2, 3, 0, 1), 0xAA),
    ((0, 1, 2, 3, 4, 5, 6, 7), 0xF0),
    ((5, 4, 7, 6, 1, 0, 3, 2), 0xCC),
    ((6, 7, 4, 5, 2, 3, 0, 1), 0xAA),
)

# Relative error bound multipliers of the 2x2 kernels, in units of EPS.
ALPHA_BOUND = 4.000001
TAN_PHI_BOUND_REAL = 5.500001
TAN_PHI_BOUND_COMPLEX = 11.500004
COS_PHI_BOUND_REAL = 8.000002
COS_PHI_BOUND_COMPLEX = 14.000006
EPS_TILDE = 3.000001  # complex fma
EPS_TILDE_ROT = 5.656856  # complex rotation under the dominance condition
HYPOT_BOUND_LOW = 3.0  # 1 - fl(hypot)/hypot, naive hypot on normal inputs
HYPOT_BOUND_HIGH = 3.000001  # fl(hypot)/hypot - 1

FORMAT_VERSION = 1
MATRIX_MAGIC = b"SJMX"
BATCH_MAGIC = b"SJB2"
EVD_MAGIC = b"SJE2"
