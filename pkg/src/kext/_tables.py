"""Constant tables shared by the compiled and pure-Python kernels."""

import numpy as np

from . import _dop853_tables as _dop

# 15-point Kronrod nodes on [-1, 1] (non-negative half, descending) and the
# weights of the embedded 7-point Gauss rule (QUADPACK qk15).
GK15_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
GK15_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
GK15_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# full 15-node rule, ascending, with the Gauss weights scattered onto the
# odd-indexed Kronrod nodes (zero elsewhere)
GK15_NODES = np.concatenate([-GK15_XGK[:-1], GK15_XGK[::-1]])
GK15_KWEIGHTS = np.concatenate([GK15_WGK[:-1], GK15_WGK[::-1]])
_g = np.zeros(8)
_g[1:7:2] = GK15_WG[:3]
_g[7] = GK15_WG[3]
GK15_GWEIGHTS = np.concatenate([_g[:-1], _g[::-1]])
del _g

DOP_A = np.ascontiguousarray(_dop.A)
DOP_B = np.ascontiguousarray(_dop.B)
DOP_C = np.ascontiguousarray(_dop.C)
DOP_E3 = np.ascontiguousarray(_dop.E3)
DOP_E5 = np.ascontiguousarray(_dop.E5)
DOP_D = np.ascontiguousarray(_dop.D)
DOP_N_STAGES = _dop.N_STAGES
DOP_N_EXTENDED = _dop.N_STAGES_EXTENDED
DOP_POWER = _dop.INTERPOLATOR_POWER

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
ERROR_EXPONENT = -1.0 / 8.0
