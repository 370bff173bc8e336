"""Built-in demo systems, one per multiplier class.

Both are 2-state, 4-channel plants whose stability LMI is infeasible, so the
dual side produces an instability witness. The reference directions below are
the witness signals an independent run produced for these systems; they are
used as a soft diagnostic only, since the dual solution need not be unique.
"""

import logging

import numpy as np

from lurecert.lmi import DD, DHD, StateSpace

DEMO_DHD = StateSpace(
    A=np.array([[-2.11, 0.94], [0.77, -0.46]]),
    B=np.array([[0.28, -0.85, -0.94, -0.71], [-0.82, -0.64, 0.45, 0.27]]),
    C=np.array([[0.58, -0.39], [0.13, -0.36], [-0.25, 0.57], [0.64, 0.01]]),
    D=np.array(
        [
            [-0.24, -0.28, 0.32, -0.04],
            [0.23, -0.42, 0.24, 0.29],
            [-0.34, -0.43, 0.26, -0.08],
            [0.42, 0.27, 0.46, 0.45],
        ]
    ),
)

# The second demo's feedthrough is known not to be a contraction; silence the
# construction-time warning so merely importing this module stays quiet.
_lmi_log = logging.getLogger("lurecert.lmi")
_prev_disabled = _lmi_log.disabled
_lmi_log.disabled = True
DEMO_DD = StateSpace(
    A=np.array([[-0.73, -0.99], [-0.21, -0.44]]),
    B=np.array([[-1.00, -0.72, -0.65, 0.20], [-0.62, -0.46, -0.72, 0.80]]),
    C=np.array([[0.88, 0.05], [-0.56, -0.47], [-0.03, -0.86], [-0.25, -0.13]]),
    D=np.array(
        [
            [-0.65, 0.92, 0.41, 0.54],
            [-0.95, 0.52, 0.29, -0.54],
            [0.91, -0.99, 0.10, -0.26],
            [-0.14, 0.36, -0.56, 0.78],
        ]
    ),
)
_lmi_log.disabled = _prev_disabled

DEMO_SYSTEMS = {DHD: DEMO_DHD, DD: DEMO_DD}

#: witness directions reported by an independent run on the demo systems;
#: compared by direction cosine as a warning-level diagnostic only.
REFERENCE_DIRECTIONS = {
    DHD: {
        "h1": np.array([0.7321, 1.5697]),
        "z_star": np.array([-0.1277, -0.4363, 0.7985, 0.4179]),
        "w_star": np.array([-0.0907, -0.1234, 0.0111, 0.0000]),
    },
    DD: {
        "h1": np.array([-1.2876, 1.1584]),
        "z_star": np.array([-0.9880, 0.1900, -1.0996, 0.3368]),
        "w_star": np.array([-0.1118, 0.0000, -0.1118, 0.1118]),
    },
}
