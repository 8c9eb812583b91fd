"""Independent reference computations shared by the tests (no kgspectral imports)."""

import numpy as np
from scipy.integrate import solve_ivp


def scalar_ode_oracle(u0, u1, t, b, m_sq, lambda_sq, rtol=1e-13):
    """Integrate u'' + lambda^2 u + b u' + m^2 u = 0 with DOP853; complex data allowed.

    The absolute tolerance is negligible so that strongly damped solutions
    (|u| ~ 1e-13 by t = 20) are still resolved to relative accuracy.
    """
    if t == 0:
        return complex(u0), complex(u1)
    k = lambda_sq + m_sq

    def rhs(_, y):
        return [y[1], -k * y[0] - b * y[1], y[3], -k * y[2] - b * y[3]]

    y0 = [np.real(u0), np.real(u1), np.imag(u0), np.imag(u1)]
    sol = solve_ivp(rhs, (0, t), y0, method="DOP853", rtol=rtol, atol=1e-30 * (abs(u0) + abs(u1) + 1e-300))
    y = sol.y[:, -1]
    return complex(y[0], y[2]), complex(y[1], y[3])


def vector_ode_oracle(u0, u1, times, b, m_sq, lambda_sq, rtol=1e-12):
    """Method of lines on the whole coefficient vector; returns (u, ut) at ``times``."""
    n = len(u0)
    k = np.asarray(lambda_sq) + m_sq

    def rhs(_, y):
        u, v = y[:n], y[n:]
        return np.concatenate([v, -k * u - b * v])

    y0 = np.concatenate([u0, u1]).astype(complex)
    sol = solve_ivp(rhs, (0, times[-1]), y0, method="DOP853", t_eval=times, rtol=rtol, atol=1e-14)
    return sol.y[:n].T, sol.y[n:].T
