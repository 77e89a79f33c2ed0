"""Pure-Python closed-loop simulation kernel.

Reference implementation of the hot loop; ``_simcore.pyx`` mirrors it line for
line. Both plant and reference model are written in the common form

    x1' = x2
    x2' = (g*u - h2*x2 - h1*x1) / den

and advanced with classical RK4 under a zero-order hold on their inputs.
"""
import math

import numpy as np

NCOLS = 11  # t, x1p, x2p, x1m, x2m, e_x, e_theta, u, kp, ki, kd


def _rk4(x1, x2, u, g, h1, h2, den, dt):
    half = 0.5 * dt
    a1 = x2
    b1 = (g * u - h2 * x2 - h1 * x1) / den
    y1 = x1 + half * a1
    y2 = x2 + half * b1
    a2 = y2
    b2 = (g * u - h2 * y2 - h1 * y1) / den
    y1 = x1 + half * a2
    y2 = x2 + half * b2
    a3 = y2
    b3 = (g * u - h2 * y2 - h1 * y1) / den
    y1 = x1 + dt * a3
    y2 = x2 + dt * b3
    a4 = y2
    b4 = (g * u - h2 * y2 - h1 * y1) / den
    sixth = dt / 6.0
    return (
        x1 + sixth * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
        x2 + sixth * (b1 + 2.0 * b2 + 2.0 * b3 + b4),
    )


def simulate(plant, model, mode, gains, adapt, pq, R, dt, n_steps, limit, record):
    """Run one fixed-step closed-loop simulation.

    plant, model: (g, h1, h2, den) coefficient tuples.
    mode: 0 for PID, 1 for the adaptive (kp, kd) law.
    gains: (kp, ki, kd); for mode 1 these are the initial gains.
    adapt: (a21, a22, p21, p22, inv_gain) used only in mode 1.
    pq: (p11, p12, p22) weighting the accumulated tracking cost.
    R: setpoint per sample, length n_steps + 1.

    Returns (log, rows, diverged, cost) where ``cost`` is the left-rectangle
    sum of e'Pe*dt over the completed steps and ``log`` is None unless
    ``record`` is set.
    """
    gp, h1p, h2p, denp = plant
    gm, h1m, h2m, denm = model
    kp, ki, kd = gains
    kp0, kd0 = kp, kd
    a21, a22, p21, p22a, inv_gain = adapt
    q11, q12, q22 = pq

    out = np.zeros((n_steps + 1, NCOLS)) if record else None
    x1p = x2p = x1m = x2m = 0.0
    integ = 0.0
    acc_p = acc_d = 0.0
    eps_prev = R[0] - x1p
    cost = 0.0
    diverged = False
    rows = 0

    for k in range(n_steps + 1):
        r = R[k]
        ex = x1p - x1m
        eth = x2p - x2m
        eps = r - x1p
        if mode == 0:
            integ += eps * dt
            deriv = (eps - eps_prev) / dt
            u = kp * eps + ki * integ + kd * deriv
        else:
            u = kp * eps - kd * x2p
        eps_prev = eps
        if record:
            row = out[k]
            row[0] = k * dt
            row[1] = x1p
            row[2] = x2p
            row[3] = x1m
            row[4] = x2m
            row[5] = ex
            row[6] = eth
            row[7] = u
            row[8] = kp
            row[9] = ki if mode == 0 else 0.0
            row[10] = kd
        rows = k + 1
        if k == n_steps:
            break
        cost += (q11 * ex * ex + 2.0 * q12 * ex * eth + q22 * eth * eth) * dt

        if mode == 1:
            s = p21 * ex + p22a * eth
            acc_p += s * eps * dt
            acc_d += s * x2p * dt
            kp = kp0 + (inv_gain / a21) * acc_p
            kd = kd0 - (inv_gain / a22) * acc_d

        x1p, x2p = _rk4(x1p, x2p, u, gp, h1p, h2p, denp, dt)
        x1m, x2m = _rk4(x1m, x2m, r - x1m, gm, h1m, h2m, denm, dt)
        if not (
            abs(x1p) <= limit and abs(x2p) <= limit
            and abs(x1m) <= limit and abs(x2m) <= limit
            and math.isfinite(kp) and math.isfinite(kd)
        ):
            diverged = True
            break

    if record:
        out = out[:rows]
    return out, rows, diverged, cost
