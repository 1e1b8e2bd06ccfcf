"""Heading PID with output clamp and conditional anti-windup."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class PidGains:
    """Gains for the yaw-rate controller. Output units are rad/s."""

    kp: float = 2.5
    ki: float = 0.4
    kd: float = 0.05
    u_max: float = 1.2
    i_max: float = 0.5


@dataclass(frozen=True)
class PidState:
    integral: float = 0.0
    prev_error: float = 0.0
    primed: bool = False


def pid_reset() -> PidState:
    return PidState()


def pid_heading(
    gains: PidGains, st: PidState, error: float, dt: float
) -> tuple[float, PidState]:
    """One controller tick on a heading error (rad). Returns (yaw rate cmd, state).

    The integral only accumulates while the output is unsaturated or the error
    is actively pulling the output back off the clamp; otherwise it is held,
    so a long hard turn does not wind up a correction debt that would overshoot
    once the error finally changes sign.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    deriv = (error - st.prev_error) / dt if st.primed else 0.0
    grown = max(-gains.i_max, min(gains.i_max, st.integral + error * dt))
    u_unsat = gains.kp * error + gains.ki * grown + gains.kd * deriv
    if abs(u_unsat) > gains.u_max and u_unsat * error > 0.0:
        integral = st.integral
    else:
        integral = grown
    u = gains.kp * error + gains.ki * integral + gains.kd * deriv
    u = max(-gains.u_max, min(gains.u_max, u))
    return u, replace(st, integral=integral, prev_error=error, primed=True)
