"""Deterministic channel power gains.

UAV links follow the line-of-sight free-space model
``beta0 / (||q - w||^2 + H^2)``; ground links between an uplink and a
downlink user use the expected Rayleigh gain ``beta0 * d^-alpha`` (unit-mean
fading), with ``d`` clamped at :data:`~fduav.scenario.D_MIN`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import D_MIN, Scenario


def los_gain(q, w, H, beta0):
    """Air-to-ground LoS power gain between UAV position ``q`` and ground point ``w``.

    Broadcasts over leading dimensions of ``q`` and ``w`` (last axis = x, y).
    """
    q = np.asarray(q, dtype=float)
    w = np.asarray(w, dtype=float)
    d2 = np.sum((q - w) ** 2, axis=-1)
    out = beta0 / (d2 + H * H)
    return float(out) if np.ndim(out) == 0 else out


def cross_gain(w_u, w_d, beta0, alpha):
    """Expected ground-to-ground gain from an uplink user to a downlink user."""
    d = np.linalg.norm(np.asarray(w_u, dtype=float) - np.asarray(w_d, dtype=float), axis=-1)
    out = beta0 * np.maximum(d, D_MIN) ** (-alpha)
    return float(out) if np.ndim(out) == 0 else out


def cross_gain_matrix(scenario: Scenario) -> np.ndarray:
    """``(K_U, K_D)`` matrix of expected cross-link gains."""
    return cross_gain(
        scenario.uplink_users[:, None, :],
        scenario.downlink_users[None, :, :],
        scenario.beta0,
        scenario.pathloss_alpha,
    ).reshape(scenario.K_U, scenario.K_D)


@dataclass(frozen=True)
class GainTables:
    """Per-slot channel gains for one trajectory.

    Attributes
    ----------
    h_bj : ndarray, shape (K_D, N)
        UAV to downlink user gains.
    h_ib : ndarray, shape (K_U, N)
        Uplink user to UAV gains.
    g_bar : ndarray, shape (K_U, K_D)
        Expected cross-link gains (independent of the trajectory).
    """

    h_bj: np.ndarray
    h_ib: np.ndarray
    g_bar: np.ndarray


def slot_positions(trajectory) -> np.ndarray:
    """UAV positions used by slots 1..N, i.e. waypoints ``q[1:]``."""
    return np.asarray(trajectory, dtype=float)[1:]


def build_gain_tables(scenario: Scenario, trajectory, cross_interference: bool = True) -> GainTables:
    """Tabulate all gains for ``trajectory`` (shape ``(N + 1, 2)``).

    Slot ``n`` (1-based) uses waypoint ``q[n]``. With
    ``cross_interference=False`` the cross-link gains are zeroed, which is how
    the interference-free schemes are evaluated.
    """
    q = slot_positions(trajectory)
    H, b0 = scenario.altitude_H, scenario.beta0
    h_bj = los_gain(q[None, :, :], scenario.downlink_users[:, None, :], H, b0)
    h_ib = los_gain(q[None, :, :], scenario.uplink_users[:, None, :], H, b0)
    g_bar = cross_gain_matrix(scenario)
    if not cross_interference:
        g_bar = np.zeros_like(g_bar)
    return GainTables(
        h_bj=np.asarray(h_bj).reshape(scenario.K_D, -1),
        h_ib=np.asarray(h_ib).reshape(scenario.K_U, -1),
        g_bar=g_bar,
    )
