"""
Single-photon exchange between a cavity and N qubits.

One qubit swaps its excitation with the cavity as sin^2(g t); N qubits
sharing one photon do it sqrt(N) times faster.  The script checks both and
fits the exponent of the first transfer time against N.

    python demos/rabi_and_collective_speedup.py
"""
import math

import numpy as np

from qbattery.model import DissipationConfig, InitialStateSpec, ModelConfig
from qbattery.observables import first_peak_time
from qbattery.propagator import FixedFock, SimulationConfig
from qbattery.scaling import fit_power_law
from qbattery.simulate import simulate

G = 0.1
SIM = SimulationConfig(fock_policy=FixedFock(2))


def transfer_curve(n_qubits):
    res = simulate(
        n_qubits,
        ModelConfig(g=G, interaction="TavisCummings"),
        DissipationConfig(),
        InitialStateSpec("Undriven", cavity_fock=1),
        SIM,
    )
    return res.series.times, res.series.e_qub


t, e = transfer_curve(1)
print(f"N=1: max |E_q - sin^2(gt)| = {np.max(np.abs(e - np.sin(G * t) ** 2)):.2e}")
print(f"N=1: first full transfer at t = {first_peak_time(t, e):.3f} (pi/2g = {math.pi / (2 * G):.3f})")

points = []
for n in (1, 2, 4, 8, 16):
    t, e = transfer_curve(n)
    points.append((n, first_peak_time(t, e)))
    print(f"N={n:2d}: first peak at t = {points[-1][1]:.3f}")

fit = fit_power_law(points, observable="first_peak_time")
print(f"fitted exponent {fit.alpha:.3f} (collective sqrt(N) law: -0.5)")
