"""
Charging a small battery with a Gaussian cavity pulse and fitting N^alpha.

Runs the driven Tavis-Cummings and Dicke models for N = 2..8 under weak
losses, prints the stored energy, charging time and power, and fits the
scaling exponent of each.  A few minutes on one core.

    python demos/driven_scaling.py
"""
from qbattery.model import DissipationConfig, DriveConfig, InitialStateSpec, ModelConfig
from qbattery.propagator import AdaptiveFock, SimulationConfig
from qbattery.scaling import fit_power_law
from qbattery.simulate import simulate

N_LIST = (2, 4, 6, 8)
RATES = DissipationConfig(kappa=1e-3, gamma_minus=1e-3, gamma_z=1e-3)
SIM = SimulationConfig(fock_policy=AdaptiveFock(start=16))

for interaction in ("TavisCummings", "Dicke"):
    model = ModelConfig(g=0.1, interaction=interaction, drive=DriveConfig())
    rows = []
    for n in N_LIST:
        res = simulate(n, model, RATES, InitialStateSpec("Driven"), SIM)
        s = res.summary
        rows.append((n, s.e_max, s.tau, s.p_max))
        print(
            f"{interaction:13s} N={n}: E_max={s.e_max:.4f} tau={s.tau:.2f} P={s.p_max:.4f} "
            f"(Fock cutoff {res.space.fock_cutoff}, top level {res.max_top_fock_pop:.1e})"
        )
    for k, name in ((1, "e_max"), (2, "tau"), (3, "p_max")):
        fit = fit_power_law([(r[0], r[k]) for r in rows], observable=name)
        print(f"{interaction:13s} alpha_{name} = {fit.alpha:+.3f} (R^2 {fit.r_squared:.4f})")
