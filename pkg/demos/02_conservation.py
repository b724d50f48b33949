# %% [markdown]
# # Conservation under Strang splitting
#
# The nonlinear substep is an exact phase rotation, so mass is conserved to
# round-off. Energy drifts at second order in the time step.

# %%
from pathlib import Path

from resonant_nls.config import load_config
from resonant_nls.dynamics import StepperConfig, evolve
from resonant_nls.state import energy, mass

cfg = load_config(Path(__file__).parent / "configs" / "coupled_modes.cfg")
u0 = cfg.initial_state()
print("initial mass", mass(u0), "energy", energy(u0))

# %%
drifts = {}
for dt in (2e-3, 1e-3, 5e-4):
    u, _ = evolve(u0, StepperConfig(dt=dt, T=cfg["stepper.T"], snapshot_stride=10**6),
                  diagnostics=False)
    drifts[dt] = abs(energy(u) - energy(u0)) / energy(u0)
    print(f"dt={dt:g}: mass drift {abs(mass(u) - mass(u0)) / mass(u0):.2e}, energy drift {drifts[dt]:.2e}")

# %%
print("energy drift ratios:", drifts[2e-3] / drifts[1e-3], drifts[1e-3] / drifts[5e-4])
