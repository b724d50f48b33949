# %% [markdown]
# # The interaction Morawetz quantity
#
# ``M(t)`` pairs the density with the momentum through the kernel ``z/|z|``.
# It is bounded by ``mass * ||w|| * ||grad w||`` and its time derivative
# controls the half-derivative density norm.

# %%
from pathlib import Path

from resonant_nls.config import load_config
from resonant_nls.diagnostics import (interaction_morawetz, morawetz_ceiling, morawetz_lhs,
                                      morawetz_lhs_integrand)
from resonant_nls.dynamics import Trajectory, evolve

cfg = load_config(Path(__file__).parent / "configs" / "boosted_pulse.cfg")
traj = Trajectory()
evolve(cfg.initial_state(), cfg.stepper, [traj], diagnostics=False)

# %%
for t, u in list(zip(traj.times, traj.states))[::5]:
    print(f"t={t:.2f}  M={interaction_morawetz(u):+.4f}  ceiling={morawetz_ceiling(u):.4f}"
          f"  integrand={morawetz_lhs_integrand(u):.4f}")
print("time integral of the integrand:", morawetz_lhs(traj))
