# %% [markdown]
# # Symmetries map solutions to solutions
#
# Phase, translation and Galilean boost act on a recorded run; the PDE
# residual of the transformed run matches the original.

# %%
from pathlib import Path

from resonant_nls.config import load_config
from resonant_nls.dynamics import Trajectory, evolve
from resonant_nls.state import mass
from resonant_nls.symmetry import GroupElement, apply, verify_covariance

cfg = load_config(Path(__file__).parent / "configs" / "boosted_pulse.cfg")
traj = Trajectory()
evolve(cfg.initial_state(), cfg.stepper, [traj], diagnostics=False)

# %%
for g in (GroupElement(theta=0.7), GroupElement(x0=(1.0, -2.0)), GroupElement(xi0=(-1.0, 0.5))):
    rep = verify_covariance(g, traj)
    print(g, f"residual ratio {rep.ratio:.6f}")

# %%
g1, g2 = GroupElement(0.3, (0.25, 0.0), (0.5, 0.0), 1.0), GroupElement(lam=2.0)
u = traj.states[0]
print("mass before/after dilation:", mass(u), mass(apply(g2, u)))
print("composition", g1 @ g2)
