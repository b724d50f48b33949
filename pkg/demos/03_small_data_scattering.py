# %% [markdown]
# # Small data scatter
#
# For tiny data the pulled-back state ``e^{-it Laplacian} u(t)`` freezes, and
# the space-time ``L^4`` integral has a thin tail.

# %%
from pathlib import Path

import numpy as np

from resonant_nls.config import load_config
from resonant_nls.diagnostics import scattering_probe
from resonant_nls.dynamics import Trajectory, evolve

cfg = load_config(Path(__file__).parent / "configs" / "small_data.cfg")
traj = Trajectory()
evolve(cfg.initial_state(), cfg.stepper, [traj], diagnostics=False)
rep = scattering_probe(traj)

# %%
print("L4 integral by window:", np.array2string(rep.window_values, precision=2))
print(f"tail fraction {rep.tail_fraction:.4f}, small-data verdict {rep.small_data}")
print("gap to final state at t = 0, 1, 2, 3:", rep.gaps[np.searchsorted(rep.times, [0, 1, 2, 3])])
print("gaps nonincreasing after t =", rep.onset)
