"""Travelling profiles behind a shifting climate.

Run with ``python demos/01_waves.py``.  Everything here solves boundary
value problems on the half line, so it finishes in a few seconds.
"""
# %% [markdown]
# A population lives on ``[0, h(t)]`` and grows at rate ``A(x - ct)``: the
# favourable value ``a`` behind the moving climate edge and the negative value
# ``a0`` ahead of it.  Two speeds compete.  The front can run at most as fast
# as a semi-wave in the favourable environment, which selects the speed
# ``c0``.  The climate edge moves at the imposed speed ``c``.

# %%
import numpy as np

from shiftfront import forced, semiwave
from shiftfront.model import ClimateProfile, ExpansionRate, ModelParams

params = ModelParams(d=1.0, a=1.0, a0=-1.0, b=1.0, l0=1.0, c=0.18, h0=2.0)
climate = ClimateProfile(params)
mu = ExpansionRate.affine_from_endpoints(0.5, 1.0, params)

# %% [markdown]
# ## The semi-wave and the critical speed
#
# For every ``0 < c < 2 sqrt(ad)`` there is a decreasing profile ``q_c`` on
# ``(-inf, 0]`` joining ``a/b`` to ``0``.  Its end slope gets steeper as ``c``
# decreases, so ``-mu(a) q_c'(0) = c`` has exactly one root.

# %%
for c in (0.1, 0.3, 0.5, 1.0, 1.5):
    wave = semiwave.solve_semiwave(c, params)
    print(f"c = {c:4.2f}   q_c'(0) = {wave.slope0: .8f}   -mu(a) q_c'(0) - c = {-mu.at_favourable * wave.slope0 - c: .6f}")

cs = semiwave.critical_speed(params, mu)
print(f"\nc0 = {cs.c0:.12g} (KPP speed 2 sqrt(ad) = {params.kpp_speed:g}), residual {cs.residual:.1e}")

# %% [markdown]
# ## Forced semi-waves
#
# When the climate moves slower than ``c0`` the front is pinned to the climate
# edge.  In the frame moving with the climate the profile ``v_L`` lives on
# ``(-inf, L]``.  Its end slope flattens as the free end ``L`` moves into
# the unfavourable zone, and the Stefan relation
# ``-mu(A(L)) v_L'(L) = c`` picks out the critical shift ``L0``.

# %%
c = 0.18
for L in (-1.0, 0.0, 0.5, 1.0, 2.0, 4.0):
    print(f"L = {L:5.2f}   v_L'(L) = {forced.slope_at_L(L, params, climate, c, c0=cs.c0): .8f}")

res = forced.find_L0(params, climate, mu, c, c0=cs.c0)
print(f"\nL0 = {res.L0:.9f}  (|mismatch| = {res.residual:.1e})")

# %% [markdown]
# At ``c = c0`` the climate edge and the free semi-wave move together, and
# the forced wave collapses onto ``q_c0`` with ``L0 = 0``.

# %%
at_c0 = forced.find_L0(params, climate, mu, cs.c0, c0=cs.c0)
gap = np.max(np.abs(at_c0.wave.v - cs.wave(at_c0.wave.x)))
print(f"c = c0: L0 = {at_c0.L0:.2e}, sup |v_L0 - q_c0| = {gap:.2e}")
