"""
Gates, velocity fit and warping
===============================

A strategy ``z`` assigns a confidence to every event. The gate turns it into
a selection, the selection gives a least-squares velocity, and the velocity
moves every event back to a common reference time.
"""

import numpy as np

from eventgne.events import synthesize, two_circle_scene
from eventgne.kinematics import RelaxParams, estimate_theta, heaviside, heaviside_relaxed, warp

############################################################
# The exact gate is a step at zero; the relaxed gate is a steep logistic
# centred at n = 0.25.

z = np.array([-0.2, 0.0, 0.1, 0.25, 0.5, 1.0])
print("z        ", z)
print("exact    ", heaviside(z))
print("relaxed  ", np.round(heaviside_relaxed(z, RelaxParams()), 6))

############################################################
# Selecting one circle recovers its velocity; fractional confidences give
# the same answer because only the selection matters.

es = synthesize(two_circle_scene(speed=4.0), seed=0)
left = (es.labels == 0).astype(float)
print("theta, left circle         :", estimate_theta(left, es))
print("theta, left at 0.3 conf.   :", estimate_theta(0.3 * left, es))
print("theta, right circle        :", estimate_theta((es.labels == 1).astype(float), es))

############################################################
# Warping with the fitted velocity stacks all frames of the left circle.

w = warp(es, estimate_theta(left, es), t0=float(es.t.min()))
sel = es.labels == 0
for t in np.unique(es.t[sel]):
    raw = np.column_stack([es.x, es.y])[sel & (es.t == t)].mean(axis=0)
    moved = w[sel & (es.t == t)].mean(axis=0)
    print(f"t={t:.0f}  centroid before {raw}  after {moved}")
