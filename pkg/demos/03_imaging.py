"""
Images of warped events and the objective
=========================================

With the right velocity the warped events of one object pile onto few
pixels, which raises the entropy-style sharpness score. The objective adds
a spread penalty and a size penalty to the negated score.
"""

import os
import sys
import tempfile

import numpy as np

from eventgne.events import synthesize, two_circle_scene
from eventgne.imaging import (
    ModelParams,
    entropy,
    image_of_warped_events,
    objective,
    objective_gradient,
    objective_terms,
    write_pgm,
)
from eventgne.kinematics import Theta, estimate_theta

out = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="eventgne_")
os.makedirs(out, exist_ok=True)

es = synthesize(two_circle_scene(noise_events=12), seed=0)
left = (es.labels == 0).astype(float)
params = ModelParams()

############################################################
# Sharpness of the left circle, unwarped and warped with its own velocity.

flat = image_of_warped_events(left, es, Theta(0.0, 0.0), params)
sharp = image_of_warped_events(left, es, estimate_theta(left, es), params)
print(f"entropy unwarped {entropy(flat, params):8.2f}   warped {entropy(sharp, params):8.2f}")
write_pgm(flat.values, os.path.join(out, "left_unwarped.pgm"))
write_pgm(sharp.values, os.path.join(out, "left_warped.pgm"))

############################################################
# Objective terms for a clean object, a random subset of the same size and
# everything at once. Lower is better.

rng = np.random.default_rng(0)
rand = np.zeros(len(es))
rand[rng.choice(len(es), int(left.sum()), replace=False)] = 1.0
for name, z in (("left circle", left), ("random subset", rand), ("all events", np.ones(len(es)))):
    t = objective_terms(z, es, params)
    print(f"{name:14s} J={t.value:9.2f}  E={t.entropy:8.2f}  V={t.variance:10.1f}  |h|^2={t.regularizer:5.0f}")

############################################################
# The relaxed objective is smooth, so its gradient can be checked with
# central differences.

z = rng.uniform(0.3, 0.7, len(es))
g = objective_gradient(z, es, params)
for k in rng.choice(len(es), 4, replace=False):
    e = np.zeros(len(es))
    e[k] = 1e-6
    fd = (objective(z + e, es, params, "relaxed") - objective(z - e, es, params, "relaxed")) / 2e-6
    print(f"event {k:3d}: analytic {g[k]: .6e}  central difference {fd: .6e}")
print("images written to", out)
