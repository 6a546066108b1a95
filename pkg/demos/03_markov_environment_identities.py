"""
Markov-environment identities
=============================

When every sojourn is exponential the environment is an ordinary Markov
jump process and two strong structural facts hold: the stationary and
Palm moment vectors coincide, and consecutive moment orders are tied by
a generator identity.  A third identity, the forward-routing form of
the Palm recursion, holds for every model.  The library evaluates all
of them as residuals; this script shows them on a model loaded from a
file.
"""

import numpy as np

from mminfenv import (
    chain_statics,
    forward_relation_residuals,
    load_model,
    markovian_identity_residuals,
    palm_moment_vectors,
    stationary_moment_vectors,
)

###############################################################################
# Load the all-exponential three-state model shipped with the repo.

model = load_model("models/k3_exponential.yaml")
statics = chain_statics(model)
print("embedded stationary vector:", np.round(statics.pi, 6).tolist())
print("occupancy law:             ", np.round(statics.occupancy, 6).tolist())

palm = palm_moment_vectors(model, statics, n_max=6)
stationary = stationary_moment_vectors(model, statics, palm)

###############################################################################
# Palm vs stationary: a residual sojourn of an exponential law is the
# law itself, so the two families coincide (here: bit for bit).

gap = max(float(np.max(np.abs(a - b))) for a, b in zip(palm.vectors, stationary))
print(f"\nmax |palm - stationary| over orders 0..6: {gap}")

###############################################################################
# The generator identity ties order n to order n-1.

residuals = markovian_identity_residuals(model, statics, stationary)
print("generator-identity residuals by order:", ["%.2e" % r for r in residuals[1:]])

###############################################################################
# The forward-routing relation holds for any model, exponential or not;
# order 0 reduces to the stationarity of the embedded vector.

forward = forward_relation_residuals(model, statics, palm)
print("forward-relation residuals by order:  ", ["%.2e" % r for r in forward])

mixed = load_model("models/k3_mixed.yaml")
mixed_statics = chain_statics(mixed)
mixed_palm = palm_moment_vectors(mixed, mixed_statics, n_max=6)
mixed_forward = forward_relation_residuals(mixed, mixed_statics, mixed_palm)
print("same check on the mixed-family model:  ", ["%.2e" % r for r in mixed_forward])
print("generator identity there:", markovian_identity_residuals(mixed, mixed_statics,
      stationary_moment_vectors(mixed, mixed_statics, mixed_palm)))
