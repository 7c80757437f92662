"""
Co-clustering through entropic optimal transport.

Library modules:
  - core      : numeric types, distances, sorting, sampling
  - sinkhorn  : entropic OT solver
  - gromov    : entropic Gromov-Wasserstein coupling and barycenter
  - jumps     : multiscale jump detection on sorted scaling vectors
  - coclust   : CCOT and CCOT-GW pipelines
  - simulate  : latent block model generator and metrics
"""
