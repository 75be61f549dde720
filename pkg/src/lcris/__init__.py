"""Temperature-aware secrecy beamforming for liquid-crystal RIS.

Library layout:
  lc          temperature -> achievable phase range
  channel     array geometry, steering, pathloss, LOS/Rician channels
  secrecy     SNR, secrecy rate, worst-case rates, LOS beamformer
  sdp         first-order solver for unit-diagonal Hermitian SDPs
  optimizer   penalty-continuation phase design and neglect baseline
  scenario    configuration documents and channel builders
  experiments drivers for the convergence / heat-map / sweep studies
  plots       figure rendering next to the delimited outputs
"""

__version__ = "0.1.0"
