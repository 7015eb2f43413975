"""Physical constants shared across the simulator."""

# Propagation speed used by every delay/path-loss formula in this package.
# Kept at exactly 3.0e8 m/s so closed-form budget constants and the worked
# range/delay conversions in the docs reproduce digit for digit.
SPEED_OF_LIGHT = 3.0e8
