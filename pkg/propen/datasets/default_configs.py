MAX_CAMBER_RANGE = (0.0, 0.09)
CAMBER_POSITION_RANGE = (0.1, 0.9)
THICKNESS_RANGE = (0.01, 0.40)

# Ranges of (M, P, T) when sampling random airfoil datasets
RANDOM_AIRFOIL_RANGES = ((0.0, 0.06), (0.2, 0.7), (0.06, 0.18))

DEFAULT_AIRFOIL_POINTS = 200
