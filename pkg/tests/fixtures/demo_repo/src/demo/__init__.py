from .metrics import clamp, moving_average, zscore
