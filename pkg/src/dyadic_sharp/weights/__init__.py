from .conditions import (Weight, ap_constant, bmo_dyadic_norm, bump_constant, geometric_cells,
                         power_function, power_weight, weighted_lp_norm)
from .young import YoungFunction, associate, bp_classify, luxemburg_norm, node_luxemburg

__all__ = [
    "Weight", "YoungFunction", "ap_constant", "associate", "bmo_dyadic_norm", "bp_classify",
    "bump_constant", "geometric_cells", "luxemburg_norm", "node_luxemburg", "power_function",
    "power_weight", "weighted_lp_norm",
]
