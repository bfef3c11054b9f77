from ._sigmabilap import (
    cap_mu1,
    classify_region,
    critical_aperture,
    critical_contrasts_three_segment,
    critical_contrasts_two_segment,
    eval_g,
    eval_h,
    find_eta0,
    fredholm_classify,
    interval_endpoints,
    lambda_pm,
    legendre_p,
    normalized_determinant,
    run_cli,
    scan_three_segment,
    scan_two_segment,
)

__all__ = [
    "cap_mu1",
    "classify_region",
    "critical_aperture",
    "critical_contrasts_three_segment",
    "critical_contrasts_two_segment",
    "eval_g",
    "eval_h",
    "find_eta0",
    "fredholm_classify",
    "interval_endpoints",
    "lambda_pm",
    "legendre_p",
    "normalized_determinant",
    "run_cli",
    "scan_three_segment",
    "scan_two_segment",
]
