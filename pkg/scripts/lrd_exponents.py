"""Fitted decay exponent of r(n) = E[B_1 (B_{n+1} - B_n)] across (H, K).

Prints the fitted tail slope next to 2HK - 2 and the exponent 2H(K-1) - 1 of
the competing (t^{2H} + s^{2H})^K contribution; the slower of the two wins.
"""

import argparse
from dataclasses import dataclass

from bifbm.verify import lrd_exponent


@dataclass
class Config:
    H_values: tuple = (0.15, 0.2, 0.3, 0.4, 0.45, 0.55, 0.6)
    K_values: tuple = (1.1, 1.25, 1.5, 1.6)
    max_lag: int = 10_000


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-lag", type=int, default=Config.max_lag)
    cfg = Config(max_lag=ap.parse_args(argv).max_lag)
    print(f"{'H':>5} {'K':>5} {'HK':>6} {'fitted':>8} {'2HK-2':>8} {'2H(K-1)-1':>10}  pass")
    for H in cfg.H_values:
        for K in cfg.K_values:
            if H * K >= 1.0 or abs(H * K - 0.5) < 1e-9:
                continue
            r = lrd_exponent(H, K, cfg.max_lag)
            print(f"{H:5.2f} {K:5.2f} {H * K:6.3f} {r.metric('slope').value:8.3f} {2 * H * K - 2:8.3f} "
                  f"{r.metric('competing_exponent').value:10.3f}  {r.passed}")


if __name__ == "__main__":
    main()
