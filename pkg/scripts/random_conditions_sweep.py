"""Sweep random scenarios and report the worst W1/W2/W3 residuals per dimension and q."""

import argparse
from dataclasses import dataclass, field

import numpy as np

from workqp.sampling import random_scenario
from workqp.work import negativity, quasiprob_q, verify_conditions


@dataclass
class Config:
    dims: tuple = (2, 3, 4, 6, 8)
    draws: int = 50
    q_values: list = field(default_factory=lambda: [-0.5, 0.0, 0.25, 0.5, 0.75, 1.0, 1.5])
    seed: int = 0
    mixed: bool = False


def sweep(cfg: Config) -> None:
    rng = np.random.default_rng(cfg.seed)
    print(f"{'dim':>4} {'q':>6} {'W1':>9} {'W2':>9} {'W3':>9} {'mean neg':>9}")
    for dim in cfg.dims:
        scenarios = [random_scenario(dim, rng, mixed=cfg.mixed) for _ in range(cfg.draws)]
        reports = [verify_conditions(s, cfg.q_values) for s in scenarios]
        for n, q in enumerate(cfg.q_values):
            recs = [r.records[n] for r in reports]
            neg = np.mean([negativity(quasiprob_q(s, q)) for s in scenarios])
            print(f"{dim:>4} {q:>6.2f} {max(r.w1 for r in recs):9.1e} {max(r.w2 for r in recs):9.1e} "
                  f"{max(r.w3 for r in recs):9.1e} {neg:9.4f}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--draws", type=int, default=Config.draws)
    parser.add_argument("--seed", type=int, default=Config.seed)
    parser.add_argument("--mixed", action="store_true", help="random mixed instead of pure states")
    args = parser.parse_args()
    sweep(Config(draws=args.draws, seed=args.seed, mixed=args.mixed))


if __name__ == "__main__":
    main()
