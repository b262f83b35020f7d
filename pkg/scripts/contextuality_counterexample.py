"""Phase-space counterexample: H(0) = alpha x, H(tau) = beta p^2 on Gaussian states.

The Wigner-route p_1/2 histogram stays non-negative while the element-wise
terms Re Tr{P'_p P_x rho} and v(x, p, y) go negative.  A cat state is shown
for contrast.
"""

import argparse
from dataclasses import dataclass

from workqp.phasespace import (
    GaussianParams,
    PhaseGrid,
    cat_wavefunction,
    contextuality_demo,
    marginal_sign_agreement,
    v_xpy,
    wigner,
    wigner_marginal_check,
)


@dataclass
class Config:
    alpha: float = 1.0
    beta: float = 1.0
    a: complex = 0.5
    b: complex = 0.0
    n: int = 128
    bins: int = 64
    cat_separation: float = 6.0


def report(label, rep) -> None:
    print(f"[{label}] min bin {rep.min_bin:+.3e}  min KD {rep.min_kirkwood_dirac:+.4f}  min v {rep.min_v:+.4f}")
    print(f"[{label}] {rep.statement}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--alpha", type=float, default=Config.alpha)
    parser.add_argument("--beta", type=float, default=Config.beta)
    parser.add_argument("--a", type=complex, default=Config.a)
    parser.add_argument("--b", type=complex, default=Config.b)
    parser.add_argument("--n", type=int, default=Config.n)
    args = parser.parse_args()
    cfg = Config(args.alpha, args.beta, args.a, args.b, args.n)

    params = GaussianParams(cfg.a, cfg.b)
    grid = PhaseGrid.for_gaussian(params, n=cfg.n)
    report("gaussian", contextuality_demo(cfg.alpha, cfg.beta, params, grid, cfg.bins))

    cat_grid = PhaseGrid.centered(cfg.n, 0.0, 10.0)
    psi = cat_wavefunction(cat_grid, cfg.cat_separation)
    report("cat", contextuality_demo(cfg.alpha, cfg.beta, None, cat_grid, cfg.bins, psi=psi))
    field, v = wigner(psi, cat_grid), v_xpy(psi, cat_grid)
    print(f"[cat] min W {field.values.min():+.4f}  min y-marginal of v {wigner_marginal_check(v, cat_grid):+.4f}  "
          f"sign agreement {marginal_sign_agreement(v, field):.3f}")


if __name__ == "__main__":
    main()
