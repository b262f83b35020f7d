"""Qubit walk-through: H(0) = diag(0, 1), H(tau) = sigma_x, U = 1, rho0 = |+><+|.

Prints the TPM and p_q atoms, the operator moments and the no-repetition probe.
"""

import argparse
from dataclasses import dataclass

import numpy as np

from workqp.operators import DensityMatrix, EvolutionSpec
from workqp.work import (
    Scenario,
    mean_energy_change,
    moment,
    negativity,
    no_go_repetition,
    quasiprob_q,
    second_moment_operator,
    tpm_distribution,
)


@dataclass
class Config:
    theta: float = np.pi / 4  # state cos(theta)|0> + sin(theta)|1>
    q_values: tuple = (0.0, 0.25, 0.5, 1.0)


def build(cfg: Config) -> Scenario:
    psi = np.array([np.cos(cfg.theta), np.sin(cfg.theta)])
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    return Scenario.from_hamiltonians(np.diag([0.0, 1.0]), sx, EvolutionSpec.direct(np.eye(2)),
                                      DensityMatrix.pure(psi))


def show(name, d):
    atoms = "  ".join(f"({w:+.3f}, {c:+.4f})" for w, c in d.atoms)
    print(f"{name:>10}: {atoms}")
    print(f"{'':>10}  <w> = {moment(d, 1):+.6f}  <w^2> = {moment(d, 2):+.6f}  negativity = {negativity(d):.4f}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--theta", type=float, default=Config.theta)
    cfg = Config(theta=parser.parse_args().theta)
    s = build(cfg)
    print(f"operator moments: <w> = {mean_energy_change(s):+.6f}, <w^2> = {second_moment_operator(s):+.6f}")
    show("TPM", tpm_distribution(s))
    for q in cfg.q_values:
        show(f"q = {q}", quasiprob_q(s, q))
    rep = no_go_repetition(s)
    print(f"no-repetition probe: {rep.status}; X_iki deviation {rep.repeated_deviation:.6f}, "
          f"repetition-free deviation {rep.free_deviation:.1e}")


if __name__ == "__main__":
    main()
