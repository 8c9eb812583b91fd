"""Informational: Picard diagnostics for growing data sizes (nothing is asserted).

Large data or weak damping make the iteration stop contracting; this prints where
that happens and what the run reports (contraction factors, blow-up time).
"""

import argparse
import warnings

import numpy as np

from kgspectral.fourier import random_field
from kgspectral.propagator import EvolutionParams
from kgspectral.semilinear_solver import ExponentWarning, SemilinearConfig, picard_iterate, scale_data
from kgspectral.spectral_groups import GroupSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--group", default="TorusD3")
    ap.add_argument("--K", type=int, default=3)
    ap.add_argument("--b", type=float, default=2.0)
    ap.add_argument("--m-sq", type=float, default=0.05)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--T", type=float, default=20.0)
    ap.add_argument("--steps", type=int, default=256)
    ap.add_argument("--amplitudes", type=float, nargs="+", default=[1e-2, 1e-1, 1.0, 10.0, 100.0])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    group = GroupSpec.from_name(args.group)
    params = EvolutionParams(args.b, args.m_sq)
    rng = np.random.default_rng(args.seed)
    base = (random_field(group, args.K, rng, 2.0), random_field(group, args.K, rng, 2.0))
    cfg = SemilinearConfig(p=args.p, T=args.T, dt=args.T / args.steps, picard_max_iter=40)
    for eps in args.amplitudes:
        with warnings.catch_warnings(), np.errstate(over="ignore", invalid="ignore"):
            warnings.simplefilter("ignore", ExponentWarning)
            rep = picard_iterate(scale_data(base, eps), params, cfg)
        rhos = ", ".join(f"{r:.2g}" for r in rep.contraction_factors[:6])
        print(f"eps={eps:8.2g}  converged={rep.converged!s:5}  iterations={rep.iterations:2d}  "
              f"blowup_time={rep.blowup_time}  rho=[{rhos}]  {rep.message}")


if __name__ == "__main__":
    main()
