"""Grid refinement study of the interface verification residuals.

Solves the bundled perturbed configuration on 33x33, 65x65 and 129x129
grids and reports the decay of the Rankine-Hugoniot, conservation and
geometry residuals together with least-squares convergence orders.  The
endpoint columns decay at the corner-limited rate; the interior columns
show the full second-order behaviour.
"""

import os

from cdnozzle import ProblemConfig, refine

HERE = os.path.dirname(os.path.abspath(__file__))
CONFIG = os.path.join(HERE, "..", "configs", "reference_sigma1e-2.cfg")


def main():
    rows, orders = refine(ProblemConfig.load(CONFIG), grids=(33, 65, 129))
    cols = ("n", "pressure_jump", "pressure_jump_interior", "tangency_interior",
            "mass_defect", "wall_defect")
    print("  ".join(f"{c:>22s}" for c in cols))
    for row in rows:
        print("  ".join(
            f"{row[c]:>22d}" if c == "n" else f"{row[c]:>22.3e}" for c in cols
        ))
    print("\nleast-squares convergence orders:")
    for key, value in orders.items():
        print(f"   {key:<24s} {value:.2f}")


if __name__ == "__main__":
    main()
