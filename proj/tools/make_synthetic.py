"""Write a synthetic specimen dataset simulated by the forward model.

Usage: python tools/make_synthetic.py OUT_DIR

Each specimen log is the simulated Q(t) converted to wet masses, with a
small seeded multiplicative perturbation per specimen so the group average
is not a single curve repeated.
"""

import json
import sys
from pathlib import Path

import numpy as np

import imbibe

TRUTH = dict(n0=0.30, s_R=0.25, s_S=0.90, D=5e-3, K_w=0.0)
HEIGHT = 2.0
TIMES = [5, 10, 15, 20, 30, 45, 60, 90, 120, 180, 240, 360, 480]
DZ = 1.0 / 32.0
DRY_MASS = 60.0
AREA = 16.0
SPECIMENS = 3
NOISE = 0.01


def simulate_q():
    dt = min(0.5 * imbibe.cfl_max_dt(TRUTH["n0"], TRUTH["s_R"], TRUTH["s_S"], TRUTH["D"], DZ), 0.0625)
    dt = 5.0 / np.ceil(5.0 / dt)  # every sample time is a grid level
    times, q, _ = imbibe.simulate(**TRUTH, height=HEIGHT, horizon=TIMES[-1], dz=DZ, dt=dt,
                                  boundary=imbibe.Boundary.robin, theta_bar=2.33e-5)
    times = np.asarray(times)
    q = np.asarray(q)
    idx = [int(np.argmin(np.abs(times - t))) for t in TIMES]
    return q[idx]


def main(out):
    out.mkdir(parents=True, exist_ok=True)
    q = simulate_q()
    rng = np.random.default_rng(20240601)
    files = []
    for k in range(SPECIMENS):
        name = f"GS_syn_{k + 1}.csv"
        scale = 1.0 + NOISE * rng.standard_normal()
        with open(out / name, "w") as f:
            f.write(f"# specimen_id=GS_syn_{k + 1}\n# dry_mass_g={DRY_MASS}\n# area_cm2={AREA}\n")
            f.write("# synthetic: simulated, not measured\n")
            f.write("time_min,mass_g\n")
            for t, v in zip(TIMES, q):
                f.write(f"{t},{DRY_MASS + AREA * v * scale:.6f}\n")
        files.append(name)
    manifest = {
        "material": "GS",
        "synthetic": True,
        "density_g_cm3": 1.0,
        "environment": {"temperature_c": 27.0, "relative_humidity": 0.8},
        "truth": TRUTH,
        "groups": {"GS": files},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    with open(out / "truth_q.csv", "w") as f:
        f.write("time_min,q_g_per_cm2\n")
        for t, v in zip(TIMES, q):
            f.write(f"{t},{v:.10g}\n")


if __name__ == "__main__":
    main(Path(sys.argv[1]))
