"""Recovered B per year for towns whose air-source SPF falls in colder winters.

    python scripts/winter_trend.py --slope 0.11 --offsets 0 2 -2
"""

import argparse

from spfmatch.analysis import winter_mean_temp
from spfmatch.estimator import annual_samples, estimate_b
from spfmatch.synth import SynthConfig, generate_town

YEARS = (2019, 2020, 2021)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs=2, default=(0, 20), metavar=("FIRST", "STOP"))
    ap.add_argument("--slope", type=float, default=0.11,
                    help="relative change of air-source SPF per degree of winter mean")
    ap.add_argument("--offsets", type=float, nargs=3, default=[0.0, 2.0, -2.0],
                    help="winter temperature offsets for 2019, 2020, 2021")
    ap.add_argument("--variant", choices=["paper", "mixture"], default="paper")
    args = ap.parse_args()

    print("seed," + ",".join(f"t_{y},b_true_{y},b_star_{y}" for y in YEARS) + ",ordered")
    ordered = n = 0
    for seed in range(*args.seeds):
        cfg = SynthConfig(seed=seed, years=YEARS, air_temp_slope=args.slope,
                          winter_offset=dict(zip(YEARS, args.offsets)), hp_resolution="daily")
        town = generate_town(cfg)
        row, pts = [], []
        for y in YEARS:
            t = winter_mean_temp(town.dataset.weather, y)
            b = estimate_b(*annual_samples(town.dataset, y), variant=args.variant).b_star
            pts.append((t, b))
            row.append(f"{t:.2f},{town.truth.b_true(y):.3f},{b:.1f}")
        bs = [b for _, b in sorted(pts)]
        ok = bs[0] < bs[1] < bs[2]
        ordered += ok
        n += 1
        print(f"{seed}," + ",".join(row) + f",{ok}")
    print(f"# B ordered with winter temperature in {ordered}/{n} seeds ({ordered / n:.0%})")


if __name__ == "__main__":
    main()
