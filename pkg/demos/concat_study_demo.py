"""Compare the channel-concatenation down-selection cases on shared drops.

For every drop the two hop channels are generated once and every case is
applied to the same realization, so differences between rows come from the
pairing rule alone.  The table shows how much diffuse-diffuse power each
rule keeps and how closely its delay-spread distribution tracks the full
convolution (two-sample KS distance, lower is better).

CLI equivalent: isacsim concat-study --config <file> --drops N
"""
import argparse
import time

import numpy as np

from isacsim.concatenation import ALL_CASES, ConcatCase, concatenate, nn_total_power
from isacsim.geometry import NodeState
from isacsim.largescale import ScenarioParams, build_hop
from isacsim.seeds import HOP_TARGET_RX, HOP_TX_TARGET, SCOPE_CONCAT, RandomStreams
from isacsim.smallscale import generate_sublink
from isacsim.stats import drop_statistics, empirical_cdf, ks_statistic


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--drops", type=int, default=200)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)

    scen = ScenarioParams.from_table("UMi", 6e9)
    tx = NodeState([0.0, 0.0, 10.0])
    tgt = NodeState([25.0, 10.0, 1.5])
    rx = NodeState([60.0, -5.0, 10.0])
    cases = [c for c in ALL_CASES if c is not ConcatCase.CASE_A]

    print(f"down-selection study: {args.drops} drops, both hops forced LOS")
    t0 = time.perf_counter()
    nn = {c: np.empty(args.drops) for c in cases}
    ds = {c: np.empty(args.drops) for c in cases}
    n_paths = {}
    for d in range(args.drops):
        streams = RandomStreams(args.seed, d)
        hop1 = build_hop(tx, tgt, scen, streams.scoped(HOP_TX_TARGET), "LOS")
        hop2 = build_hop(tgt, rx, scen, streams.scoped(HOP_TARGET_RX), "LOS")
        sub1 = generate_sublink(hop1, scen.condition_params("LOS"),
                                streams.scoped(HOP_TX_TARGET))
        sub2 = generate_sublink(hop2, scen.condition_params("LOS"),
                                streams.scoped(HOP_TARGET_RX))
        for case in cases:
            paths = concatenate(sub1, sub2, case, streams.scoped(SCOPE_CONCAT))
            nn[case][d] = nn_total_power(paths)
            ds[case][d] = drop_statistics(paths).ds
            n_paths[case] = len(paths)
    print(f"generated {args.drops * len(cases)} path sets "
          f"in {time.perf_counter() - t0:.1f} s\n")

    base_cdf = empirical_cdf(ds[ConcatCase.CASE_0])
    print(f"{'case':8s} {'paths':>6s} {'mean NN power':>14s} {'KS(ds) vs Case0':>16s}")
    for case in cases:
        k = ks_statistic(empirical_cdf(ds[case]), base_cdf)
        print(f"{case.value:8s} {n_paths[case]:6d} {np.mean(nn[case]):14.4e} {k:16.3f}")

    print("\nreading the table:")
    print(" - Case0 convolves every ray pair; all other rows keep a subset")
    print("   of the diffuse-diffuse paths, hence the lower NN power")
    print(" - the trailing-N rows rescale that subset back to unit power,")
    print("   which moves none of the spread statistics")
    print(" - random pairing (Case2RN) stays closer to Case0 than the")
    print("   delay-ordered rule (Case2ON) at a fraction of the paths")


if __name__ == "__main__":
    main()
