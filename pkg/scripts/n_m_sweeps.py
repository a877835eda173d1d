"""Mean SE and final effective rank vs RIS size N and vs antenna count M (Pt = 10)."""
import _common

from risrank.channel import SystemDims
from risrank.evaluation import SimulationConfig, records_to_csv, run_monte_carlo


def main():
    p = _common.parser(__doc__)
    p.add_argument("--n-values", type=int, nargs="+", default=[4, 8, 16, 32])
    p.add_argument("--m-values", type=int, nargs="+", default=[2, 4, 6, 8])
    args = p.parse_args()
    base = dict(dims=SystemDims(4, 3, 8), realizations=args.realizations, master_seed=args.seed)
    by_n = run_monte_carlo(SimulationConfig(sweep_var="N", sweep_values=tuple(args.n_values), **base))
    by_m = run_monte_carlo(SimulationConfig(sweep_var="M", sweep_values=tuple(args.m_values), **base))
    for recs in (by_n, by_m):
        print("mean SE")
        _common.table(recs)
        print("mean effective rank")
        _common.table(recs, "mean_effrank")
    # one long-format file; the header appears once
    text = records_to_csv(by_n) + records_to_csv(by_m).split("\n", 1)[1]
    _common.save(args, "n_m_sweeps.csv", text)


if __name__ == "__main__":
    main()
