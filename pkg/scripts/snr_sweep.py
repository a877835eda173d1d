"""Mean spectral efficiency vs SNR for every scheme (M=4, K=3, N=8)."""
import _common

from risrank.channel import SystemDims
from risrank.evaluation import SimulationConfig, records_to_csv, run_monte_carlo


def main():
    args = _common.parser(__doc__).parse_args()
    cfg = SimulationConfig(
        dims=SystemDims(4, 3, 8),
        realizations=args.realizations,
        master_seed=args.seed,
        sweep_var="SNR",
        sweep_values=(0.0, 5.0, 10.0, 15.0, 20.0),
    )
    records = run_monte_carlo(cfg)
    _common.table(records)
    _common.save(args, "snr_sweep.csv", records_to_csv(records))


if __name__ == "__main__":
    main()
