"""Mean SE vs N at several SNR values; adds an ``snr_db`` column to the CSV."""
import _common

from risrank.channel import SystemDims
from risrank.evaluation import SimulationConfig, records_to_csv, run_monte_carlo


def main():
    p = _common.parser(__doc__)
    p.add_argument("--snr-db", type=float, nargs="+", default=[0.0, 10.0, 20.0])
    p.add_argument("--n-values", type=int, nargs="+", default=[4, 8, 16, 32])
    args = p.parse_args()
    lines = []
    for snr in args.snr_db:
        cfg = SimulationConfig(
            dims=SystemDims(4, 3, 8),
            Pt=10.0 ** (snr / 10.0),
            sigma2=1.0,
            realizations=args.realizations,
            master_seed=args.seed,
            sweep_var="N",
            sweep_values=tuple(args.n_values),
        )
        records = run_monte_carlo(cfg)
        print(f"SNR {snr:g} dB")
        _common.table(records)
        header, *rows = records_to_csv(records).splitlines()
        if not lines:
            lines.append("snr_db," + header)
        lines.extend(f"{snr!r},{row}" for row in rows)
    _common.save(args, "n_sweep_by_snr.csv", "\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
