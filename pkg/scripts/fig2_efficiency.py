"""Center-wavelength efficiency of linear tapers versus length, depth and pump power."""
import numpy as np

from _common import parser, write
from taperconv import experiments
from taperconv.dispersion import SyntheticDispersion
from taperconv.profile import Linear


def main():
    args = parser(__doc__).parse_args()
    m = SyntheticDispersion()
    lengths = np.linspace(250.0, 20000.0, 80)

    rows = []
    for dw in (10.0, 30.0, 50.0):
        recs = experiments.sweep_length(m, Linear(m.w0, dw, 1.0), lengths, 1.0, threads=args.threads)
        rows += [[dw, r.value, r.result] for r in recs]
    write(args.out, "fig2a_eta_vs_length.csv", ["delta_w_nm", "length_um", "eta"], rows)

    rows = []
    for L in (500.0, 1500.0, 2500.0):
        recs = experiments.sweep_delta_w(m, L, 1.0, np.linspace(0.0, 60.0, 61), threads=args.threads)
        rows += [[L, r.value, r.result] for r in recs]
    write(args.out, "fig2b_eta_vs_delta_w.csv", ["length_um", "delta_w_nm", "eta"], rows)

    rows = []
    for p in (1.0, 20.0, 40.0):
        recs = experiments.sweep_length(m, Linear(m.w0, 20.0, 1.0), lengths, p, threads=args.threads)
        rows += [[p, r.value, r.result] for r in recs]
    write(args.out, "fig2c_eta_vs_length_pump.csv", ["pump_power_W", "length_um", "eta"], rows)

    rows = []
    for L in (500.0, 1500.0, 2500.0):
        recs = experiments.sweep_pump(m, Linear(m.w0, 20.0, L), L, np.linspace(0.0, 60.0, 61), threads=args.threads)
        rows += [[L, r.value, r.result] for r in recs]
    write(args.out, "fig2d_eta_vs_pump.csv", ["length_um", "pump_power_W", "eta"], rows)


if __name__ == "__main__":
    main()
