"""Spectra, bandwidth and area law of linear tapers, including pump saturation."""
import numpy as np

from _common import parser, write
from taperconv import analytic, experiments
from taperconv.dispersion import SyntheticDispersion, coupling_g
from taperconv.profile import Linear
from taperconv.spectrum import compute_spectrum, fwhm


def main():
    args = parser(__doc__).parse_args()
    m = SyntheticDispersion()
    c = m.lambda3_center

    rows = []
    for dw in (0.0, 4.0, 8.0):
        s = compute_spectrum(m, Linear(m.w0, dw, 10000.0), 10000.0, 1.0, c - 40.0, c + 40.0, 1601, threads=args.threads)
        rows += [[dw, lam, eta] for lam, eta in zip(s.lambdas, s.etas)]
    write(args.out, "fig3a_spectra.csv", ["delta_w_nm", "lambda_nm", "eta"], rows)

    rows = []
    for dw in (2.0, 4.0, 6.0, 8.0, 10.0):
        bw = analytic.bandwidth_estimate(dw, m.kappa_w, m.dbeta_dlambda)
        s = compute_spectrum(m, Linear(m.w0, dw, 10000.0), 10000.0, 1.0, c - 1.5 * bw, c + 1.5 * bw, 601, threads=args.threads)
        rows.append([dw, fwhm(s), bw])
    write(args.out, "fig3b_bandwidth.csv", ["delta_w_nm", "fwhm_nm", "estimate_nm"], rows)

    rows = []
    for L in (1000.0, 10000.0):
        ref = analytic.area_uniform(coupling_g(m, m.w0, 1.0), L, m.dbeta_dlambda).value
        for r in experiments.area_sweep(m, L, 1.0, delta_ws=[0.0, 2.0, 4.0, 6.0, 8.0, 10.0], threads=args.threads):
            rows.append([L, r.value, r.result, ref])
    write(args.out, "fig3c_area_vs_delta_w.csv", ["length_um", "delta_w_nm", "area_nm", "analytic_nm"], rows)

    rows, thresholds = [], []
    powers = [0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0, 64.0]
    for dw in (0.0, 4.0):
        recs = experiments.area_sweep(m, 1000.0, pump_powers=powers, delta_w=dw, threads=args.threads)
        rows += [[dw, r.value, r.result] for r in recs]
        thresholds.append([dw, experiments.saturation_threshold(recs)])
    write(args.out, "fig3d_area_vs_pump.csv", ["delta_w_nm", "pump_power_W", "area_nm"], rows)
    write(args.out, "fig3d_saturation.csv", ["delta_w_nm", "threshold_W"], thresholds)


if __name__ == "__main__":
    main()
