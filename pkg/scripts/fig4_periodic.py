"""Cosine-modulated guides: efficiency versus length, spectra and area versus period."""
import numpy as np

from _common import parser, write
from taperconv import experiments
from taperconv.dispersion import SyntheticDispersion
from taperconv.profile import Cosine
from taperconv.spectrum import compute_spectrum, default_window, find_peaks


def spectra(m, pairs, length, threads):
    lo, hi = default_window(m, Cosine(m.w0, max(dw for _, dw in pairs), 500.0), length)
    rows, peaks = [], []
    for T, dw in pairs:
        s = compute_spectrum(m, Cosine(m.w0, dw, T), length, 1.0, lo, hi, 1201, threads=threads)
        rows += [[T, dw, lam, eta] for lam, eta in zip(s.lambdas, s.etas)]
        peaks += [[T, dw, p.wavelength, p.eta] for p in sorted(find_peaks(s))]
    return rows, peaks


def main():
    args = parser(__doc__).parse_args()
    m = SyntheticDispersion()

    rows = []
    for T, dw in ((300.0, 2.0), (500.0, 4.0), (700.0, 6.0)):
        recs = experiments.sweep(m, Cosine(m.w0, dw, T), T, 1.0, "length", np.linspace(100.0, 30000.0, 150), threads=args.threads)
        rows += [[T, dw, r.value, r.result] for r in recs]
    write(args.out, "fig4a_eta_vs_length.csv", ["period_um", "delta_w_nm", "length_um", "eta"], rows)

    header = ["period_um", "delta_w_nm", "lambda_nm", "eta"]
    for tag, pairs in (("b", [(300.0, 4.0), (500.0, 4.0), (700.0, 4.0)]), ("c", [(500.0, 2.0), (500.0, 4.0), (500.0, 6.0)])):
        rows, peaks = spectra(m, pairs, 3000.0, args.threads)
        write(args.out, f"fig4{tag}_spectra.csv", header, rows)
        write(args.out, f"fig4{tag}_peaks.csv", header, peaks)

    rows = []
    for dw in (2.0, 4.0, 6.0):
        recs = experiments.sweep_period(m, 3000.0, 1.0, dw, [100.0, 200.0, 300.0, 500.0, 700.0, 1000.0, 1500.0], threads=args.threads)
        rows += [[dw, r.value, r.result] for r in recs]
    write(args.out, "fig4d_area_vs_period.csv", ["delta_w_nm", "period_um", "area_nm"], rows)


if __name__ == "__main__":
    main()
