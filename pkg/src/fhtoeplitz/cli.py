"""Command-line front end: ``fhtoeplitz <command> [options]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import contextlib
import logging
import math
import re
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .export import write_csv, write_json

log = logging.getLogger("fhtoeplitz")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


class ConfigError(ValueError):
    pass


def parse_rational(text: str) -> Fraction:
    """'1/3', '-0.5', '2' -> exact Fraction."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def parse_n_list(text: str) -> list[int]:
    try:
        out = [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad N list {text!r}") from exc
    if not out:
        raise argparse.ArgumentTypeError("empty N list")
    return out


@dataclass
class RunConfig:
    command: str
    alpha: Fraction
    beta: Fraction
    Ns: list[int]
    l: int | None = None
    l_rule: str | None = None
    l_frac: float | None = None
    out: str = "."
    fmt: str = "csv"
    allow_out_of_range: bool = False
    threads: int | None = None
    seed: int = 0
    options: dict[str, Any] = field(default_factory=dict)

    def as_record(self) -> dict[str, Any]:
        d = asdict(self)
        d["alpha"] = str(self.alpha)
        d["beta"] = str(self.beta)
        d["alpha_float"] = float(self.alpha)
        d["beta_float"] = float(self.beta)
        return d

    @property
    def params(self):
        from .symbol import FHParams

        return FHParams(float(self.alpha), float(self.beta))

    def label(self, N: int, default_rule: str = "quarter") -> int:
        from .quasiparticle import label_for_rule

        if self.l is not None:
            l = self.l
        elif self.l_rule is not None:
            l = label_for_rule(self.l_rule, N)
        elif self.l_frac is not None:
            l = int(math.floor(self.l_frac * (N - 1)))
        else:
            l = label_for_rule(default_rule, N)
        if not 0 <= l <= N - 1:
            raise ConfigError(f"label l = {l} outside [0, {N - 1}]")
        return l


def _emit(cfg: RunConfig, stem: str, header: Sequence[str], rows: list[Sequence[Any]],
          extra: dict[str, Any] | None = None) -> Path:
    out = Path(cfg.out)
    record = cfg.as_record()
    if extra:
        record["results"] = extra
    if cfg.fmt == "json":
        data = {"columns": list(header), "rows": [list(r) for r in rows]}
        if extra:
            data["results"] = extra
        path = write_json(out / f"{stem}.json", data, record)
    else:
        path = write_csv(out / f"{stem}.csv", header, rows, record)
    print(path)
    return path


def cmd_spectrum(cfg: RunConfig) -> int:
    from .eigensolver import DegenerateSpectrumError, eig_dense, label_spectrum
    from .symbol import symbol_image
    from .toeplitz import build_matrix

    params = cfg.params
    m = int(cfg.options.get("curve_samples") or 512)
    img = symbol_image(params, m) if params.alpha > 0 or params.beta_is_integer else None
    if img is not None:
        rows = [(k, 2 * math.pi * k / m, v.real, v.imag) for k, v in enumerate(img)]
        _emit(cfg, "symbol_curve", ["k", "theta", "re_a", "im_a"], rows)
    for N in cfg.Ns:
        raw = eig_dense(build_matrix(params, N))
        try:
            dec = label_spectrum(raw, params)
        except DegenerateSpectrumError as exc:
            log.warning("N=%d: %s; eigenvalues written unlabeled", N, exc)
            rows = [("", e.real, e.imag, "nan", "nan", "nan") for e in sorted(raw.values, key=lambda c: (c.real, c.imag))]
            summary = {"labeled": False, "max_abs_eigenvalue": float(np.abs(raw.values).max())}
        else:
            rows = [(l, e.real, e.imag, g.real, g.imag, dd) for l, (e, g, dd) in
                    enumerate(zip(dec.eigenvalues, dec.grid, dec.match_distance))]
            summary = {"labeled": True, "max_match_distance": float(dec.match_distance.max())}
        _emit(cfg, f"spectrum_N{N}", ["l", "re_eps", "im_eps", "re_grid", "im_grid", "match_distance"], rows, summary)
    return EXIT_OK


def cmd_eigvec(cfg: RunConfig) -> int:
    from .eigensolver import solve

    q = cfg.options.get("branches")
    q = 1 if q is None else int(q)
    if q < 1:
        raise ConfigError("--branches must be >= 1")
    for N in cfg.Ns:
        l = cfg.label(N)
        dec = solve(cfg.params, N)
        psi = dec.right(l)
        phase = np.unwrap(np.angle(psi))
        mag = np.abs(psi)
        rows = []
        for j in range(N):
            lr = math.log(mag[j] / mag[j + 1]) if j + 1 < N and mag[j] > 0 and mag[j + 1] > 0 else "nan"
            rows.append((j, j / (N - 1), psi[j].real, psi[j].imag, mag[j], phase[j], j % q, lr))
        e = dec.eigenvalue(l)
        _emit(cfg, f"eigvec_N{N}_l{l}",
              ["j", "j_frac", "re_psi", "im_psi", "abs_psi", "phase_unwrapped", "branch", "log_ratio_next"],
              rows, {"l": l, "eps": e})
    return EXIT_OK


def cmd_qp_table(cfg: RunConfig) -> int:
    from .quasiparticle import TableRow, qp_table

    part = {"imag": "imag_p", "real": "real_q"}[cfg.options["part"]]
    rows, fit = qp_table(cfg.params, cfg.Ns, cfg.l_rule or "half", part,
                         window=cfg.options.get("window") or "table", anchor=cfg.options.get("anchor"))
    extra = {
        "fit_slope": fit.slope_coeff, "fit_C": fit.C, "anchor_N": fit.anchor_N,
        "ls_slope": fit.ls_slope, "ls_intercept": fit.ls_intercept,
    }
    _emit(cfg, f"qp_table_{cfg.options['part']}_{cfg.l_rule or 'half'}", TableRow.HEADER,
          [r.as_tuple() for r in rows], extra)
    print(f"fit: C = {fit.C:.6g} (anchor N = {fit.anchor_N}), slope = {fit.slope_coeff:.6g}, "
          f"least-squares slope = {fit.ls_slope:.6g}")
    return EXIT_OK


def cmd_wh_compare(cfg: RunConfig) -> int:
    from .asymptotics import tail_term
    from .eigensolver import solve
    from .symbol import winding_number
    from .wienerhopf import WindingGateError, compare_with_exact, psi_s_coeffs, wh_eigenvector

    params = cfg.params
    for N in cfg.Ns:
        l = cfg.label(N)
        dec = solve(params, N)
        eps = dec.eigenvalue(l)
        nu = winding_number(params, eps, 4096)
        if nu != -1:
            raise WindingGateError(
                f"winding number {nu} for eps = {eps:.6g}: "
                + ("only trivial eigenvector solutions" if nu > 0 else "no Wiener-Hopf solution")
            )
        wh = wh_eigenvector(params, eps, N)
        rep = compare_with_exact(wh, dec.right(l), normalize=cfg.options.get("normalize") or "max")
        extra = {
            "l": l, "normalize": cfg.options.get("normalize") or "max", "eps": eps, "z_c": wh.z_c, "C": rep.C, "M": wh.M, "h": wh.h,
            "aliasing_estimate": wh.aliasing_estimate,
            "max_abs_err_half": rep.max_abs_error(int(0.5 * (N - 1))),
            "max_abs_err": rep.max_abs_error(),
        }
        rows = [(j, j / (N - 1), a, r, abs(pe), abs(pw)) for j, a, r, pe, pw in
                zip(rep.j, rep.abs_err, rep.rel_err, rep.psi_exact, rep.psi_wh)]
        _emit(cfg, f"wh_compare_N{N}_l{l}", ["j", "j_frac", "abs_err", "rel_err", "abs_psi_exact", "abs_psi_wh"],
              rows, extra)
        J = int(cfg.options.get("s_terms") or N)
        cS = psi_s_coeffs(params, eps, J)
        tt = np.concatenate([[np.nan], np.abs(tail_term(params, eps, np.arange(1, J)))])
        _emit(cfg, f"psi_s_N{N}_l{l}", ["j", "re_psi_s", "im_psi_s", "abs_psi_s", "abs_tail_term"],
              [(j, c.real, c.imag, abs(c), t) for j, (c, t) in enumerate(zip(cS, tt))])
        print(f"N={N} l={l}: max |err| {extra['max_abs_err']:.3g}, for j <= 0.5(N-1): {extra['max_abs_err_half']:.3g}")
    return EXIT_OK


def cmd_asymptotics(cfg: RunConfig) -> int:
    from .asymptotics import (eigenvalue_shift, interference_ratio, measured_shift, predicted_im_p,
                              psi_two_term, two_term_model)
    from .eigensolver import solve
    from .quasiparticle import p_from_eigenvalue, p_psi_table
    from .wienerhopf import find_zc

    params = cfg.params
    if cfg.l is None and cfg.l_rule is None and cfg.l_frac is None:
        cfg.l_frac = 0.25
    k = 2.0 * params.alpha + 1.0
    shift_rows, law_rows = [], []
    for N in cfg.Ns:
        l = cfg.label(N)
        dec = solve(params, N)
        eps = dec.eigenvalue(l)
        p = 2.0 * math.pi * l / (N - 1)
        ms = measured_shift(dec.eigenvalues, params, l)
        pr = eigenvalue_shift(params, p, N)
        shift_rows.append((N, l, p, ms.real, ms.imag, pr.real, pr.imag, abs(ms - pr) / abs(pr)))
        im_eps = p_from_eigenvalue(eps, l, N, params).imag
        im_psi = p_psi_table(dec.right(l), l, N).imag
        law_rows.append((N, l, k, im_psi, im_eps, predicted_im_p(params.alpha, N),
                         im_psi * N - k * math.log(N)))
        zc = find_zc(params, eps, np.exp(-1j * p) * (1 + 3.0 / N))
        model = two_term_model(params, eps, zc, N // 2)
        j = np.arange(N)
        tt = psi_two_term(model, j)
        overlay = [(jj, abs(dec.right(l)[jj]), abs(tt[jj]), abs(model.exp_term(jj)), abs(model.alg_term(jj)))
                   for jj in j]
        _emit(cfg, f"two_term_N{N}_l{l}", ["j", "abs_psi_exact", "abs_two_term", "abs_exp_term", "abs_tail_term"],
              overlay, {"A": model.A, "B": model.B, "z_c": zc, "j_ref": model.j_ref,
                        "interference_ratio": interference_ratio(model, N)})
    _emit(cfg, "eigenvalue_shift",
          ["N", "l", "p", "re_measured", "im_measured", "re_predicted", "im_predicted", "rel_deviation"], shift_rows)
    _emit(cfg, "im_p_law", ["N", "l", "exponent", "im_p_psi", "im_p_eps", "leading_term", "im_p_psi_N_minus_log"],
          law_rows)
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "eigvec": cmd_eigvec,
    "qp-table": cmd_qp_table,
    "wh-compare": cmd_wh_compare,
    "asymptotics": cmd_asymptotics,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=parse_rational, default=Fraction(1, 3), help="zero strength (e.g. 1/3)")
    common.add_argument("--beta", type=parse_rational, default=Fraction(-1, 2), help="jump strength (e.g. -1/2)")
    nn = common.add_mutually_exclusive_group()
    nn.add_argument("--n", type=int, help="matrix order")
    nn.add_argument("--n-list", type=parse_n_list, help="comma-separated matrix orders")
    ll = common.add_mutually_exclusive_group()
    ll.add_argument("--l", type=int, help="explicit eigenvalue label")
    ll.add_argument("--l-rule", choices=["half", "golden", "quarter", "golden-literal"])
    ll.add_argument("--l-frac", type=float, help="label l = floor(frac * (N-1))")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")
    common.add_argument("--allow-out-of-range", action="store_true",
                        help="permit parameters outside 0 < alpha < |beta| < 1")
    common.add_argument("--threads", type=int, help="BLAS/LAPACK thread count")
    common.add_argument("--seed", type=int, default=0, help="reserved; the numerics are deterministic")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="fhtoeplitz", description="Fisher-Hartwig Toeplitz spectra and eigenvectors")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("spectrum", parents=[common], help="symbol curve and labeled eigenvalues")
    sp.add_argument("--curve-samples", type=int, default=512)
    sp = sub.add_parser("eigvec", parents=[common], help="one eigenvector with branch and ratio columns")
    sp.add_argument("--branches", type=int, default=1)
    sp = sub.add_parser("qp-table", parents=[common], help="momentum tables and log-law fit")
    sp.add_argument("--part", choices=["imag", "real"], default="imag")
    sp.add_argument("--window", choices=["table", "literal"], default="table")
    sp.add_argument("--anchor", type=int, help="N at which the fit residual is pinned to 0 (default: largest)")
    sp = sub.add_parser("wh-compare", parents=[common], help="Wiener-Hopf vs exact eigenvector")
    sp.add_argument("--s-terms", type=int, help="number of exp(-S) coefficients to write (default N)")
    sp.add_argument("--normalize", choices=["max", "none"], default="max",
                    help="scale of the exact eigenvector before matching C (default: unit max modulus)")
    sub.add_parser("asymptotics", parents=[common], help="two-term model, Im p law, eigenvalue shift")
    return p


_OPTION_KEYS = ("curve_samples", "branches", "part", "window", "anchor", "s_terms", "normalize")


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    Ns = ns.n_list if ns.n_list is not None else ([ns.n] if ns.n is not None else None)
    if Ns is None:
        Ns = [40, 100, 200, 400] if ns.command == "qp-table" else [40]
    if any(N < 2 for N in Ns):
        raise ConfigError("matrix orders must be >= 2")
    from .eigensolver import DEFAULT_CAP

    if any(N > DEFAULT_CAP for N in Ns):
        raise ConfigError(f"matrix orders above the solver cap {DEFAULT_CAP} are not supported")
    if ns.threads is not None and ns.threads < 1:
        raise ConfigError("--threads must be >= 1")
    if ns.l_frac is not None and not 0.0 <= ns.l_frac <= 1.0:
        raise ConfigError("--l-frac must lie in [0, 1]")
    a, b = ns.alpha, ns.beta
    if not ns.allow_out_of_range and not (0 < a < abs(b) < 1):
        raise ConfigError(f"alpha={a}, beta={b} outside 0 < alpha < |beta| < 1 (use --allow-out-of-range)")
    if a <= Fraction(-1, 2):
        raise ConfigError("alpha must exceed -1/2")
    opts = {k: getattr(ns, k) for k in _OPTION_KEYS if hasattr(ns, k)}
    return RunConfig(ns.command, a, b, list(Ns), ns.l, ns.l_rule, ns.l_frac, ns.out, ns.fmt,
                     ns.allow_out_of_range, ns.threads, ns.seed, opts)


def _thread_limit(n: int | None):
    if n is None:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


_NEG_RATIONAL = re.compile(r"^-\d+(\.\d*)?(/\d+)?$|^-\.\d+$")


def _join_negative_values(argv: Sequence[str]) -> list[str]:
    """'--beta -1/2' -> '--beta=-1/2'; argparse would read '-1/2' as a flag."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in ("--alpha", "--beta"):
            nxt = next(it, None)
            if nxt is not None and _NEG_RATIONAL.match(nxt):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = _join_negative_values(sys.argv[1:] if argv is None else list(argv))
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on bad usage, 0 on --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    from .asymptotics import EndpointError
    from .eigensolver import EigenSolverError
    from .symbol import SymbolError, WindingError
    from .wienerhopf import AliasingError, QuadratureError, WindingGateError

    numerical = (EigenSolverError, SymbolError, WindingError, WindingGateError, QuadratureError,
                 AliasingError, EndpointError, ArithmeticError)
    try:
        cfg = config_from_args(ns)
        with _thread_limit(cfg.threads):
            return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except numerical as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
