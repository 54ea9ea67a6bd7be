"""Command-line front end.

Subcommands: check, solve, verify, perturb, oracle.  One JSON config file
drives everything; --n and --seed override the config.  Outputs are UTF-8
JSON (sorted keys) and RFC-4180 CSV, written under --out.  Identical config
and seed give byte-identical outputs: all randomness is seeded, reductions
are sequential, and no timestamps are recorded.

Exit codes: 0 success, 1 configuration error, 2 hypothesis failure,
3 numerical failure (contour grazing, saturation, unsatisfied estimates).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import estimates as est
from . import oracle1d
from .contrast import (
    CoercivityParams,
    Contrast,
    Domain1D,
    check_hypotheses,
    make_cutoff,
)
from .errors import (
    ConfigurationError,
    InputError,
    IteigError,
    NumericalError,
)
from .grid import build_grid
from .pencil import build_pencil
from .perturbation import eigenvalue_tracking, projector_continuity
from .resolvent import verify_factorization_identity
from .spectral import Contour, eigs_in_contour

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_HYPOTHESIS = 2
EXIT_NUMERICAL = 3

DEFAULT_CONFIG = {
    "domain": [0.0, 1.0],
    "neighborhood_width": 0.2,
    "contrast": {"kind": "polynomial", "data": [8.0]},
    "n": 64,
    "seed": 0,
    "probe_rank": 8,
    "grid_density": 512,
    "contours": [{"center": [-9.8696044010893586, 0.0], "radius": 1.0, "n_quad": 64}],
    "coercivity": {"m_star": 0.5, "m_sup": 100.0, "delta": 0.5},
    "tolerances": {
        "rank_rel": 1e-8,
        "residual_cap": 1e-6,
        "condition_cap": 1e14,
    },
    "lambda_large": 100.0,
    "verify": {
        "lambdas": [100.0, 1000.0, 10000.0],
        "trials": 6,
        "identity_lambda0": 10000.0,
        "identity_trials": 8,
    },
    "perturb": {"epsilon": 1e-3, "steps": 0},
    "oracle": {"n_index": 3.0, "k_min": 2.0, "k_max": 8.0, "scan_points": 2048},
}


def _merge(base: dict, extra: dict) -> dict:
    out = dict(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


_ALLOWED_KEYS = {
    "": set(DEFAULT_CONFIG),
    "contrast": {"kind", "data", "file", "domain", "neighborhood_width"},
    "coercivity": {"m_star", "m_sup", "delta"},
    "tolerances": {"rank_rel", "residual_cap", "condition_cap"},
    "contours[]": {"center", "radius", "n_quad"},
    "verify": {"lambdas", "trials", "identity_lambda0", "identity_trials"},
    "perturb": {"epsilon", "steps", "perturbed", "family"},
    "perturb.family": {"kind", "from", "to"},
    "oracle": {"n_index", "k_min", "k_max", "scan_points"},
}


def _check_keys(raw: dict) -> None:
    def check(obj, section):
        if not isinstance(obj, dict):
            raise ConfigurationError(f"config section {section or 'top level'} "
                                     "must be a mapping")
        unknown = sorted(set(obj) - _ALLOWED_KEYS[section])
        if unknown:
            where = section or "top level"
            raise ConfigurationError(f"unknown config keys in {where}: {unknown}")

    check(raw, "")
    for sec in ("contrast", "coercivity", "tolerances", "verify", "perturb",
                "oracle"):
        if sec in raw and isinstance(raw[sec], dict):
            check(raw[sec], sec)
    for c in raw.get("contours", []):
        check(c, "contours[]")
    pert = raw.get("perturb", {})
    if isinstance(pert, dict):
        if isinstance(pert.get("perturbed"), dict):
            check(pert["perturbed"], "contrast")
        if isinstance(pert.get("family"), dict):
            check(pert["family"], "perturb.family")


class RunConfig:
    """Validated configuration for one CLI invocation."""

    def __init__(self, raw: dict):
        self.raw = raw
        _check_keys(raw)
        try:
            a, b = (float(x) for x in raw["domain"])
            self.domain = Domain1D(a, b, float(raw["neighborhood_width"]))
            self.n = int(raw["n"])
            self.seed = int(raw["seed"])
            self.probe_rank = int(raw["probe_rank"])
            self.grid_density = int(raw["grid_density"])
            self.contrast = self._load_contrast(raw["contrast"])
            co = raw["coercivity"]
            self.coercivity = CoercivityParams(
                m_star=float(co["m_star"]),
                m_sup=float(co["m_sup"]),
                delta=float(co["delta"]),
            )
            tol = raw["tolerances"]
            self.rank_rel = float(tol["rank_rel"])
            self.residual_cap = float(tol["residual_cap"])
            self.condition_cap = float(tol["condition_cap"])
            if min(self.rank_rel, self.residual_cap, self.condition_cap) <= 0:
                raise ConfigurationError("tolerances must be positive")
            self.contours = [
                Contour(
                    complex(c["center"][0], c["center"][1]),
                    float(c["radius"]),
                    int(c.get("n_quad", 64)),
                )
                for c in raw["contours"]
            ]
            self.lambda_large = float(raw["lambda_large"])
            self.verify = raw["verify"]
            self.perturb = raw["perturb"]
            self.oracle = raw["oracle"]
        except IteigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"malformed config: {exc!r}") from exc

    def _load_contrast(self, spec) -> Contrast:
        if isinstance(spec, dict) and "file" in spec:
            path = Path(spec["file"])
            if not path.exists():
                raise ConfigurationError(f"contrast file not found: {path}")
            return Contrast.from_json(path)
        if isinstance(spec, dict):
            obj = dict(spec)
            obj.setdefault("domain", self.raw["domain"])
            obj.setdefault("neighborhood_width", self.raw["neighborhood_width"])
            return Contrast.from_dict(obj)
        raise ConfigurationError("contrast must be a mapping")


def load_config(path: str | None, overrides: dict) -> RunConfig:
    raw = DEFAULT_CONFIG
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigurationError(f"config file not found: {p}")
        try:
            with open(p, encoding="utf-8") as fh:
                raw = _merge(raw, json.load(fh))
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config is not valid JSON: {exc}") from exc
    raw = _merge(raw, {k: v for k, v in overrides.items() if v is not None})
    return RunConfig(raw)


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_csv(path: Path, header: list, rows: list) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def cmd_check(cfg: RunConfig, out: Path) -> int:
    report = check_hypotheses(cfg.contrast, cfg.coercivity, cfg.grid_density)
    branch = report.branch or "none"
    theta = "-" if report.witness_theta is None else f"{report.witness_theta:.6f}"
    print(
        "hypothesis 1 (boundary coercivity): "
        f"{'PASS' if report.passes_item1 else 'FAIL'} branch={branch} theta={theta}"
    )
    print(f"hypothesis 2 (boundedness): {'PASS' if report.passes_item2 else 'FAIL'}")
    print(
        "hypothesis 3 (weight lower bound): "
        f"{'PASS' if report.passes_item3 else 'FAIL'}"
    )
    if report.violating_points:
        pts = ", ".join(f"{x:.6f}" for x in report.violating_points[:8])
        print(f"violating points: {pts}")
    _write_json(out / "check.json", report.to_dict())
    return EXIT_OK if report.all_pass else EXIT_HYPOTHESIS


def _hypothesis_gate(cfg: RunConfig, force: bool) -> int | None:
    report = check_hypotheses(cfg.contrast, cfg.coercivity, cfg.grid_density)
    if report.all_pass or force:
        return None
    items = [
        name
        for ok, name in [
            (report.passes_item1, "boundary coercivity"),
            (report.passes_item2, "boundedness"),
            (report.passes_item3, "weight lower bound"),
        ]
        if not ok
    ]
    print(f"hypothesis check failed ({', '.join(items)}); rerun with --force")
    return EXIT_HYPOTHESIS


def cmd_solve(cfg: RunConfig, out: Path, force: bool, oracle_compare: bool,
              dump_matrices: bool) -> int:
    gate = _hypothesis_gate(cfg, force)
    if gate is not None:
        return gate
    grid = build_grid(cfg.domain, cfg.n)
    pencil = build_pencil(grid, cfg.contrast)
    if dump_matrices:
        out.mkdir(parents=True, exist_ok=True)
        pencil.dump(out / "pencil.npz")

    results = []
    for i, contour in enumerate(cfg.contours):
        try:
            res = eigs_in_contour(
                pencil,
                contour,
                probe_rank=cfg.probe_rank,
                seed=cfg.seed,
                residual_cap=cfg.residual_cap,
                rank_rel=cfg.rank_rel,
                condition_cap=cfg.condition_cap,
            )
        except NumericalError as exc:
            print(f"contour {i}: numerical failure: {exc}")
            print(
                "suggestion: grow or shrink the radius by ~1% (or recenter) "
                "so no eigenvalue sits near the circle"
            )
            return EXIT_NUMERICAL
        results.append(res)
        print(
            f"contour {i}: center=({contour.center.real:g},{contour.center.imag:g}) "
            f"radius={contour.radius:g} count={len(res.eigenvalues)} "
            f"multiplicity_total={res.multiplicity_total}"
        )
        for lam, r, m in zip(res.eigenvalues, res.residuals, res.multiplicities):
            print(
                f"  eigenvalue {lam.real:+.12e} {lam.imag:+.12e}j "
                f"residual={r:.3e} multiplicity={m}"
            )

    _write_json(
        out / "eigenvalues.json",
        {"n": cfg.n, "seed": cfg.seed, "contours": [r.to_dict() for r in results]},
    )
    rows = []
    for i, res in enumerate(results):
        for lam, r, m, fl in zip(
            res.eigenvalues, res.residuals, res.multiplicities, res.boundary_flags
        ):
            rows.append(
                [i, repr(float(lam.real)), repr(float(lam.imag)), repr(float(r)),
                 int(m), bool(fl)]
            )
    _write_csv(
        out / "eigenvalues.csv",
        ["contour", "re", "im", "residual", "multiplicity", "boundary_ambiguous"],
        rows,
    )

    if oracle_compare:
        code = _oracle_compare(cfg, results)
        if code != EXIT_OK:
            return code
    return EXIT_OK


def _oracle_compare(cfg: RunConfig, results) -> int:
    m_vals = np.asarray(cfg.contrast(np.linspace(cfg.domain.a, cfg.domain.b, 64)))
    if np.max(np.abs(m_vals - m_vals[0])) > 1e-12 or abs(m_vals[0].imag) > 1e-12:
        print("oracle comparison needs a constant real contrast")
        return EXIT_CONFIG
    one_plus = 1.0 + m_vals[0].real
    if one_plus <= 0:
        print("oracle comparison needs 1 + m > 0")
        return EXIT_CONFIG
    n_index = float(np.sqrt(one_plus))
    L = cfg.domain.length

    print("oracle comparison (constant index {:.6g}):".format(n_index))
    worst = 0.0
    for i, (contour, res) in enumerate(zip(cfg.contours, results)):
        c, r = contour.center.real, contour.radius
        lam_lo, lam_hi = c - r, min(c + r, -1e-9)
        if lam_hi <= lam_lo:
            print(f"  contour {i}: window has no negative real part; skipped")
            continue
        # lambda = -(k/L)^2 on a domain of length L, oracle canonical on (0,1)
        k_lo = float(np.sqrt(-lam_hi)) * L
        k_hi = float(np.sqrt(-lam_lo)) * L
        roots = oracle1d.find_real_roots(n_index, k_lo, k_hi)
        lam_oracle = [-((rt.k / L) ** 2) for rt in roots]
        near_real = [
            z
            for z in res.eigenvalues
            if abs(z.imag) <= 1e-6 * max(1.0, abs(z))
        ]
        for lo in lam_oracle:
            if near_real:
                best = min(near_real, key=lambda z: abs(z - lo))
                rel = abs(best - lo) / max(1.0, abs(lo))
            else:
                best, rel = None, np.inf
            worst = max(worst, rel)
            print(f"  oracle {lo:+.9e}  solver "
                  f"{'-' if best is None else f'{best.real:+.9e}'}  rel={rel:.3e}")
        for z in near_real:
            if not lam_oracle or min(abs(z - l) for l in lam_oracle) > 1e-6 * max(
                1.0, abs(z)
            ):
                print(f"  unmatched solver eigenvalue {z.real:+.9e}")
                worst = np.inf
    print(f"oracle comparison: max mismatch = {worst:.3e}")
    return EXIT_OK if worst < 1e-6 else EXIT_NUMERICAL


def cmd_verify(cfg: RunConfig, out: Path) -> int:
    grid = build_grid(cfg.domain, cfg.n)
    pencil = build_pencil(grid, cfg.contrast)
    phi = make_cutoff(cfg.domain)
    m = pencil.contrast_on_grid
    lambdas = [float(l) for l in cfg.verify["lambdas"]]
    kept = [l for l in lambdas if l >= cfg.lambda_large]
    for l in lambdas:
        if l < cfg.lambda_large:
            print(
                f"skipping lambda={l:g}: below the large-lambda threshold "
                f"{cfg.lambda_large:g}"
            )
    if not kept:
        print("no lambdas at or above the threshold; nothing to verify")
        return EXIT_CONFIG

    reports: list[est.EstimateReport] = []
    config_errors: list[str] = []
    numerical_errors: list[str] = []

    x01 = (grid.nodes - cfg.domain.a) / cfg.domain.length
    states = [
        np.sin(np.pi * x01).astype(complex),
        np.cos(3 * np.pi * x01).astype(complex),
        np.sin(2 * np.pi * x01) + 0.3 * np.cos(5 * np.pi * x01),
        np.exp(-50.0 * (x01 - 0.5) ** 2).astype(complex),
        np.ones_like(x01, dtype=complex),
    ]

    # concentration suite, both weight choices
    for rho_tag, rho in (("one", np.ones_like(m)), ("weight", 1.0 + m)):
        try:
            ks = est.fit_concentration_K(states, rho, phi, kept[0], grid)
            for lam in kept:
                for v in states:
                    reports.extend(
                        est.verify_concentration(v, rho, phi, lam, grid, fitted_K=ks)
                    )
            print(f"concentration (rho={rho_tag}): fitted K "
                  + ", ".join(f"{k}={v:.4g}" for k, v in sorted(ks.items())))
        except InputError as exc:
            config_errors.append(f"concentration rho={rho_tag}: {exc}")
            print(f"suite concentration (rho={rho_tag}) precondition failed: {exc}")

    # contrast-mass corollary
    try:
        ks = est.fit_corollary_K(states, m, phi, kept[0], grid)
        for lam in kept:
            for v in states:
                reports.extend(
                    est.verify_corollary(
                        v, m, phi, lam, cfg.coercivity, grid, fitted_K=ks
                    )
                )
        print("contrast-mass corollary: fitted K "
              + ", ".join(f"{k}={v:.4g}" for k, v in sorted(ks.items())))
    except InputError as exc:
        config_errors.append(f"corollary: {exc}")
        print(f"suite contrast-mass corollary precondition failed: {exc}")

    # resolvent scalings
    try:
        reports.extend(
            est.verify_resolvent_estimates(
                pencil, kept, trials=int(cfg.verify["trials"]), seed=cfg.seed
            )
        )
    except NumericalError as exc:
        numerical_errors.append(f"resolvent estimates: {exc}")
        print(f"suite resolvent estimates failed: {exc}")

    # coupling identity with random unit data
    lam0 = float(cfg.verify["identity_lambda0"])
    rng = np.random.default_rng(cfg.seed)
    worst_id = 0.0
    try:
        for _ in range(int(cfg.verify["identity_trials"])):
            f = est.random_smooth_data(grid, rng)
            g = est.random_smooth_data(grid, rng)
            worst_id = max(worst_id, est.verify_identity_12(pencil, lam0, f, g))
        print(f"coupling identity residual (lambda={lam0:g}, worst trial): "
              f"{worst_id:.3e}")
    except NumericalError as exc:
        numerical_errors.append(f"coupling identity: {exc}")
        print(f"coupling identity failed: {exc}")

    # factorization identity in extended precision
    try:
        resid = verify_factorization_identity(pencil, lam0)
        print(f"factorization identity residual at lambda0={lam0:g}: {resid:.3e}")
    except NumericalError as exc:
        numerical_errors.append(f"factorization identity: {exc}")
        print(f"factorization identity failed: {exc}")

    _write_csv(
        out / "estimates.csv",
        ["inequality", "lambda", "lhs", "rhs_without_K", "fitted_K", "satisfied"],
        [r.to_row() for r in reports],
    )
    bad = [r for r in reports if not r.satisfied]
    print(
        f"estimates: {len(reports) - len(bad)}/{len(reports)} satisfied; "
        f"{len(config_errors)} precondition failures"
    )
    if config_errors:
        return EXIT_CONFIG
    if numerical_errors or bad:
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_perturb(cfg: RunConfig, out: Path) -> int:
    grid = build_grid(cfg.domain, cfg.n)
    pencil_m = build_pencil(grid, cfg.contrast)
    spec = cfg.perturb
    if "perturbed" in spec:
        obj = dict(spec["perturbed"])
        obj.setdefault("domain", cfg.raw["domain"])
        perturbed = Contrast.from_dict(obj)
    else:
        eps = float(spec.get("epsilon", 1e-3))
        base = cfg.contrast

        def shifted(x, _base=base, _eps=eps):
            return _base(x) + _eps

        perturbed = _CallableContrast(shifted, cfg.domain)
    pencil_p = build_pencil(grid, perturbed)

    contour = cfg.contours[0]
    try:
        rep = projector_continuity(
            pencil_m, pencil_p, contour, weighted=True, allow_large=True
        )
    except NumericalError as exc:
        print(f"perturbation experiment failed: {exc}")
        return EXIT_NUMERICAL
    status = (
        "not-applicable (smallness condition violated)"
        if rep.satisfied is None
        else ("satisfied" if rep.satisfied else "VIOLATED")
    )
    print(
        f"perturbation size={rep.perturbation_size:.6e} "
        f"measured={rep.measured_delta_P:.6e} bound={rep.bound:.6e} "
        f"ranks {rep.rank_before}->{rep.rank_after} status={status}"
    )
    _write_json(
        out / "continuity.json",
        {
            "perturbation_size": rep.perturbation_size,
            "measured_delta_P": rep.measured_delta_P,
            "bound": None if not np.isfinite(rep.bound) else rep.bound,
            "satisfied": rep.satisfied,
            "rank_before": rep.rank_before,
            "rank_after": rep.rank_after,
            "gamma": rep.gamma,
            "max_principal_angle": rep.max_principal_angle,
        },
    )

    fam = spec.get("family")
    steps = int(spec.get("steps", 0) or 0)
    if fam and steps >= 2:
        if fam.get("kind") != "index-linear":
            print(f"unknown family kind {fam.get('kind')!r}")
            return EXIT_CONFIG
        n0, n1 = float(fam["from"]), float(fam["to"])

        def family(t, _n0=n0, _n1=n1):
            return Contrast.from_index(_n0 + (_n1 - _n0) * t, cfg.domain)

        traj = eigenvalue_tracking(
            family, steps, contour, grid, probe_rank=cfg.probe_rank, seed=cfg.seed
        )
        _write_csv(
            out / "trajectory.csv",
            ["t", "re", "im", "residual", "rank", "flag"],
            traj.rows(),
        )
        print(f"trajectory: {steps} steps written")
    if rep.satisfied is False:
        return EXIT_NUMERICAL
    return EXIT_OK


class _CallableContrast(Contrast):
    """Contrast wrapping an arbitrary callable (internal plumbing)."""

    def __init__(self, fn, domain: Domain1D):
        self.kind = "callable"
        self.domain = domain
        self._fn = fn

    def __call__(self, x):
        return np.asarray(self._fn(np.asarray(x, dtype=float)), dtype=complex)


def cmd_oracle(cfg: RunConfig, out: Path) -> int:
    oc = cfg.oracle
    try:
        roots = oracle1d.find_real_roots(
            float(oc["n_index"]),
            float(oc["k_min"]),
            float(oc["k_max"]),
            int(oc.get("scan_points", 2048)),
        )
    except IteigError as exc:
        print(f"oracle failed: {exc}")
        return EXIT_CONFIG if isinstance(exc, InputError) else EXIT_NUMERICAL
    for r in roots:
        print(f"k={r.k:.12f} lambda={r.lam:+.12e} |det|={r.det_residual:.3e}")
    print(f"{len(roots)} roots in [{oc['k_min']}, {oc['k_max']}]")
    _write_csv(
        out / "oracle.csv",
        ["n_index", "k", "lambda", "det_residual"],
        [
            [repr(float(oc["n_index"])), repr(r.k), repr(r.lam), repr(r.det_residual)]
            for r in roots
        ],
    )
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigurationError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="iteig", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("check", "solve", "verify", "perturb", "oracle"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None)
        sp.add_argument("--n", type=int, default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", default="results")
        if name == "solve":
            sp.add_argument("--force", action="store_true")
            sp.add_argument("--oracle-compare", action="store_true")
            sp.add_argument("--dump-matrices", action="store_true")
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = load_config(args.config, {"n": args.n, "seed": args.seed})
        out = Path(args.out)
        if args.command == "check":
            return cmd_check(cfg, out)
        if args.command == "solve":
            return cmd_solve(
                cfg, out, args.force, args.oracle_compare, args.dump_matrices
            )
        if args.command == "verify":
            return cmd_verify(cfg, out)
        if args.command == "perturb":
            return cmd_perturb(cfg, out)
        if args.command == "oracle":
            return cmd_oracle(cfg, out)
        raise ConfigurationError(f"unknown command {args.command!r}")
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
