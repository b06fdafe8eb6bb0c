"""``lenscontact`` command line.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or schema error.
Set LENSCONTACT_LOG to error, warn, info or debug for logging.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time

import numpy as np

from . import descriptor
from .contact_form import from_periods, from_triple, overlap_consistency
from .contactomorphism import (build_psi_map, strict_equivalence_predicate, verify_cocycle,
                               verify_pullback)
from .errors import InvalidLensError, InvalidRotationError, LensContactError, SchemaError
from .lens_atlas import ChartPoint, make_lens
from .metric_curvature import reeb_invariance_check, verify_compatibility
from .profile import flat_end_profile, validate_monotone, validate_smoothness
from .reeb_dynamics import DMAX, TOL, classify, orbit_samples, samples_csv
from .spectral import CONVERGENCE_COLUMNS, convergence_study, heat_coeffs

log = logging.getLogger("lenscontact")

LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO,
              "debug": logging.DEBUG}


class Report:
    def __init__(self, command: str, inputs: str):
        self.command = command
        self.inputs_digest = descriptor.digest(inputs)
        self.checks = []
        self.data = {}
        self.table = None       # (header, rows) for --csv
        self._t0 = time.perf_counter()

    def check(self, name: str, value, tol: float, claim: str, passed: bool = None):
        value = float(value)
        if passed is None:
            passed = bool(abs(value) < tol)
        self.checks.append({"name": name, "value": value, "tol": tol, "claim": claim,
                            "passed": bool(passed)})

    def fail(self, name: str, message: str, claim: str):
        self.checks.append({"name": name, "value": None, "tol": None, "claim": claim,
                            "passed": False, "error": message})

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_dict(self) -> dict:
        return {"command": self.command, "inputs_digest": self.inputs_digest,
                "passed": self.passed, "checks": self.checks, "data": self.data,
                "wall_time": time.perf_counter() - self._t0}

    def text(self) -> str:
        lines = []
        for key, value in self.data.items():
            lines.append(f"{key}: {value}")
        for c in self.checks:
            mark = "PASS" if c["passed"] else "FAIL"
            if c["value"] is None:
                lines.append(f"{mark} {c['name']}: {c.get('error')}")
            else:
                lines.append(f"{mark} {c['name']}: {c['value']:.3e} (tol {c['tol']:.0e})")
        lines.append("overall: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


def _emit(report: Report, args) -> int:
    if args.csv and report.table is not None:
        header, rows = report.table
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        out = buf.getvalue()
    elif args.json:
        out = json.dumps(report.to_dict(), indent=2, default=str) + "\n"
    else:
        out = report.text() + "\n"
    if getattr(args, "report", None):
        with open(args.report, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return 0 if report.passed else 1


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc


def _load(path: str, validate: bool = True):
    text = _read(path)
    return descriptor.form_from_descriptor(descriptor.parse(text), validate), text


def cmd_build(args) -> int:
    lens = make_lens(args.p, args.q)
    if (args.tau1 is None) == (args.phi0 is None):
        raise SchemaError("give exactly one of --tau1 and --phi0")
    if args.phi0 is not None and lens.q + lens.p * args.phi0 <= 0:
        raise InvalidRotationError(f"p*phi0 + q must be positive, got {lens.q + lens.p * args.phi0!r}")
    tau1 = args.tau1 if args.tau1 is not None else args.tau0 / (lens.q + lens.p * args.phi0)
    if not (args.tau0 > 0 and tau1 > 0):
        raise SchemaError("periods must be positive")
    if args.degree is None:
        form = from_periods(lens, args.tau0, tau1)
    else:
        prof = flat_end_profile(lens, args.tau0, tau1, args.degree)
        form = from_triple(prof, args.tau0, prof.boundary.phi0, lens)
    meta = {"tau1_requested": tau1, "degree": form.profile.degree}
    text = descriptor.dumps(descriptor.to_descriptor(form, meta))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    report = Report("build", text)
    report.data.update({"out": args.out or "-", "tau1": form.tau1, "phi0": form.phi0, "phi1": form.phi1})
    if not args.out:
        sys.stdout.write(text)
        return 0
    return _emit(report, args)


def cmd_validate(args) -> int:
    form, text = _load(args.descriptor, validate=False)
    report = Report("validate", text + f"seed={args.seed}")
    smooth = validate_smoothness(form.profile)
    for name, c in smooth.checks.items():
        report.check(f"smoothness:{name}", c["value"], c["tol"], "profile extends smoothly across both cores")
    if "a''(0)-1" in smooth.gauge:
        report.check("gauge:a''(0)-1", smooth.gauge["a''(0)-1"], 1e-10, "metric smooth at core 0")
        report.check("gauge:a''(1)-target", smooth.gauge["a''(1)-target"], 1e-10, "metric smooth at core 1")
    mono = validate_monotone(form.profile)
    report.check("monotone", 0.0 if mono else 1.0, 0.5, "a' > 0 on (0, 1)", passed=mono)
    report.check("overlap_consistency", overlap_consistency(form, 1000, args.seed), 1e-10,
                 "chart forms agree on the overlap")
    try:
        comp = verify_compatibility(form, 1000, args.seed)
        report.check("compat:g(R,.)-alpha", comp["g(R,.)-alpha"], 1e-10, "g(R, .) = alpha")
        report.check("compat:sqrt(det g)-density", comp["sqrt(det g)-density"], 1e-10,
                     "vol_g = alpha ^ d alpha")
    except (LensContactError, np.linalg.LinAlgError) as exc:
        report.fail("compatibility", str(exc), "compatible metric")
    report.check("reeb_invariance", reeb_invariance_check(form, 100, 1e-4, args.seed), 1e-8,
                 "L_R g = 0")
    return _emit(report, args)


def cmd_classify(args) -> int:
    form, text = _load(args.descriptor)
    report = Report("classify", text + f"Dmax={args.dmax} tol={args.tol}")
    verdict = classify(form, Dmax=args.dmax, tol=args.tol)
    report.data["verdict"] = verdict.summary()
    report.data["classification"] = verdict.to_dict()
    if verdict.kind == "irregular":
        report.check("periodic_orbits", verdict.periodic_count - 2, 0.5, "exactly the two cores are periodic")
    rows = [[o.chart, o.radius, o.is_core, o.periodic, o.minimal_period, o.rotation_number]
            for o in verdict.orbits]
    report.table = (["chart", "radius", "is_core", "periodic", "minimal_period", "rotation_number"], rows)
    return _emit(report, args)


def cmd_flow(args) -> int:
    form, text = _load(args.descriptor)
    rng = np.random.default_rng(args.seed)
    r = args.r if args.r is not None else float(rng.uniform(0.05, 0.95))
    pt = ChartPoint(args.chart, r, args.theta, args.z)
    rows = orbit_samples(form, pt, args.t_max, args.dt)
    if args.csv:
        sys.stdout.write(samples_csv(rows))
        return 0
    report = Report("flow", text + f"{r} {args.theta} {args.z} {args.t_max} {args.dt}")
    report.data.update({"start": [args.chart, r, args.theta, args.z], "samples": len(rows),
                        "end": list(rows[-1])})
    report.table = (["t", "chart", "r", "theta", "z"], rows)
    return _emit(report, args)


def cmd_heat_trace(args) -> int:
    form, text = _load(args.descriptor)
    report = Report("heat-trace", text)
    coeffs = heat_coeffs(form)
    report.data.update({"class": classify(form).kind, "C0": coeffs.C0, "C1": coeffs.C1})
    report.data["C0_closed_form"] = form.lens.p * form.tau0 * form.tau1
    report.data["C1_closed_form"] = 2 * math.pi * (form.tau0 + form.tau1)
    report.check("C0_vs_volume_quadrature", coeffs.checks["volume_rel"], 1e-8, "C0 = vol = p tau0 tau1")
    report.check("C1_vs_curvature_quadrature", coeffs.checks["curvature_rel"], 1e-6,
                 "C1 = integral of kappa = 2 pi (tau0 + tau1)")
    report.table = (["C0", "C1"], [[coeffs.C0, coeffs.C1]])
    return _emit(report, args)


def cmd_contacto(args) -> int:
    A, ta = _load(args.first)
    B, tb = _load(args.second)
    report = Report("contacto", ta + tb + f"seed={args.seed}")
    equivalent = strict_equivalence_predicate(A, B)
    report.data["strictly_equivalent"] = equivalent
    if equivalent and abs(A.tau0 - B.tau0) < 1e-12 and abs(A.phi0 - B.phi0) < 1e-12:
        psi = build_psi_map(A, B)
        report.check("pullback", verify_pullback(psi, A, B, 1000, args.seed), 1e-8, "Psi^* beta = alpha")
        report.check("cocycle", verify_cocycle(psi, 1000, args.seed), 1e-8, "Psi well defined on the overlap")
        report.table = (["r", "rho0", "rho1"], psi.sample())
    elif equivalent:
        report.data["note"] = "cores match with the charts swapped; the radial map is built for equal (tau0, phi0)"
    return _emit(report, args)


def cmd_deform(args) -> int:
    form, text = _load(args.descriptor)
    report = Report("deform", text + f"count={args.count}")
    rows = convergence_study(form, args.count)
    report.data["rows"] = rows
    last = rows[-1]
    report.check("final_resid_C1", last["resid_C1"], args.c1_tol, "C1 of quasi-regular approximants converges")
    resid = [row["resid_C1"] for row in rows[1:]]
    report.check("resid_C1_decreasing", 0.0, 0.5, "monotone convergence",
                 passed=all(b < a for a, b in zip(resid, resid[1:])))
    report.table = (CONVERGENCE_COLUMNS, [[row[k] for k in CONVERGENCE_COLUMNS] for row in rows])
    return _emit(report, args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lenscontact", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="machine-readable report")
        p.add_argument("--csv", action="store_true", help="emit the command's table as CSV")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized sampling")
        p.add_argument("--report", help="write the report here instead of stdout")
        return p

    b = common(sub.add_parser("build", help="write a form descriptor"))
    b.add_argument("--p", type=int, required=True)
    b.add_argument("--q", type=int, required=True)
    b.add_argument("--tau0", type=float, required=True)
    b.add_argument("--tau1", type=float)
    b.add_argument("--phi0", type=float)
    b.add_argument("--degree", type=int, help="flat-ended profile of this odd degree instead of the default")
    b.add_argument("--out", help="descriptor path (stdout if omitted)")
    b.set_defaults(func=cmd_build)

    v = common(sub.add_parser("validate", help="smoothness, compatibility and invariance checks"))
    v.add_argument("descriptor")
    v.set_defaults(func=cmd_validate)

    c = common(sub.add_parser("classify", help="quasi-regular or irregular"))
    c.add_argument("descriptor")
    c.add_argument("--dmax", type=int, default=DMAX)
    c.add_argument("--tol", type=float, default=TOL)
    c.set_defaults(func=cmd_classify)

    f = common(sub.add_parser("flow", help="sample a Reeb orbit"))
    f.add_argument("descriptor")
    f.add_argument("--chart", type=int, choices=(0, 1), default=0)
    f.add_argument("--r", type=float, help="radius (random if omitted)")
    f.add_argument("--theta", type=float, default=0.0)
    f.add_argument("--z", type=float, default=0.0)
    f.add_argument("--t-max", type=float, default=10.0)
    f.add_argument("--dt", type=float, default=0.01)
    f.set_defaults(func=cmd_flow)

    h = common(sub.add_parser("heat-trace", help="leading heat-trace coefficients"))
    h.add_argument("descriptor")
    h.set_defaults(func=cmd_heat_trace)

    k = common(sub.add_parser("contacto", help="strict contactomorphism between two forms"))
    k.add_argument("first")
    k.add_argument("second")
    k.set_defaults(func=cmd_contacto)

    d = common(sub.add_parser("deform", help="quasi-regular approximation study"))
    d.add_argument("descriptor")
    d.add_argument("--count", type=int, default=6)
    d.add_argument("--c1-tol", type=float, default=1e-3)
    d.set_defaults(func=cmd_deform)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("LENSCONTACT_LOG", "warn").lower()
    logging.basicConfig(level=LOG_LEVELS.get(level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, InvalidLensError, InvalidRotationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LensContactError as exc:
        print(f"check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
