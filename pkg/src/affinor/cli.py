"""Command-line front end: suite orchestration and deterministic reports.

Verbs::

    affinor list
    affinor export <fixture> <path>
    affinor verify <spec-file-or-fixture> [--sub FILE] [--points N]
            [--seed S] [--tol T] [--checks id,id,...]
            [--format text|json] [-o PATH]

Exit codes: 0 no fail/MISMATCH; 1 at least one fail or MISMATCH;
2 input error; 3 rank-ambiguous or indeterminate present (and no fail).

``AFFINOR_THREADS`` (0 = auto) fans independent checks out over a thread
pool; reports are always merged in the fixed check order, so the output
bytes do not depend on the thread count.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import report as rp
from .affinor_manifold import (
    check_compatibility,
    check_fundamental_form,
    check_nondegeneracy,
    check_parallel,
    check_structure_family,
)
from .catalog import get_fixture, list_fixtures
from .chart_calculus import ManifoldSpec
from .expr_dsl import ParseError
from .integrability_suite import (
    Hypotheses,
    check_eq38,
    check_eq410,
    check_eq414,
    check_prop42,
    check_theorem31,
    check_theorem33,
    check_theorem44,
    check_theorem46,
    check_theorem48,
    check_theorem410,
    compute_hypotheses,
    failed_hypotheses,
    inapplicable_report,
)
from .report import CheckReport, emit_report, exit_code_for
from .sampling import DEFAULT_POINTS, DEFAULT_SEED, sample_domain
from .semi_invariant import (
    classify_submanifold,
    verify_cor26,
    verify_definition21,
    verify_prop25,
)
from .specfile import SpecFileError, format_spec, load_spec
from .submanifold_geometry import (
    SubmanifoldSpec,
    duality_check,
    frames_check,
    h_symmetry_check,
    totally_geodesic_check,
)

__all__ = ["SuiteOptions", "run_suite", "main", "console_main", "CHECK_ORDER"]

CHECK_ORDER = (
    "eq_1_1_compatibility",
    "nondegeneracy",
    "prop_1_3_fundamental_form",
    "eq_4_1_parallelism",
    "structure_family",
    "frames",
    "eq_1_4_duality",
    "h_symmetry",
    "totally_geodesic",
    "def_2_1_semi_invariant",
    "submanifold_class",
    "prop_2_5",
    "cor_2_6",
    "thm_3_1_d_integrability",
    "thm_3_3_dperp_integrability",
    "eq_3_8_two_path",
    "prop_4_2_weingarten_commutator",
    "thm_4_4_dperp_integrable",
    "thm_4_6_d_integrability_h",
    "eq_4_10_two_path",
    "thm_4_8_totally_geodesic_dperp",
    "eq_4_14_chain",
    "thm_4_10_totally_geodesic_d",
)

# hypothesis profile per theorem check, used when the check cannot even run
_THEOREM_NEEDS = {
    "thm_3_1_d_integrability": dict(need_nondegenerate=True),
    "thm_3_3_dperp_integrability": dict(need_nondegenerate=True),
    "eq_3_8_two_path": dict(),
    "prop_4_2_weingarten_commutator": dict(need_nondegenerate=True, need_parallel=True),
    "thm_4_4_dperp_integrable": dict(need_nondegenerate=True, need_parallel=True,
                                     need_mu=1),
    "thm_4_6_d_integrability_h": dict(need_nondegenerate=True, need_parallel=True),
    "eq_4_10_two_path": dict(need_nondegenerate=True, need_parallel=True),
    "thm_4_8_totally_geodesic_dperp": dict(need_nondegenerate=True, need_parallel=True),
    "eq_4_14_chain": dict(need_nondegenerate=True, need_parallel=True),
    "thm_4_10_totally_geodesic_d": dict(need_nondegenerate=True, need_parallel=True),
}


@dataclass
class SuiteOptions:
    points: int = DEFAULT_POINTS
    seed: int = DEFAULT_SEED
    tol: float | None = None
    checks: tuple | None = None

    def as_dict(self) -> dict:
        return {
            "points": self.points,
            "seed": self.seed,
            "tol": self.tol,
            "checks": list(self.checks) if self.checks is not None else None,
        }


def _thread_count() -> int:
    raw = os.environ.get("AFFINOR_THREADS", "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        return 1
    if value == 0:
        return os.cpu_count() or 1
    return max(1, value)


def _registry(manifold: ManifoldSpec, sub: SubmanifoldSpec | None,
              opts: SuiteOptions, ambient_samples, param_samples,
              hyp: Hypotheses, compat_ok: bool):
    tol = opts.tol

    def t(default):
        return default if tol is None else tol

    entries = {
        "eq_1_1_compatibility": lambda: check_compatibility(
            manifold, ambient_samples, tol=t(1e-10)
        ),
        "nondegeneracy": lambda: check_nondegeneracy(manifold, ambient_samples),
        "prop_1_3_fundamental_form": lambda: check_fundamental_form(
            manifold, ambient_samples
        ),
        "eq_4_1_parallelism": lambda: check_parallel(
            manifold, ambient_samples, tol=t(1e-8)
        ),
    }

    def gated_family():
        if not compat_ok:
            return CheckReport(
                "structure_family", rp.INAPPLICABLE,
                detail="hypothesis failed: compatibility identity does not hold",
            )
        return check_structure_family(manifold, ambient_samples)

    entries["structure_family"] = gated_family

    sub_only = {
        "frames": lambda: frames_check(sub, param_samples),
        "eq_1_4_duality": lambda: duality_check(sub, param_samples, tol=t(1e-6)),
        "h_symmetry": lambda: h_symmetry_check(sub, param_samples, tol=t(1e-8)),
        "totally_geodesic": lambda: totally_geodesic_check(
            sub, param_samples, tol=t(1e-6)
        ),
        "def_2_1_semi_invariant": lambda: verify_definition21(
            manifold, sub, param_samples, tol=t(1e-6)
        ),
        "submanifold_class": lambda: classify_submanifold(manifold, sub, param_samples),
        "cor_2_6": lambda: verify_cor26(
            manifold, sub, param_samples,
            ambient_nondegenerate=hyp.nondegenerate,
            angle_tol=t(1e-6),
        ),
        "thm_3_1_d_integrability": lambda: check_theorem31(
            manifold, sub, param_samples, hyp
        ),
        "thm_3_3_dperp_integrability": lambda: check_theorem33(
            manifold, sub, param_samples, hyp
        ),
        "eq_3_8_two_path": lambda: check_eq38(
            manifold, sub, param_samples, hyp, tol=t(1e-6)
        ),
        "prop_4_2_weingarten_commutator": lambda: check_prop42(
            manifold, sub, param_samples, hyp
        ),
        "thm_4_4_dperp_integrable": lambda: check_theorem44(
            manifold, sub, param_samples, hyp
        ),
        "thm_4_6_d_integrability_h": lambda: check_theorem46(
            manifold, sub, param_samples, hyp
        ),
        "eq_4_10_two_path": lambda: check_eq410(
            manifold, sub, param_samples, hyp, tol=t(1e-5)
        ),
        "thm_4_8_totally_geodesic_dperp": lambda: check_theorem48(
            manifold, sub, param_samples, hyp
        ),
        "eq_4_14_chain": lambda: check_eq414(
            manifold, sub, param_samples, hyp, tol=t(1e-5)
        ),
        "thm_4_10_totally_geodesic_d": lambda: check_theorem410(
            manifold, sub, param_samples, hyp
        ),
    }

    def gated_prop25():
        if hyp.semi_invariant:
            return verify_prop25(manifold, sub, param_samples, tol=t(1e-6))
        return inapplicable_report(
            "prop_2_5", failed_hypotheses(hyp)
        )

    sub_only["prop_2_5"] = gated_prop25

    def make_absent(check_id):
        needs = _THEOREM_NEEDS.get(check_id, {})
        failed = failed_hypotheses(hyp, **needs)
        detail_failed = failed or ["no submanifold"]
        return lambda: inapplicable_report(check_id, detail_failed)

    registry = []
    for check_id in CHECK_ORDER:
        if check_id in entries:
            registry.append((check_id, entries[check_id]))
        elif sub is not None:
            registry.append((check_id, sub_only[check_id]))
        else:
            registry.append((check_id, make_absent(check_id)))
    return registry


def run_suite(manifold: ManifoldSpec, sub: SubmanifoldSpec | None = None,
              options: SuiteOptions | None = None) -> list[CheckReport]:
    """Run the full check suite in its fixed order.

    One failing check never aborts the rest: an internal error surfaces as
    a failed report naming the exception.  Output is deterministic for a
    fixed (specs, options) pair.
    """
    opts = options or SuiteOptions()
    if opts.checks is not None:
        unknown = [c for c in opts.checks if c not in CHECK_ORDER]
        if unknown:
            raise ValueError(f"unknown check ids: {', '.join(unknown)}")
    ambient_samples = sample_domain(manifold.domain, opts.points, opts.seed)
    param_samples = (
        sample_domain(sub.domain, opts.points, opts.seed) if sub is not None else None
    )
    hyp = compute_hypotheses(manifold, sub, ambient_samples, param_samples)
    registry = _registry(
        manifold, sub, opts, ambient_samples, param_samples, hyp,
        compat_ok=hyp.compatible,
    )
    if opts.checks is not None:
        wanted = set(opts.checks)
        registry = [(cid, fn) for cid, fn in registry if cid in wanted]

    def run_one(entry):
        check_id, fn = entry
        try:
            return fn()
        except Exception as exc:  # isolate per check
            return CheckReport(check_id, rp.FAIL, 0.0, 0.0, None,
                               f"error: {type(exc).__name__}: {exc}")

    workers = _thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run_one, registry))
    else:
        reports = [run_one(entry) for entry in registry]
    return reports


# ---------------------------------------------------------------------------
# command-line interface


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="affinor",
        description="Residual checks for metric-affinor structures and "
                    "semi-invariant submanifolds.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("list", help="list built-in fixtures")
    exporter = commands.add_parser("export", help="write a fixture as a spec file")
    exporter.add_argument("fixture")
    exporter.add_argument("path")
    verify = commands.add_parser("verify", help="run the check suite on a spec")
    verify.add_argument("spec", help="spec file path or built-in fixture name")
    verify.add_argument("--sub", help="separate submanifold spec file")
    verify.add_argument("--points", type=int, default=DEFAULT_POINTS)
    verify.add_argument("--seed", type=int, default=DEFAULT_SEED)
    verify.add_argument("--tol", type=float, default=None,
                        help="override the pass threshold of plain residual checks")
    verify.add_argument("--checks", help="comma-separated check ids to run")
    verify.add_argument("--format", choices=("text", "json"), default="text")
    verify.add_argument("-o", "--output", help="write the report to a file")
    return parser


def _cmd_list() -> int:
    for name, description in list_fixtures():
        print(f"{name}: {description}")
    return 0


def _cmd_export(args) -> int:
    entry = get_fixture(args.fixture)
    Path(args.path).write_text(
        format_spec(entry.manifold, entry.submanifold), encoding="utf-8"
    )
    return 0


def _resolve_specs(args):
    path = Path(args.spec)
    if path.exists():
        manifold, sub = load_spec(path)
        if manifold is None:
            raise SpecFileError(f"{args.spec} has no [manifold] section")
        label = manifold.name
        if sub is not None:
            label += f"/{sub.name}"
    else:
        try:
            entry = get_fixture(args.spec)
        except KeyError:
            raise SpecFileError(
                f"{args.spec!r} is neither a readable file nor a known fixture"
            ) from None
        manifold, sub, label = entry.manifold, entry.submanifold, entry.name
    if args.sub:
        if sub is not None:
            raise SpecFileError(
                "a submanifold is already defined; --sub would be ambiguous"
            )
        _, sub = load_spec(args.sub, ambient=manifold)
        if sub is None:
            raise SpecFileError(f"{args.sub} has no [submanifold] section")
        label += f"/{sub.name}"
    return manifold, sub, label


def _cmd_verify(args) -> int:
    manifold, sub, label = _resolve_specs(args)
    checks = None
    if args.checks:
        checks = tuple(c.strip() for c in args.checks.split(",") if c.strip())
    options = SuiteOptions(points=args.points, seed=args.seed, tol=args.tol,
                           checks=checks)
    try:
        reports = run_suite(manifold, sub, options)
    except ValueError as exc:
        raise SpecFileError(str(exc)) from None
    emit_report(reports, fmt=args.format, out=args.output, fixture=label,
                options=options.as_dict())
    return exit_code_for(reports)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "list":
            return _cmd_list()
        if args.command == "export":
            return _cmd_export(args)
        return _cmd_verify(args)
    except (SpecFileError, ParseError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
