"""Command-line front end: ``circlekit <subcommand> [flags]``.

Exit status is 0 on success, 1 on user error (bad flags, malformed input) and
2 when a computation is refused by the evaluation budget.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from circlekit import __version__
from circlekit.archimedean import QuadratureSpec, chi_inf_trace, chi_inf_truncated
from circlekit.arcs import FAMILIES, ArcParams, arc_volume_mc, hypothesis_check, weyl_harness
from circlekit.config import Budget, BudgetExceeded, CircleKitError, DEFAULT_MAX_EVALUATIONS
from circlekit.expsum import count_via_dft, s_q, t_sum
from circlekit.forms import ParametricExpansion, expand_parametric, parse_form
from circlekit.lattice import count_Nm_b, enumerate_solutions, write_solutions_csv
from circlekit.local import chi_p_truncated, singular_series_partial
from circlekit.points import ArcPoint, RationalPoint

SCHEMA_VERSION = 1
CAVEAT = (
    "desk-scale instances violate the size hypotheses on s; the prediction is reported "
    "for transparency and no agreement with the exact count is implied"
)


class UsageError(CircleKitError):
    pass


@dataclass(frozen=True)
class InstanceConfig:
    form: str | None = None
    s: int | None = None
    m: int = 2
    d: int | None = None
    b: int = 0
    P: int = 1
    qmax: int = 8
    R: float = 0.5
    prime: int = 2
    depth: int = 2
    seed: int = 0
    workers: int = 1
    max_evals: int = DEFAULT_MAX_EVALUATIONS
    dim_sing: int = 0
    theta: float = 0.1
    k: float | None = None
    l: float | None = None
    quadrature: dict = field(default_factory=dict)

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "InstanceConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        values = {k: v for k, v in vars(ns).items() if k in names and v is not None}
        if getattr(ns, "config", None):
            try:
                override = json.loads(Path(ns.config).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise UsageError(f"cannot read config {ns.config}: {exc}") from exc
            unknown = set(override) - names
            if unknown:
                raise UsageError(f"unknown config keys: {sorted(unknown)}")
            values.update(override)
        return cls(**values)

    @property
    def budget(self) -> Budget:
        return Budget(max_evaluations=int(self.max_evals), workers=int(self.workers))

    @property
    def spec(self) -> QuadratureSpec:
        return QuadratureSpec(**{"seed": self.seed, **self.quadrature})

    def expansion(self) -> ParametricExpansion:
        if not self.form or not self.s:
            raise UsageError("--form and --s are required")
        try:
            return expand_parametric(parse_form(self.form, int(self.s)), int(self.m))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc

    def canonical(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def warnings(self, d: int) -> list[str]:
        return ["excluded case: d = 2m is not covered by the asymptotic formula"] if d == 2 * self.m else []

    def arc_params(self, exp: ParametricExpansion) -> ArcParams:
        rep = hypothesis_check(exp.s, exp.d, exp.m, self.dim_sing)
        k = float(rep.k) if self.k is None else self.k
        l = float(rep.l) if self.l is None else self.l
        try:
            return ArcParams.from_theta(self.theta, k, l)
        except ValueError as exc:
            raise UsageError(f"arc parameters: {exc}") from exc


# -- output helpers -----------------------------------------------------------------------


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=";", lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _fmt(v: Any) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    return str(v)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- subcommands --------------------------------------------------------------------------------


def cmd_expand(cfg: InstanceConfig, args) -> None:
    exp = cfg.expansion()
    if args.out:
        payload = {
            "r": exp.r,
            "d": exp.d,
            "phi": {",".join(map(str, j)): str(exp.phi_map[j]) for j in exp.index_set},
            "disc": str(exp.disc),
        }
        _emit(_json(payload), args.out)
        return
    lines = [f"Phi[{','.join(map(str, j))}] = {exp.phi_map[j]}" for j in exp.index_set]
    lines.append(f"D = {exp.disc}")
    for w in cfg.warnings(exp.d):
        print(w, file=sys.stderr)
    _emit("\n".join(lines) + "\n", None)


def cmd_count(cfg: InstanceConfig, args) -> None:
    exp = cfg.expansion()
    disc = cfg.b if args.filter_b else None
    buf = io.StringIO()
    n = write_solutions_csv(enumerate_solutions(exp, cfg.P, disc, cfg.budget), buf)
    _emit(buf.getvalue(), args.out)
    print(f"{n} solutions", file=sys.stderr)


def _parse_points(path: str, exp: ParametricExpansion):
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read points {path}: {exc}") from exc
    if not isinstance(data, list):
        raise UsageError("points file must hold a JSON list")
    for item in data:
        if isinstance(item, dict) and "q" in item:
            vec = item.get("a")
            if not isinstance(vec, list) or len(vec) != exp.r + 1:
                raise UsageError(f"rational point needs 'a' with r + 1 = {exp.r + 1} entries")
            yield "rational", RationalPoint.from_vector(exp.index_set, int(item["q"]), vec)
        else:
            vec = item.get("alpha") if isinstance(item, dict) else item
            if not isinstance(vec, list) or len(vec) != exp.r + 1:
                raise UsageError(f"torus point needs r + 1 = {exp.r + 1} entries")
            yield "torus", ArcPoint.from_vector(exp.index_set, vec)


def cmd_sums(cfg: InstanceConfig, args) -> None:
    exp = cfg.expansion()
    if not args.points:
        raise UsageError("--points is required")
    rows = []
    for kind, pt in _parse_points(args.points, exp):
        if kind == "rational":
            val = s_q(exp, pt, cfg.budget)
            label = f"q={pt.q}:" + ",".join(map(str, pt.vector(exp.index_set)))
        else:
            val = t_sum(exp, cfg.P, pt, cfg.budget)
            label = f"P={cfg.P}:" + ",".join(repr(float(v)) for v in pt.vector(exp.index_set))
        rows.append((label, val.real, val.imag, abs(val)))
    _emit(_csv_text(["point", "re", "im", "abs"], rows), args.out)


def cmd_arcs(cfg: InstanceConfig, args) -> None:
    exp = cfg.expansion()
    params = cfg.arc_params(exp)
    if args.harness == "volume":
        rows = []
        for fam in FAMILIES:
            if fam == "M_d_gt" and exp.d < 2 * exp.m or fam == "M_theta_eta" and exp.d > 2 * exp.m:
                continue
            v = arc_volume_mc(fam, cfg.P, params, exp.m, exp.d, args.samples, cfg.seed)
            rows.append((fam, cfg.P, v.value, v.ci_low, v.ci_high, v.bound_exponent, v.ratio))
        _emit(_csv_text(["family", "P", "estimate", "ci_low", "ci_high", "bound_exponent", "ratio"], rows), args.out)
    else:
        rng = np.random.default_rng(cfg.seed)
        grid_points = rng.random((args.grid, exp.r + 1))
        P_list = list(range(1, cfg.P + 1))
        rows = [
            (w.P, w.minor_points, w.max_abs, w.decay_exponent, w.ratio, w.trivial)
            for w in weyl_harness(exp, P_list, params, grid_points, cfg.budget)
        ]
        _emit(_csv_text(["P", "minor_points", "max_abs", "decay_exponent", "ratio", "trivial"], rows), args.out)


def cmd_check(cfg: InstanceConfig, args) -> None:
    if not (cfg.s and cfg.d):
        raise UsageError("check needs --s, --d and --m")
    rep = hypothesis_check(int(cfg.s), int(cfg.d), int(cfg.m), int(cfg.dim_sing))
    _emit(_json(rep.as_dict()), args.out)


def cmd_chi_p(cfg: InstanceConfig, args) -> None:
    exp = cfg.expansion()
    rows = [(i, chi_p_truncated(exp, cfg.prime, i, cfg.b, cfg.budget).count) for i in range(cfg.depth + 1)]
    _emit(_csv_text(["i", "chi"], rows), args.out)


def cmd_series(cfg: InstanceConfig, args) -> None:
    exp = cfg.expansion()
    res = singular_series_partial(exp, cfg.qmax, cfg.b, cfg.budget)
    partial, rows = 0.0, []
    for q, term in res.terms:
        partial = math.fsum([partial, term])
        rows.append((q, partial))
    _emit(_csv_text(["q", "value"], rows), args.out)


def cmd_chi_inf(cfg: InstanceConfig, args) -> None:
    exp = cfg.expansion()
    radii = [cfg.R / 2**k for k in range(3, -1, -1)]
    rows = [(c.R, c.value, c.imag, c.error, c.method, c.converged) for c in chi_inf_trace(exp, cfg.b, cfg.P, radii, cfg.spec)]
    _emit(_csv_text(["R", "value", "imag", "error", "method", "converged"], rows), args.out)


# -- the headline report --------------------------------------------------------------------------


def _attempt(fn):
    try:
        return fn(), None
    except BudgetExceeded as exc:
        return None, f"budget: {exc}"
    except CircleKitError as exc:
        return None, f"error: {exc}"


def predict_report(cfg: InstanceConfig) -> dict:
    """Exact count, DFT cross-check, truncated prediction and hypothesis verdicts for one instance."""
    exp = cfg.expansion()
    exponent = exp.ms - exp.r * exp.d - 2 * exp.m
    exact, exact_err = _attempt(lambda: count_Nm_b(exp, cfg.P, cfg.b, cfg.budget))
    dft, dft_err = _attempt(lambda: count_via_dft(exp, cfg.P, cfg.b, cfg.budget))
    series, series_err = _attempt(lambda: singular_series_partial(exp, cfg.qmax, cfg.b, cfg.budget))
    chi, chi_err = _attempt(lambda: chi_inf_truncated(exp, cfg.b, max(cfg.P, 1), cfg.R, cfg.spec))
    prediction, prediction_err = None, None
    if cfg.P < 1:
        prediction_err = "the main term needs P >= 1"
    elif series is None or chi is None:
        prediction_err = "a component is missing"
    else:
        prediction = float(cfg.P) ** exponent * series.value * chi.value
    hyp = hypothesis_check(exp.s, exp.d, exp.m, cfg.dim_sing)
    return {
        "schema_version": SCHEMA_VERSION,
        "toolkit_version": __version__,
        "config": dataclasses.asdict(cfg),
        "config_hash": cfg.digest(),
        "instance": {"form": str(exp.form), "s": exp.s, "m": exp.m, "d": exp.d, "r": exp.r, "ms": exp.ms,
                     "b": cfg.b, "P": cfg.P, "main_exponent": exponent},
        "warnings": cfg.warnings(exp.d),
        "exact_count": exact,
        "exact_count_error": exact_err,
        "dft_count": dft,
        "dft_count_error": dft_err,
        "singular_series": None if series is None else {"Q": cfg.qmax, "value": series.value, "imag": series.imag,
                                                        "terms": [[q, t] for q, t in series.terms]},
        "singular_series_error": series_err,
        "chi_inf": None if chi is None else dataclasses.asdict(chi),
        "chi_inf_error": chi_err,
        "prediction": prediction,
        "prediction_error": prediction_err,
        "hypotheses": {**hyp.as_dict(), "caveat": CAVEAT},
    }


def report_csv(report: dict) -> str:
    chi = report["chi_inf"] or {}
    ser = report["singular_series"] or {}
    rows = [
        ("config_hash", report["config_hash"]),
        ("toolkit_version", report["toolkit_version"]),
        ("exact_count", report["exact_count"]),
        ("dft_count", report["dft_count"]),
        ("singular_series", ser.get("value")),
        ("chi_inf", chi.get("value")),
        ("chi_inf_error", chi.get("error")),
        ("prediction", report["prediction"]),
        *((f"verdict_{k}", v) for k, v in sorted(report["hypotheses"]["verdicts"].items())),
    ]
    return _csv_text(["field", "value"], [(k, "" if v is None else v) for k, v in rows])


def cmd_predict(cfg: InstanceConfig, args) -> None:
    report = predict_report(cfg)
    text = _json(report)
    if args.out:
        out = Path(args.out)
        out.write_text(text)
        out.with_suffix(".csv").write_text(report_csv(report))
    else:
        sys.stdout.write(text)


COMMANDS = {
    "expand": (cmd_expand, "print the coefficient forms and the Gram discriminant"),
    "count": (cmd_count, "enumerate solutions in the box as CSV"),
    "sums": (cmd_sums, "evaluate box sums or complete sums at points from a JSON list"),
    "arcs": (cmd_arcs, "arc volumes or the Weyl-bound table as CSV"),
    "check": (cmd_check, "hypothesis arithmetic as JSON"),
    "chi-p": (cmd_chi_p, "truncated p-adic densities as CSV"),
    "chi-inf": (cmd_chi_inf, "truncated singular integral with an R-trace as CSV"),
    "series": (cmd_series, "partial sums of the singular series as CSV"),
    "predict": (cmd_predict, "exact count against the truncated main term (JSON + CSV)"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--form")
    common.add_argument("--s", type=int)
    common.add_argument("--m", type=int)
    common.add_argument("--d", type=int)
    common.add_argument("--b", type=int)
    common.add_argument("--P", type=int)
    common.add_argument("--qmax", type=int)
    common.add_argument("--R", type=float)
    common.add_argument("--prime", type=int)
    common.add_argument("--depth", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--max-evals", dest="max_evals", type=int)
    common.add_argument("--dim-sing", dest="dim_sing", type=int)
    common.add_argument("--theta", type=float)
    common.add_argument("--k", type=float)
    common.add_argument("--l", type=float)
    common.add_argument("--config")
    common.add_argument("--out")
    parser = _Parser(prog="circlekit", description="Desk-scale circle-method toolkit for linear spaces on hypersurfaces.")
    parser.add_argument("--version", action="version", version=f"circlekit {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "count":
            p.add_argument("--filter-b", action="store_true", help="keep only solutions with D = b")
        if name == "sums":
            p.add_argument("--points", help="JSON list of torus points or {q, a} rational points")
        if name == "arcs":
            p.add_argument("--harness", choices=("volume", "weyl"), default="volume")
            p.add_argument("--samples", type=int, default=10_000)
            p.add_argument("--grid", type=int, default=20)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 1
        cfg = InstanceConfig.from_namespace(args)
        COMMANDS[args.command][0](cfg, args)
    except BudgetExceeded as exc:
        print(f"circlekit: {exc}", file=sys.stderr)
        return 2
    except (CircleKitError, ValueError, TypeError) as exc:
        print(f"circlekit: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
