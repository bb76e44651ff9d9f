"""Command-line front end: ``uqsd solve | sweep-theta | sweep-eta | oracle``.

Input documents are JSON::

    {
      "label": "free text",
      "states": [[[1, 0], [0, 0]], [[0.6, 0], [0.8, 0]]],
      "priors": [0.5, 0.5]
    }

Each state is a list of [re, im] pairs. ``priors`` is optional (uniform by
default). A ``"gram"`` key (matrix of [re, im] pairs) may replace ``states``.

Exit codes: 0 success, 1 unreadable or malformed input, 2 invalid ensemble,
3 unsupported case without ``--fallback-oracle``, 4 ``--verify`` found the
solution not certified.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from . import certificate as cert
from .ensemble import Ensemble, build_ensemble, ensemble_from_gram, example_states
from .errors import UnsupportedCase, ValidationError
from .oracle import brute_force, certify_with_duality
from .povm import build_povm
from .solver import solve

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_VALIDATION = 2
EXIT_UNSUPPORTED = 3
EXIT_NOT_CERTIFIED = 4

DEFAULT_PHI2 = math.pi / 3
DEFAULT_PHI3 = math.pi / 4
DEFAULT_THETA3 = math.pi / 5
DEFAULT_STEPS = 500


class ParseError(Exception):
    pass


@dataclass
class EnsembleDocument:
    label: str
    states: Optional[list[np.ndarray]] = None
    gram: Optional[np.ndarray] = None
    priors: Optional[list[float]] = None

    def to_ensemble(self, priors: Optional[Sequence[float]] = None) -> Ensemble:
        n = len(self.states) if self.states is not None else self.gram.shape[0]
        eta = priors if priors is not None else self.priors
        if eta is None:
            eta = [1.0 / n] * n
        if self.states is not None:
            return build_ensemble(self.states, eta)
        return ensemble_from_gram(self.gram, eta)


def _complex(value: Any, where: str) -> complex:
    if (
        not isinstance(value, list)
        or len(value) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    ):
        raise ParseError(f"{where}: expected an [re, im] pair of numbers, got {value!r}")
    return complex(float(value[0]), float(value[1]))


def _vector(value: Any, where: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ParseError(f"{where}: expected a non-empty list of [re, im] pairs")
    return np.array([_complex(v, f"{where}[{k}]") for k, v in enumerate(value)])


def parse_ensemble_document(text: str) -> EnsembleDocument:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ParseError("top level: expected an object")
    unknown = set(raw) - {"label", "states", "gram", "priors"}
    if unknown:
        raise ParseError(f"top level: unknown field(s) {sorted(unknown)}")
    label = raw.get("label", "")
    if not isinstance(label, str):
        raise ParseError("label: expected a string")
    if ("states" in raw) == ("gram" in raw):
        raise ParseError("top level: give exactly one of 'states' or 'gram'")

    doc = EnsembleDocument(label)
    if "states" in raw:
        if not isinstance(raw["states"], list) or not raw["states"]:
            raise ParseError("states: expected a non-empty list of vectors")
        doc.states = [_vector(v, f"states[{i}]") for i, v in enumerate(raw["states"])]
    else:
        rows = raw["gram"]
        if not isinstance(rows, list) or not rows:
            raise ParseError("gram: expected a non-empty list of rows")
        matrix = [_vector(r, f"gram[{i}]") for i, r in enumerate(rows)]
        if any(r.shape[0] != len(matrix) for r in matrix):
            raise ParseError("gram: expected a square matrix")
        doc.gram = np.array(matrix)

    if "priors" in raw:
        priors = raw["priors"]
        if not isinstance(priors, list) or not all(
            isinstance(p, (int, float)) and not isinstance(p, bool) for p in priors
        ):
            raise ParseError("priors: expected a list of numbers")
        doc.priors = [float(p) for p in priors]
    return doc


@dataclass
class SolutionDocument:
    label: str
    x: list[float]
    p_max: float
    branch: str
    reduction_trace: list[dict] = field(default_factory=list)
    certificate: Optional[dict] = None
    verification: Optional[dict] = None
    oracle: Optional[dict] = None
    povm: Optional[dict] = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SolutionDocument":
        return cls(**json.loads(text))


def _residual_dict(res) -> Optional[dict]:
    return None if res is None else {k: float(v) for k, v in asdict(res).items()}


def _oracle_dict(e: Ensemble, accuracy: float, p_analytic: Optional[float]) -> dict:
    r = brute_force(e, accuracy)
    out = {
        "p": r.p,
        "x": [float(v) for v in r.x],
        "grid_spacing": r.grid_spacing,
        "refinement_rounds": r.refinement_rounds,
        "dual_bound": certify_with_duality(e, r),
    }
    if p_analytic is not None:
        out["difference"] = p_analytic - r.p
    return out


def _solution_document(label: str, e: Ensemble, args) -> tuple[SolutionDocument, int]:
    try:
        s = solve(e)
    except UnsupportedCase as exc:
        if not args.fallback_oracle:
            raise
        print(f"note: {exc}; using the numerical oracle", file=sys.stderr)
        oracle = _oracle_dict(e, args.oracle or 1e-6, None)
        doc = SolutionDocument(label, oracle["x"], oracle["p"], "ORACLE", oracle=oracle)
        return doc, EXIT_OK

    doc = SolutionDocument(
        label=label,
        x=[float(v) for v in s.x],
        p_max=s.p_max,
        branch=s.tag,
        reduction_trace=[
            {
                "dropped_index": r.dropped_index,
                "reduced_priors": list(r.reduced_priors),
                "reduced_overlaps": list(r.reduced_overlaps),
            }
            for r in s.reduction_trace
        ],
        certificate=_residual_dict(s.certificate.residuals),
    )
    code = EXIT_OK
    if args.verify:
        report = cert.verify(e, s, s.certificate)
        doc.verification = {"status": report.status, "failures": list(report.failures),
                            "residuals": _residual_dict(report.residuals),
                            "primal_min_eigenvalue": report.primal_min_eigenvalue}
        if not report.certified:
            code = EXIT_NOT_CERTIFIED
    if args.oracle is not None:
        doc.oracle = _oracle_dict(e, args.oracle, s.p_max)
    if args.povm:
        doc.povm = _residual_dict(build_povm(e, s).residuals)
    return doc, code


def _read_document(path: str) -> EnsembleDocument:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    return parse_ensemble_document(text)


def _parse_priors(text: Optional[str]) -> Optional[list[float]]:
    if text is None:
        return None
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise ParseError(f"--priors: expected comma-separated numbers, got {text!r}") from None


def cmd_solve(args) -> int:
    doc = _read_document(args.input)
    e = doc.to_ensemble(_parse_priors(args.priors))
    out, code = _solution_document(doc.label, e, args)
    print(out.to_json())
    if code == EXIT_NOT_CERTIFIED:
        print("error: solution is NOT_CERTIFIED: " + ", ".join(out.verification["failures"]), file=sys.stderr)
    return code


def cmd_oracle(args) -> int:
    doc = _read_document(args.input)
    e = doc.to_ensemble(_parse_priors(args.priors))
    oracle = _oracle_dict(e, args.accuracy, None)
    print(json.dumps({"label": doc.label, **oracle}, indent=2, sort_keys=True))
    return EXIT_OK


def theta_grid(steps: int) -> np.ndarray:
    """Interior points of (0, pi/2)."""
    return 0.5 * math.pi * np.arange(1, steps + 1) / (steps + 1)


def eta_grid(steps: int) -> np.ndarray:
    """Interior points of (0, 1)."""
    return np.arange(1, steps + 1) / (steps + 1)


def sweep_theta(phi2=DEFAULT_PHI2, phi3=DEFAULT_PHI3, steps=DEFAULT_STEPS, priors=None) -> list[tuple]:
    priors = priors or [1.0 / 3.0] * 3
    rows = []
    for t in theta_grid(steps):
        s = solve(build_ensemble(example_states(phi2, phi3, t), priors))
        rows.append((float(t), *map(float, s.x), s.p_max, s.tag))
    return rows


def sweep_eta(phi2=DEFAULT_PHI2, phi3=DEFAULT_PHI3, theta3=DEFAULT_THETA3, steps=DEFAULT_STEPS) -> list[tuple]:
    states = example_states(phi2, phi3, theta3)
    rows = []
    for eta3 in eta_grid(steps):
        side = 0.5 * (1.0 - eta3)
        s = solve(build_ensemble(states, [side, side, eta3]))
        rows.append((float(eta3), *map(float, s.x), s.p_max, s.tag))
    return rows


def format_csv(header: Sequence[str], rows: Sequence[tuple]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def cmd_sweep_theta(args) -> int:
    rows = sweep_theta(args.phi2, args.phi3, args.steps, _parse_priors(args.priors))
    sys.stdout.write(format_csv(["theta3", "x1", "x2", "x3", "p_max", "branch"], rows))
    return EXIT_OK


def cmd_sweep_eta(args) -> int:
    rows = sweep_eta(args.phi2, args.phi3, args.theta3, args.steps)
    sys.stdout.write(format_csv(["eta3", "x1", "x2", "x3", "p_max", "branch"], rows))
    return EXIT_OK


def _steps(text: str) -> int:
    n = int(text)
    if n < 2:
        raise argparse.ArgumentTypeError("steps must be at least 2")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uqsd", description="Optimal unambiguous discrimination of pure states.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve an ensemble document")
    p.add_argument("input")
    p.add_argument("--verify", action="store_true", help="attach certificate verification")
    p.add_argument("--oracle", type=float, metavar="ACCURACY", help="attach a brute-force comparison")
    p.add_argument("--povm", action="store_true", help="attach POVM residuals")
    p.add_argument("--fallback-oracle", action="store_true",
                   help="solve unsupported complex cases numerically instead of failing")
    p.add_argument("--priors", help="override priors, e.g. 0.2,0.3,0.5")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="brute-force maximization only")
    p.add_argument("input")
    p.add_argument("--accuracy", type=float, default=1e-5)
    p.add_argument("--priors")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("sweep-theta", help="CSV of the solution against theta3")
    p.add_argument("--phi2", type=float, default=DEFAULT_PHI2)
    p.add_argument("--phi3", type=float, default=DEFAULT_PHI3)
    p.add_argument("--steps", type=_steps, default=DEFAULT_STEPS)
    p.add_argument("--priors")
    p.set_defaults(func=cmd_sweep_theta)

    p = sub.add_parser("sweep-eta", help="CSV of the solution against eta3 with eta1 = eta2")
    p.add_argument("--phi2", type=float, default=DEFAULT_PHI2)
    p.add_argument("--phi3", type=float, default=DEFAULT_PHI3)
    p.add_argument("--theta3", type=float, default=DEFAULT_THETA3)
    p.add_argument("--steps", type=_steps, default=DEFAULT_STEPS)
    p.set_defaults(func=cmd_sweep_eta)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"invalid input: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except UnsupportedCase as exc:
        print(f"unsupported: {exc} (rerun with --fallback-oracle)", file=sys.stderr)
        return EXIT_UNSUPPORTED


if __name__ == "__main__":
    sys.exit(main())
