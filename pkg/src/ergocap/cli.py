"""Command-line entry point.

Every subcommand produces machine records (``key=value`` lines, no
timestamps) and a human report.  With ``--out DIR`` they are written to
``DIR/records.txt`` and ``DIR/report.txt`` (plus CSV files where relevant);
otherwise records go to stdout.

Exit codes: 0 all verdicts pass, 1 a conclusion failed under satisfied
hypotheses (a counterexample bundle is written), 2 invalid input, 3 only
hypothesis failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .capacity import choquet, choquet_upper, describe_event
from .credal import GENERAL_CORE_MAX_N, core, describe, is_exact
from .dynamics import decompose, invariant_witness
from .ergodic import (
    DEFAULT_N,
    DEFAULT_N_CHECK,
    DEFAULT_TOL,
    BoundViolation,
    HypothesisError,
    ModeViolation,
    abs_sequence,
    additive_sequence,
    negated_abs_sequence,
    trajectory_csv,
    verify_corollary_erg,
    verify_kingman,
    verify_lemma_erg,
    verify_pointwise_ergodic,
)
from .finite import SizeCapError, to_bits
from .generate import KINDS, generate
from .instances import Instance, InstanceError, dumps_instance, loads_instance
from .invariance import counterexample_bundle, implication_audit, predictive_convexity_probe
from .process import (
    DEFAULT_PATHS,
    DEFAULT_T,
    DepthCapError,
    ModelError,
    check_shift_invariance,
    loads_model,
    model_from_json,
    slln_experiment,
)
from .records import format_record

EXIT_OK, EXIT_CONCLUSION, EXIT_INPUT, EXIT_HYPOTHESIS = 0, 1, 2, 3
SCENARIO_VERSION = 1

SEQUENCES = {"additive": additive_sequence, "abs": abs_sequence, "neg-abs": negated_abs_sequence}
THEOREMS = ("pointwise", "lemma", "corollary")

CSV_HELP = """CSV files:
  kingman: trajectory.csv with columns n,point,value (value = S_n(w)/n as p/q)
  slln:    trajectories.csv with columns measure,path,checkpoint,running_average
"""


class InputError(ValueError):
    """Invalid scenario, instance or parameters (exit code 2)."""


@dataclass
class Outcome:
    records: list[str] = field(default_factory=list)
    report: list[str] = field(default_factory=list)
    files: dict[str, str] = field(default_factory=dict)
    conclusion_failed: bool = False
    hypothesis_failed: bool = False

    def record(self, **kw) -> None:
        self.records.append(format_record(**kw))

    def say(self, line: str = "") -> None:
        self.report.append(line)

    @property
    def status(self) -> int:
        if self.conclusion_failed:
            return EXIT_CONCLUSION
        if self.hypothesis_failed:
            return EXIT_HYPOTHESIS
        return EXIT_OK


# ---- helpers ----------------------------------------------------------------


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _instance(params: dict) -> Instance:
    spec = params.get("instance")
    if spec is None:
        raise InputError("an instance is required (--instance FILE or --kind with --seed)")
    if isinstance(spec, dict):
        if "kind" not in spec:
            raise InputError("generated instance needs a kind")
        return generate(spec["kind"], int(spec.get("seed", 0)), int(spec.get("n", 4)))
    return loads_instance(_read(spec))


def _need(inst: Instance, *parts: str) -> None:
    for p in parts:
        if getattr(inst, p) is None:
            raise InputError(f"instance has no [{'map' if p == 'tau' else p}] section")


def _check_cap(inst: Instance, cap: int) -> None:
    if inst.n > cap:
        raise InputError(f"instance has {inst.n} points, above the cap {cap}")


def _certificate_outcome(out: Outcome, cert, label: str) -> None:
    for c in cert.clauses:
        out.records.append(c.record())
        if c.hypotheses_ok and c.conclusion_ok is False:
            out.conclusion_failed = True
        if not c.hypotheses_ok:
            out.hypothesis_failed = True
        status = "skipped (hypotheses fail)" if not c.hypotheses_ok else (
            "pass" if c.conclusion_ok else "FAIL")
        out.say(f"{label} clause {c.clause_id} [{c.tag}]: {status}")


def _bundle(out: Outcome, inst: Instance, lines: list[str]) -> None:
    text = "".join(f"# {ln}\n" for ln in lines) + dumps_instance(inst)
    out.files["counterexample.txt"] = text


# ---- subcommands ------------------------------------------------------------


def cmd_gen(params: dict) -> Outcome:
    out = Outcome()
    kind, seed, n = params["kind"], params["seed"], params["n"]
    inst = generate(kind, seed, n)
    text = dumps_instance(inst)
    out.files["instance.txt"] = text
    out.record(command="gen", kind=kind, seed=seed, n=n)
    if inst.tau is not None:
        out.record(map=list(inst.tau.images))
    if inst.capacity is not None:
        out.record(capacity=list(inst.capacity.values))
    for p in inst.credal or ():
        out.record(measure=list(p))
    if inst.function is not None:
        out.record(function=list(inst.function))
    out.say(f"generated {kind} instance on {n} points from seed {seed}")
    return out


def _audit_one(out: Outcome, inst: Instance, instance_id: str) -> bool:
    """Audit one instance; returns whether the predictive probe was convex."""
    _need(inst, "capacity", "tau")
    rep = implication_audit(inst.capacity, inst.tau, credal=inst.credal, instance_id=instance_id)
    out.records.extend(rep.records())
    facts = ",".join(f"{k}:{'yes' if v else 'no'}" for k, v in sorted(rep.facts.items()))
    out.record(instance=instance_id, facts=f"[{facts}]")
    if rep.violations:
        out.conclusion_failed = True
        out.files[f"counterexample-{instance_id}.txt"] = counterexample_bundle(
            inst.capacity, inst.tau, inst.credal, rep)
    out.say(f"instance {instance_id}: {len(rep.lines)} implications, "
            f"{len(rep.violations)} violated")
    for k, v in sorted(rep.facts.items()):
        out.say(f"  {k}: {'yes' if v else 'no'}")
    probe = predictive_convexity_probe(inst.tau, instance_id)
    witness = None
    if not probe.convex:
        witness = [to_bits(e, inst.tau.n) for e in probe.convex.witness]
    out.record(instance=instance_id, probe="predictive-convexity", family=len(probe.prior.family),
               predictive_convex=bool(probe.convex), witness=witness)
    return bool(probe.convex)


def cmd_audit(params: dict) -> Outcome:
    out = Outcome()
    out.say("Invariance audit: definitional implications between invariance notions,")
    out.say("the prior representation (i)<=>(iv) and the potential-invariance chain.")
    out.say("Potential invariance is automatic on finite deterministic systems;")
    out.say("its lines are recorded but cannot separate instances.")
    count = params.get("count")
    if count:
        spec = params.get("instance")
        if not isinstance(spec, dict):
            raise InputError("--count needs a generated instance (--kind)")
        convex = 0
        for i in range(count):
            seed = spec.get("seed", 0) + i
            # sizes cycle through 2..cap; non-convex cores need the general enumerator
            cap = min(params["n_cap"], GENERAL_CORE_MAX_N)
            n = 2 + (seed % max(1, cap - 1))
            inst = generate(spec["kind"], seed, n)
            convex += _audit_one(out, inst, f"{spec['kind']}-{seed}")
        out.record(summary="predictive-convexity", convex=convex, total=count)
        out.say(f"predictive of a random convex prior on S(I) was convex in {convex}/{count} "
                "instances (measured, not asserted)")
    else:
        inst = _instance(params)
        _check_cap(inst, params["n_cap"])
        _audit_one(out, inst, "0")
    return out


def cmd_ergodic(params: dict) -> Outcome:
    out = Outcome()
    inst = _instance(params)
    _need(inst, "capacity", "tau", "function")
    _check_cap(inst, params["n_cap"])
    nu, tau, f = inst.capacity, inst.tau, inst.function
    theorem = params.get("theorem", "pointwise")
    out.record(command="ergodic", theorem=theorem, n=inst.n)
    try:
        if theorem == "pointwise":
            out.say("Ergodic theorem for invariant lower probabilities")
            cert = verify_pointwise_ergodic(nu, tau, f, credal=inst.credal)
            fstar = cert.data["fstar"]
            out.record(fstar=list(fstar))
            out.say(f"  f* = ({', '.join(str(x) for x in fstar)})")
            if "bound" in cert.data:
                b = cert.data["bound"]
                out.record(lower=b.lower, upper=b.upper, event=to_bits(b.event, nu.n), measure=b.measure)
                out.say(f"  lower integral of f* = {b.lower}, upper integral of f* = {b.upper}")
                out.say(f"  nu(bound event {describe_event(b.event, nu.n)}) = {b.measure}")
            _certificate_outcome(out, cert, "ergodic theorem")
        elif theorem == "corollary":
            out.say("Convex strongly invariant case: integrals of f* and f coincide")
            cert = verify_corollary_erg(nu, tau, f)
            out.record(fstar=list(cert.data["fstar"]), lower=cert.data["lower"], upper=cert.data["upper"])
            out.say(f"  lower = {cert.data['lower']}, upper = {cert.data['upper']}")
            _certificate_outcome(out, cert, "corollary")
        elif theorem == "lemma":
            out.say("Zero-one lemma on the invariant lattice")
            atoms = list(decompose(tau).components)
            t = verify_lemma_erg(nu, f, atoms, credal=inst.credal)
            out.record(clause="zero-one-lemma", hypotheses_ok=True, conclusion_ok=t.passed,
                       tag="exact", t_star=t.t_star, t_lower=t.t_lower,
                       event=to_bits(t.bound.event, nu.n), measure=t.bound.measure)
            out.say(f"  t* = {t.t_star}, t_* = {t.t_lower}, nu(event) = {t.bound.measure}")
            out.conclusion_failed = not t.passed
        else:
            raise InputError(f"unknown theorem {theorem!r}; expected one of {', '.join(THEOREMS)}")
    except HypothesisError as exc:
        out.record(clause=exc.clause, hypotheses_ok=False, conclusion_ok=None, note=_token(exc.detail))
        out.say(f"hypotheses fail: {exc.detail}")
        out.hypothesis_failed = True
    if out.conclusion_failed:
        _bundle(out, inst, out.records)
    return out


def _token(text: str) -> str:
    return text.replace(" ", "-").replace("=", ":")


def cmd_kingman(params: dict) -> Outcome:
    out = Outcome()
    inst = _instance(params)
    _need(inst, "capacity", "tau", "function")
    _check_cap(inst, params["n_cap"])
    kind = params.get("sequence", "additive")
    if kind not in SEQUENCES:
        raise InputError(f"unknown sequence {kind!r}; expected one of {', '.join(SEQUENCES)}")
    S = SEQUENCES[kind](inst.tau, inst.function)
    N, tol = params["N"], params["tol"]
    out.record(command="kingman", sequence=kind, mode=S.mode, N=N, tol=tol, n_check=DEFAULT_N_CHECK)
    out.say(f"Subadditive ergodic theorem, {kind} sequence ({S.mode})")
    try:
        cert = verify_kingman(inst.capacity, inst.tau, S, N=N, tol=tol, credal=inst.credal)
    except (ModeViolation, BoundViolation) as exc:
        out.record(clause="kingman/mode", hypotheses_ok=False, conclusion_ok=None,
                   witness=list(exc.witness))
        out.say(f"hypotheses fail: {exc}")
        out.hypothesis_failed = True
        return out
    except HypothesisError as exc:
        out.record(clause=exc.clause, hypotheses_ok=False, conclusion_ok=None, note=_token(exc.detail))
        out.say(f"hypotheses fail: {exc.detail}")
        out.hypothesis_failed = True
        return out
    out.say(f"  f* = ({', '.join(str(x) for x in cert.data['fstar'])})")
    if "sup_lower" in cert.data:
        out.say(f"  sup over n <= {N} of lower integrals = {cert.data['sup_lower']}")
        out.say(f"  inf over n <= {N} of upper integrals = {cert.data['inf_upper']}")
    else:
        out.say("  points 1-2 need a convex, strongly invariant capacity; skipped")
    _certificate_outcome(out, cert, "kingman")
    out.files["trajectory.csv"] = trajectory_csv(S, min(N, params.get("horizon") or 256))
    if out.conclusion_failed:
        _bundle(out, inst, out.records)
    return out


def _model(params: dict):
    spec = params.get("model")
    if spec is None:
        raise InputError("a process model is required (--model FILE)")
    if isinstance(spec, dict):
        return model_from_json(spec)
    return loads_model(_read(spec))


def cmd_slln(params: dict) -> Outcome:
    out = Outcome()
    model = _model(params)
    T = params.get("horizon") or DEFAULT_T
    m = params.get("paths") or DEFAULT_PATHS
    rep = slln_experiment(model, T=T, paths=m, seed=params["seed"])
    shift = check_shift_invariance(model, params.get("depth", 3))
    summary = rep.summary()
    out.record(command="slln", **summary)
    out.record(check="shift-invariance", depth=shift.depth, invariant=bool(shift.invariant),
               coherent=bool(shift.coherent),
               convex=None if shift.convex is None else bool(shift.convex),
               witness=None if shift.convex is None or shift.convex.ok else list(shift.convex.witness))
    out.say("Strong law of large numbers under a capacity")
    out.say(f"  exact bounds: L = {rep.lower}, U = {rep.upper}")
    for r in rep.runs:
        out.say(f"  measure {r.index}: {r.in_bounds}/{r.paths} paths in [L - delta, U + delta] at T = {T}")
    out.say(f"  nu-estimate of the bound event = {float(rep.nu_estimate):.6f}; verdict {summary['verdict']}")
    out.say(f"  hypotheses: stationary={summary['stationary']} convex={summary['convex']} "
            f"ergodic={summary['ergodic']} ({summary['ergodic_route']})")
    if rep.labels:
        out.say(f"  labels: {', '.join(rep.labels)}")
    out.files["trajectories.csv"] = "\n".join(rep.csv_rows()) + "\n"
    if not rep.hypotheses_ok:
        out.hypothesis_failed = True
    elif not rep.passed:
        out.conclusion_failed = True
        out.files["counterexample.txt"] = "\n".join(out.records) + "\n"
    return out


def cmd_core(params: dict) -> Outcome:
    out = Outcome()
    inst = _instance(params)
    _need(inst, "capacity")
    _check_cap(inst, params["n_cap"])
    nu = inst.capacity
    poly = core(nu)
    exact = is_exact(nu, poly)
    out.record(command="core", n=nu.n, convex=nu.is_convex, method=poly.provenance,
               vertices=len(poly), exact=bool(exact))
    for v in poly:
        out.record(vertex=list(v))
    out.say(f"core of a {'convex' if nu.is_convex else 'non-convex'} capacity on {nu.n} points "
            f"({poly.provenance}): {len(poly)} vertices")
    for v in poly:
        out.say(f"  {describe(v)}")
    out.say(f"exact: {'yes' if exact else 'no'}")
    if not exact and exact.witness is not None and exact.witness[0] is not None:
        mask, low = exact.witness
        out.record(exact_witness=to_bits(mask, nu.n), core_min=low, capacity=nu(mask))
    return out


def cmd_choquet(params: dict) -> Outcome:
    out = Outcome()
    inst = _instance(params)
    _need(inst, "capacity", "function")
    _check_cap(inst, params["n_cap"])
    lo, hi = choquet(inst.capacity, inst.function), choquet_upper(inst.capacity, inst.function)
    out.record(command="choquet", lower=lo, upper=hi)
    out.say(f"lower Choquet integral = {lo}; upper = {hi}")
    if inst.tau is not None:
        hat_lines = []
        for i, comp in enumerate(decompose(inst.tau).components):
            hat_lines.append(f"component {i}: {describe_event(comp, inst.n)}")
        out.say("invariant lattice atoms: " + "; ".join(hat_lines))
    return out


def cmd_cesaro(params: dict) -> Outcome:
    out = Outcome()
    inst = _instance(params)
    _need(inst, "tau", "credal")
    for k, p in enumerate(inst.credal):
        hat, cert = invariant_witness(p, inst.tau)
        out.record(measure=k, start=cert.start, period=cert.period, invariant=cert.invariant,
                   agrees_on_lattice=cert.agrees_on_lattice, tail=cert.tail_average_matches,
                   witness=list(hat))
        out.say(f"measure {k}: invariant witness {describe(hat)}; ok={'yes' if cert.ok else 'no'}")
        out.conclusion_failed |= not cert.ok
    return out


COMMANDS = {
    "gen": cmd_gen,
    "audit": cmd_audit,
    "ergodic": cmd_ergodic,
    "kingman": cmd_kingman,
    "slln": cmd_slln,
    "core": cmd_core,
    "choquet": cmd_choquet,
    "cesaro": cmd_cesaro,
}


# ---- scenarios --------------------------------------------------------------

_SCENARIO_KEYS = {"version", "kind", "instance", "model", "params", "output"}
_PARAM_KEYS = {"seed", "n", "n_cap", "N", "tol", "paths", "horizon", "theorem", "sequence",
               "count", "depth", "kind"}


def scenario_params(data: dict, base: Path | None = None) -> tuple[str, dict, str | None]:
    """Validate a scenario; relative file paths resolve against ``base``."""
    if not isinstance(data, dict):
        raise InputError("scenario must be a JSON object")
    extra = set(data) - _SCENARIO_KEYS
    if extra:
        raise InputError(f"scenario: unknown field(s) {sorted(extra)}")
    if data.get("version") != SCENARIO_VERSION:
        raise InputError(f"scenario: unsupported version {data.get('version')!r}")
    kind = data.get("kind")
    if kind not in COMMANDS:
        raise InputError(f"scenario: unknown kind {kind!r}")
    raw = data.get("params", {})
    extra = set(raw) - _PARAM_KEYS
    if extra:
        raise InputError(f"scenario.params: unknown field(s) {sorted(extra)}")
    params = _defaults()
    params.update(raw)
    if "tol" in raw:
        params["tol"] = Fraction(str(raw["tol"]))
    for key in ("instance", "model"):
        if key in data:
            value = data[key]
            if isinstance(value, str) and base is not None and not Path(value).is_absolute():
                value = str(base / value)
            params[key] = value
    return kind, params, data.get("output")


def _defaults() -> dict:
    return {"seed": 0, "n": 4, "n_cap": 6, "N": DEFAULT_N, "tol": DEFAULT_TOL, "paths": None,
            "horizon": None, "theorem": "pointwise", "sequence": "additive", "count": None,
            "depth": 3, "kind": None}


def execute(kind: str, params: dict) -> Outcome:
    """Run one command; invalid input raises :class:`InputError`."""
    try:
        out = COMMANDS[kind](params)
    except (InstanceError, ModelError, SizeCapError, DepthCapError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    header = format_record(run=kind, **{k: _header_value(v) for k, v in sorted(params.items())})
    out.records.insert(0, header)
    return out


def _header_value(v):
    if isinstance(v, dict):
        return "[" + ",".join(f"{k}:{v[k]}" for k in sorted(v)) + "]"
    if isinstance(v, str):
        return _token(v)
    return v


def write_outputs(out: Outcome, directory: str | None) -> None:
    if directory is None:
        sys.stdout.write("\n".join(out.records) + "\n")
        sys.stderr.write("\n".join(out.report) + "\n")
        return
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    files = dict(out.files)
    files["records.txt"] = "\n".join(out.records) + "\n"
    files["report.txt"] = "\n".join(out.report) + "\n"
    for name, text in files.items():
        # atomic per file: write to a sibling temp file, then rename
        fd, tmp = tempfile.mkstemp(dir=path, prefix=f".{name}.")
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path / name)


# ---- argument parsing -------------------------------------------------------


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ergocap",
        description="Capacities, invariance and ergodic theorems on finite systems.",
        epilog=CSV_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, instance=True):
        if instance:
            p.add_argument("--instance", help="instance file (sectioned text)")
            p.add_argument("--kind", choices=KINDS, help="generate the instance instead")
            p.add_argument("--n", type=int, default=4, help="size of a generated instance")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="output directory (default: records to stdout)")
        p.add_argument("--n-cap", type=int, default=6, dest="n_cap", help="largest accepted space")
        p.add_argument("--N", type=int, default=DEFAULT_N, help="truncation for sup/inf over n")
        p.add_argument("--tol", type=_fraction, default=DEFAULT_TOL)
        p.add_argument("--paths", type=int, default=None, help="Monte-Carlo paths per measure")
        p.add_argument("--horizon", type=int, default=None,
                       help="path length (slln) or CSV trajectory length (kingman)")

    p = sub.add_parser("gen", help="generate a seeded instance", epilog=CSV_HELP)
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--n", type=int, default=4)
    common(p, instance=False)

    p = sub.add_parser("audit", help="invariance implication audit")
    common(p)
    p.add_argument("--count", type=int, help="audit this many seeded instances of --kind")

    p = sub.add_parser("ergodic", help="ergodic theorem certificates")
    common(p)
    p.add_argument("--theorem", choices=THEOREMS, default="pointwise")

    p = sub.add_parser("kingman", help="subadditive ergodic theorem", epilog=CSV_HELP)
    common(p)
    p.add_argument("--sequence", choices=tuple(SEQUENCES), default="additive")

    p = sub.add_parser("slln", help="Monte-Carlo strong law harness", epilog=CSV_HELP)
    common(p, instance=False)
    p.add_argument("--model", required=True, help="process model (JSON)")
    p.add_argument("--depth", type=int, default=3, help="cylinder depth for shift checks")

    for name, text in (("core", "core vertices and exactness"), ("choquet", "Choquet integrals"),
                       ("cesaro", "invariant witnesses of the credal members")):
        common(sub.add_parser(name, help=text))

    p = sub.add_parser("run", help="run a scenario file (JSON)")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", help="override the scenario's output directory")
    return parser


def _params_from_args(args) -> dict:
    params = _defaults()
    for key in ("seed", "n", "n_cap", "N", "tol", "paths", "horizon", "theorem", "sequence",
                "count", "depth"):
        if hasattr(args, key):
            params[key] = getattr(args, key)
    if args.command == "gen":
        params["kind"] = args.kind
    elif getattr(args, "instance", None):
        params["instance"] = args.instance
    elif getattr(args, "kind", None):
        params["instance"] = {"kind": args.kind, "seed": args.seed, "n": args.n}
    if getattr(args, "model", None):
        params["model"] = args.model
    return params


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            try:
                data = json.loads(_read(args.scenario))
            except json.JSONDecodeError as exc:
                raise InputError(f"{args.scenario}: line {exc.lineno}: {exc.msg}") from exc
            kind, params, output = scenario_params(data, Path(args.scenario).parent)
            output = args.out or output
        else:
            kind, params, output = args.command, _params_from_args(args), args.out
        out = execute(kind, params)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    write_outputs(out, output)
    return out.status


if __name__ == "__main__":
    sys.exit(main())
