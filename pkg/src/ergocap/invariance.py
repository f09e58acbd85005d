"""The four invariance notions for capacities, ergodicity, and an audit of
the implications between them."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .capacity import Capacity, unanimity
from .credal import (
    CredalSet,
    Prior,
    core,
    is_exact,
    lower_envelope,
    lower_probability_decomposition,
    mixture,
    predictive,
)
from .dynamics import (
    FiniteMap,
    decompose,
    ergodic_measures,
    invariant_events,
    invariant_witness,
    is_invariant_measure,
)
from .finite import full_mask, to_bits
from .records import Verdict, format_record


class NotErgodicMember(ValueError):
    pass


def is_invariant(nu: Capacity, tau: FiniteMap) -> Verdict:
    """``nu(A) = nu(tau^{-1}(A))`` for every event; witness ``A`` on failure."""
    for mask in range(len(nu)):
        if nu(mask) != nu(tau.preimage(mask)):
            return Verdict(False, mask, f"nu({to_bits(mask, nu.n)}) != nu(preimage)")
    return Verdict(True)


def is_strongly_invariant(nu: Capacity, tau: FiniteMap) -> Verdict:
    """Both ``nu(A - pre A) = nu_bar(pre A - A)`` and the mirrored identity."""
    bar = nu.conjugate
    for mask in range(len(nu)):
        pre = tau.preimage(mask)
        out_, in_ = mask & ~pre, pre & ~mask
        if nu(out_) != bar(in_):
            return Verdict(False, (mask, 1), "nu(A \\ pre A) != nu_bar(pre A \\ A)")
        if nu(in_) != bar(out_):
            return Verdict(False, (mask, 2), "nu(pre A \\ A) != nu_bar(A \\ pre A)")
    return Verdict(True)


def is_functionally_invariant(M: CredalSet, tau: FiniteMap) -> Verdict:
    """Every member of the credal presentation is ``tau``-invariant."""
    for p in M:
        if not is_invariant_measure(p, tau):
            return Verdict(False, p, "member is not invariant")
    return Verdict(True)


def is_ergodic(nu: Capacity, tau: FiniteMap) -> Verdict:
    """``nu(G)`` is exactly {0, 1} on the invariant lattice ``G``."""
    for e in invariant_events(tau).events():
        if nu(e) not in (0, 1):
            return Verdict(False, e, f"nu({to_bits(e, nu.n)}) = {nu(e)}")
    return Verdict(True)


def core_in_invariant(nu: Capacity, tau: FiniteMap, polytope=None) -> Verdict:
    polytope = polytope or core(nu)
    for v in polytope:
        if not is_invariant_measure(v, tau):
            return Verdict(False, v, "core vertex is not invariant")
    return Verdict(True)


@dataclass(frozen=True)
class PredictiveProbe:
    prior: Prior
    predictive: Capacity
    convex: Verdict


def predictive_convexity_probe(tau: FiniteMap, seed) -> PredictiveProbe:
    """A seeded convex (belief-function) prior on ``S(I)`` and whether its
    predictive is convex.  Nothing guarantees that it is; this is a
    measurement, not a check."""
    from .capacity import classify
    from .generate import belief_function

    family = CredalSet(ergodic_measures(tau).ergodic)
    rho = belief_function(random.Random(f"predictive:{seed}"), len(family))
    nu_rho = predictive(rho, family)
    verdict = classify(nu_rho).convex
    return PredictiveProbe(Prior(rho, family), nu_rho, verdict)


def robust_invariant_from(M: CredalSet, tau: FiniteMap) -> tuple[Prior, Capacity]:
    """Unanimity prior on ``S(I)`` singling out ``M``, and its predictive.

    ``rho(F) = 1`` iff ``F`` contains ``M``; the predictive is asserted to be
    the lower envelope of ``M`` and ergodic.
    """
    family = CredalSet(ergodic_measures(tau).ergodic)
    index = {p: i for i, p in enumerate(family)}
    missing = [p for p in M if p not in index]
    if missing:
        raise NotErgodicMember(f"{missing[0]!r} is not an ergodic measure of the map")
    rho = unanimity(len(family), [index[p] for p in M])
    nu_rho = predictive(rho, family)
    if nu_rho != lower_envelope(M):
        raise AssertionError("predictive of the unanimity prior differs from the envelope")
    if not is_ergodic(nu_rho, tau):
        raise AssertionError("predictive built from ergodic measures is not ergodic")
    return Prior(rho, family), nu_rho


def represents(prior: Prior, nu: Capacity, tau: FiniteMap) -> Verdict:
    """Check a candidate prior: convex, over ``S(I)``, and ``nu = nu_rho``."""
    if not prior.capacity.is_convex:
        return Verdict(False, None, "prior is not convex")
    sfam = set(ergodic_measures(tau).ergodic)
    if any(p not in sfam for p in prior.family):
        return Verdict(False, None, "prior family is not inside S(I)")
    if predictive(prior) != nu:
        return Verdict(False, None, "nu differs from the predictive")
    return Verdict(True)


@dataclass(frozen=True)
class InvarianceReport:
    invariant: Verdict
    strongly_invariant: Verdict
    functionally_invariant: Verdict | None
    robustly_invariant: Verdict | None
    ergodic: Verdict


def invariance_report(
    nu: Capacity, tau: FiniteMap, credal: CredalSet | None = None, prior: Prior | None = None
) -> InvarianceReport:
    robust = None
    if prior is not None:
        robust = represents(prior, nu, tau)
    elif credal is not None and all(p in set(ergodic_measures(tau).ergodic) for p in credal):
        _, nu_rho = robust_invariant_from(credal, tau)
        robust = Verdict(nu_rho == nu, None, "unanimity construction")
    return InvarianceReport(
        invariant=is_invariant(nu, tau),
        strongly_invariant=is_strongly_invariant(nu, tau),
        functionally_invariant=None if credal is None else is_functionally_invariant(credal, tau),
        robustly_invariant=robust,
        ergodic=is_ergodic(nu, tau),
    )


# ---- implication audit ------------------------------------------------------

HOLDS, VACUOUS, VIOLATED, SKIPPED = "holds", "vacuous", "violated", "skipped"


@dataclass(frozen=True)
class AuditLine:
    instance_id: str
    implication: str
    verdict: str
    witness: str = "-"
    note: str = "-"

    def record(self) -> str:
        return format_record(
            instance=self.instance_id,
            implication=self.implication,
            verdict=self.verdict,
            witness=self.witness,
            note=self.note,
        )


@dataclass
class AuditReport:
    instance_id: str
    lines: list[AuditLine] = field(default_factory=list)
    facts: dict[str, bool] = field(default_factory=dict)

    def add(self, implication: str, premise: bool, conclusion: bool | None,
            witness: str = "-", note: str = "-"):
        if conclusion is None:
            verdict = SKIPPED
        elif not premise:
            verdict = VACUOUS
        else:
            verdict = HOLDS if conclusion else VIOLATED
        self.lines.append(AuditLine(self.instance_id, implication, verdict, witness, note))

    @property
    def violations(self) -> list[AuditLine]:
        return [ln for ln in self.lines if ln.verdict == VIOLATED]

    def records(self) -> list[str]:
        return [ln.record() for ln in self.lines]


def _yn(flag) -> str:
    return "yes" if flag else "no"


def _wit(p) -> str:
    return "(" + ",".join(str(x) for x in p) + ")"


def implication_audit(
    nu: Capacity,
    tau: FiniteMap,
    credal: CredalSet | None = None,
    prior: Prior | None = None,
    instance_id: str = "0",
) -> AuditReport:
    """Evaluate the invariance notions on one instance and cross-check
    every implication between them; violations are reported, not raised.

    Lines: P1 strong => functional and core in I; P2 robust => functional;
    P3 presentation in S(I) => robust and ergodic; P4 functional => invariant;
    T-i-iv strong <=> core in I for convex nu; PI-i..v the five equivalent
    conditions for an invariant lower probability, in checkable finite form.
    """
    rep = AuditReport(instance_id)
    polytope = core(nu)
    exact = is_exact(nu, polytope)
    lower_prob = exact.ok
    if credal is not None and lower_envelope(credal) != nu:
        raise ValueError("credal presentation does not reproduce the capacity")
    presentation = credal if credal is not None else (
        polytope.as_credal() if lower_prob else None
    )
    sfam = ergodic_measures(tau)
    inv = is_invariant(nu, tau)
    strong = is_strongly_invariant(nu, tau)
    core_I = core_in_invariant(nu, tau, polytope) if lower_prob else Verdict(False)
    functional = is_functionally_invariant(presentation, tau) if presentation else Verdict(False)
    ergodic = is_ergodic(nu, tau)
    convex = nu.is_convex
    rep.facts.update(
        lower_probability=lower_prob, convex=convex, invariant=inv.ok, strong=strong.ok,
        functional=functional.ok, core_in_I=core_I.ok, ergodic=ergodic.ok,
    )

    if not lower_prob:
        rep.add("P1", False, None, note="not-a-lower-probability")
    else:
        wit = "-" if core_I.ok else _wit(core_I.witness)
        rep.add("P1", strong.ok, functional.ok and core_I.ok, wit)

    # P2: robust invariance via a supplied prior, or via the unanimity route.
    robust_prior = prior
    if robust_prior is None and presentation is not None and all(
        p in set(sfam.ergodic) for p in presentation
    ):
        robust_prior, _ = robust_invariant_from(presentation, tau)
    if robust_prior is None:
        rep.add("P2", False, None, note="no-candidate-prior")
    else:
        robust = represents(robust_prior, nu, tau)
        if robust:
            decomposition = lower_probability_decomposition(robust_prior)
            ok = bool(is_functionally_invariant(decomposition, tau)) and (
                lower_envelope(decomposition) == nu
            )
            rep.add("P2", True, ok)
        else:
            rep.add("P2", False, True, note="candidate-prior-does-not-represent")
    rep.facts["robust"] = robust_prior is not None and bool(represents(robust_prior, nu, tau))

    if presentation is None:
        rep.add("P3", False, None, note="no-presentation")
    else:
        in_S = all(p in set(sfam.ergodic) for p in presentation)
        if in_S:
            _, nu_rho = robust_invariant_from(presentation, tau)
            ok = nu_rho == nu and bool(is_ergodic(nu, tau))
        else:
            ok = True
        rep.add("P3", in_S, ok)

    if presentation is None:
        rep.add("P4", False, None, note="no-presentation")
    else:
        wit = "-" if inv.ok else to_bits(inv.witness, nu.n)
        rep.add("P4", functional.ok, inv.ok, wit)

    if convex:
        same = strong.ok == core_I.ok
        wit = "-"
        if not core_I.ok:
            wit = _wit(core_I.witness)
        rep.add("T-i-iv", True, same, wit, note=f"strong:{_yn(strong.ok)},core-in-I:{_yn(core_I.ok)}")
    else:
        rep.add("T-i-iv", False, None, note="not-convex")

    _audit_erg_pi(rep, nu, tau, polytope, lower_prob and inv.ok)
    return rep


def _audit_erg_pi(rep: AuditReport, nu: Capacity, tau: FiniteMap, polytope, premise: bool):
    """Conditions (i)-(v) for an invariant lower probability."""
    if not premise:
        for tag in ("PI-v", "PI-iii", "PI-ii", "PI-i", "PI-iv"):
            rep.add(tag, False, True, note="not-an-invariant-lower-probability")
        return
    n = nu.n
    full = full_mask(n)
    # (v) every core vertex has a Cesàro witness; the witness lies in the core.
    bar = nu.conjugate
    ok_v = True
    for v in polytope:
        hat, cert = invariant_witness(v, tau)
        in_core = all(hat.prob(a) >= nu(a) for a in range(full + 1))
        dominated = all(hat.prob(a) <= bar(a) for a in range(full + 1))
        if not (cert.ok and in_core and dominated):
            ok_v = False
            rep.add("PI-v", True, False, _wit(v))
            break
    if ok_v:
        rep.add("PI-v", True, True)

    lattice = invariant_events(tau)
    # (iii) lattice events carrying full mass under all of I contain every
    # cycle, so on a finite map they are only the whole space.
    dec = decompose(tau)
    cycles = dec.on_cycle()
    full_I = [e for e in lattice.events() if e & cycles == cycles]
    rep.add("PI-iii", True, all(nu(e) == 1 for e in full_I),
            note="degenerate:only-whole-space-has-full-I-mass")

    # (ii) P_breve = witness of the core barycenter, which dominates every vertex.
    k = len(polytope)
    bary = mixture([Fraction(1, k)] * k, polytope.vertices)
    breve, _ = invariant_witness(bary, tau)
    ok_ii = all(nu(e) == 1 for e in lattice.events() if breve.prob(e) == 1)
    rep.add("PI-ii", True, ok_ii)

    # (i) along the eventually periodic tail of nu(tau^{-k}(E)).
    ok_i, wit = True, "-"
    for e in range(full + 1):
        if breve.prob(e) != 1:
            continue
        tail = _preimage_tail(tau, e)
        if any(nu(a) != 1 for a in tail):
            ok_i, wit = False, to_bits(e, n)
            break
    rep.add("PI-i", True, ok_i, wit, note="limit-over-certified-periodic-tail")

    # (iv) time averages converge at every point, so the event is the whole space.
    rep.add("PI-iv", True, nu(full) == 1, note="convergence-event-is-whole-space")


def _preimage_tail(tau: FiniteMap, mask: int) -> list[int]:
    """The periodic part of ``k -> tau^{-k}(mask)``."""
    seen: dict[int, int] = {}
    seq = []
    cur = mask
    while cur not in seen:
        seen[cur] = len(seq)
        seq.append(cur)
        cur = tau.preimage(cur)
    return seq[seen[cur]:]


def counterexample_bundle(nu: Capacity, tau: FiniteMap, credal: CredalSet | None,
                          report: AuditReport) -> str:
    """Serialized instance plus the violated lines, for replay."""
    from .instances import Instance, dumps_instance

    text = dumps_instance(Instance(capacity=nu, tau=tau, credal=credal))
    lines = "".join(f"# {ln.record()}\n" for ln in report.violations)
    return lines + text
