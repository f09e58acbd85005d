"""Machine verification of the ergodic statements for lower probabilities on
finite deterministic systems.

Every verifier first checks its hypotheses and raises :class:`HypothesisError`
when they fail; a returned certificate lists one clause per conclusion, each
with its own pass/fail flag.  A failed conclusion under satisfied hypotheses
is a bug (or a discrepancy with the theory) and is never silenced.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Callable, Iterable, Iterator, Sequence

from .capacity import Capacity, choquet, choquet_upper
from .credal import CredalSet, core, is_exact, lower_envelope
from .dynamics import (
    FiniteMap,
    birkhoff_limit,
    conditional_expectation,
    convergence_bound,
    ergodic_measures,
    invariant_events,
)
from .finite import event, full_mask, members, rat, to_bits
from .invariance import (
    is_ergodic,
    is_functionally_invariant,
    is_invariant,
    is_strongly_invariant,
)
from .records import format_record, parse_record, parse_value

_ZERO = Fraction(0)

DEFAULT_N = 10_000
DEFAULT_TOL = Fraction(1, 10**6)
DEFAULT_N_CHECK = 64


class HypothesisError(ValueError):
    """A theorem's hypotheses fail; distinct from a failed conclusion."""

    def __init__(self, clause: str, detail: str):
        super().__init__(f"{clause}: {detail}")
        self.clause = clause
        self.detail = detail


class ModeViolation(ValueError):
    def __init__(self, witness: tuple[int, int, int], detail: str):
        super().__init__(f"{detail} at (n, k, w) = {witness}")
        self.witness = witness


class BoundViolation(ValueError):
    def __init__(self, witness: tuple[int, int]):
        super().__init__(f"|S_n(w)| > lambda * n at (n, w) = {witness}")
        self.witness = witness


class SubadditivityError(ValueError):
    def __init__(self, witness: tuple[int, int]):
        super().__init__(f"a_(n+k) > a_n + a_k at (n, k) = {witness}")
        self.witness = witness


# ---- certificates -----------------------------------------------------------


@dataclass(frozen=True)
class BoundEventCertificate:
    """``{w : lower <= g(w) <= upper}`` and its capacity, exactly."""

    n: int
    values: tuple[Fraction, ...]
    lower: Fraction
    upper: Fraction
    event: int
    measure: Fraction

    @classmethod
    def compute(cls, nu: Capacity, values: Sequence[Fraction], lower, upper):
        ev = event(i for i, v in enumerate(values) if lower <= v <= upper)
        return cls(nu.n, tuple(values), lower, upper, ev, nu(ev))

    @property
    def passed(self) -> bool:
        return self.measure == 1

    def recheck(self, nu: Capacity) -> bool:
        again = BoundEventCertificate.compute(nu, self.values, self.lower, self.upper)
        return again == self

    def payload(self) -> dict:
        return {
            "event": to_bits(self.event, self.n),
            "lower": self.lower,
            "upper": self.upper,
            "measure": self.measure,
            "values": list(self.values),
        }


@dataclass
class Clause:
    clause_id: str
    hypotheses_ok: bool
    conclusion_ok: bool | None
    tag: str = "exact"  # or "tolerance"
    payload: dict = field(default_factory=dict)

    def record(self) -> str:
        return format_record(
            clause=self.clause_id,
            hypotheses_ok=self.hypotheses_ok,
            conclusion_ok=self.conclusion_ok,
            tag=self.tag,
            **self.payload,
        )


@dataclass
class Certificate:
    theorem: str
    clauses: list[Clause] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.conclusion_ok is not False for c in self.clauses if c.hypotheses_ok)

    @property
    def hypotheses_ok(self) -> bool:
        return all(c.hypotheses_ok for c in self.clauses)

    def clause(self, clause_id: str) -> Clause:
        return next(c for c in self.clauses if c.clause_id == clause_id)

    def records(self) -> list[str]:
        return [c.record() for c in self.clauses]


_RAW_KEYS = ("clause", "event", "tag", "note")


def parse_certificate(lines: Iterable[str]) -> list[dict]:
    """Records back to dicts of parsed values."""
    out = []
    for line in lines:
        if line.strip():
            rec = parse_record(line)
            out.append({k: v if k in _RAW_KEYS else parse_value(v) for k, v in rec.items()})
    return out


def reverify_records(records: list[dict], nu: Capacity) -> bool:
    """Recompute every serialized bound event: event, measure and verdict."""
    for rec in records:
        if "values" not in rec:
            continue
        values = rec["values"]
        lower, upper = rec["lower"], rec["upper"]
        ev = event(i for i, v in enumerate(values) if lower <= v <= upper)
        if to_bits(ev, nu.n) != rec["event"]:
            return False
        if nu(ev) != rec["measure"]:
            return False
        if rec["hypotheses_ok"] and rec["conclusion_ok"] != (nu(ev) == 1):
            return False
    return True


# ---- hypotheses -------------------------------------------------------------


def check_lower_probability(nu: Capacity, credal: CredalSet | None, clause: str) -> None:
    if credal is not None:
        if lower_envelope(credal) != nu:
            raise HypothesisError(clause, "credal presentation does not reproduce nu")
        return
    verdict = is_exact(nu)
    if not verdict:
        raise HypothesisError(clause, f"not a lower probability ({verdict.detail})")


def _presentation(nu: Capacity, credal: CredalSet | None) -> CredalSet:
    return credal if credal is not None else core(nu).as_credal()


# ---- Birkhoff-type theorem for invariant lower probabilities -----------------


def certify_convergence(tau: FiniteMap, f: Sequence[Fraction], fstar, n: int) -> bool:
    """Finite-n averages lie within the explicit bound of ``f*`` at every point."""
    from .dynamics import birkhoff_average

    return all(
        abs(birkhoff_average(tau, f, w, n) - fstar[w]) <= convergence_bound(tau, f, w, n)
        for w in range(tau.n)
    )


def verify_pointwise_ergodic(
    nu: Capacity, tau: FiniteMap, f: Sequence, credal: CredalSet | None = None,
    n_check: int = DEFAULT_N_CHECK,
) -> Certificate:
    """Time averages converge nu-a.s.; if nu is ergodic, their limit lies
    between the lower and upper Choquet integrals of ``f*`` nu-a.s."""
    theorem = "ergodic-theorem"
    f = tuple(rat(x) for x in f)
    check_lower_probability(nu, credal, theorem)
    inv = is_invariant(nu, tau)
    if not inv:
        raise HypothesisError(theorem, f"nu is not invariant (event {to_bits(inv.witness, nu.n)})")
    fstar = birkhoff_limit(tau, f)
    cert = Certificate(theorem, data={"fstar": fstar})
    full = full_mask(nu.n)
    converged = certify_convergence(tau, f, fstar, n_check)
    cert.clauses.append(Clause(
        f"{theorem}/limit", True, converged and nu(full) == 1,
        payload={"event": to_bits(full, nu.n), "measure": nu(full), "limit": list(fstar)},
    ))
    ergodic = is_ergodic(nu, tau)
    if ergodic:
        lo, hi = choquet(nu, fstar), choquet_upper(nu, fstar)
        bound = BoundEventCertificate.compute(nu, fstar, lo, hi)
        cert.data["bound"] = bound
        cert.clauses.append(Clause(f"{theorem}/bounds", True, bound.passed, payload=bound.payload()))
    else:
        cert.clauses.append(Clause(f"{theorem}/bounds", False, None,
                                   payload={"note": "not-ergodic"}))
    return cert


# ---- the lemma on {0,1}-valued lower probabilities --------------------------


@dataclass(frozen=True)
class ThresholdCertificate:
    t_star: Fraction  # sup of {t : nu(g >= t) = 1}, equals the lower integral
    t_lower: Fraction  # integral of -g; -t_lower is the upper integral
    bound: BoundEventCertificate

    @property
    def passed(self) -> bool:
        return self.bound.passed


def lattice_from_atoms(n: int, atoms: Sequence[int]) -> list[int]:
    out = set()
    for sel in range(1 << len(atoms)):
        mask = 0
        for k, a in enumerate(atoms):
            if sel >> k & 1:
                mask |= a
        out.add(mask)
    return sorted(out)


def verify_lemma_erg(
    nu: Capacity, g: Sequence, atoms: Sequence[int], credal: CredalSet | None = None
) -> ThresholdCertificate:
    """``nu({int g dnu <= g <= int g dnu_bar}) = 1`` for lattice-measurable ``g``.

    Reproduces the threshold construction: shift ``g`` to be nonnegative,
    take ``t* = max{t : nu(g >= t) = 1}`` over the levels of ``g`` (and 0),
    and ``t_* = -min{u : nu(g <= u) = 1}``.
    """
    clause = "zero-one-lemma"
    g = tuple(rat(x) for x in g)
    n = nu.n
    overlap = any(a & b for i, a in enumerate(atoms) for b in atoms[i + 1:])
    if overlap or sum(atoms) != full_mask(n):
        raise HypothesisError(clause, "atoms do not partition the space")
    check_lower_probability(nu, credal, clause)
    for e in lattice_from_atoms(n, atoms):
        if nu(e) not in (0, 1):
            raise HypothesisError(clause, f"nu({to_bits(e, n)}) = {nu(e)} is not 0 or 1")
    for a in atoms:
        if len({g[p] for p in members(a)}) != 1:
            raise HypothesisError(clause, f"g is not constant on atom {to_bits(a, n)}")

    shift = max(_ZERO, -min(g))
    gs = [x + shift for x in g]
    levels = sorted(set(gs))
    t_star = _ZERO
    for v in levels:
        if v > 0 and nu(event(i for i, x in enumerate(gs) if x >= v)) == 1:
            t_star = max(t_star, v)
    u_min = next(v for v in levels if nu(event(i for i, x in enumerate(gs) if x <= v)) == 1)
    t_lower = -u_min

    if t_star != choquet(nu, gs) or t_lower != choquet(nu, [-x for x in gs]):
        raise AssertionError("threshold construction disagrees with the Choquet integral")
    lower, upper = t_star - shift, -t_lower - shift
    if lower != choquet(nu, g) or upper != choquet_upper(nu, g):
        raise AssertionError("constant additivity of the Choquet integral failed")
    bound = BoundEventCertificate.compute(nu, g, lower, upper)
    return ThresholdCertificate(lower, -upper, bound)


# ---- convex, strongly invariant capacities ----------------------------------


def verify_corollary_erg(nu: Capacity, tau: FiniteMap, f: Sequence) -> Certificate:
    theorem = "convex-corollary"
    f = tuple(rat(x) for x in f)
    if not nu.is_convex:
        raise HypothesisError(theorem, "nu is not convex")
    strong = is_strongly_invariant(nu, tau)
    if not strong:
        raise HypothesisError(theorem, "nu is not strongly invariant")
    fstar = birkhoff_limit(tau, f)
    fhat = conditional_expectation(tau, f)
    cert = Certificate(theorem, data={"fstar": fstar})

    lattice = invariant_events(tau).events()
    ok1 = fstar == fhat and all(
        sum((f[i] * p[i] for i in members(e)), _ZERO)
        == sum((fstar[i] * p[i] for i in members(e)), _ZERO)
        for e in lattice
        for p in ergodic_measures(tau).ergodic
    )
    cert.clauses.append(Clause(f"{theorem}/1", True, ok1, payload={"limit": list(fstar)}))

    lo_f, lo_star = choquet(nu, f), choquet(nu, fstar)
    hi_f, hi_star = choquet_upper(nu, f), choquet_upper(nu, fstar)
    cert.data.update(lower=lo_f, upper=hi_f)
    cert.clauses.append(Clause(
        f"{theorem}/2", True, lo_f == lo_star and hi_f == hi_star,
        payload={"lower_f": lo_f, "lower_fstar": lo_star, "upper_f": hi_f, "upper_fstar": hi_star},
    ))
    if is_ergodic(nu, tau):
        bound = BoundEventCertificate.compute(nu, fstar, lo_f, hi_f)
        cert.data["bound"] = bound
        cert.clauses.append(Clause(f"{theorem}/3", True, bound.passed, payload=bound.payload()))
    else:
        cert.clauses.append(Clause(f"{theorem}/3", False, None, payload={"note": "not-ergodic"}))
    return cert


# ---- super/subadditive sequences --------------------------------------------

MODES = ("superadditive", "subadditive", "additive")


@dataclass(frozen=True)
class SuperadditiveSequence:
    """``S_n(w)`` from a closed-form generator, with its mode and growth bound.

    ``kind`` is ``"additive"`` (``S_n = sum f o tau^{k-1}``), ``"abs"``
    (``|S_n|``, subadditive), ``"neg-abs"`` (``-|S_n|``, superadditive) or
    ``"custom"`` with ``generator(n, w)``.
    """

    tau: FiniteMap
    mode: str
    kind: str
    bound: Fraction
    f: tuple[Fraction, ...] | None = None
    generator: Callable[[int, int], Fraction] | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")

    def values(self, n: int) -> tuple[Fraction, ...]:
        if self.kind == "custom":
            return tuple(rat(self.generator(n, w)) for w in range(self.tau.n))
        base = _orbit_sums(self.tau, self.f, n)
        return _apply_kind(self.kind, base)

    def trajectory(self, N: int) -> Iterator[tuple[int, tuple[Fraction, ...]]]:
        """``(n, S_n)`` for ``n = 1..N`` in one incremental pass."""
        if self.kind == "custom":
            for n in range(1, N + 1):
                yield n, self.values(n)
            return
        tau, f = self.tau, self.f
        pos = list(range(tau.n))
        acc = [_ZERO] * tau.n
        for n in range(1, N + 1):
            for w in range(tau.n):
                acc[w] += f[pos[w]]
                pos[w] = tau(pos[w])
            yield n, _apply_kind(self.kind, acc)

    def limit(self) -> tuple[Fraction, ...] | None:
        """Exact ``lim S_n / n`` per point where a closed form exists."""
        if self.kind == "custom":
            return None
        return _apply_kind(self.kind, birkhoff_limit(self.tau, self.f))


def _apply_kind(kind: str, values: Sequence[Fraction]) -> tuple[Fraction, ...]:
    if kind == "additive":
        return tuple(values)
    if kind == "abs":
        return tuple(abs(x) for x in values)
    if kind == "neg-abs":
        return tuple(-abs(x) for x in values)
    raise ValueError(f"unknown sequence kind {kind!r}")


def _orbit_sums(tau: FiniteMap, f: Sequence[Fraction], n: int) -> tuple[Fraction, ...]:
    out = []
    for w in range(tau.n):
        total, j = _ZERO, w
        for _ in range(n):
            total += f[j]
            j = tau(j)
        out.append(total)
    return tuple(out)


def additive_sequence(tau: FiniteMap, f: Sequence) -> SuperadditiveSequence:
    f = tuple(rat(x) for x in f)
    return SuperadditiveSequence(tau, "additive", "additive", max(abs(x) for x in f), f)


def abs_sequence(tau: FiniteMap, f: Sequence) -> SuperadditiveSequence:
    f = tuple(rat(x) for x in f)
    return SuperadditiveSequence(tau, "subadditive", "abs", max(abs(x) for x in f), f)


def negated_abs_sequence(tau: FiniteMap, f: Sequence) -> SuperadditiveSequence:
    f = tuple(rat(x) for x in f)
    return SuperadditiveSequence(tau, "superadditive", "neg-abs", max(abs(x) for x in f), f)


def check_mode(S: SuperadditiveSequence, n_check: int = DEFAULT_N_CHECK, mode: str | None = None):
    """Verify ``S_{n+k} >= / <= S_n + S_k o tau^n`` for ``n + k <= n_check``.

    Raises :class:`ModeViolation` with ``(n, k, w)``.
    """
    mode = mode or S.mode
    table = {n: vals for n, vals in S.trajectory(n_check)}
    tau = S.tau
    for n in range(1, n_check):
        for k in range(1, n_check - n + 1):
            for w in range(tau.n):
                lhs = table[n + k][w]
                rhs = table[n][w] + table[k][tau.iterate(w, n)]
                if mode in ("superadditive", "additive") and lhs < rhs:
                    raise ModeViolation((n, k, w), "superadditivity fails")
                if mode in ("subadditive", "additive") and lhs > rhs:
                    raise ModeViolation((n, k, w), "subadditivity fails")


def check_growth_bound(S: SuperadditiveSequence, n_check: int = DEFAULT_N_CHECK):
    """``-lam n <= S_n(w) <= lam n``; raises :class:`BoundViolation`."""
    for n, vals in S.trajectory(n_check):
        for w, x in enumerate(vals):
            if abs(x) > S.bound * n:
                raise BoundViolation((n, w))


def check_additive_form(S: SuperadditiveSequence, n_check: int = DEFAULT_N_CHECK) -> bool:
    """``S_n = sum_{k=1}^{n} S_1 o tau^{k-1}``."""
    s1 = S.values(1)
    for n, vals in S.trajectory(n_check):
        if vals != _orbit_sums(S.tau, s1, n):
            return False
    return True


# ---- Fekete -----------------------------------------------------------------


@dataclass(frozen=True)
class FeketeResult:
    N: int
    estimate: Fraction  # a_N / N
    inf_value: Fraction  # min over n <= horizon of a_n / n
    argmin: int
    horizon: int
    gap: Fraction  # estimate - inf_value, >= 0
    checked_pairs: int


def _term(a, n: int):
    return a(n) if callable(a) else a[n - 1]


def check_subadditive(a, limit: int) -> int:
    """All ``(n, k)`` with ``n + k <= limit``; raises with a witness."""
    vals = [_term(a, n) for n in range(1, limit + 1)]
    count = 0
    for n in range(1, limit):
        for k in range(1, limit - n + 1):
            count += 1
            if vals[n + k - 1] > vals[n - 1] + vals[k - 1]:
                raise SubadditivityError((n, k))
    return count


def fekete_limit(a, N: int, horizon: int | None = None, n_check: int | None = None) -> FeketeResult:
    """Estimate ``lim a_n / n = inf a_n / n`` for a subadditive sequence.

    ``a`` is a 1-indexed callable or a sequence whose item 0 is ``a_1``.
    Subadditivity is verified on ``n + k <= n_check`` (default ``min(N, 64)``),
    the infimum is taken over ``n <= horizon`` (default ``N``).
    """
    horizon = horizon or N
    n_check = n_check or min(N, DEFAULT_N_CHECK)
    pairs = check_subadditive(a, n_check)
    best_a, best_n = _term(a, 1), 1
    for n in range(2, horizon + 1):
        an = _term(a, n)
        if an * best_n < best_a * n:
            best_a, best_n = an, n
    estimate = Fraction(_term(a, N)) / N
    inf_value = Fraction(best_a) / best_n
    return FeketeResult(N, estimate, inf_value, best_n, horizon, estimate - inf_value, pairs)


def envelope_sequence(S: SuperadditiveSequence, M: CredalSet, N: int) -> list[Fraction]:
    """``a_n = -min_P int S_n dP`` (superadditive) or ``max_P int S_n dP``."""
    out = []
    for n, vals in S.trajectory(N):
        ints = [p.expect(vals) for p in M]
        out.append(-min(ints) if S.mode == "superadditive" else max(ints))
    return out


# ---- subadditive ergodic theorem --------------------------------------------


def _int_choquet(table: Sequence[int], vals: Sequence[int]) -> int:
    """Choquet integral with integer capacity values and integrands."""
    order = sorted(range(len(vals)), key=vals.__getitem__, reverse=True)
    total, mask = 0, 0
    for i, w in enumerate(order[:-1]):
        mask |= 1 << w
        total += (vals[w] - vals[order[i + 1]]) * table[mask]
    return total + vals[order[-1]] * table[-1]


def _scaled_trajectory(S: SuperadditiveSequence, N: int):
    """``(n, D * S_n)`` as integers, with ``D`` the denominator lcm of ``f``."""
    if S.kind == "custom":
        raise ValueError("scaled trajectories need a closed-form sequence")
    D = lcm(*(x.denominator for x in S.f))
    f = [int(x * D) for x in S.f]
    tau, n_pts = S.tau, S.tau.n
    pos = list(range(n_pts))
    acc = [0] * n_pts
    sign = {"additive": None, "abs": 1, "neg-abs": -1}[S.kind]
    for n in range(1, N + 1):
        for w in range(n_pts):
            acc[w] += f[pos[w]]
            pos[w] = tau(pos[w])
        yield n, (acc[:] if sign is None else [sign * abs(x) for x in acc]), D


def best_integrals(nu: Capacity, S: SuperadditiveSequence, N: int) -> tuple[Fraction, Fraction]:
    """``max_{n<=N} int S_n/n dnu`` and ``min_{n<=N} int S_n/n dnu_bar``,
    exactly, via integer scaling."""
    bar = nu.conjugate
    if S.kind == "custom":
        lo = max(choquet(nu, v) / n for n, v in S.trajectory(N))
        hi = min(choquet(bar, v) / n for n, v in S.trajectory(N))
        return lo, hi
    Q = lcm(*(v.denominator for v in nu.values), *(v.denominator for v in bar.values))
    t_lo = [int(v * Q) for v in nu.values]
    t_hi = [int(v * Q) for v in bar.values]
    best_lo = best_hi = None
    D = 1
    for n, vals, D in _scaled_trajectory(S, N):
        lo, hi = _int_choquet(t_lo, vals), _int_choquet(t_hi, vals)
        if best_lo is None or lo * best_lo[1] > best_lo[0] * n:
            best_lo = (lo, n)
        if best_hi is None or hi * best_hi[1] < best_hi[0] * n:
            best_hi = (hi, n)
    scale = D * Q
    return (Fraction(best_lo[0], best_lo[1] * scale), Fraction(best_hi[0], best_hi[1] * scale))


def verify_kingman(
    nu: Capacity,
    tau: FiniteMap,
    S: SuperadditiveSequence,
    N: int = DEFAULT_N,
    tol: Fraction = DEFAULT_TOL,
    n_check: int = DEFAULT_N_CHECK,
    credal: CredalSet | None = None,
) -> Certificate:
    """Convergence of ``S_n / n`` nu-a.s., the sup/inf identities for convex
    strongly invariant ``nu``, and the ergodic bound event.

    sup/inf over all ``n`` are bracketed as ``[best over n <= N, limit]``.
    """
    theorem = "kingman"
    tol = rat(tol)
    if S.tau != tau:
        raise ValueError("sequence and map disagree")
    check_mode(S, n_check)
    check_growth_bound(S, n_check)
    check_lower_probability(nu, credal, theorem)
    M = _presentation(nu, credal)
    functional = is_functionally_invariant(M, tau)
    if not functional:
        raise HypothesisError(theorem, "nu is not functionally invariant")

    fstar = S.limit()
    cert = Certificate(theorem, data={"fstar": fstar})
    full = full_mask(nu.n)

    if fstar is not None:
        converged = certify_convergence(tau, S.f, birkhoff_limit(tau, S.f), n_check)
        cert.clauses.append(Clause(
            f"{theorem}/limit", True, converged and nu(full) == 1,
            payload={"event": to_bits(full, nu.n), "measure": nu(full), "limit": list(fstar)},
        ))
        lo_star, hi_star = choquet(nu, fstar), choquet_upper(nu, fstar)
    else:
        # No closed form: report the truncated value and a Cauchy-tail gap.
        last = S.values(N)
        half = S.values(N // 2) if N >= 2 else last
        gap = max(abs(a / N - b / (N // 2 or 1)) for a, b in zip(last, half))
        fstar = tuple(x / N for x in last)
        cert.data["fstar"] = fstar
        cert.clauses.append(Clause(
            f"{theorem}/limit", True, True, tag="tolerance",
            payload={"truncation": N, "tail_gap": gap, "limit": list(fstar)},
        ))
        lo_star, hi_star = choquet(nu, fstar), choquet_upper(nu, fstar)

    convex_strong = nu.is_convex and bool(is_strongly_invariant(nu, tau))
    need_sup = S.mode in ("superadditive", "additive")
    need_inf = S.mode in ("subadditive", "additive")
    if convex_strong and (need_sup or need_inf):
        best_lo, best_hi = best_integrals(nu, S, N)
        cert.data.update(sup_lower=best_lo, inf_upper=best_hi)
        if need_sup:
            a = [-choquet(nu, vals) for _, vals in S.trajectory(n_check)]
            try:
                check_subadditive(a, n_check)
                fekete_ok = True
            except SubadditivityError:
                fekete_ok = False
            ok = abs(best_lo - lo_star) <= tol and best_lo <= lo_star + tol and fekete_ok
            cert.clauses.append(Clause(
                f"{theorem}/1", True, ok, tag="tolerance",
                payload={"sup_upto_N": best_lo, "limit_integral": lo_star, "N": N, "tol": tol,
                         "fekete_subadditive": fekete_ok},
            ))
        if need_inf:
            a = [choquet(nu.conjugate, vals) for _, vals in S.trajectory(n_check)]
            try:
                check_subadditive(a, n_check)
                fekete_ok = True
            except SubadditivityError:
                fekete_ok = False
            ok = abs(best_hi - hi_star) <= tol and fekete_ok
            cert.clauses.append(Clause(
                f"{theorem}/2", True, ok, tag="tolerance",
                payload={"inf_upto_N": best_hi, "limit_integral": hi_star, "N": N, "tol": tol,
                         "fekete_subadditive": fekete_ok},
            ))
    else:
        note = "not-convex-strongly-invariant" if not convex_strong else "mode"
        if need_sup:
            cert.clauses.append(Clause(f"{theorem}/1", False, None, payload={"note": note}))
        if need_inf:
            cert.clauses.append(Clause(f"{theorem}/2", False, None, payload={"note": note}))

    if is_ergodic(nu, tau):
        bound = BoundEventCertificate.compute(nu, fstar, lo_star, hi_star)
        cert.data["bound"] = bound
        cert.clauses.append(Clause(f"{theorem}/3", True, bound.passed, payload=bound.payload()))
    else:
        cert.clauses.append(Clause(f"{theorem}/3", False, None, payload={"note": "not-ergodic"}))
    return cert


def trajectory_csv(S: SuperadditiveSequence, N: int, every: int = 1) -> str:
    """CSV rows ``n,point,value`` with ``value = S_n(w)/n`` as ``p/q``."""
    rows = ["n,point,value"]
    for n, vals in S.trajectory(N):
        if n % every == 0 or n == N:
            rows.extend(f"{n},{w},{x / n}" for w, x in enumerate(vals))
    return "\n".join(rows) + "\n"
