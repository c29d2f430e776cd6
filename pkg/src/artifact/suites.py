"""Verification suites: each returns a list of CheckReports."""
from __future__ import annotations

import itertools
import time
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from .base_arith import FieldTower, OKRing, ParameterError, random_units
from .iwasawa_ring import ARing, ZLaurent, lemma_coefficient, lemma_product
from .lubin_tate import (
    Character,
    Irreducible,
    Split,
    compose,
    denominator_budget,
    dk_module,
    f_a_lt,
    in_fixed_model,
    lt_action,
)
from .newton import verify_newton
from .phigamma import (
    AScalars,
    build_DA_otimes,
    build_semisimple_module,
    check_equivariance,
    dual_module,
    kron,
    mat_first_difference,
    mat_map,
    mat_mul,
    mat_vec,
    pairing,
    psi_on_module,
    reconstruct_on_module,
    ring_for,
    trace_base_change,
    twist_by_character,
    verify_main_isomorphism,
)
from .report import FAIL, PASS, SKIPPED, CheckReport, check
from .series import CoordChange, DenseT, TruncLaurent, apply_phi, apply_phi_q


class _Clock:
    """Wall time between consecutive reports of a suite."""

    def __init__(self):
        self.t = time.perf_counter()

    def stamp(self, rep: CheckReport) -> CheckReport:
        now = time.perf_counter()
        rep.ms = round((now - self.t) * 1000, 3)
        self.t = now
        return rep


def _first(items):
    return next(iter(items), None)


# ---------------------------------------------------------------------------
# Lubin-Tate

def suite_lt(p: int, f: int, N: int = 40, seed: int = 0, n_pairs: int = 20,
             n_units: int = 20) -> List[CheckReport]:
    tw = FieldTower(p, f)
    q = tw.q
    prm = {"p": p, "f": f, "N": N}
    clock = _Clock()
    rng = np.random.default_rng(seed)
    ok = OKRing(tw, 1 + denominator_budget(N + 1, q))
    out = []

    P = lt_action("p", N, tw).series
    want = TruncLaurent.monomial(tw.F, (q,), 1, "U", N) if q < N else TruncLaurent.zero(tw.F, 1, "U", N)
    diff = P.first_difference(want)
    out.append(clock.stamp(check("lt.p_power", prm, diff is None, {"first_difference": diff} if diff else {})))

    bad = []
    for lam in list(tw.Fq.nonzero())[:8]:
        s = lt_action(ok.teichmuller(lam), N).series
        if s.first_difference(TruncLaurent.monomial(tw.F, (1,), tw.sigma0(lam), "U", N)) is not None:
            bad.append(lam)
    out.append(clock.stamp(check("lt.teichmuller", prm, not bad, {"failing": bad[:3]})))

    units = random_units(ok, max(n_pairs + 1, n_units), rng)
    cache = {}

    def lt(a):
        k = tuple(a.c)
        if k not in cache:
            cache[k] = lt_action(a, N)
        return cache[k]

    bad = None
    for a, b in zip(units[:n_pairs], units[1:n_pairs + 1]):
        d = compose(lt(a).series, lt(b).series).first_difference(lt(a * b).series)
        if d is not None:
            bad = {"a": a, "b": b, "first_difference": d}
            break
    out.append(clock.stamp(check("lt.composition", dict(prm, pairs=n_pairs), bad is None, bad or {})))

    bad = [a for a in units[:n_units] if lt(a).linear_coefficient() != tw.sigma0(a.reduce())]
    out.append(clock.stamp(check("lt.linear_coefficient", dict(prm, units=n_units), not bad, {"failing": bad[:3]})))

    bad = []
    for a in units[:n_units]:
        fa = f_a_lt(a, N)
        if not in_fixed_model(fa, q):
            bad.append({"a": a, "f_a": fa.serialize()[:4]})
    out.append(clock.stamp(check("lt.f_a_fixed_model", dict(prm, units=n_units), not bad, {"failing": bad[:2]})))

    lam = tw.F.gen
    if q >= N:
        # phi is composition with [p] = T^q, which vanishes at this precision
        out.append(clock.stamp(CheckReport("lt.dk_commutation", dict(prm, units=3), SKIPPED,
                                           {"reason": "q >= N"})))
        return out
    bad = []
    for shape in (Character(2, lam), Irreducible(2, 1, lam), Split(3, lam, lam ** 2)):
        D = dk_module(shape, N, tw)
        for a in units[:3]:
            d = D.commutation_defect(a)
            if d is not None:
                bad.append({"shape": type(shape).__name__, "a": a, "defect": list(d)})
                break
    out.append(clock.stamp(check("lt.dk_commutation", dict(prm, units=3), not bad, {"failing": bad[:2]})))
    return out


# ---------------------------------------------------------------------------
# ring action

def suite_ring(p: int, f: int, N: int = 12, seed: int = 0, n_units: int = 20) -> List[CheckReport]:
    if N <= p:
        raise ParameterError(f"membership needs N > p, got N={N}")
    tw = FieldTower(p, f)
    R = ARing(tw, N)
    S = AScalars(R)
    prm = {"p": p, "f": f, "N": N}
    clock = _Clock()
    rng = np.random.default_rng(seed)
    units = random_units(R.ok, n_units, rng)
    out = []

    bad = []
    for a in units:
        for i in range(f):
            fa = R.f_a(a, i)
            if (fa - 1).valuation() < p - 1:
                bad.append({"a": a, "i": i, "valuation": (fa - 1).valuation()})
            d = R.act_Y_dense(a, i) - R.cc.Y(i).scale(a.reduce() ** (p ** i))
            if d.order() < p:
                bad.append({"a": a, "i": i, "t_order": d.order()})
    out.append(clock.stamp(check("ring.membership", dict(prm, units=n_units), not bad, {"failing": bad[:3]})))

    bad = []
    for a in units:
        for i in range(f):
            d = apply_phi(R.f_a(a, i)).first_difference(R.f_a(a, i - 1) ** p)
            if d is not None:
                bad.append({"a": a, "i": i, "first_difference": d})
    out.append(clock.stamp(check("ring.phi_f_a", dict(prm, units=n_units), not bad, {"failing": bad[:2]})))

    bad = None
    Np = -(-N // p)
    for a in units[:4]:
        for k in itertools.product(range(Np), repeat=f):
            if p * sum(k) >= N:
                continue
            big = DenseT.from_terms(tw.Fq, f, N, {tuple(p * x for x in k): 1})
            small = DenseT.from_terms(tw.Fq, f, Np, {k: 1})
            lhs = R.ok_act_dense(a, big)
            rhs = R.ok_act_dense(a, small).phi()
            n = min(lhs.N, rhs.N)
            if not lhs.truncate(n) == rhs.truncate(n):
                bad = {"a": a, "monomial": list(k)}
                break
        if bad:
            break
    out.append(clock.stamp(check("ring.phi_commutes", dict(prm, units=4), bad is None, bad or {})))

    bad = []
    for lam in list(tw.Fq.nonzero())[:6]:
        a = R.ok.teichmuller(lam)
        for i in range(f):
            if R.f_a(a, i).first_difference(R.one(N)) is not None:
                bad.append({"lambda": lam, "i": i})
    out.append(clock.stamp(check("ring.teichmuller", prm, not bad, {"failing": bad[:3]})))

    q = tw.q
    x = TruncLaurent.monomial(tw.F, (q - 1,), 1, "U")
    want = R.mono([-1] + [0] * (f - 2) + [p] if f > 1 else [p - 1])
    ok1 = R.recette_embed(x).first_difference(want) is None
    bad = []
    for _ in range(5):
        ks = rng.integers(-3, 4, 4)
        terms = {(int(k) * (q - 1),): tw.F(int(rng.integers(1, p))) for k in ks}
        xx = TruncLaurent.from_dict(tw.F, 1, "U", terms)
        lhs = R.recette_embed(apply_phi_q(xx, q))
        rhs = apply_phi_q(R.recette_embed(xx), q)
        d = lhs.first_difference(rhs)
        if d is not None:
            bad.append({"x": xx.serialize(), "first_difference": d})
    out.append(clock.stamp(check("ring.recette", prm, ok1 and not bad,
                                 {"generator": ok1, "failing": bad[:2]})))
    return out


# ---------------------------------------------------------------------------
# mu and psi

def _random_zlaurent(R: ARing, rng, mm: int, scale: int) -> ZLaurent:
    p, f = R.p, R.f
    NP = f * (scale * mm - 1) + 1
    data = rng.integers(0, p, size=(NP,) * f + (R.tower.Fq.n,))
    return ZLaurent((-scale * mm,) * f, DenseT(R.tower.Fq, f, NP, data))


def suite_mu(p: int, f: int, seed: int = 0, n_elems: int = 200, n_units: int = 10,
             per_unit: int = 3) -> List[CheckReport]:
    tw = FieldTower(p, f)
    R = ARing(tw, 4)
    prm = {"p": p, "f": f}
    clock = _Clock()
    rng = np.random.default_rng(seed)
    sign = (-1) ** (f - 1)
    out = []

    zero_one = R.mu(ZLaurent((0,) * f, DenseT.one(tw.Fq, f, 2))).is_zero()
    prod = DenseT.one(tw.Fq, f, f + 1)
    for j in range(f):
        prod = prod * (DenseT.one(tw.Fq, f, f + 1) + DenseT.variable(tw.Fq, f, f + 1, j))
    unit_val = R.mu(ZLaurent((-1,) * f, prod)).is_one()
    out.append(clock.stamp(check("mu.normalization", prm, zero_one and unit_val,
                                 {"mu(1)=0": zero_one, "mu(Z^-1 prod(1+T))=1": unit_val})))

    bad = None
    for k in range(n_elems):
        x = _random_zlaurent(R, rng, 1 + k % 2, p)
        lhs, rhs = R.mu(R.psi_Z(x)), R.mu(x) * sign
        if lhs != rhs:
            bad = {"sample": k, "lhs": lhs, "rhs": rhs}
            break
    out.append(clock.stamp(check("mu.psi_eigen", dict(prm, samples=n_elems), bad is None, bad or {})))

    # wrong representative: psi(delta_{-alpha_0} x) in place of psi(x)
    inv = np.array([(-1) ** k for k in range(64)], dtype=np.int64) % p
    broken = 0
    for k in range(20):
        x = _random_zlaurent(R, rng, 1, p)
        shifted = ZLaurent(x.shift, x.dense.mul_axis(0, inv[: x.dense.N]))
        if R.mu(R.psi_Z(shifted)) != R.mu(x) * sign:
            broken += 1
    out.append(clock.stamp(check("mu.negative_control", prm, broken > 0, {"broken": broken, "of": 20})))

    units = random_units(R.ok, n_units, rng)
    bad = None
    for a in units:
        nrm = tw.sigma0(tw.Fq(tw.norm(a.reduce())))
        for t in range(per_unit):
            x = _random_zlaurent(R, rng, 1 + t % 2, 1)
            lhs, rhs = R.mu(R.act_inverse_Z(a, x)), R.mu(x) * nrm
            if lhs != rhs:
                bad = {"a": a, "lhs": lhs, "rhs": rhs}
                break
        if bad:
            break
    out.append(clock.stamp(check("mu.norm_character", dict(prm, units=n_units, per_unit=per_unit),
                                 bad is None, bad or {})))
    return out


def suite_lemma_coefficient(p: int, f: int) -> CheckReport:
    """Brute-force coefficient identity with b_i the actual linear coefficients a_i0."""
    tw = FieldTower(p, f)
    cc = CoordChange(tw, 3)
    b = [cc.A[i][0] for i in range(f)]
    lhs, rhs = lemma_coefficient(b, p), lemma_product(b, p)
    return check("mu.lemma_coefficient", {"p": p, "f": f}, lhs == rhs, {"lhs": lhs, "rhs": rhs, "b": b})


def suite_h_basis(p: int, f: int, N: int = 8) -> CheckReport:
    """prod_j (1+T_j) rewritten in the Z_j, for the bases [g^j] and [(g^2)^j]."""
    base = FieldTower(p, f)
    alt_g = base.Fq.gen ** 2
    res = []
    for g in (None, alt_g.c):
        tw = FieldTower(p, f, g=g)
        cc = CoordChange(tw, N)
        x = DenseT.one(tw.Fq, f, N)
        for j in range(f):
            x = x * (DenseT.one(tw.Fq, f, N) + DenseT.variable(tw.Fq, f, N, j))
        res.append(cc.t_to_z(x))
    diff = res[0].first_difference(res[1])
    return check("mu.h_basis_independence", {"p": p, "f": f, "N": N, "generators": ["g", "g^2"]},
                 diff is None, {"first_difference": diff} if diff else {})


# ---------------------------------------------------------------------------
# modules over A

def _units(S: AScalars, n: int, seed: int):
    return S.random_units(n, np.random.default_rng(seed))


def suite_modules(p: int, f: int, N: int, seed: int = 0, n_units: int = 10,
                  h: Optional[int] = None) -> List[CheckReport]:
    R = ring_for(p, f, N)
    S = AScalars(R)
    F = S.F
    prm = {"p": p, "f": f, "N": N}
    clock = _Clock()
    units = _units(S, n_units, seed)
    h = h if h is not None else sum(p ** i * (12 + (i % 2) + 1) for i in range(f))
    lam = F.gen
    out = []
    shapes = {"character": Character(h, lam), "irreducible": Irreducible(2, h, lam),
              "split": Split(h, lam, lam ** 3)}
    mods = {}
    for name, shape in shapes.items():
        D = build_semisimple_module(shape, N, R)
        mods[name] = D
        rep = check_equivariance(D, units, dict(prm, shape=name, h=h))
        out.append(clock.stamp(rep))
    D = build_semisimple_module(shapes["irreducible"], N, R, action_h_shift=1)
    rep = check_equivariance(D, units[:1], dict(prm, shape="irreducible", h=h))
    out.append(clock.stamp(CheckReport("phigamma.negative_control", rep.params,
                                       PASS if not rep.ok else FAIL, rep.witness)))

    # a in [F_q^x] acts trivially
    t = R.ok.teichmuller(R.tower.Fq.gen)
    G = mods["irreducible"].G(t)
    triv = all(G[i][j].first_difference(S.one() if i == j else S.zero()) is None
               for i in range(2) for j in range(2))
    out.append(clock.stamp(check("phigamma.teichmuller_trivial", prm, triv, {})))

    # psi o phi = id on the phi_q-module and on D_A^(x)
    rng = np.random.default_rng(seed + 1)
    bad = None
    for name in ("irreducible",):
        D = mods[name]
        Dx = build_DA_otimes(D)
        for M in (D, Dx):
            x = [_random_y(S, rng, 3, N) for _ in range(M.rank)]
            back = psi_on_module(M, M.frob(x))
            for j, (u, v) in enumerate(zip(back, x)):
                d = u.first_difference(v)
                if d is not None:
                    bad = {"module": M.semilinear, "basis": j, "first_difference": d}
    out.append(clock.stamp(check("phigamma.psi_phi", prm, bad is None, bad or {})))

    # dual pairing
    D = mods["irreducible"]
    Dv = dual_module(D)
    bad = None
    x = [_random_y(S, rng, 3, N) for _ in range(2)]
    y = [_random_y(S, rng, 3, N) for _ in range(2)]
    d = pairing(Dv.frob(x), D.frob(y), S).first_difference(S.phi(pairing(x, y, S), S.f))
    if d is not None:
        bad = {"map": "phi", "first_difference": d}
    for a in units[:3]:
        d = pairing(Dv.act(a, x), D.act(a, y), S).first_difference(S.act(a, pairing(x, y, S)))
        if d is not None and bad is None:
            bad = {"map": "a", "a": a, "first_difference": d}
    out.append(clock.stamp(check("phigamma.dual_pairing", prm, bad is None, bad or {})))
    Dvv = dual_module(Dv)
    dd = mat_first_difference(Dvv.Phi, D.Phi) or mat_first_difference(Dvv.G(units[0]), D.G(units[0]))
    out.append(clock.stamp(check("phigamma.double_dual", prm, dd is None, dd or {})))
    return out


def _random_y(S: AScalars, rng, deg: int, prec: int, nterms: int = 4) -> TruncLaurent:
    terms = {}
    for _ in range(nterms):
        e = tuple(int(v) for v in rng.integers(0, deg, S.f))
        terms[e] = S.F(int(rng.integers(1, S.p)))
    return TruncLaurent.from_dict(S.F, S.f, "Y", terms, prec)


def suite_reconstruction(p: int, f: int, N: int, seed: int = 0) -> List[CheckReport]:
    """Reconstruction sum_n delta_n phi(psi(delta_n^{-1} x)) = x on D_A^(x), and psi-linearity."""
    R = ring_for(p, f, N)
    S = AScalars(R)
    F = S.F
    prm = {"p": p, "f": f, "N": N}
    clock = _Clock()
    rng = np.random.default_rng(seed)
    D = build_DA_otimes(build_semisimple_module(Irreducible(2, 1 + p, F.gen), N, R))
    z = [_random_y(S, rng, 4, N) for _ in range(D.rank)]
    x = mat_vec(D.Phi, z, S)
    out = []
    rec = reconstruct_on_module(D, x)
    d = _first((j, u.first_difference(v)) for j, (u, v) in enumerate(zip(rec, x)) if u.first_difference(v))
    out.append(clock.stamp(check("phigamma.reconstruction", prm, d is None,
                                 {"basis": d[0], "first_difference": d[1]} if d else {})))
    rec = reconstruct_on_module(D, x, omit=[1] + [0] * (f - 1))
    broken = any(u.first_difference(v) is not None for u, v in zip(rec, x))
    out.append(clock.stamp(check("phigamma.reconstruction_negative_control", prm, broken, {"detected": broken})))
    b = _random_y(S, rng, 3, N)
    lhs = psi_on_module(D, [S.phi(b) * u for u in x])
    rhs = [b * u for u in psi_on_module(D, x)]
    d = _first(u.first_difference(v) for u, v in zip(lhs, rhs) if u.first_difference(v))
    out.append(clock.stamp(check("phigamma.psi_linearity", prm, d is None, {"first_difference": d} if d else {})))
    return out


def suite_otimes(p: int, f: int, N: int, seed: int = 0, n_units: int = 3) -> List[CheckReport]:
    """Structure of D_A^(x): rank, phi^f, the character case, twists and the trace."""
    R = ring_for(p, f, N)
    S = AScalars(R)
    F = S.F
    prm = {"p": p, "f": f, "N": N}
    clock = _Clock()
    units = _units(S, n_units, seed)
    h = 1 + p
    lam = F.gen
    out = []
    base = build_semisimple_module(Irreducible(2, h, lam), N, R)
    D = build_DA_otimes(base)
    out.append(clock.stamp(check("otimes.rank", prm, D.rank == 2 ** f, {"rank": D.rank})))

    Pf = D.Phi
    for k in range(1, f):
        Pf = mat_mul(Pf, mat_map(lambda x, k=k: S.phi(x, k), D.Phi), S)
    want = kron([mat_map(lambda x, j=j: S.phi(x, f - 1 - j), base.Phi) for j in range(f)], S)
    d = mat_first_difference(Pf, want)
    out.append(clock.stamp(check("otimes.phi_f", prm, d is None, d or {})))

    ch = build_DA_otimes(build_semisimple_module(Character(h, lam), N, R))
    Fchi = S.mono([h] + [0] * (f - 1))
    d1 = (ch.Phi[0][0] * S.phi(Fchi)).first_difference(Fchi.scale(lam))
    d2 = None
    for a in units:
        got = ch.G(a)[0][0] * S.act(a, Fchi)
        d2 = got.first_difference(Fchi.scale(R.sigma_bar(a, 0) ** h))
        if d2:
            d2 = {"a": a, "first_difference": d2}
            break
    out.append(clock.stamp(check("otimes.character", dict(prm, h=h), d1 is None and d2 is None,
                                 {"phi": d1, "action": d2} if (d1 or d2) else {})))
    rep = check_equivariance(D, units, dict(prm, module="otimes"))
    out.append(clock.stamp(rep))

    # twists
    same = twist_by_character(D, (0, 1))
    d0 = mat_first_difference(same.Phi, D.Phi) or mat_first_difference(same.G(units[0]), D.G(units[0]))
    un = twist_by_character(D, (0, lam))
    d1 = mat_first_difference(un.Phi, mat_map(lambda x: x.scale(lam), D.Phi)) \
        or mat_first_difference(un.G(units[0]), D.G(units[0]))
    om = twist_by_character(D, (1, 1))
    s0 = R.sigma_bar(units[0], 0)
    d2 = mat_first_difference(om.G(units[0]), mat_map(lambda x: x.scale(s0), D.G(units[0])))
    out.append(clock.stamp(check("otimes.twists", prm, not (d0 or d1 or d2),
                                 {"trivial": d0, "unr": d1, "omega_f": d2})))

    # trace
    Dt = trace_base_change(D)
    T = Dt.scalars
    zunits = T.random_units(n_units, np.random.default_rng(seed))
    rep = check_equivariance(Dt, zunits, dict(prm, module="traced"))
    rank_ok = Dt.rank == D.rank
    cht = trace_base_change(ch)
    Fb = T.mono((h,))
    e1 = (T.phi(Fb) * cht.Phi[0][0]).first_difference(Fb.scale(lam))
    e2 = None
    for a in zunits:
        e2 = (T.act(a, Fb) * cht.G(a)[0][0]).first_difference(Fb.scale(R.sigma_bar(a, 0) ** h))
        if e2:
            e2 = {"a": a, "first_difference": e2}
            break
    tw_lhs = trace_base_change(twist_by_character(ch, (2, lam)))
    tw_rhs_phi = cht.Phi[0][0].scale(lam)
    e3 = tw_lhs.Phi[0][0].first_difference(tw_rhs_phi)
    for a in zunits:
        want = cht.G(a)[0][0].scale(R.sigma_bar(a, 0) ** 2)
        e3 = e3 or tw_lhs.G(a)[0][0].first_difference(want)
    ok = rep.ok and rank_ok and not (e1 or e2 or e3)
    out.append(clock.stamp(check("otimes.trace", prm, ok,
                                 {"equivariance": rep.status, "rank": [D.rank, Dt.rank],
                                  "character_phi": e1, "character_action": e2, "twist": e3})))
    return out


def suite_otimes_f1(p: int, N: int, seed: int = 0, n_units: int = 3) -> CheckReport:
    """For f = 1 the tensor induction is the base module itself."""
    R = ring_for(p, 1, N)
    S = AScalars(R)
    base = build_semisimple_module(Irreducible(2, 2, S.F.gen), N, R)
    D = build_DA_otimes(base)
    d = mat_first_difference(D.Phi, base.Phi)
    for a in _units(S, n_units, seed):
        d = d or mat_first_difference(D.G(a), base.G(a))
    return check("otimes.f1_identity", {"p": p, "f": 1, "N": N}, d is None, d or {})


def suite_trace_oracle(p: int, f: int, N: int, seed: int = 0) -> CheckReport:
    """tr(Y_i) = u for all i, and the exponent-collapse trace agrees with the dense trace map."""
    R = ring_for(p, f, N)
    S = AScalars(R)
    from .phigamma import UScalars

    T = UScalars(S)
    rng = np.random.default_rng(seed)
    u0 = R.trace_to_zp(R.cc.Y(0).truncate(N))
    bad = []
    for i in range(1, f):
        d = R.trace_to_zp(R.cc.Y(i).truncate(N)).first_difference(u0)
        if d:
            bad.append({"i": i, "first_difference": d})
    for _ in range(3):
        x = _random_y(S, rng, 4, N)
        d = R.trace_to_zp(R.cc.y_to_t(x)).first_difference(T.to_T(S.trace(x)))
        if d:
            bad.append({"x": x.serialize(), "first_difference": d})
    return check("otimes.trace_oracle", {"p": p, "f": f, "N": N}, not bad, {"failing": bad[:2]})


# ---------------------------------------------------------------------------
# weights, main, newton

def suite_weights(params) -> List[CheckReport]:
    from .serre_weights import verify_weight_identities

    clock = _Clock()
    reps = verify_weight_identities(params)
    for r in reps:
        clock.stamp(r)
    return reps


def suite_main(params, N: int = 60, seed: int = 0, n_units: int = 10,
               perturb_b=None) -> List[CheckReport]:
    clock = _Clock()
    reps, wit = verify_main_isomorphism(params, N, n_units, seed, perturb_b=perturb_b)
    for r in reps:
        clock.stamp(r)
    reps.append(CheckReport("iso.witness", dict(params.describe(), N=N), PASS, wit.serialize(), 0.0))
    return reps


def suite_newton(p: int, seed: int = 0, fs: Sequence[int] = (2, 3)) -> List[CheckReport]:
    clock = _Clock()
    reps = verify_newton(p, fs, seed=seed)
    for r in reps:
        clock.stamp(r)
    return reps
