"""Dev tool: solve for the chain-formula term weights from reduction oracles.

Enumerates every chain-pair/middle term class (tagged by the step-kind
sequences on both sides and the middle type), then solves the exact linear
system that makes the weighted sum reproduce the Hamiltonian-reduction tables
on several algebras at once.  Run from the repo root:

    python tools/fit_chain_formula.py
"""

import sys
from fractions import Fraction

sys.path.insert(0, "src")

from classical_w import (build_sl_n, triple_from_partition, build_slodowy_frame,
                         AffineReduction)
from classical_w.lie_core import sl_n_coords
from classical_w.w_algebra import _ChainData, _enumerate_chains, SENTINEL
from classical_w.pva_engine import LambdaPoly
from classical_w.diff_poly import DiffPoly
from classical_w import linalg


def chain_terms(frame, s, i0, j0, cache):
    """Yield (feature, LambdaPoly) per chain-pair and middle choice.

    Signs are literal from the display: i-side deltas +(lam+d) (bare lam on
    the first), t-side deltas -(lam+d); sharp factors +1.
    """
    data = cache.setdefault("data", _ChainData(frame))
    if ("chains", i0) not in cache:
        cache[("chains", i0)] = _enumerate_chains(data, i0, True)
    if ("chains", j0) not in cache:
        cache[("chains", j0)] = _enumerate_chains(data, j0, True)
    i_chains = cache[("chains", i0)]
    t_chains = cache[("chains", j0)]
    out = []
    for ichain in i_chains:
        value = LambdaPoly.of(DiffPoly.one())
        dead = False
        for (state, kind, coords) in ichain:
            if kind == "delta":
                value = value.lam_plus_del()
            else:
                value = value * DiffPoly.linear(coords)
            if value.is_zero():
                dead = True
                break
        if dead:
            continue
        left_state = ichain[-1][0] if ichain else SENTINEL
        left = data.dual_of(i0, left_state)
        if left is None:
            continue
        ikinds = tuple(k for (_, k, _) in ichain)
        for tchain in t_chains:
            right_state = tchain[-1][0] if tchain else SENTINEL
            right = data.dual_of(j0, right_state)
            if right is None:
                continue
            tkinds = tuple(k for (_, k, _) in tchain)
            lie = frame.alg.bracket(left, right)
            middles = []
            sharp_poly = DiffPoly.linear(frame.sharp_coords(lie))
            if not sharp_poly.is_zero():
                middles.append(("sharp", value * sharp_poly))
            pairing = frame.alg.form(left, right)
            if pairing:
                middles.append(("pairing", value.lam_plus_del() * pairing))
            zc = frame.alg.form(s, lie)
            if zc:
                middles.append(("z", value * (DiffPoly.z() * zc)))
            for mk, applied0 in middles:
                applied = applied0
                for idx in range(len(tchain) - 1, -1, -1):
                    state, kind, coords = tchain[idx]
                    if kind == "delta":
                        applied = -applied.lam_plus_del()
                    else:
                        applied = applied * DiffPoly.linear(coords)
                    if applied.is_zero():
                        break
                if applied.is_zero():
                    continue
                out.append(((ikinds, mk, tkinds), applied))
    return out


def oracle_and_terms(n, partition, s_entry):
    alg = build_sl_n(n)
    trip = triple_from_partition(alg, partition)
    frame = build_slodowy_frame(alg, trip)
    m = linalg.zeros(n, n)
    m[s_entry[0]][s_entry[1]] = Fraction(1)
    s = sl_n_coords(n, m)
    red = AffineReduction(alg, frame, s=s)
    tab = red.table()
    cache = {}
    items = []
    for i in range(frame.k):
        for j in range(frame.k):
            items.append(((n, tuple(partition), i, j), tab.entry(i, j),
                          chain_terms(frame, s, i, j, cache)))
    return items


def main():
    problems = []
    problems += oracle_and_terms(2, [2], (0, 1))
    problems += oracle_and_terms(3, [3], (0, 2))
    problems += oracle_and_terms(3, [2, 1], (0, 1))

    classes = sorted({feat for (_, _, terms) in problems for (feat, _) in terms})
    col = {feat: idx for idx, feat in enumerate(classes)}
    print(f"{len(classes)} term classes over {len(problems)} table entries")

    rows = {}
    rhs = {}
    for key, oracle, terms in problems:
        accum = {}
        for feat, val in terms:
            for lam, coeff in enumerate(val.coeffs):
                for tkey, c in coeff.terms.items():
                    accum.setdefault((key, lam, tkey), {})
                    cell = accum[(key, lam, tkey)]
                    cell[col[feat]] = cell.get(col[feat], Fraction(0)) + c
        for lam, coeff in enumerate(oracle.coeffs):
            for tkey, c in coeff.terms.items():
                rhs[(key, lam, tkey)] = c
        for rk, cell in accum.items():
            rows[rk] = cell

    row_keys = sorted(set(rows) | set(rhs))
    mat = [[rows.get(rk, {}).get(c, Fraction(0)) for c in range(len(classes))]
           for rk in row_keys]
    vec = [rhs.get(rk, Fraction(0)) for rk in row_keys]
    sol = linalg.solve(mat, vec)
    if sol is None:
        print("NO solution: the term-class family does not span the oracle")
        return
    null = linalg.nullspace(mat)
    print(f"solution found; kernel dimension {len(null)}")
    for feat, idx in sorted(col.items()):
        print(f"  weight {sol[idx]!s:>6}  class {feat}")
    if null:
        print("kernel directions (weights not pinned by the data):")
        for v in null[:10]:
            supp = [(classes[i], c) for i, c in enumerate(v) if c]
            print("   ", supp)


if __name__ == "__main__":
    main()
