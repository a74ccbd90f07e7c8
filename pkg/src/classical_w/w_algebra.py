"""Classical W-algebras, finite and affine, built two independent ways.

Route one evaluates the explicit nested-sharp chain formulas attached to a
Slodowy frame; the chains terminate because every sharp factor lowers the
ad x-degree, so the enumeration is over a finite acyclic transition graph.
Route two realizes the W-algebra by Hamiltonian reduction: the rho map onto
differential polynomials over the complement p, generator lifts solved from
exact linear systems, and the reduced lambda-bracket.  The two routes are
cross-validated in the test suite; the reduction is the arbiter for every
sign and attachment convention in the chain formulas.
"""

from __future__ import annotations

from dataclasses import dataclass

from .rationals import Rat, ZERO, ONE, rat
from . import linalg
from .diff_poly import DiffPoly, EMPTY_MONO
from .lie_core import (LieAlgebraData, SlodowyFrame, Polarization,
                       lagrangian_subspace, InternalConsistencyError)
from .pva_engine import (LambdaPoly, PVAStructure, DomainError,
                         affine_bracket_table, bracket_apply)


class NotAWElementError(DomainError):
    pass


class BoundTooSmallError(DomainError):
    pass


# ---------------------------------------------------------------------------
# Chain enumeration shared by the finite and affine explicit formulas
# ---------------------------------------------------------------------------

SENTINEL = None  # chain start: the generator itself, dual index (i_0, m_0+1 -> 0)


class _ChainData:
    """Transition data on states (i, m): duals, extendeds, sharp factors."""

    def __init__(self, frame: SlodowyFrame):
        self.frame = frame
        self.alg = frame.alg
        self.k = frame.k
        self.two_delta = [int(2 * d) for d in frame.delta]

    def dual_of(self, start: int, state):
        """q_{i_s}^{m_s+1}, or the generator q_{i_0} itself at the sentinel."""
        if state is SENTINEL:
            return self.frame.qf[start]
        i, m = state
        if m + 1 > self.two_delta[i]:
            return None
        return self.frame.extended_dual[(i, m + 1)]

    def states(self):
        for i in range(self.k):
            for m in range(self.two_delta[i] + 1):
                yield (i, m)

    def sharp_step(self, start: int, prev, state):
        """Sharp coefficients of [dual(prev), q^{i}_{m}], or None if zero."""
        dual = self.dual_of(start, prev)
        if dual is None:
            return None
        i, m = state
        ext = self.frame.extended[(i, m)]
        coords = self.frame.sharp_coords(self.alg.bracket(dual, ext))
        if all(c == 0 for c in coords):
            return None
        return coords

    def delta_allowed(self, start: int, prev, state) -> bool:
        i, m = state
        if prev is SENTINEL:
            return i == start and m == 0
        pi, pm = prev
        return i == pi and m == pm + 1


def _enumerate_chains(data: _ChainData, start: int, allow_brackets: bool):
    """All chains from the sentinel: lists of steps (state, kind, coords).

    kind is "delta" or "sharp"; coords is the sharp coefficient vector for
    sharp steps.  Termination: sharp steps strictly lower total degree and
    delta steps strictly raise m, so the nonzero transition graph is acyclic.
    """
    chains = [[]]
    frontier = [(SENTINEL, [])]
    guard = 0
    while frontier:
        guard += 1
        if guard > 100000:
            raise InternalConsistencyError("chain enumeration did not terminate")
        prev, path = frontier.pop()
        for state in data.states():
            steps = []
            if allow_brackets:
                coords = data.sharp_step(start, prev, state)
                if coords is not None:
                    steps.append((state, "sharp", coords))
            if data.delta_allowed(start, prev, state):
                steps.append((state, "delta", None))
            for step in steps:
                new_path = path + [step]
                chains.append(new_path)
                frontier.append((state, new_path))
    return chains


# ---------------------------------------------------------------------------
# Finite bracket: Poisson structure on S(g^f) via the chain formula
# ---------------------------------------------------------------------------


class FiniteWBracketTable:
    """Poisson bracket table {q_i, q_j}_S on the Slodowy slice generators."""

    def __init__(self, frame: SlodowyFrame, table: dict):
        self.frame = frame
        self.k = frame.k
        self.table = table  # (i, j) -> DiffPoly in order-0 generator variables
        self.labels = [f"w{r + 1}" for r in range(self.k)]

    def entry(self, i: int, j: int) -> DiffPoly:
        return self.table.get((i, j), DiffPoly.zero())

    def bracket_polys(self, p: DiffPoly, q: DiffPoly) -> DiffPoly:
        """Leibniz extension of the table to S(g^f)."""
        out = DiffPoly.zero()
        for i in sorted(p.generators()):
            dp = p.partial(i, 0)
            if dp.is_zero():
                continue
            for j in sorted(q.generators()):
                dq = q.partial(j, 0)
                if dq.is_zero():
                    continue
                out = out + self.entry(i, j) * dp * dq
        return out

    def check_skew(self) -> bool:
        return all((self.entry(i, j) + self.entry(j, i)).is_zero()
                   for i in range(self.k) for j in range(self.k))

    def check_jacobi_on_generators(self) -> bool:
        for i in range(self.k):
            for j in range(self.k):
                for l in range(self.k):
                    total = (
                        self.bracket_polys(DiffPoly.var(i),
                                           self.entry(j, l))
                        + self.bracket_polys(DiffPoly.var(j),
                                             self.entry(l, i))
                        + self.bracket_polys(DiffPoly.var(l),
                                             self.entry(i, j)))
                    if not total.is_zero():
                        return False
        return True

    def to_json(self):
        return {
            "generators": self.labels,
            "weights": [str(w) for w in self.frame.generator_weights()],
            "entries": [{"i": i, "j": j, "value": self.entry(i, j).to_json()}
                        for (i, j) in sorted(self.table)],
        }

    def latex(self) -> str:
        lines = []
        for (i, j) in sorted(self.table):
            lines.append(
                f"\\{{{self.labels[i]}, {self.labels[j]}\\}}_S = "
                + self.entry(i, j).latex(self.labels))
        return "\\begin{gathered}\n" + " \\\\\n".join(lines) + "\n\\end{gathered}"


def finite_bracket_table(frame: SlodowyFrame) -> FiniteWBracketTable:
    """Evaluate the nested-sharp chain formula on all generator pairs."""
    data = _ChainData(frame)
    chains_by_start = {
        i: [c for c in _enumerate_chains(data, i, allow_brackets=True)
            if all(kind == "sharp" for (_, kind, _) in c)]
        for i in range(frame.k)}
    table = {}
    for i in range(frame.k):
        for j in range(frame.k):
            total = DiffPoly.linear(
                frame.sharp_coords(frame.alg.bracket(frame.qf[i], frame.qf[j])))
            for chain in chains_by_start[i]:
                if not chain:
                    continue
                prod = DiffPoly.one()
                for (_, _, coords) in chain:
                    prod = prod * DiffPoly.linear(coords)
                last_state = chain[-1][0]
                closing = data.dual_of(i, last_state)
                if closing is None:
                    continue
                closing_coords = frame.sharp_coords(
                    frame.alg.bracket(closing, frame.qf[j]))
                closing_poly = DiffPoly.linear(closing_coords)
                if closing_poly.is_zero():
                    continue
                total = total + prod * closing_poly
            if not total.is_zero():
                table[(i, j)] = total
    return FiniteWBracketTable(frame, table)


def finite_bracket(frame: SlodowyFrame, p, q) -> DiffPoly:
    """{p, q}_S for p, q given as coordinate vectors inside g^f."""
    for v in (p, q):
        if frame.sharp(v) != list(v):
            raise DomainError("argument is not in the centralizer of f")
    table = finite_bracket_table(frame)
    cp = linalg.coords_in_basis(frame.qf, p)
    cq = linalg.coords_in_basis(frame.qf, q)
    out = DiffPoly.zero()
    for i, a in enumerate(cp):
        if not a:
            continue
        for j, b in enumerate(cq):
            if b:
                out = out + table.entry(i, j) * (a * b)
    return out


# ---------------------------------------------------------------------------
# Weighted monomial enumeration (shared by lifts and rewrites)
# ---------------------------------------------------------------------------


def weighted_monomials(var_weights, target, with_derivatives: bool,
                       variables=None):
    """All monomials of exact total weight target; derivative orders add 1.

    var_weights: weight per variable index (all positive).  Returns canonical
    Mono tuples sorted deterministically.
    """
    target = rat(target)
    if variables is None:
        variables = list(range(len(var_weights)))
    factors = []
    for v in variables:
        base = rat(var_weights[v])
        max_order = int(target - base) if with_derivatives else 0
        for n in range(max_order + 1):
            w = base + n
            if w <= target:
                factors.append(((v, n), w))
    factors.sort(key=lambda it: it[0])
    out = []

    def recurse(idx, remaining, acc):
        if remaining == 0:
            out.append(tuple(acc))
            return
        if idx == len(factors):
            return
        (v, n), w = factors[idx]
        max_p = int(remaining / w)
        for p in range(max_p, -1, -1):
            if p:
                acc.append((v, n, p))
            if remaining - w * p >= 0:
                recurse(idx + 1, remaining - w * p, acc)
            if p:
                acc.pop()

    recurse(0, target, [])
    return sorted(set(out))


# ---------------------------------------------------------------------------
# Hamiltonian reduction realizations
# ---------------------------------------------------------------------------


@dataclass
class _LinearSystem:
    """Sparse linear system builder over canonical row keys."""

    ncols: int

    def __post_init__(self):
        self.rows: dict = {}
        self.rhs: dict = {}

    def add(self, row_key, col: int, value):
        if not value:
            return
        row = self.rows.setdefault(row_key, {})
        row[col] = row.get(col, ZERO) + value
        if not row[col]:
            del row[col]

    def set_rhs(self, row_key, value):
        self.rhs[row_key] = self.rhs.get(row_key, ZERO) + value

    def to_matrix(self):
        keys = sorted(self.rows.keys() | self.rhs.keys())
        mat = []
        vec = []
        for key in keys:
            row = self.rows.get(key, {})
            mat.append([row.get(c, ZERO) for c in range(self.ncols)])
            vec.append(self.rhs.get(key, ZERO))
        return mat, vec


class ReductionBase:
    """Shared data for the finite and affine reductions.

    The adapted basis lists p first (ell', then g_0, g_{-1/2}, ... with the
    g^f directions leading inside each eigenspace) and n second; variables of
    the differential algebra are indexed by this basis.
    """

    def __init__(self, alg: LieAlgebraData, frame: SlodowyFrame,
                 polarization: Polarization | None = None, swap_ell: bool = False):
        self.alg = alg
        self.frame = frame
        self.polar = polarization or lagrangian_subspace(frame, swap=swap_ell)
        self.p_size = len(self.polar.p_basis)
        vectors = [v[:] for v in self.polar.p_basis] + [v[:] for v in self.polar.n_basis]
        self.basis_vectors = vectors
        self.degrees = list(self.polar.p_degrees) + list(self.polar.n_degrees)
        self.adapted = alg.in_new_basis(vectors)
        self.weights = [ONE - d for d in self.degrees]
        # constants the rho map assigns to the gauge directions
        self.rho_images = {}
        for j in range(self.p_size, self.adapted.dim):
            self.rho_images[j] = DiffPoly.const(alg.form(frame.triple.f, vectors[j]))
        # where each W generator sits inside the p block
        self.q_index = []
        for r in range(frame.k):
            target = frame.qf[r]
            found = None
            for idx in range(self.p_size):
                if vectors[idx] == target:
                    found = idx
                    break
            if found is None:
                raise InternalConsistencyError("g^f direction missing from p basis")
            self.q_index.append(found)
        self.gen_weights = [ONE + d for d in frame.delta]

    def rho(self, poly: DiffPoly) -> DiffPoly:
        return poly.substitute(self.rho_images)

    def n_indices(self):
        return range(self.p_size, self.adapted.dim)

    def p_var_weights(self):
        return self.weights[:self.p_size]

    def pure_q_monomials(self, weight, with_derivatives: bool):
        """Monomials in the q-directions only: the gauge-fixing targets."""
        all_w = {i: self.weights[i] for i in self.q_index}
        weights = [all_w.get(i, ONE) for i in range(self.p_size)]
        return weighted_monomials(weights, weight, with_derivatives,
                                  variables=self.q_index)

    def u_monomials(self, weight, with_derivatives: bool):
        return weighted_monomials(self.gen_weights, weight, with_derivatives)

    def sigma(self, poly: DiffPoly, lifts) -> DiffPoly:
        """Substitute generator variables by their lifts."""
        return poly.substitute({r: lifts[r] for r in range(self.frame.k)})


class FiniteReduction(ReductionBase):
    """W^{cl,fin}(g,f) as invariants of S(p) under the gauge action of n."""

    def poisson(self, p: DiffPoly, q: DiffPoly) -> DiffPoly:
        """Lie-Poisson bracket on S(g) in the adapted basis."""
        out = DiffPoly.zero()
        for i in sorted(p.generators()):
            dp = p.partial(i, 0)
            if dp.is_zero():
                continue
            for j in sorted(q.generators()):
                dq = q.partial(j, 0)
                if dq.is_zero():
                    continue
                lie = self.adapted.bracket(self.adapted.basis_vector(i),
                                           self.adapted.basis_vector(j))
                out = out + DiffPoly.linear(lie) * dp * dq
        return out

    def is_invariant(self, p: DiffPoly) -> bool:
        return all(self.rho(self.poisson(DiffPoly.var(a), p)).is_zero()
                   for a in self.n_indices())

    def find_generator_lift(self, r: int) -> DiffPoly:
        weight = self.gen_weights[r]
        ansatz = weighted_monomials(self.p_var_weights(), weight, False)
        ncols = len(ansatz)
        col_of = {m: c for c, m in enumerate(ansatz)}
        system = _LinearSystem(ncols)
        for a in self.n_indices():
            avar = DiffPoly.var(a)
            for mono, col in col_of.items():
                image = self.rho(self.poisson(avar, DiffPoly({(0, mono): ONE})))
                for key, val in image.terms.items():
                    system.add(("inv", a, key), col, val)
        bare = ((self.q_index[r], 0, 1),)
        system.add(("pin",), col_of[bare], ONE)
        system.set_rhs(("pin",), ONE)
        for mono in self.pure_q_monomials(weight, False):
            if mono != bare:
                if mono in col_of:
                    system.add(("gauge", mono), col_of[mono], ONE)
        mat, vec = system.to_matrix()
        sol = linalg.solve(mat, vec)
        if sol is None:
            raise BoundTooSmallError(f"no invariant lift for generator {r}")
        if linalg.nullspace(mat):
            raise InternalConsistencyError("finite lift is not unique after gauge fixing")
        out = DiffPoly.zero()
        for mono, col in col_of.items():
            if sol[col]:
                out = out + DiffPoly({(0, mono): sol[col]})
        assert self.is_invariant(out)
        return out

    def lifts(self):
        return [self.find_generator_lift(r) for r in range(self.frame.k)]

    def reduced_bracket(self, p: DiffPoly, q: DiffPoly) -> DiffPoly:
        return self.rho(self.poisson(p, q))

    def rewrite(self, poly: DiffPoly, lifts) -> DiffPoly:
        """Express an invariant of S(p) as a polynomial in the generators."""
        if poly.is_zero():
            return DiffPoly.zero()
        pieces: dict = {}
        for key, c in poly.terms.items():
            w = DiffPoly({key: c}).weight(self.weights)
            pieces[w] = pieces.get(w, DiffPoly.zero()) + DiffPoly({key: c})
        out = DiffPoly.zero()
        for w, part in sorted(pieces.items()):
            ansatz = self.u_monomials(w, False)
            cols = [self.sigma(DiffPoly({(0, m): ONE}), lifts) for m in ansatz]
            system = _LinearSystem(len(ansatz))
            for cidx, image in enumerate(cols):
                for key, val in image.terms.items():
                    system.add(key, cidx, val)
            for key, val in part.terms.items():
                system.set_rhs(key, val)
            mat, vec = system.to_matrix()
            sol = linalg.solve(mat, vec)
            if sol is None:
                raise NotAWElementError("polynomial is not in the W-subalgebra")
            for cidx, m in enumerate(ansatz):
                if sol[cidx]:
                    out = out + DiffPoly({(0, m): sol[cidx]})
        return out

    def table(self) -> FiniteWBracketTable:
        lifts = self.lifts()
        table = {}
        for i in range(self.frame.k):
            for j in range(self.frame.k):
                value = self.rewrite(self.reduced_bracket(lifts[i], lifts[j]), lifts)
                if not value.is_zero():
                    table[(i, j)] = value
        return FiniteWBracketTable(self.frame, table)


class AffineReduction(ReductionBase):
    """W^{cl}_z(g,f) inside the differential polynomials over p."""

    def __init__(self, alg, frame, s, polarization=None, swap_ell=False):
        super().__init__(alg, frame, polarization=polarization, swap_ell=swap_ell)
        self.s = list(s)
        s_adapted = linalg.coords_in_basis(self.basis_vectors, self.s)
        self.struct = affine_bracket_table(self.adapted, s_adapted)
        self._lifts = None

    # -- the defining gauge condition ---------------------------------------

    def rho_lambda(self, entry: LambdaPoly) -> LambdaPoly:
        return LambdaPoly([self.rho(c) for c in entry.coeffs])

    def gauge_bracket(self, a_index: int, p: DiffPoly) -> LambdaPoly:
        return self.rho_lambda(self.struct.master_bracket(DiffPoly.var(a_index), p))

    def is_w_element(self, p: DiffPoly) -> bool:
        return all(self.gauge_bracket(a, p).is_zero() for a in self.n_indices())

    # -- generator lifts -------------------------------------------------------

    def find_generator_lift(self, r: int, degree_bound: int | None = None) -> DiffPoly:
        weight = self.gen_weights[r]
        ansatz = weighted_monomials(self.p_var_weights(), weight, True)
        if degree_bound is not None:
            ansatz = [m for m in ansatz if sum(p for _, _, p in m) <= degree_bound]
        col_of = {m: c for c, m in enumerate(ansatz)}
        bare = ((self.q_index[r], 0, 1),)
        if bare not in col_of:
            raise BoundTooSmallError("ansatz does not even contain the generator")
        system = _LinearSystem(len(ansatz))
        for a in self.n_indices():
            for mono, col in col_of.items():
                image = self.gauge_bracket(a, DiffPoly({(0, mono): ONE}))
                for lam, coeff in enumerate(image.coeffs):
                    for key, val in coeff.terms.items():
                        system.add(("inv", a, lam, key), col, val)
        system.add(("pin",), col_of[bare], ONE)
        system.set_rhs(("pin",), ONE)
        for mono in self.pure_q_monomials(weight, True):
            if mono != bare and mono in col_of:
                system.add(("gauge", mono), col_of[mono], ONE)
        mat, vec = system.to_matrix()
        sol = linalg.solve(mat, vec)
        if sol is None:
            raise BoundTooSmallError(
                f"no W-algebra lift for generator {r} within the weight ansatz")
        if linalg.nullspace(mat):
            raise InternalConsistencyError("affine lift is not unique after gauge fixing")
        out = DiffPoly.zero()
        for mono, col in col_of.items():
            if sol[col]:
                out = out + DiffPoly({(0, mono): sol[col]})
        assert self.is_w_element(out)
        return out

    def lifts(self):
        if self._lifts is None:
            self._lifts = [self.find_generator_lift(r) for r in range(self.frame.k)]
        return self._lifts

    # -- reduced bracket and rewriting ----------------------------------------

    def reduced_bracket(self, p: DiffPoly, q: DiffPoly,
                        check_domain: bool = True) -> LambdaPoly:
        if check_domain and not (self.is_w_element(p) and self.is_w_element(q)):
            raise NotAWElementError("reduced bracket needs W-algebra elements")
        return self.rho_lambda(self.struct.master_bracket(p, q))

    def rewrite(self, poly: DiffPoly, lifts=None) -> DiffPoly:
        """Inverse of sigma on z-free weight pieces; z powers ride along."""
        lifts = lifts or self.lifts()
        out = DiffPoly.zero()
        for zp in range(poly.z_degree() + 1):
            part = poly.z_coefficient(zp)
            if part.is_zero():
                continue
            rewritten = self._rewrite_z_free(part, lifts)
            out = out + rewritten * DiffPoly.z(zp) if zp else out + rewritten
        return out

    def _rewrite_z_free(self, poly: DiffPoly, lifts) -> DiffPoly:
        pieces: dict = {}
        for key, c in poly.terms.items():
            w = DiffPoly({key: c}).weight(self.weights)
            pieces[w] = pieces.get(w, DiffPoly.zero()) + DiffPoly({key: c})
        out = DiffPoly.zero()
        for w, part in sorted(pieces.items()):
            ansatz = self.u_monomials(w, True)
            system = _LinearSystem(len(ansatz))
            for cidx, m in enumerate(ansatz):
                image = self.sigma(DiffPoly({(0, m): ONE}), lifts)
                for key, val in image.terms.items():
                    system.add(key, cidx, val)
            for key, val in part.terms.items():
                system.set_rhs(key, val)
            mat, vec = system.to_matrix()
            sol = linalg.solve(mat, vec)
            if sol is None:
                raise NotAWElementError("value does not lie in the W-subalgebra")
            for cidx, m in enumerate(ansatz):
                if sol[cidx]:
                    out = out + DiffPoly({(0, m): sol[cidx]})
        return out

    def rewrite_lambda(self, entry: LambdaPoly, lifts=None) -> LambdaPoly:
        lifts = lifts or self.lifts()
        return LambdaPoly([self.rewrite(c, lifts) for c in entry.coeffs])

    def table(self) -> "AffineWBracketTable":
        lifts = self.lifts()
        k = self.frame.k
        entries = {}
        for i in range(k):
            for j in range(k):
                raw = self.reduced_bracket(lifts[i], lifts[j], check_domain=False)
                entries[(i, j)] = self.rewrite_lambda(raw, lifts)
        labels = [f"w{r + 1}" for r in range(k)]
        struct = PVAStructure(labels, entries, weights=self.gen_weights)
        return AffineWBracketTable(self.frame, struct, source="reduction")

    # -- densities -------------------------------------------------------------

    def w_representative(self, poly: DiffPoly, lifts=None):
        """Split poly = sigma(G) + d(X): G in generator variables, X over p.

        Raises NotAWElementError when poly is not in W + dV(p).
        """
        lifts = lifts or self.lifts()
        if poly.is_zero():
            return DiffPoly.zero(), DiffPoly.zero()
        if not poly.z_free():
            raise DomainError("densities must be z-free")
        const = poly.constant_term()
        body = poly - DiffPoly.const(const)
        pieces: dict = {}
        for key, c in body.terms.items():
            w = DiffPoly({key: c}).weight(self.weights)
            pieces[w] = pieces.get(w, DiffPoly.zero()) + DiffPoly({key: c})
        g_total, x_total = DiffPoly.zero(), DiffPoly.zero()
        for w, part in sorted(pieces.items()):
            u_ansatz = self.u_monomials(w, True)
            x_ansatz = [m for m in weighted_monomials(self.p_var_weights(), w - 1, True)
                        if m != EMPTY_MONO]
            ncols = len(u_ansatz) + len(x_ansatz)
            system = _LinearSystem(ncols)
            for cidx, m in enumerate(u_ansatz):
                image = self.sigma(DiffPoly({(0, m): ONE}), lifts)
                for key, val in image.terms.items():
                    system.add(key, cidx, val)
            for xidx, m in enumerate(x_ansatz):
                image = DiffPoly({(0, m): ONE}).total_derivative()
                for key, val in image.terms.items():
                    system.add(key, len(u_ansatz) + xidx, val)
            for key, val in part.terms.items():
                system.set_rhs(key, val)
            mat, vec = system.to_matrix()
            sol = linalg.solve(mat, vec)
            if sol is None:
                raise NotAWElementError("density is not a W-element modulo d")
            for cidx, m in enumerate(u_ansatz):
                if sol[cidx]:
                    g_total = g_total + DiffPoly({(0, m): sol[cidx]})
            for xidx, m in enumerate(x_ansatz):
                if sol[len(u_ansatz) + xidx]:
                    x_total = x_total + DiffPoly({(0, m): sol[xidx + len(u_ansatz)]})
        return g_total, x_total


# ---------------------------------------------------------------------------
# The explicit affine formula (chain evaluation with validated conventions)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonsterConventions:
    """Sign and attachment conventions for the affine chain formula.

    The published display leaves several conventions ambiguous (overloaded
    summation symbols, sign placement on the sesquilinear insertions); the
    defaults below are the unique reading in the searched family that
    reproduces the Hamiltonian-reduction bracket on sl2 and sl3.
    """

    i_first_delta: int = 1
    i_delta: int = 1
    t_first_delta: int = -1
    t_delta: int = -1
    i_sharp: int = 1
    t_sharp: int = 1
    pairing_rule: str = "any"        # any | delta_end | m_zero
    sharp_middle_rule: str = "any"
    z_middle_rule: str = "any"
    allow_consecutive_deltas: bool = True
    allow_sharp_steps: bool = True


DEFAULT_CONVENTIONS = MonsterConventions()


def _side_allows(rule: str, chain) -> bool:
    if rule == "any":
        return True
    if not chain:
        return True  # sentinel end
    state, kind, _ = chain[-1]
    if rule == "delta_end":
        return kind == "delta"
    if rule == "m_zero":
        return state[1] == 0
    raise ValueError(f"unknown middle rule {rule!r}")


def _apply_step(kind, coords, sign, operand: LambdaPoly) -> LambdaPoly:
    if kind == "delta":
        out = operand.lam_plus_del()
        return out if sign == 1 else -out
    poly = DiffPoly.linear(coords)
    out = operand * poly
    return out if sign == 1 else -out


def affine_generator_bracket(frame: SlodowyFrame, s, i0: int, j0: int,
                             conventions: MonsterConventions = DEFAULT_CONVENTIONS,
                             _cache=None) -> LambdaPoly:
    """{w_{i0} lambda w_{j0}}_z from the explicit chain formula."""
    data = _ChainData(frame)
    conv = conventions

    def chains_for(start):
        if _cache is not None and ("chains", start) in _cache:
            return _cache[("chains", start)]
        raw = _enumerate_chains(data, start, conv.allow_sharp_steps)
        if not conv.allow_consecutive_deltas:
            filtered = []
            for chain in raw:
                ok = True
                for idx in range(1, len(chain)):
                    if chain[idx][1] == "delta" and chain[idx - 1][1] == "delta":
                        ok = False
                        break
                if ok:
                    filtered.append(chain)
            raw = filtered
        if _cache is not None:
            _cache[("chains", start)] = raw
        return raw

    i_chains = chains_for(i0)
    t_chains = chains_for(j0)

    result = LambdaPoly.zero()
    for ichain in i_chains:
        # fold the right-hand (P-side) chain onto 1, first step innermost
        value = LambdaPoly.of(DiffPoly.one())
        dead = False
        for idx, (state, kind, coords) in enumerate(ichain):
            if kind == "delta":
                sign = conv.i_first_delta if idx == 0 else conv.i_delta
            else:
                sign = conv.i_sharp
            value = _apply_step(kind, coords, sign, value)
            if value.is_zero():
                dead = True
                break
        if dead:
            continue
        left_state = ichain[-1][0] if ichain else SENTINEL
        left = data.dual_of(i0, left_state)
        if left is None:
            continue
        for tchain in t_chains:
            right_state = tchain[-1][0] if tchain else SENTINEL
            right = data.dual_of(j0, right_state)
            if right is None:
                continue
            lie = frame.alg.bracket(left, right)
            middle_sharp = DiffPoly.linear(frame.sharp_coords(lie))
            pairing = frame.alg.form(left, right)
            z_coeff = frame.alg.form(s, lie)
            applied = LambdaPoly.zero()
            if not middle_sharp.is_zero() and \
                    _side_allows(conv.sharp_middle_rule, ichain) and \
                    _side_allows(conv.sharp_middle_rule, tchain):
                applied = applied + value * middle_sharp
            if pairing and _side_allows(conv.pairing_rule, ichain) and \
                    _side_allows(conv.pairing_rule, tchain):
                applied = applied + value.lam_plus_del() * pairing
            if z_coeff and _side_allows(conv.z_middle_rule, ichain) and \
                    _side_allows(conv.z_middle_rule, tchain):
                applied = applied + value * (DiffPoly.z() * z_coeff)
            if applied.is_zero():
                continue
            # unwind the left-hand (Q-side) chain, innermost factor first
            for idx in range(len(tchain) - 1, -1, -1):
                state, kind, coords = tchain[idx]
                if kind == "delta":
                    sign = conv.t_first_delta if idx == 0 else conv.t_delta
                else:
                    sign = conv.t_sharp
                applied = _apply_step(kind, coords, sign, applied)
                if applied.is_zero():
                    break
            result = result + applied
    return result


@dataclass
class AffineWBracketTable:
    """z-affine lambda-bracket table on the W-algebra generators."""

    frame: SlodowyFrame
    struct: PVAStructure
    source: str

    @property
    def labels(self):
        return self.struct.labels

    def entry(self, i, j) -> LambdaPoly:
        return self.struct.entry(i, j)

    def to_json(self):
        data = self.struct.to_json()
        data["weights"] = [str(w) for w in self.frame.generator_weights()]
        data["source"] = self.source
        return data

    def latex(self) -> str:
        return self.struct.latex()


def monster_table(frame: SlodowyFrame, s,
                  conventions: MonsterConventions = DEFAULT_CONVENTIONS) -> AffineWBracketTable:
    cache: dict = {}
    k = frame.k
    entries = {}
    for i in range(k):
        for j in range(k):
            entries[(i, j)] = affine_generator_bracket(frame, s, i, j,
                                                       conventions, _cache=cache)
    labels = [f"w{r + 1}" for r in range(k)]
    struct = PVAStructure(labels, entries, weights=[ONE + d for d in frame.delta])
    return AffineWBracketTable(frame, struct, source="chain-formula")
