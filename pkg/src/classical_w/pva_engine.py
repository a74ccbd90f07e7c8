"""Lambda-bracket calculus for Poisson vertex algebras.

Brackets are polynomials in a formal variable lambda with DiffPoly
coefficients; the pencil parameter z lives inside the coefficients.  The
master formula extends a generator table to arbitrary differential
polynomials by sesquilinearity and both Leibniz rules:

    {P_lam Q} = sum_{i,j,m,n} dQ/du_j^(n) (lam+d)^n {u_i lam+d u_j}_> (-lam-d)^m dP/du_i^(m)

where the arrows mean the derivation acts on everything to the right.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .rationals import Rat, ZERO, ONE, rat
from .diff_poly import DiffPoly, LocalFunctional, is_total_derivative
from .lie_core import LieAlgebraData


class DomainError(ValueError):
    pass


class LambdaPoly:
    """Polynomial in lambda with DiffPoly coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        coeffs = list(coeffs) if coeffs else []
        while coeffs and coeffs[-1].is_zero():
            coeffs.pop()
        self.coeffs = coeffs

    @staticmethod
    def zero() -> "LambdaPoly":
        return LambdaPoly([])

    @staticmethod
    def of(poly: DiffPoly) -> "LambdaPoly":
        return LambdaPoly([poly])

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def coefficient(self, k: int) -> DiffPoly:
        return self.coeffs[k] if k < len(self.coeffs) else DiffPoly.zero()

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __eq__(self, other) -> bool:
        if not isinstance(other, LambdaPoly):
            return NotImplemented
        return len(self.coeffs) == len(other.coeffs) and all(
            a == b for a, b in zip(self.coeffs, other.coeffs))

    __hash__ = None

    def __add__(self, other: "LambdaPoly") -> "LambdaPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return LambdaPoly([self.coefficient(k) + other.coefficient(k) for k in range(n)])

    def __sub__(self, other: "LambdaPoly") -> "LambdaPoly":
        return self + (-other)

    def __neg__(self) -> "LambdaPoly":
        return LambdaPoly([-c for c in self.coeffs])

    def __mul__(self, other) -> "LambdaPoly":
        """Multiplication by a scalar or DiffPoly (coefficientwise)."""
        return LambdaPoly([c * other for c in self.coeffs])

    __rmul__ = __mul__

    def shift(self, k: int) -> "LambdaPoly":
        """Multiply by lambda^k."""
        if not self.coeffs:
            return LambdaPoly.zero()
        return LambdaPoly([DiffPoly.zero()] * k + self.coeffs)

    def lam_plus_del(self) -> "LambdaPoly":
        """(lambda + d) applied: shift plus coefficientwise total derivative."""
        out = [c.total_derivative() for c in self.coeffs]
        out.append(DiffPoly.zero())
        for k, c in enumerate(self.coeffs):
            out[k + 1] = out[k + 1] + c
        return LambdaPoly(out)

    def neg_lam_minus_del(self) -> "LambdaPoly":
        return -self.lam_plus_del()

    def at_lambda_zero(self) -> DiffPoly:
        return self.coefficient(0)

    def at_lambda(self, value) -> DiffPoly:
        """Evaluate at a scalar lambda (no derivation ambiguity for scalars)."""
        value = rat(value)
        out = DiffPoly.zero()
        power = ONE
        for c in self.coeffs:
            out = out + c * power
            power *= value
        return out

    def z_coefficient(self, k: int) -> "LambdaPoly":
        return LambdaPoly([c.z_coefficient(k) for c in self.coeffs])

    def z_degree(self) -> int:
        return max((c.z_degree() for c in self.coeffs), default=0)

    def specialize_z(self, value) -> "LambdaPoly":
        value = rat(value)
        out = []
        for c in self.coeffs:
            acc = DiffPoly.zero()
            for k in range(c.z_degree() + 1):
                acc = acc + c.z_coefficient(k) * (value ** k)
            out.append(acc)
        return LambdaPoly(out)

    def total_weight(self, var_weights, z_weight) -> Rat | None:
        """Common weight with lambda counting 1; None if zero, raises if mixed."""
        found = None
        for k, c in enumerate(self.coeffs):
            w = c.weight(var_weights, z_weight)
            if w is None:
                continue
            w = w + k
            if found is None:
                found = w
            elif found != w:
                raise ValueError("inhomogeneous lambda polynomial")
        return found

    def render(self, labels=None) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            body = c.render(labels)
            if k == 0:
                parts.append(body)
            else:
                lam = "lam" if k == 1 else f"lam^{k}"
                parts.append(f"({body})*{lam}" if "+" in body or "-" in body[1:] else f"{body}*{lam}")
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"LambdaPoly({self.render()})"


def lam_power_applied(operand: LambdaPoly, k: int) -> LambdaPoly:
    for _ in range(k):
        operand = operand.lam_plus_del()
    return operand


def neg_lam_power_of(poly: DiffPoly, m: int) -> LambdaPoly:
    """(-lambda - d)^m applied to a differential polynomial."""
    out = LambdaPoly.of(poly)
    for _ in range(m):
        out = -out.lam_plus_del()
    return out


def bracket_apply(entry: LambdaPoly, operand: LambdaPoly) -> LambdaPoly:
    """Entry at lambda -> (lambda + d) acting on the operand to the right."""
    result = LambdaPoly.zero()
    applied = operand
    for k, c in enumerate(entry.coeffs):
        if k:
            applied = applied.lam_plus_del()
        if not c.is_zero():
            result = result + applied * c
    return result


def skew_transform(a: LambdaPoly) -> LambdaPoly:
    """- a(-lambda - d) with the derivation acting on the coefficients."""
    result = LambdaPoly.zero()
    for k, c in enumerate(a.coeffs):
        result = result + neg_lam_power_of(c, k)
    return -result


class PVAStructure:
    """Generator lambda-bracket table plus the master-formula extension."""

    def __init__(self, labels, table, weights=None, validate_skew=True):
        self.labels = list(labels)
        self.ngen = len(self.labels)
        self.table = {}
        for (i, j), entry in table.items():
            if not entry.is_zero():
                self.table[(i, j)] = entry
        self.weights = weights
        if validate_skew:
            self.check_skewsymmetry()

    def entry(self, i: int, j: int) -> LambdaPoly:
        return self.table.get((i, j), LambdaPoly.zero())

    def check_skewsymmetry(self) -> None:
        for i in range(self.ngen):
            for j in range(i, self.ngen):
                lhs = self.entry(i, j)
                rhs = skew_transform(self.entry(j, i))
                if not (lhs - rhs).is_zero():
                    raise DomainError(
                        f"bracket table is not skewsymmetric at ({i},{j})")

    # -- master formula -----------------------------------------------------

    def master_bracket(self, p: DiffPoly, q: DiffPoly) -> LambdaPoly:
        for poly in (p, q):
            bad = [g for g in poly.generators() if g >= self.ngen]
            if bad:
                raise DomainError(f"unknown generator index {bad[0]}")
        result = LambdaPoly.zero()
        p_parts = {}
        for (i, m) in p.variables():
            d = p.partial(i, m)
            if not d.is_zero():
                p_parts[(i, m)] = d
        q_parts = {}
        for (j, n) in q.variables():
            d = q.partial(j, n)
            if not d.is_zero():
                q_parts[(j, n)] = d
        for (i, m), dp in sorted(p_parts.items()):
            base = neg_lam_power_of(dp, m)
            for (j, n), dq in sorted(q_parts.items()):
                entry = self.entry(i, j)
                if entry.is_zero():
                    continue
                term = bracket_apply(entry, base)
                term = lam_power_applied(term, n)
                result = result + term * dq
        return result

    def flow(self, h: DiffPoly, target: int) -> DiffPoly:
        """{h_lam u_target} at lambda = 0: the evolution of one generator."""
        return self.master_bracket(h, DiffPoly.var(target)).at_lambda_zero()

    # -- pencil helpers -----------------------------------------------------

    def z_component(self, k: int) -> "PVAStructure":
        table = {key: entry.z_coefficient(k) for key, entry in self.table.items()}
        return PVAStructure(self.labels, table, weights=self.weights,
                            validate_skew=False)

    def specialize_z(self, value) -> "PVAStructure":
        table = {key: entry.specialize_z(value) for key, entry in self.table.items()}
        return PVAStructure(self.labels, table, weights=self.weights,
                            validate_skew=False)

    def scale(self, c) -> "PVAStructure":
        c = rat(c)
        table = {key: entry * c for key, entry in self.table.items()}
        return PVAStructure(self.labels, table, weights=self.weights,
                            validate_skew=False)

    def to_json(self):
        entries = []
        for (i, j) in sorted(self.table):
            entry = self.table[(i, j)]
            zdeg = entry.z_degree()
            if zdeg > 1:
                raise ValueError("generator table entry has z-degree > 1")
            entries.append({
                "i": i,
                "j": j,
                "lambda_powers": [entry.z_coefficient(0).coefficient(k).to_json()
                                  for k in range(len(entry.coeffs))],
                "z_part": [entry.z_coefficient(1).coefficient(k).to_json()
                           for k in range(len(entry.coeffs))],
            })
        return {"generators": self.labels, "entries": entries}

    def latex(self) -> str:
        lines = []
        for (i, j) in sorted(self.table):
            entry = self.table[(i, j)]
            lhs = f"\\{{{self.labels[i]}\\,{{}}_\\lambda\\,{self.labels[j]}\\}}"
            lines.append(f"{lhs} = {latex_lambda(entry, self.labels)}")
        return "\\begin{gathered}\n" + " \\\\\n".join(lines) + "\n\\end{gathered}"


def latex_lambda(entry: LambdaPoly, labels=None) -> str:
    if entry.is_zero():
        return "0"
    parts = []
    for k, c in enumerate(entry.coeffs):
        if c.is_zero():
            continue
        body = c.latex(labels)
        lam = "" if k == 0 else ("\\lambda" if k == 1 else f"\\lambda^{{{k}}}")
        if lam and body == "1":
            parts.append(lam)
        elif lam and body == "-1":
            parts.append("-" + lam)
        elif lam:
            parts.append(f"\\left({body}\\right){lam}" if ("+" in body or "-" in body[1:]) else f"{body}{lam}")
        else:
            parts.append(body)
    out = parts[0]
    for p in parts[1:]:
        out += " - " + p[1:] if p.startswith("-") else " + " + p
    return out


def affine_bracket_table(alg: LieAlgebraData, s) -> PVAStructure:
    """Affine PVA table {a_lam b} = [a,b] + (a|b) lam + z (s|[a,b])."""
    if len(s) != alg.dim:
        raise DomainError("s must be a coordinate vector in the algebra")
    table = {}
    for i in range(alg.dim):
        for j in range(alg.dim):
            lie = alg.bracket(alg.basis_vector(i), alg.basis_vector(j))
            const = DiffPoly.linear(lie)
            z_coeff = alg.form(s, lie)
            if z_coeff:
                const = const + DiffPoly.z() * z_coeff
            pairing = alg.gram[i][j]
            entry = LambdaPoly([const, DiffPoly.const(pairing)])
            if not entry.is_zero():
                table[(i, j)] = entry
    return PVAStructure(alg.labels, table, weights=None)


# -- axiom verification ------------------------------------------------------


@dataclass
class AxiomReport:
    checks: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, ok: bool, description: str):
        self.checks += 1
        if not ok:
            self.failures.append(description)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        out = f"{status}: {self.checks} axiom checks, {len(self.failures)} failures"
        for f in self.failures[:5]:
            out += f"\n  counterexample: {f}"
        return out


def _bilambda_outer(struct: PVAStructure, a: DiffPoly, inner: LambdaPoly) -> dict:
    """{a_lam (inner in mu)} as a grid (lam_pow, mu_pow) -> DiffPoly."""
    grid = {}
    for t, coeff in enumerate(inner.coeffs):
        outer = struct.master_bracket(a, coeff)
        for k, c in enumerate(outer.coeffs):
            if not c.is_zero():
                key = (k, t)
                grid[key] = grid.get(key, DiffPoly.zero()) + c
    return grid


def _bilambda_composite(struct: PVAStructure, ab: LambdaPoly, c: DiffPoly) -> dict:
    """{{a_lam b}_{lam+mu} c}: lambda powers of ab stay outside as scalars."""
    grid = {}
    for k, coeff in enumerate(ab.coeffs):
        inner = struct.master_bracket(coeff, c)
        for jpow, d in enumerate(inner.coeffs):
            if d.is_zero():
                continue
            # (lam + mu)^jpow expanded binomially, an extra lam^k in front
            binom = 1
            for a_pow in range(jpow + 1):
                if a_pow:
                    binom = binom * (jpow - a_pow + 1) // a_pow
                key = (k + a_pow, jpow - a_pow)
                grid[key] = grid.get(key, DiffPoly.zero()) + d * binom
    return grid


def _grid_equal(g1: dict, g2: dict) -> bool:
    keys = set(g1) | set(g2)
    return all((g1.get(k, DiffPoly.zero()) - g2.get(k, DiffPoly.zero())).is_zero()
               for k in keys)


def jacobi_defect(struct: PVAStructure, a: DiffPoly, b: DiffPoly, c: DiffPoly) -> dict:
    """{a_lam {b_mu c}} - {b_mu {a_lam c}} - {{a_lam b}_{lam+mu} c} as a grid."""
    g1 = _bilambda_outer(struct, a, struct.master_bracket(b, c))
    # {b_mu {a_lam c}}: lambda powers of the inner bracket ride along as scalars
    inner_ac = struct.master_bracket(a, c)
    g2 = {}
    for k, coeff in enumerate(inner_ac.coeffs):
        outer = struct.master_bracket(b, coeff)
        for t, d in enumerate(outer.coeffs):
            if not d.is_zero():
                key = (k, t)
                g2[key] = g2.get(key, DiffPoly.zero()) + d
    g3 = _bilambda_composite(struct, struct.master_bracket(a, b), c)
    out = {}
    for key in set(g1) | set(g2) | set(g3):
        val = (g1.get(key, DiffPoly.zero()) - g2.get(key, DiffPoly.zero())
               - g3.get(key, DiffPoly.zero()))
        if not val.is_zero():
            out[key] = val
    return out


def verify_axioms(struct: PVAStructure, samples, jacobi_triples=None) -> AxiomReport:
    """Sesquilinearity, skewsymmetry, both Leibniz rules and Jacobi.

    samples: list of DiffPoly. Pairs/triples are taken as consecutive
    windows; jacobi_triples can cap how many triples are tested.
    """
    report = AxiomReport()
    polys = list(samples)

    for idx, p in enumerate(polys):
        q = polys[(idx + 1) % len(polys)]
        lhs = struct.master_bracket(p.total_derivative(), q)
        rhs = -struct.master_bracket(p, q).shift(1)
        report.record((lhs - rhs).is_zero(), f"sesquilinearity (left) on sample {idx}")
        lhs = struct.master_bracket(p, q.total_derivative())
        rhs = struct.master_bracket(p, q).lam_plus_del()
        report.record((lhs - rhs).is_zero(), f"sesquilinearity (right) on sample {idx}")

    for idx, p in enumerate(polys):
        q = polys[(idx + 1) % len(polys)]
        lhs = struct.master_bracket(p, q)
        rhs = skew_transform(struct.master_bracket(q, p))
        report.record((lhs - rhs).is_zero(), f"skewsymmetry on sample pair {idx}")

    for idx, a in enumerate(polys):
        b = polys[(idx + 1) % len(polys)]
        c = polys[(idx + 2) % len(polys)]
        lhs = struct.master_bracket(a, b * c)
        rhs = struct.master_bracket(a, b) * c + struct.master_bracket(a, c) * b
        report.record((lhs - rhs).is_zero(), f"left Leibniz on sample triple {idx}")
        lhs = struct.master_bracket(a * b, c)
        rhs = (bracket_apply(struct.master_bracket(a, c), LambdaPoly.of(b))
               + bracket_apply(struct.master_bracket(b, c), LambdaPoly.of(a)))
        report.record((lhs - rhs).is_zero(), f"right Leibniz on sample triple {idx}")

    limit = len(polys) if jacobi_triples is None else jacobi_triples
    for idx in range(min(limit, len(polys))):
        a = polys[idx]
        b = polys[(idx + 1) % len(polys)]
        c = polys[(idx + 2) % len(polys)]
        defect = jacobi_defect(struct, a, b, c)
        report.record(not defect, f"Jacobi identity on sample triple {idx}")
    return report


# -- functionals and flows -----------------------------------------------------


def functional_bracket(struct: PVAStructure, f: LocalFunctional,
                       g: LocalFunctional) -> LocalFunctional:
    """{int f, int g} = int {f_lam g}|_{lam=0} on V / dV."""
    return LocalFunctional(struct.master_bracket(f.rep, g.rep).at_lambda_zero())


def hamiltonian_flow(struct: PVAStructure, h: DiffPoly, targets) -> list[DiffPoly]:
    """du/dt = {h_lam u}|_{lam=0} for each requested generator."""
    return [struct.flow(h, t) for t in targets]
