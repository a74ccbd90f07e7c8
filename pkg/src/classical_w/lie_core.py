"""Reductive Lie algebras, sl2-triples, gradings and Slodowy-frame data.

Everything is exact: structure constants, bilinear forms and eigenspace
bases are rational, and eigenvalues of ad x are located by solving
(ad x - c) v = 0 over the half-integer candidate grid rather than by any
numerical eigenvalue extraction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .rationals import Rat, ZERO, ONE, rat
from . import linalg
from .linalg import Matrix, Vector


class LieAlgebraError(ValueError):
    pass


class InvalidDimensionError(LieAlgebraError):
    pass


class PartitionShapeError(LieAlgebraError):
    pass


class GradingError(LieAlgebraError):
    pass


class InvalidTripleError(LieAlgebraError):
    pass


class InternalConsistencyError(LieAlgebraError):
    pass


class LieAlgebraData:
    """Finite-dimensional Lie algebra with exact structure constants and form.

    brackets[i][j] is the coordinate vector of [a_i, a_j]; gram[i][j] is the
    invariant symmetric bilinear form (a_i | a_j).  For built-in sl_n the
    defining matrix of each basis vector is kept in `matrices` (used by the
    semisimplicity test); custom algebras carry None there.
    """

    def __init__(self, labels, brackets, gram, matrices=None, validate=True):
        self.labels = list(labels)
        self.dim = len(self.labels)
        self.brackets = brackets  # dict (i, j) -> dict k -> Rat, full antisymmetric
        self.gram = gram
        self.matrices = matrices
        if validate:
            self.validate()

    # -- basic operations ----------------------------------------------------

    def bracket_basis(self, i: int, j: int) -> dict:
        return self.brackets.get((i, j), {})

    def bracket(self, u: Vector, v: Vector) -> Vector:
        out = [ZERO] * self.dim
        for i, ci in enumerate(u):
            if not ci:
                continue
            for j, cj in enumerate(v):
                if not cj:
                    continue
                for k, c in self.bracket_basis(i, j).items():
                    out[k] += ci * cj * c
        return out

    def form(self, u: Vector, v: Vector) -> Rat:
        total = ZERO
        for i, ci in enumerate(u):
            if not ci:
                continue
            row = self.gram[i]
            for j, cj in enumerate(v):
                if cj:
                    total += ci * cj * row[j]
        return total

    def ad(self, a: Vector) -> Matrix:
        """Matrix of ad a in the basis (columns are [a, basis_j])."""
        cols = []
        for j in range(self.dim):
            e_j = [ZERO] * self.dim
            e_j[j] = ONE
            cols.append(self.bracket(a, e_j))
        return linalg.transpose(cols)

    def basis_vector(self, i: int) -> Vector:
        v = [ZERO] * self.dim
        v[i] = ONE
        return v

    # -- invariants ------------------------------------------------------------

    def validate(self) -> None:
        n = self.dim
        for i in range(n):
            for j in range(n):
                bij = self.bracket_basis(i, j)
                bji = self.bracket_basis(j, i)
                for k in set(bij) | set(bji):
                    if bij.get(k, ZERO) != -bji.get(k, ZERO):
                        raise InternalConsistencyError(
                            f"structure constants not antisymmetric at ({i},{j},{k})")
        basis = [self.basis_vector(i) for i in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    jac = linalg.vec_add(
                        self.bracket(basis[i], self.bracket(basis[j], basis[k])),
                        linalg.vec_add(
                            self.bracket(basis[j], self.bracket(basis[k], basis[i])),
                            self.bracket(basis[k], self.bracket(basis[i], basis[j]))))
                    if not linalg.is_zero_vector(jac):
                        raise InternalConsistencyError(
                            f"Jacobi identity fails on basis triple ({i},{j},{k})")
        for i in range(n):
            for j in range(n):
                if self.gram[i][j] != self.gram[j][i]:
                    raise InternalConsistencyError("bilinear form is not symmetric")
        if linalg.det([row[:] for row in self.gram]) == 0:
            raise InternalConsistencyError("bilinear form is degenerate")
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    lhs = self.form(self.bracket(basis[i], basis[j]), basis[k])
                    rhs = self.form(basis[i], self.bracket(basis[j], basis[k]))
                    if lhs != rhs:
                        raise InternalConsistencyError(
                            f"form is not invariant on ({i},{j},{k})")

    # -- change of basis ---------------------------------------------------------

    def in_new_basis(self, vectors: list[Vector], labels=None) -> "LieAlgebraData":
        """Structure constants and form transported to the given basis."""
        n = self.dim
        if len(vectors) != n:
            raise InternalConsistencyError("new basis has wrong size")
        b = linalg.transpose(vectors)  # columns are the new basis vectors
        b_inv = linalg.inverse(b)
        brackets: dict = {}
        for i in range(n):
            for j in range(n):
                w = self.bracket(vectors[i], vectors[j])
                coords = linalg.mat_vec(b_inv, w)
                entry = {k: c for k, c in enumerate(coords) if c}
                if entry:
                    brackets[(i, j)] = entry
        gram = [[self.form(vectors[i], vectors[j]) for j in range(n)] for i in range(n)]
        if labels is None:
            labels = []
            for idx, v in enumerate(vectors):
                support = [(i, c) for i, c in enumerate(v) if c]
                if len(support) == 1 and support[0][1] == 1:
                    labels.append(self.labels[support[0][0]])
                else:
                    labels.append(f"v{idx}")
        mats = None
        if self.matrices is not None:
            mats = [matrix_combination(self.matrices, v) for v in vectors]
        return LieAlgebraData(labels, brackets, gram, matrices=mats, validate=False)


def matrix_combination(matrices, coords: Vector) -> Matrix:
    n = len(matrices[0])
    out = linalg.zeros(n, n)
    for c, m in zip(coords, matrices):
        if c:
            for r in range(n):
                row = m[r]
                orow = out[r]
                for s in range(n):
                    if row[s]:
                        orow[s] += c * row[s]
    return out


# -- sl_n construction ----------------------------------------------------------


def _sl_n_basis_matrices(n: int):
    labels = []
    mats = []
    for i in range(n):
        for j in range(i + 1, n):
            m = linalg.zeros(n, n)
            m[i][j] = ONE
            labels.append(f"E{i + 1}{j + 1}")
            mats.append(m)
    for i in range(n - 1):
        m = linalg.zeros(n, n)
        m[i][i] = ONE
        m[i + 1][i + 1] = -ONE
        labels.append(f"H{i + 1}")
        mats.append(m)
    for j in range(n):
        for i in range(j + 1, n):
            m = linalg.zeros(n, n)
            m[i][j] = ONE
            labels.append(f"E{i + 1}{j + 1}")
            mats.append(m)
    return labels, mats


def sl_n_coords(n: int, m: Matrix) -> Vector:
    """Coordinates of a traceless matrix in the standard sl_n basis."""
    coords = []
    for i in range(n):
        for j in range(i + 1, n):
            coords.append(m[i][j])
    partial = ZERO
    for i in range(n - 1):
        partial += m[i][i]
        coords.append(partial)
    for j in range(n):
        for i in range(j + 1, n):
            coords.append(m[i][j])
    return [rat(c) for c in coords]


def build_sl_n(n: int) -> LieAlgebraData:
    """sl_n with elementary-matrix basis and trace form (a|b) = tr(ab)."""
    if n < 2:
        raise InvalidDimensionError(f"sl_n needs n >= 2, got {n}")
    labels, mats = _sl_n_basis_matrices(n)
    dim = len(mats)
    brackets = {}
    for i in range(dim):
        for j in range(dim):
            comm = linalg.mat_mul(mats[i], mats[j])
            mj_mi = linalg.mat_mul(mats[j], mats[i])
            for r in range(n):
                for s in range(n):
                    comm[r][s] -= mj_mi[r][s]
            coords = sl_n_coords(n, comm)
            entry = {k: c for k, c in enumerate(coords) if c}
            if entry:
                brackets[(i, j)] = entry
    gram = [[_trace_product(mats[i], mats[j]) for j in range(dim)] for i in range(dim)]
    return LieAlgebraData(labels, brackets, gram, matrices=mats)


def _trace_product(a: Matrix, b: Matrix) -> Rat:
    n = len(a)
    return sum((a[i][j] * b[j][i] for i in range(n) for j in range(n)), ZERO)


def load_algebra(source) -> LieAlgebraData:
    """Custom algebra from the structure-constants JSON schema.

    { "dim": n, "labels": [...], "brackets": [[i, j, k, "num/den"], ...],
      "gram": [[...], ...] } with 0-based indices; only i < j entries are
    needed, the antisymmetric completion is filled in.
    """
    if isinstance(source, str):
        with open(source) as fh:
            data = json.load(fh)
    else:
        data = source
    dim = int(data["dim"])
    labels = data.get("labels") or [f"a{i}" for i in range(dim)]
    if len(labels) != dim:
        raise InternalConsistencyError("labels length does not match dim")
    brackets: dict = {}

    def put(i, j, k, c):
        if not (0 <= i < dim and 0 <= j < dim and 0 <= k < dim):
            raise InternalConsistencyError(f"bracket index out of range: {(i, j, k)}")
        entry = brackets.setdefault((i, j), {})
        entry[k] = entry.get(k, ZERO) + c
        if not entry[k]:
            del entry[k]

    for i, j, k, c in data["brackets"]:
        c = rat(c)
        put(int(i), int(j), int(k), c)
        put(int(j), int(i), int(k), -c)
    brackets = {key: val for key, val in brackets.items() if val}
    gram = [[rat(x) for x in row] for row in data["gram"]]
    return LieAlgebraData(labels, brackets, gram)


# -- sl2 triples -----------------------------------------------------------------


@dataclass
class Sl2Triple:
    """Coordinates of {e, h = 2x, f} with [x,e] = e, [x,f] = -f, [e,f] = 2x."""

    e: Vector
    x: Vector
    f: Vector

    @property
    def h(self) -> Vector:
        return linalg.vec_scale(2, self.x)

    def validate(self, alg: LieAlgebraData) -> None:
        checks = [
            (alg.bracket(self.x, self.e), self.e),
            (alg.bracket(self.x, self.f), linalg.vec_scale(-1, self.f)),
            (alg.bracket(self.e, self.f), linalg.vec_scale(2, self.x)),
        ]
        for got, want in checks:
            if got != want:
                raise InvalidTripleError("sl2-triple relations fail")

    def is_zero(self) -> bool:
        return linalg.is_zero_vector(self.f)


def triple_from_partition(alg: LieAlgebraData, partition) -> Sl2Triple:
    """Standard triple for the nilpotent orbit of a partition of n in sl_n.

    f is the lower-triangular Jordan nilpotent, x the half-integral diagonal.
    """
    if alg.matrices is None:
        raise PartitionShapeError("partition triples require a built-in sl_n algebra")
    n = len(alg.matrices[0])
    parts = list(partition)
    if any(p < 1 for p in parts) or sum(parts) != n:
        raise PartitionShapeError(f"partition {parts} does not sum to {n}")
    parts.sort(reverse=True)
    e_mat = linalg.zeros(n, n)
    f_mat = linalg.zeros(n, n)
    x_mat = linalg.zeros(n, n)
    offset = 0
    for m in parts:
        for a in range(m - 1):
            r = offset + a
            f_mat[r + 1][r] = ONE
            e_mat[r][r + 1] = rat((a + 1) * (m - 1 - a))
        for a in range(m):
            x_mat[offset + a][offset + a] = rat(m - 1 - 2 * a) / 2
        offset += m
    triple = Sl2Triple(
        e=sl_n_coords(n, e_mat), x=sl_n_coords(n, x_mat), f=sl_n_coords(n, f_mat))
    if not triple.is_zero():
        triple.validate(alg)
    return triple


# -- gradings and centralizers -----------------------------------------------------


@dataclass
class GradedDecomposition:
    eigenvalues: list  # ascending list of Rat
    spaces: dict  # eigenvalue -> list of basis vectors

    def dimension(self, eig) -> int:
        return len(self.spaces.get(rat(eig), []))


def ad_grading(alg: LieAlgebraData, x: Vector) -> GradedDecomposition:
    """Eigenspace decomposition of ad x over the half-integer candidate grid."""
    ad_x = alg.ad(x)
    spaces = {}
    total = 0
    bound = 2 * alg.dim
    for k in range(-bound, bound + 1):
        lam = rat(k) / 2
        shifted = [row[:] for row in ad_x]
        for i in range(alg.dim):
            shifted[i][i] -= lam
        kernel = linalg.nullspace(shifted)
        if kernel:
            spaces[lam] = kernel
            total += len(kernel)
    if total != alg.dim:
        raise GradingError(
            "ad x is not diagonalizable with half-integer eigenvalues")
    return GradedDecomposition(eigenvalues=sorted(spaces), spaces=spaces)


def centralizer(alg: LieAlgebraData, a: Vector) -> list[Vector]:
    """Canonical basis of ker(ad a)."""
    return linalg.nullspace(alg.ad(a))


def _intersect_with_kernel(alg: LieAlgebraData, space: list[Vector], operator: Matrix):
    """Basis of {v in span(space) : operator v = 0}."""
    if not space:
        return []
    cols = [linalg.mat_vec(operator, v) for v in space]
    coeffs = linalg.nullspace(linalg.transpose(cols))
    out = []
    for c in coeffs:
        v = [ZERO] * alg.dim
        for ci, vi in zip(c, space):
            if ci:
                v = linalg.vec_add(v, linalg.vec_scale(ci, vi))
        out.append(v)
    return out


# -- Slodowy frame ------------------------------------------------------------------


@dataclass
class SlodowyFrame:
    """sl2-triple with graded dual bases of g^f/g^e and the sharp projection.

    qf[i] is the basis {q_i} of the centralizer of f (ad x-eigenvectors,
    eigenvalue -delta[i]); qe[i] is the dual basis {q^i} of the centralizer
    of e, (q_i | q^j) = delta_ij.  extended[(i, n)] = (ad f)^n q^i spans g
    for n = 0..2 delta[i], and extended_dual[(i, n)] is the basis of g dual
    to it under the form.
    """

    alg: LieAlgebraData
    triple: Sl2Triple
    grading: GradedDecomposition
    qf: list
    qe: list
    delta: list
    extended: dict
    extended_dual: dict
    sharp_matrix: Matrix

    @property
    def k(self) -> int:
        return len(self.qf)

    def sharp(self, a: Vector) -> Vector:
        return linalg.mat_vec(self.sharp_matrix, a)

    def sharp_coords(self, a: Vector) -> Vector:
        """Coefficients of a^sharp in the q-basis: (a | q^i)."""
        return [self.alg.form(a, self.qe[i]) for i in range(self.k)]

    def in_centralizer_f(self, a: Vector) -> bool:
        return linalg.is_zero_vector(self.alg.bracket(self.f_vec, a))

    @property
    def f_vec(self) -> Vector:
        return self.triple.f

    def generator_weights(self) -> list:
        """Conformal weight 1 + delta(i) of each W-algebra generator."""
        return [ONE + d for d in self.delta]


def build_slodowy_frame(alg: LieAlgebraData, triple: Sl2Triple) -> SlodowyFrame:
    grading = ad_grading(alg, triple.x)
    ad_f = alg.ad(triple.f)
    ad_e = alg.ad(triple.e)

    qf, qe, delta = [], [], []
    for eig in grading.eigenvalues:  # ascending, so delta descends
        gf_part = _intersect_with_kernel(alg, grading.spaces[eig], ad_f)
        if not gf_part:
            continue
        ge_part = _intersect_with_kernel(alg, grading.spaces[rat(-eig)], ad_e)
        if len(ge_part) != len(gf_part):
            raise InternalConsistencyError("g^f / g^e graded dimensions disagree")
        pairing = [[alg.form(u, w) for w in ge_part] for u in gf_part]
        inv = linalg.inverse(pairing)
        for s in range(len(gf_part)):
            dual = [ZERO] * alg.dim
            for t in range(len(ge_part)):
                if inv[t][s]:
                    dual = linalg.vec_add(dual, linalg.vec_scale(inv[t][s], ge_part[t]))
            qf.append(gf_part[s])
            qe.append(dual)
            delta.append(rat(-eig))

    extended = {}
    order = []
    for i, d in enumerate(delta):
        if 2 * d != int(2 * d):
            raise InternalConsistencyError("delta is not half-integral")
        v = qe[i]
        for n in range(int(2 * d) + 1):
            extended[(i, n)] = v
            order.append((i, n))
            v = alg.bracket(triple.f, v)
        if not linalg.is_zero_vector(v):
            raise InternalConsistencyError("(ad f)^(2 delta + 1) q^i is nonzero")
    if len(order) != alg.dim:
        raise InternalConsistencyError("extended basis has wrong cardinality")

    pairing = [[alg.form(extended[a], extended[b]) for b in order] for a in order]
    inv = linalg.inverse(pairing)
    extended_dual = {}
    for col, key in enumerate(order):
        dual = [ZERO] * alg.dim
        for row, other in enumerate(order):
            if inv[row][col]:
                dual = linalg.vec_add(dual, linalg.vec_scale(inv[row][col], extended[other]))
        extended_dual[key] = dual

    # a^sharp = sum_i (a | q^i) q_i : projection onto g^f along [e, g]
    sharp = linalg.zeros(alg.dim, alg.dim)
    for i in range(len(qf)):
        row_form = linalg.mat_vec(alg.gram, qe[i])
        for r in range(alg.dim):
            for c in range(alg.dim):
                sharp[r][c] += qf[i][r] * row_form[c]

    return SlodowyFrame(alg=alg, triple=triple, grading=grading, qf=qf, qe=qe,
                        delta=delta, extended=extended, extended_dual=extended_dual,
                        sharp_matrix=sharp)


def sharp(frame: SlodowyFrame, a: Vector) -> Vector:
    return frame.sharp(a)


# -- isotropic splitting -------------------------------------------------------------


@dataclass
class Polarization:
    """Maximal isotropic splitting of g_{1/2} and the induced n and p.

    n = ell + g_{>=1} is the nilpotent gauge subalgebra; p = ell' + g_{<=0}
    is the complement on which the reduced algebra lives.  Bases are ordered
    deterministically; p starts with ell', then descends through g_0,
    g_{-1/2}, ... with the g^f directions first inside each eigenspace.
    """

    ell: list
    ell_prime: list
    n_basis: list
    p_basis: list
    n_degrees: list
    p_degrees: list


def lagrangian_subspace(frame: SlodowyFrame, swap: bool = False) -> Polarization:
    """Symplectic Gram-Schmidt on (g_{1/2}, omega), omega(u,v) = (f | [u,v]).

    With swap=True the complementary Lagrangian is used as ell instead; the
    reduced bracket tables must not depend on this choice.
    """
    alg = frame.alg
    half = Rat(1, 2)
    space = [v[:] for v in frame.grading.spaces.get(half, [])]

    def omega(u, v):
        return alg.form(frame.triple.f, alg.bracket(u, v))

    ell, ell_prime = [], []
    remaining = space
    while remaining:
        u = remaining[0]
        partner = None
        for w in remaining[1:]:
            if omega(u, w) != 0:
                partner = w
                break
        if partner is None:
            raise InvalidTripleError("omega is degenerate on g_{1/2}")
        ell.append(u)
        ell_prime.append(partner)
        new_remaining = []
        c = omega(u, partner)
        for v in remaining:
            if v is u or v is partner:
                continue
            # make v symplectically orthogonal to the (u, partner) plane
            v2 = linalg.vec_sub(v, linalg.vec_scale(omega(v, partner) / c, u))
            v2 = linalg.vec_sub(v2, linalg.vec_scale(-omega(v2, u) / c, partner))
            if not linalg.is_zero_vector(v2):
                new_remaining.append(v2)
        remaining = new_remaining
    if swap:
        ell, ell_prime = ell_prime, ell

    n_basis = [v[:] for v in ell]
    n_degrees = [half] * len(ell)
    for eig in frame.grading.eigenvalues:
        if eig >= 1:
            for v in frame.grading.spaces[eig]:
                n_basis.append(v[:])
                n_degrees.append(eig)

    p_basis = [v[:] for v in ell_prime]
    p_degrees = [half] * len(ell_prime)
    ad_e = alg.ad(frame.triple.e)
    for eig in sorted(frame.grading.eigenvalues, reverse=True):
        if eig > 0:
            continue
        gf_part = _intersect_with_kernel(alg, frame.grading.spaces[eig],
                                         alg.ad(frame.triple.f))
        image_part = _graded_image_of_ad_e(frame, eig)
        if len(gf_part) + len(image_part) != len(frame.grading.spaces[eig]):
            raise InternalConsistencyError("g_i does not split as g^f_i + [e,g]_i")
        for v in gf_part + image_part:
            p_basis.append(v)
            p_degrees.append(eig)
    return Polarization(ell=ell, ell_prime=ell_prime, n_basis=n_basis,
                        p_basis=p_basis, n_degrees=n_degrees, p_degrees=p_degrees)


def _graded_image_of_ad_e(frame: SlodowyFrame, eig) -> list[Vector]:
    """Canonical basis of [e, g] intersected with the eigenspace g_eig."""
    alg = frame.alg
    lower = frame.grading.spaces.get(rat(eig) - 1, [])
    if not lower:
        return []
    images = [alg.bracket(frame.triple.e, v) for v in lower]
    return [v for v in linalg.column_space_basis(linalg.transpose(images))]
