"""Deterministic exact linear algebra over the rationals.

Matrices are lists of lists of Fraction, vectors are lists of Fraction.
Row reduction always picks the first nonzero pivot in scan order, so every
basis produced here is canonical: rerunning on equal input gives equal output.
"""

from .rationals import Rat, ZERO, ONE

Vector = list
Matrix = list


class SingularMatrixError(ValueError):
    pass


def zeros(rows: int, cols: int) -> Matrix:
    return [[ZERO] * cols for _ in range(rows)]


def identity(n: int) -> Matrix:
    mat = zeros(n, n)
    for i in range(n):
        mat[i][i] = ONE
    return mat


def copy_matrix(a: Matrix) -> Matrix:
    return [row[:] for row in a]


def transpose(a: Matrix) -> Matrix:
    if not a:
        return []
    return [list(col) for col in zip(*a)]


def mat_vec(a: Matrix, v: Vector) -> Vector:
    return [sum((row[j] * v[j] for j in range(len(v))), ZERO) for row in a]


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return [[sum((x * y for x, y in zip(row, col)), ZERO) for col in bt] for row in a]


def vec_add(u: Vector, v: Vector) -> Vector:
    return [x + y for x, y in zip(u, v)]


def vec_sub(u: Vector, v: Vector) -> Vector:
    return [x - y for x, y in zip(u, v)]


def vec_scale(c, v: Vector) -> Vector:
    c = Rat(c)
    return [c * x for x in v]


def is_zero_vector(v: Vector) -> bool:
    return all(x == 0 for x in v)


def rref(a: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form. Returns (rref matrix, pivot column list)."""
    m = copy_matrix(a)
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        pivot_row = None
        for i in range(r, rows):
            if m[i][c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        m[r], m[pivot_row] = m[pivot_row], m[r]
        inv = ONE / m[r][c]
        m[r] = [inv * x for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                factor = m[i][c]
                m[i] = [x - factor * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def rank(a: Matrix) -> int:
    return len(rref(a)[1])


def nullspace(a: Matrix) -> list[Vector]:
    """Canonical basis of the kernel: one vector per free column, in order."""
    if not a:
        return []
    cols = len(a[0])
    red, pivots = rref(a)
    pivot_set = set(pivots)
    free_cols = [c for c in range(cols) if c not in pivot_set]
    basis = []
    for fc in free_cols:
        v = [ZERO] * cols
        v[fc] = ONE
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][fc]
        basis.append(v)
    return basis


def solve(a: Matrix, b: Vector) -> Vector | None:
    """One solution of a x = b with free variables set to 0, or None."""
    rows = len(a)
    cols = len(a[0]) if rows else 0
    aug = [a[i][:] + [Rat(b[i])] for i in range(rows)]
    red, pivots = rref(aug)
    if cols in pivots:
        return None
    x = [ZERO] * cols
    for r, pc in enumerate(pivots):
        x[pc] = red[r][cols]
    return x


def solve_unique(a: Matrix, b: Vector) -> Vector:
    """Solve a x = b, raising if the system is inconsistent or underdetermined."""
    x = solve(a, b)
    if x is None:
        raise SingularMatrixError("inconsistent linear system")
    if nullspace(a):
        raise SingularMatrixError("linear system has a nontrivial kernel")
    return x


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    aug = [a[i][:] + identity(n)[i] for i in range(n)]
    red, pivots = rref(aug)
    if pivots != list(range(n)):
        raise SingularMatrixError("matrix is singular")
    return [row[n:] for row in red]


def det(a: Matrix) -> Rat:
    """Determinant by fraction-free-ish Gaussian elimination (exact)."""
    n = len(a)
    m = copy_matrix(a)
    result = ONE
    for c in range(n):
        pivot_row = None
        for i in range(c, n):
            if m[i][c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            return ZERO
        if pivot_row != c:
            m[c], m[pivot_row] = m[pivot_row], m[c]
            result = -result
        result *= m[c][c]
        inv = ONE / m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                factor = m[i][c] * inv
                m[i] = [x - factor * y for x, y in zip(m[i], m[c])]
    return result


def column_space_basis(a: Matrix) -> list[Vector]:
    """Canonical basis of the column span: the pivot columns of a."""
    _, pivots = rref(a)
    return [[a[i][c] for i in range(len(a))] for c in pivots]


def in_span(basis: list[Vector], v: Vector) -> bool:
    if not basis:
        return is_zero_vector(v)
    a = transpose(basis)
    return solve(a, v) is not None


def coords_in_basis(basis: list[Vector], v: Vector) -> Vector:
    """Coordinates of v in the given (independent) spanning set; raises if outside."""
    a = transpose(basis)
    x = solve(a, v)
    if x is None:
        raise SingularMatrixError("vector not in span of basis")
    return x
