"""Exact differential polynomials on finitely many generators.

A DiffPoly is a sparse sum of terms  c * z^k * prod u_i^(n)^p  where c is an
exact rational, z is a central constant parameter (the pencil parameter; the
derivation kills it) and u_i^(n) is the n-th total derivative of generator i.
Monomials are stored canonically as tuples ((i, n, power), ...) sorted by
(i, n), so equal polynomials have equal term dictionaries.
"""

from __future__ import annotations

from .rationals import Rat, ZERO, ONE, rat, rat_str

# A monomial in the u-variables: ((var, order, power), ...) sorted by (var, order).
Mono = tuple
EMPTY_MONO: Mono = ()


def _mono_mul(a: Mono, b: Mono) -> Mono:
    """Merge-multiply two sorted monomials."""
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        va, oa, pa = a[i]
        vb, ob, pb = b[j]
        ka, kb = (va, oa), (vb, ob)
        if ka < kb:
            out.append(a[i])
            i += 1
        elif ka > kb:
            out.append(b[j])
            j += 1
        else:
            out.append((va, oa, pa + pb))
            i += 1
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


class DiffPoly:
    """Sparse differential polynomial over Q[z]."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        # keys: (zpow, mono); values: nonzero Rat
        self.terms = terms if terms is not None else {}

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "DiffPoly":
        return DiffPoly({})

    @staticmethod
    def const(c) -> "DiffPoly":
        c = rat(c)
        return DiffPoly({(0, EMPTY_MONO): c}) if c else DiffPoly({})

    @staticmethod
    def one() -> "DiffPoly":
        return DiffPoly.const(1)

    @staticmethod
    def var(i: int, order: int = 0, power: int = 1) -> "DiffPoly":
        if power == 0:
            return DiffPoly.one()
        return DiffPoly({(0, ((i, order, power),)): ONE})

    @staticmethod
    def z(power: int = 1) -> "DiffPoly":
        return DiffPoly({(power, EMPTY_MONO): ONE})

    @staticmethod
    def linear(coeffs, order: int = 0) -> "DiffPoly":
        """Sum c_i * u_i^(order) from a coefficient vector."""
        terms = {}
        for i, c in enumerate(coeffs):
            if c:
                terms[(0, ((i, order, 1),))] = rat(c)
        return DiffPoly(terms)

    # -- structure ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, DiffPoly):
            return self.terms == other.terms
        if isinstance(other, (int, Rat)):
            return self.terms == DiffPoly.const(other).terms
        return NotImplemented

    __hash__ = None  # mutable-ish container; never used as a dict key

    def copy(self) -> "DiffPoly":
        return DiffPoly(dict(self.terms))

    def constant_term(self) -> Rat:
        return self.terms.get((0, EMPTY_MONO), ZERO)

    def variables(self) -> set:
        """Set of (i, n) pairs occurring."""
        out = set()
        for (_, mono) in self.terms:
            for v, o, _ in mono:
                out.add((v, o))
        return out

    def generators(self) -> set:
        return {v for (v, _) in self.variables()}

    def max_order(self, gen: int | None = None) -> int:
        orders = [o for (_, mono) in self.terms for v, o, _ in mono
                  if gen is None or v == gen]
        return max(orders, default=-1)

    def degree(self) -> int:
        """Total polynomial degree in the u-variables."""
        return max((sum(p for _, _, p in mono) for (_, mono) in self.terms), default=0)

    def z_degree(self) -> int:
        return max((zp for (zp, _) in self.terms), default=0)

    def z_coefficient(self, k: int) -> "DiffPoly":
        """The z-free coefficient of z^k."""
        return DiffPoly({(0, mono): c for (zp, mono), c in self.terms.items() if zp == k})

    def z_free(self) -> bool:
        return all(zp == 0 for (zp, _) in self.terms)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other) -> "DiffPoly":
        if isinstance(other, (int, Rat)):
            other = DiffPoly.const(other)
        if not isinstance(other, DiffPoly):
            return NotImplemented
        out = dict(self.terms)
        for key, c in other.terms.items():
            s = out.get(key, ZERO) + c
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        return DiffPoly(out)

    __radd__ = __add__

    def __neg__(self) -> "DiffPoly":
        return DiffPoly({k: -c for k, c in self.terms.items()})

    def __sub__(self, other) -> "DiffPoly":
        if isinstance(other, (int, Rat)):
            other = DiffPoly.const(other)
        if not isinstance(other, DiffPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "DiffPoly":
        return (-self) + other

    def __mul__(self, other) -> "DiffPoly":
        if isinstance(other, (int, Rat)):
            c = rat(other)
            if not c:
                return DiffPoly.zero()
            return DiffPoly({k: c * v for k, v in self.terms.items()})
        if not isinstance(other, DiffPoly):
            return NotImplemented
        out: dict = {}
        for (za, ma), ca in self.terms.items():
            for (zb, mb), cb in other.terms.items():
                key = (za + zb, _mono_mul(ma, mb))
                s = out.get(key, ZERO) + ca * cb
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        return DiffPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "DiffPoly":
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result = DiffPoly.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    # -- calculus -----------------------------------------------------------

    def total_derivative(self) -> "DiffPoly":
        """The derivation: sends u_i^(n) to u_i^(n+1), kills constants and z."""
        out: dict = {}
        for (zp, mono), c in self.terms.items():
            for idx, (v, o, p) in enumerate(mono):
                rest = list(mono)
                if p == 1:
                    del rest[idx]
                else:
                    rest[idx] = (v, o, p - 1)
                new_mono = _mono_mul(tuple(rest), ((v, o + 1, 1),))
                key = (zp, new_mono)
                s = out.get(key, ZERO) + c * p
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        return DiffPoly(out)

    def partial(self, i: int, n: int = 0) -> "DiffPoly":
        """Formal partial derivative with respect to the single variable u_i^(n)."""
        out: dict = {}
        for (zp, mono), c in self.terms.items():
            for idx, (v, o, p) in enumerate(mono):
                if v == i and o == n:
                    rest = list(mono)
                    if p == 1:
                        del rest[idx]
                    else:
                        rest[idx] = (v, o, p - 1)
                    key = (zp, tuple(rest))
                    s = out.get(key, ZERO) + c * p
                    if s:
                        out[key] = s
                    else:
                        out.pop(key, None)
                    break
        return DiffPoly(out)

    def variational(self, i: int) -> "DiffPoly":
        """Variational derivative sum_n (-d)^n dP/du_i^(n)."""
        result = DiffPoly.zero()
        for n in range(self.max_order(i) + 1):
            term = self.partial(i, n)
            for _ in range(n):
                term = -term.total_derivative()
            result = result + term
        return result

    def substitute(self, images: dict) -> "DiffPoly":
        """Differential-algebra homomorphism: generator i maps to images[i].

        Generators missing from images map to themselves; u_i^(n) maps to the
        n-th total derivative of the image.
        """
        cache: dict = {}

        def image_of(v: int, o: int) -> DiffPoly:
            if v not in images:
                return DiffPoly.var(v, o)
            key = (v, o)
            if key not in cache:
                img = images[v]
                if not isinstance(img, DiffPoly):
                    img = DiffPoly.const(img)
                for _ in range(o):
                    img = img.total_derivative()
                cache[key] = img
            return cache[key]

        result = DiffPoly.zero()
        for (zp, mono), c in self.terms.items():
            term = DiffPoly({(zp, EMPTY_MONO): c})
            for v, o, p in mono:
                term = term * image_of(v, o) ** p
            result = result + term
        return result

    def weight(self, var_weights, z_weight=None) -> Rat | None:
        """Common weight of all terms (z excluded unless z_weight given).

        Returns None for the zero polynomial; raises if inhomogeneous.
        var_weights maps generator index to weight; a derivative adds 1.
        """
        found = None
        for (zp, mono), _ in self.terms.items():
            w = ZERO
            if z_weight is not None:
                w += rat(z_weight) * zp
            for v, o, p in mono:
                w += (rat(var_weights[v]) + o) * p
            if found is None:
                found = w
            elif found != w:
                raise ValueError(f"inhomogeneous polynomial: weights {found} and {w}")
        return found

    # -- rendering ----------------------------------------------------------

    def render(self, labels=None) -> str:
        """Canonical text form, e.g. "u1''*u2 - 1/2*z"."""
        if not self.terms:
            return "0"
        parts = []
        for (zp, mono) in sorted(self.terms):
            c = self.terms[(zp, mono)]
            factors = []
            if zp:
                factors.append("z" if zp == 1 else f"z^{zp}")
            for v, o, p in mono:
                name = labels[v] if labels else f"u{v + 1}"
                prime = "'" * o if o <= 4 else f"^({o})"
                factors.append(f"{name}{prime}" + (f"^{p}" if p > 1 else ""))
            body = "*".join(factors)
            if not factors:
                text = rat_str(c)
            elif c == 1:
                text = body
            elif c == -1:
                text = "-" + body
            else:
                text = f"{rat_str(c)}*{body}"
            parts.append(text)
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def __repr__(self) -> str:
        return f"DiffPoly({self.render()})"

    def to_json(self):
        """JSON form [[coeff, [[i, n, power], ...]], ...]; requires z-free input."""
        if not self.z_free():
            raise ValueError("z-dependent polynomial: split by z power before export")
        out = []
        for (zp, mono) in sorted(self.terms):
            out.append([rat_str(self.terms[(zp, mono)]), [list(f) for f in mono]])
        return out

    @staticmethod
    def from_json(data) -> "DiffPoly":
        terms = {}
        for coeff, mono in data:
            key = (0, tuple(sorted((int(v), int(o), int(p)) for v, o, p in mono)))
            c = rat(coeff)
            if c:
                terms[key] = terms.get(key, ZERO) + c
        return DiffPoly({k: v for k, v in terms.items() if v})

    def latex(self, labels=None) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (zp, mono) in sorted(self.terms):
            c = self.terms[(zp, mono)]
            factors = []
            if zp:
                factors.append("z" if zp == 1 else f"z^{{{zp}}}")
            for v, o, p in mono:
                name = labels[v] if labels else f"u_{{{v + 1}}}"
                if o:
                    name += "'" * o if o <= 3 else f"^{{({o})}}"
                factors.append(name + (f"^{{{p}}}" if p > 1 else ""))
            body = " ".join(factors)
            if not factors:
                text = _latex_rat(c)
            elif c == 1:
                text = body
            elif c == -1:
                text = "-" + body
            else:
                text = f"{_latex_rat(c)} {body}"
            parts.append(text)
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out


def _latex_rat(c: Rat) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    sign = "-" if c < 0 else ""
    return f"{sign}\\tfrac{{{abs(c.numerator)}}}{{{c.denominator}}}"


def is_total_derivative(p: DiffPoly) -> bool:
    """Exact membership test for the image of the total derivative.

    A differential polynomial with zero constant part is a total derivative
    iff every variational derivative vanishes; pure z-terms count as
    constants and must vanish too.
    """
    for (zp, mono), c in p.terms.items():
        if not mono and c:
            return False
    return all(p.variational(i).is_zero() for i in sorted(p.generators()))


class LocalFunctional:
    """Element of V / dV: a differential polynomial up to total derivatives.

    The constant part is dropped on construction (the integral of a constant
    is discarded by convention).
    """

    __slots__ = ("rep",)

    def __init__(self, rep: DiffPoly):
        terms = {k: c for k, c in rep.terms.items() if k[1]}
        self.rep = DiffPoly(terms)

    def __add__(self, other: "LocalFunctional") -> "LocalFunctional":
        return LocalFunctional(self.rep + other.rep)

    def __sub__(self, other: "LocalFunctional") -> "LocalFunctional":
        return LocalFunctional(self.rep - other.rep)

    def __mul__(self, c) -> "LocalFunctional":
        return LocalFunctional(self.rep * rat(c))

    __rmul__ = __mul__

    def __neg__(self) -> "LocalFunctional":
        return LocalFunctional(-self.rep)

    def is_zero(self) -> bool:
        return is_total_derivative(self.rep)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LocalFunctional):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self) -> str:
        return f"LocalFunctional({self.rep.render()})"
