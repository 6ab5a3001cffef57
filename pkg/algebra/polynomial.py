"""
Sparse multivariate polynomials with complex coefficients and square systems

A Polynomial maps exponent tuples (one entry per registry variable) to
complex coefficients. A PolySystem owns a VariableRegistry and a list of
equations and compiles them once for fast batched evaluation.
"""

import logging
from numbers import Number
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import InvalidInputError, UnsupportedSystemError

logger = logging.getLogger(__name__)

Exponent = Tuple[int, ...]


class Polynomial:
    """Immutable sparse polynomial over n_vars variables"""

    __slots__ = ("n_vars", "_terms")

    def __init__(self, terms: Dict[Exponent, complex], n_vars: int):
        self.n_vars = n_vars
        cleaned = {}
        for exponent, coeff in terms.items():
            if len(exponent) != n_vars:
                raise InvalidInputError(
                    f"exponent {exponent} has length {len(exponent)}, expected {n_vars}")
            coeff = complex(coeff)
            if coeff != 0:
                cleaned[tuple(int(e) for e in exponent)] = coeff
        self._terms = cleaned

    @classmethod
    def zero(cls, n_vars: int) -> "Polynomial":
        return cls({}, n_vars)

    @classmethod
    def constant(cls, value: complex, n_vars: int) -> "Polynomial":
        return cls({(0,) * n_vars: value}, n_vars)

    @classmethod
    def variable(cls, index: int, n_vars: int) -> "Polynomial":
        exponent = [0] * n_vars
        exponent[index] = 1
        return cls({tuple(exponent): 1.0}, n_vars)

    @property
    def terms(self) -> Dict[Exponent, complex]:
        return dict(self._terms)

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial"""
        if not self._terms:
            return -1
        return max(sum(exponent) for exponent in self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def variables(self) -> List[int]:
        """Indices of the variables that actually occur"""
        used = set()
        for exponent in self._terms:
            used.update(j for j, e in enumerate(exponent) if e)
        return sorted(used)

    def _coerce(self, other: Any) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.n_vars != self.n_vars:
                raise InvalidInputError(
                    f"cannot combine polynomials over {self.n_vars} and {other.n_vars} variables")
            return other
        if isinstance(other, Number):
            return Polynomial.constant(other, self.n_vars)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self._terms)
        for exponent, coeff in other._terms.items():
            terms[exponent] = terms.get(exponent, 0) + coeff
        return Polynomial(terms, self.n_vars)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({e: -c for e, c in self._terms.items()}, self.n_vars)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms: Dict[Exponent, complex] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                exponent = tuple(a + b for a, b in zip(e1, e2))
                terms[exponent] = terms.get(exponent, 0) + c1 * c2
        return Polynomial(terms, self.n_vars)

    __rmul__ = __mul__

    def __pow__(self, power: int):
        if not isinstance(power, int) or power < 0:
            raise InvalidInputError(f"polynomial powers must be non-negative integers, got {power!r}")
        result = Polynomial.constant(1.0, self.n_vars)
        for _ in range(power):
            result = result * self
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return (self - other).is_zero()

    def __hash__(self):
        return hash((self.n_vars, frozenset(self._terms.items())))

    def diff(self, index: int) -> "Polynomial":
        """Partial derivative with respect to variable index"""
        terms = {}
        for exponent, coeff in self._terms.items():
            power = exponent[index]
            if power:
                lowered = list(exponent)
                lowered[index] -= 1
                terms[tuple(lowered)] = coeff * power
        return Polynomial(terms, self.n_vars)

    def evaluate(self, point: Sequence[complex]) -> complex:
        point = np.asarray(point, dtype=complex)
        if point.shape != (self.n_vars,):
            raise InvalidInputError(f"point has shape {point.shape}, expected ({self.n_vars},)")
        total = 0j
        for exponent, coeff in self._terms.items():
            value = coeff
            for j, power in enumerate(exponent):
                for _ in range(power):
                    value *= point[j]
            total += value
        return total

    def __repr__(self):
        if not self._terms:
            return "Polynomial(0)"
        parts = []
        for exponent, coeff in sorted(self._terms.items(), reverse=True):
            monomial = "*".join(
                f"x{j}" + (f"^{e}" if e > 1 else "") for j, e in enumerate(exponent) if e)
            parts.append(f"({coeff:g})" + (f"*{monomial}" if monomial else ""))
        return "Polynomial(" + " + ".join(parts) + ")"


class VariableRegistry:
    """Ordered, unique variable names"""

    def __init__(self, names: Iterable[str] = ()):
        self._names: List[str] = []
        self._index: Dict[str, int] = {}
        for name in names:
            self.add(name)

    def add(self, name: str) -> int:
        if name in self._index:
            raise InvalidInputError(f"duplicate variable name {name!r}")
        self._index[name] = len(self._names)
        self._names.append(name)
        return self._index[name]

    def index(self, name: str) -> int:
        return self._index[name]

    @property
    def names(self) -> List[str]:
        return list(self._names)

    def variable(self, name: str) -> Polynomial:
        return Polynomial.variable(self._index[name], len(self._names))

    def __len__(self):
        return len(self._names)

    def __contains__(self, name):
        return name in self._index

    def __iter__(self) -> Iterator[str]:
        return iter(self._names)

    def __repr__(self):
        return f"VariableRegistry({len(self._names)} variables)"


def _int_powers(points: np.ndarray, max_power: int) -> np.ndarray:
    """Stack [x^0, x^1, ..., x^max_power] by repeated multiplication"""
    powers = np.empty((max_power + 1,) + points.shape, dtype=complex)
    powers[0] = 1.0
    for k in range(1, max_power + 1):
        powers[k] = powers[k - 1] * points
    return powers


class PolySystem:
    """
    A list of polynomial equations over a variable registry

    Systems of total degree at most two are compiled to the dense form
        F(x) = c + B x + Q(x, x)
    with Q symmetric in its last two axes; other systems are evaluated from
    per-equation exponent matrices.
    """

    def __init__(self, registry: VariableRegistry, equations: Sequence[Polynomial],
                 eta_index: Optional[Sequence[Tuple[int, int]]] = None, name: str = ""):
        self.registry = registry
        self.equations = list(equations)
        self.eta_index = [tuple(pair) for pair in eta_index] if eta_index is not None else []
        self.name = name
        n = len(registry)
        for i, equation in enumerate(self.equations):
            if equation.n_vars != n:
                raise InvalidInputError(
                    f"equation {i} is over {equation.n_vars} variables, registry has {n}")
        self._compile()

    @property
    def n_variables(self) -> int:
        return len(self.registry)

    @property
    def n_equations(self) -> int:
        return len(self.equations)

    @property
    def square(self) -> bool:
        return self.n_equations == self.n_variables

    def degrees(self) -> List[int]:
        return [equation.degree for equation in self.equations]

    def bezout_number(self) -> int:
        """
        Product of the total degrees of the equations

        Returns:
            Number of start paths of a total-degree homotopy
        """
        if not self.square:
            raise InvalidInputError(
                f"system has {self.n_equations} equations in {self.n_variables} variables")
        degrees = self.degrees()
        zero = [i for i, d in enumerate(degrees) if d < 0]
        if zero:
            raise InvalidInputError(f"system contains zero equations at positions {zero}")
        count = 1
        for d in degrees:
            count *= max(d, 0)
        return count

    def _compile(self):
        n = self.n_variables
        self.max_degree = max([0] + self.degrees())
        if self.max_degree <= 2:
            n_eq = self.n_equations
            c = np.zeros(n_eq, dtype=complex)
            b = np.zeros((n_eq, n), dtype=complex)
            q = np.zeros((n_eq, n, n), dtype=complex)
            for i, equation in enumerate(self.equations):
                for exponent, coeff in equation._terms.items():
                    used = [j for j, e in enumerate(exponent) if e]
                    total = sum(exponent)
                    if total == 0:
                        c[i] += coeff
                    elif total == 1:
                        b[i, used[0]] += coeff
                    elif len(used) == 1:
                        q[i, used[0], used[0]] += coeff
                    else:
                        j, k = used
                        q[i, j, k] += coeff / 2
                        q[i, k, j] += coeff / 2
            self._dense = (c, b, q)
            self._sparse = None
        else:
            self._dense = None
            self._sparse = []
            for equation in self.equations:
                exponents = np.array(list(equation._terms.keys()), dtype=int).reshape(-1, n)
                coeffs = np.array(list(equation._terms.values()), dtype=complex)
                self._sparse.append((exponents, coeffs))

    def _check_points(self, points: Any) -> np.ndarray:
        points = np.asarray(points, dtype=complex)
        if points.ndim != 2 or points.shape[1] != self.n_variables:
            raise InvalidInputError(
                f"points have shape {points.shape}, expected (k, {self.n_variables})")
        return points

    def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at a stack of points of shape (k, n); returns (k, n_equations)"""
        return self.evaluate_with_jacobian_batch(points, jacobian=False)[0]

    def jacobian_batch(self, points: np.ndarray) -> np.ndarray:
        """Jacobians at a stack of points; returns (k, n_equations, n)"""
        return self.evaluate_with_jacobian_batch(points)[1]

    def evaluate_with_jacobian_batch(self, points: np.ndarray,
                                     jacobian: bool = True) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        points = self._check_points(points)
        if self._dense is not None:
            c, b, q = self._dense
            qx = np.einsum("ijk,pk->pij", q, points)
            values = c + points @ b.T + np.einsum("pij,pj->pi", qx, points)
            return values, (b + 2.0 * qx if jacobian else None)

        k, n = points.shape
        values = np.zeros((k, self.n_equations), dtype=complex)
        jac = np.zeros((k, self.n_equations, n), dtype=complex) if jacobian else None
        powers = _int_powers(points, self.max_degree)
        var_axis = np.arange(n)[None, None, :]
        point_axis = np.arange(k)[None, :, None]
        for i, (exponents, coeffs) in enumerate(self._sparse):
            if coeffs.size == 0:
                continue
            monomials = powers[exponents[:, None, :], point_axis, var_axis].prod(axis=2)
            values[:, i] = coeffs @ monomials
            if jacobian:
                for j in range(n):
                    mask = exponents[:, j] > 0
                    if not mask.any():
                        continue
                    lowered = exponents[mask].copy()
                    lowered[:, j] -= 1
                    partial = powers[lowered[:, None, :], point_axis, var_axis].prod(axis=2)
                    jac[:, i, j] = (coeffs[mask] * exponents[mask, j]) @ partial
        return values, jac

    def evaluate(self, point: Sequence[complex]) -> np.ndarray:
        """Exact evaluation at a single point"""
        point = np.asarray(point, dtype=complex)
        if point.shape != (self.n_variables,):
            raise InvalidInputError(
                f"point has length {point.shape}, expected {self.n_variables}")
        return self.evaluate_batch(point[None, :])[0]

    def jacobian(self, point: Sequence[complex]) -> np.ndarray:
        """Matrix of first partial derivatives at a single point"""
        point = np.asarray(point, dtype=complex)
        if point.shape != (self.n_variables,):
            raise InvalidInputError(
                f"point has length {point.shape}, expected {self.n_variables}")
        return self.jacobian_batch(point[None, :])[0]

    def hessian_tensor(self) -> np.ndarray:
        """
        Constant second-derivative tensor of a system of degree at most two

        Returns:
            Array H with H[i] the Hessian matrix of equation i
        """
        if self._dense is None:
            raise UnsupportedSystemError(
                f"second derivatives are not constant: system has degree {self.max_degree}")
        return 2.0 * self._dense[2]

    def linear_part(self) -> Tuple[np.ndarray, np.ndarray]:
        """(B, c) with F(x) = B x + c for systems of degree at most one"""
        if self._dense is None or np.any(self._dense[2]):
            raise UnsupportedSystemError("system is not linear")
        c, b, _ = self._dense
        return b.copy(), c.copy()

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return (f"PolySystem{label}({self.n_equations} equations, {self.n_variables} variables, "
                f"degrees={self.degrees()})")


def _complex_pair(value: complex) -> List[float]:
    return [float(value.real), float(value.imag)]


def system_to_dict(system: PolySystem) -> Dict[str, Any]:
    """
    Serialize a system for the JSON dump

    Each equation becomes a list of [exponent map, [re, im]] pairs where the
    exponent map only lists variables with a positive power.
    """
    names = system.registry.names
    equations = []
    for equation in system.equations:
        terms = []
        for exponent, coeff in sorted(equation.terms.items()):
            powers = {names[j]: e for j, e in enumerate(exponent) if e}
            terms.append([powers, _complex_pair(coeff)])
        equations.append(terms)
    return {
        "name": system.name,
        "variables": names,
        "eta_index": [list(pair) for pair in system.eta_index],
        "equations": equations,
    }


def system_from_dict(data: Dict[str, Any]) -> PolySystem:
    """Restore a system written by system_to_dict"""
    try:
        registry = VariableRegistry(data["variables"])
        n = len(registry)
        equations = []
        for terms in data["equations"]:
            coeffs = {}
            for powers, (re, im) in terms:
                exponent = [0] * n
                for name, power in powers.items():
                    exponent[registry.index(name)] = int(power)
                coeffs[tuple(exponent)] = complex(re, im)
            equations.append(Polynomial(coeffs, n))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed system document: {exc}") from exc
    return PolySystem(registry, equations, eta_index=data.get("eta_index") or None,
                      name=data.get("name", ""))
