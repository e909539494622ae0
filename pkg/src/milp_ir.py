"""
Solver-independent representation of mixed-integer linear programs.
Variables are identified by dense integer indices (names are diagnostics only), the
objective is always minimized, and a problem can be dumped to and parsed from the
LP-style text format described in docs/lp_format.md.
"""
import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from errors import InvalidBounds

Term = Tuple[int, float]


class VarDomain(str, Enum):
    CONTINUOUS = "CONTINUOUS"
    BINARY = "BINARY"


class Sense(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


MINIMIZE = "MINIMIZE"


@dataclass(frozen=True)
class VariableSpec:
    name: str = ""
    domain: VarDomain = VarDomain.CONTINUOUS
    lower: float = 0.0
    upper: float = math.inf
    # higher classes are branched on first; not part of the LP text
    priority: int = 0


@dataclass(frozen=True)
class Variable:
    index: int
    name: str
    domain: VarDomain
    lower: float
    upper: float
    priority: int = 0

    @property
    def is_binary(self) -> bool:
        return self.domain is VarDomain.BINARY


@dataclass(frozen=True)
class LinearExpr:
    terms: Tuple[Term, ...] = ()
    constant: float = 0.0

    def evaluate(self, values: Sequence[float]) -> float:
        return self.constant + sum(coef * values[i] for i, coef in self.terms)


@dataclass(frozen=True)
class Constraint:
    expr: LinearExpr
    sense: Sense
    rhs: float
    name: str

    def violation(self, values: Sequence[float]) -> float:
        """How far the constraint is from holding (0 when satisfied)"""
        lhs = self.expr.evaluate(values)
        if self.sense is Sense.LE:
            return max(0.0, lhs - self.rhs)
        if self.sense is Sense.GE:
            return max(0.0, self.rhs - lhs)
        return abs(lhs - self.rhs)


@dataclass(frozen=True)
class LpArrays:
    """Matrix view of a problem: rows of A·x (sense) b, plus bounds and objective"""
    c: np.ndarray
    c0: float
    A: object              # dense ndarray or scipy CSR matrix
    senses: np.ndarray     # +1 for <=, 0 for =, -1 for >=
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    binary: np.ndarray     # bool mask
    priority: np.ndarray   # branching class per variable


def normalize(expr: LinearExpr) -> LinearExpr:
    """Merge duplicate indices, drop exact zeros, sort by index"""
    merged: Dict[int, float] = {}
    for index, coef in expr.terms:
        merged[index] = merged.get(index, 0.0) + coef
    terms = tuple((i, c) for i, c in sorted(merged.items()) if c != 0.0)
    return LinearExpr(terms, expr.constant)


_SENSE_CODE = {Sense.LE: 1, Sense.EQ: 0, Sense.GE: -1}


class MilpProblem:
    """A minimization MILP under construction; freeze() makes it read-only"""

    sense = MINIMIZE

    def __init__(self, name: str = "problem"):
        self.name = name
        self.variables: List[Variable] = []
        self.constraints: List[Constraint] = []
        self.objective = LinearExpr()
        self._frozen = False
        self._arrays: Dict[bool, LpArrays] = {}

    # ----- construction -----

    def _check_writable(self):
        if self._frozen:
            raise RuntimeError(f"problem '{self.name}' is frozen")

    def add_variable(self, spec: VariableSpec) -> int:
        self._check_writable()
        lower, upper = spec.lower, spec.upper
        if spec.domain is VarDomain.BINARY:
            lower, upper = max(0.0, lower), min(1.0, upper)
        if math.isnan(lower) or math.isnan(upper) or lower > upper:
            raise InvalidBounds(f"variable '{spec.name}': lower {spec.lower} > upper {spec.upper}")
        index = len(self.variables)
        self.variables.append(Variable(index, spec.name or f"v{index}", spec.domain,
                                       float(lower), float(upper), int(spec.priority)))
        return index

    def add_constraint(self, terms: Iterable[Term], sense: Sense, rhs: float, name: str = "") -> int:
        self._check_writable()
        if not math.isfinite(rhs):
            raise ValueError(f"constraint '{name}': rhs must be finite, got {rhs}")
        name = name or f"c{len(self.constraints)}"
        if re.search(r"\s", name):
            raise ValueError(f"constraint name '{name}' contains whitespace")
        expr = self._checked(normalize(LinearExpr(tuple(terms))))
        self.constraints.append(Constraint(expr, Sense(sense), float(rhs), name))
        return len(self.constraints) - 1

    def set_objective(self, terms: Iterable[Term], constant: float = 0.0):
        self._check_writable()
        self.objective = self._checked(normalize(LinearExpr(tuple(terms), float(constant))))

    def _checked(self, expr: LinearExpr) -> LinearExpr:
        n = len(self.variables)
        for index, coef in expr.terms:
            if not 0 <= index < n:
                raise IndexError(f"term references unknown variable {index}")
            if not math.isfinite(coef):
                raise ValueError(f"non-finite coefficient {coef} on variable {index}")
        return expr

    def freeze(self) -> "MilpProblem":
        self._frozen = True
        return self

    # ----- inspection -----

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    def binary_indices(self) -> List[int]:
        return [v.index for v in self.variables if v.is_binary]

    def objective_value(self, values: Sequence[float]) -> float:
        return self.objective.evaluate(values)

    def max_violation(self, values: Sequence[float]) -> float:
        """Largest constraint or bound violation at the given point"""
        worst = 0.0
        for var in self.variables:
            value = values[var.index]
            worst = max(worst, var.lower - value, value - var.upper)
        for con in self.constraints:
            worst = max(worst, con.violation(values))
        return worst

    def arrays(self, as_sparse: bool = False) -> LpArrays:
        """Matrix form, cached once the problem is frozen"""
        if self._frozen and as_sparse in self._arrays:
            return self._arrays[as_sparse]
        n, m = len(self.variables), len(self.constraints)
        c = np.zeros(n)
        for index, coef in self.objective.terms:
            c[index] = coef
        rows, cols, data = [], [], []
        b = np.zeros(m)
        senses = np.zeros(m, dtype=int)
        for row, con in enumerate(self.constraints):
            for index, coef in con.expr.terms:
                rows.append(row)
                cols.append(index)
                data.append(coef)
            b[row] = con.rhs - con.expr.constant
            senses[row] = _SENSE_CODE[con.sense]
        A = sparse.csr_matrix((data, (rows, cols)), shape=(m, n))
        if not as_sparse:
            A = A.toarray()
        result = LpArrays(
            c=c,
            c0=self.objective.constant,
            A=A,
            senses=senses,
            b=b,
            lower=np.array([v.lower for v in self.variables], dtype=float),
            upper=np.array([v.upper for v in self.variables], dtype=float),
            binary=np.array([v.is_binary for v in self.variables], dtype=bool),
            priority=np.array([v.priority for v in self.variables], dtype=int),
        )
        if self._frozen:
            self._arrays[as_sparse] = result
        return result

    # ----- text dump -----

    def to_lp_text(self) -> str:
        return dump_lp(self)

    @classmethod
    def from_lp_text(cls, text: str) -> "MilpProblem":
        return parse_lp(text)


def add_variable(problem: MilpProblem, spec: VariableSpec) -> int:
    return problem.add_variable(spec)


# ===== LP text format =====

def _num(value: float) -> str:
    return "%.17g" % value


def _terms_text(terms: Sequence[Term]) -> str:
    return " ".join(f"{'+' if c >= 0 else '-'}{_num(abs(c))} v{i}" for i, c in terms)


def dump_lp(problem: MilpProblem) -> str:
    lines = [f"\\ Problem: {problem.name}"]
    for var in problem.variables:
        lines.append(f"\\ var {var.index} {var.name}")
    lines.append("Minimize")
    objective = _terms_text(problem.objective.terms)
    if problem.objective.constant != 0.0:
        objective = f"{objective} {'+' if problem.objective.constant >= 0 else '-'}{_num(abs(problem.objective.constant))}"
    lines.append(f" obj: {objective}".rstrip())
    lines.append("Subject To")
    for con in problem.constraints:
        body = _terms_text(con.expr.terms)
        rhs = con.rhs - con.expr.constant
        lines.append(f" {con.name}: {body} {con.sense.value} {_num(rhs)}".replace(":  ", ": "))
    lines.append("Bounds")
    for var in problem.variables:
        lines.append(f" {_num(var.lower)} <= v{var.index} <= {_num(var.upper)}")
    binaries = [f"v{i}" for i in problem.binary_indices()]
    lines.append("Binaries")
    for start in range(0, len(binaries), 10):
        lines.append(" " + " ".join(binaries[start:start + 10]))
    lines.append("End")
    return "\n".join(lines) + "\n"


def _parse_terms(tokens: List[str]) -> Tuple[List[Term], float]:
    terms: List[Term] = []
    constant = 0.0
    pos = 0
    while pos < len(tokens):
        coef = float(tokens[pos])
        if pos + 1 < len(tokens) and tokens[pos + 1].startswith("v"):
            terms.append((int(tokens[pos + 1][1:]), coef))
            pos += 2
        else:
            constant += coef
            pos += 1
    return terms, constant


def parse_lp(text: str) -> MilpProblem:
    """Inverse of dump_lp"""
    names: Dict[int, str] = {}
    problem_name = "problem"
    section: Optional[str] = None
    objective: Tuple[List[Term], float] = ([], 0.0)
    constraints: List[Tuple[str, List[Term], Sense, float]] = []
    bounds: Dict[int, Tuple[float, float]] = {}
    binaries = set()
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            body = line[1:].strip()
            if body.startswith("Problem:"):
                problem_name = body[len("Problem:"):].strip()
            elif body.startswith("var "):
                _, index, name = body.split(" ", 2)
                names[int(index)] = name
            continue
        if line in ("Minimize", "Subject To", "Bounds", "Binaries", "End"):
            section = line
            continue
        if section == "Minimize":
            objective = _parse_terms(line.split(":", 1)[1].split())
        elif section == "Subject To":
            name, body = line.split(": ", 1) if ": " in line else (line.rstrip(":"), "")
            tokens = body.split()
            terms, _ = _parse_terms(tokens[:-2])
            constraints.append((name, terms, Sense(tokens[-2]), float(tokens[-1])))
        elif section == "Bounds":
            lower, _, var, _, upper = line.split()
            bounds[int(var[1:])] = (float(lower), float(upper))
        elif section == "Binaries":
            binaries.update(int(tok[1:]) for tok in line.split())
        else:
            raise ValueError(f"unexpected line outside a section: {line!r}")

    problem = MilpProblem(problem_name)
    count = max([len(names)] + [i + 1 for i in bounds])
    for index in range(count):
        lower, upper = bounds.get(index, (0.0, math.inf))
        domain = VarDomain.BINARY if index in binaries else VarDomain.CONTINUOUS
        problem.add_variable(VariableSpec(names.get(index, ""), domain, lower, upper))
    for name, terms, sense, rhs in constraints:
        problem.add_constraint(terms, sense, rhs, name)
    problem.set_objective(*objective)
    return problem
