import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from services.linalg_service import FPModule, LinalgService, ModuleMap, PLocalMatrix, solve

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HomVariable:
    name: str
    source: object
    target: object
    equivariant: bool


@dataclass(frozen=True)
class HomEquation:
    """sum of left · X_var · right, read as ncols elements of the module"""
    module: FPModule
    ncols: int
    terms: Tuple[Tuple[PLocalMatrix, int, PLocalMatrix], ...]


class HomSystem:
    """Linear conditions on a tuple of module maps X_k: S_k → T_k.

    Each unknown lives in T_k^{n(S_k)} through the column-major vec of its matrix.
    Well-definedness on S_k relations is always imposed; psi-equivariance when asked.
    """

    def __init__(self, p: int):
        self.p = p
        self.linalg = LinalgService()
        self.variables: List[HomVariable] = []
        self.equations: List[HomEquation] = []

    def add_variable(self, name: str, source, target, equivariant: bool = True) -> int:
        self.variables.append(HomVariable(name, source, target, equivariant))
        return len(self.variables) - 1

    def add_equation(self, module: FPModule, ncols: int,
                     terms: Sequence[Tuple[PLocalMatrix, int, PLocalMatrix]]) -> None:
        self.equations.append(HomEquation(module, ncols, tuple(terms)))

    def _automatic_equations(self) -> List[HomEquation]:
        p = self.p
        result = []
        for k, var in enumerate(self.variables):
            t_ident = PLocalMatrix.identity(p, var.target.ngens)
            s_ident = PLocalMatrix.identity(p, var.source.ngens)
            rel = var.source.relations
            result.append(HomEquation(var.target.module, rel.cols, ((t_ident, k, rel),)))
            if var.equivariant:
                result.append(HomEquation(var.target.module, var.source.ngens,
                                          ((t_ident, k, var.source.psi), (-var.target.psi, k, s_ident))))
        return result

    def variable_offsets(self) -> List[int]:
        offsets, total = [], 0
        for var in self.variables:
            offsets.append(total)
            total += var.target.ngens * var.source.ngens
        offsets.append(total)
        return offsets

    def variable_space(self) -> FPModule:
        return FPModule.direct_sum(self.p, *(v.target.module.power(v.source.ngens) for v in self.variables))

    def constraint_matrix(self) -> Tuple[PLocalMatrix, FPModule]:
        p = self.p
        offsets = self.variable_offsets()
        equations = self.equations + self._automatic_equations()
        row_blocks = []
        modules = []
        for eq in equations:
            rows = eq.module.ngens * eq.ncols
            block = PLocalMatrix.zeros(p, rows, offsets[-1]).to_lists()
            for left, k, right in eq.terms:
                part = right.transpose().kron(left)
                start = offsets[k]
                for i in range(rows):
                    row = block[i]
                    for j, x in enumerate(part._data[i]):
                        if x:
                            row[start + j] += x
            row_blocks.append(PLocalMatrix(p, rows, offsets[-1], block))
            modules.append(eq.module.power(eq.ncols))
        matrix = PLocalMatrix.vstack(p, offsets[-1], *row_blocks)
        return matrix, FPModule.direct_sum(p, *modules)

    def solution_space(self) -> Tuple[FPModule, PLocalMatrix]:
        """Module of solutions and its generators as columns in variable coordinates"""
        matrix, eq_space = self.constraint_matrix()
        var_space = self.variable_space()
        module, inclusion = self.linalg.kernel(ModuleMap(var_space, eq_space, matrix, check=False))
        logger.debug(f"HomSystem with {len(self.variables)} unknowns: solution module {module}")
        return module, inclusion.matrix

    def solve_affine(self, rhs: Sequence[PLocalMatrix]) -> Optional[Dict[str, PLocalMatrix]]:
        """One solution of the user equations with the given right-hand sides, or None"""
        p = self.p
        matrix, eq_space = self.constraint_matrix()
        parts = [r.vec() for r in rhs]
        automatic = sum(e.module.ngens * e.ncols for e in self._automatic_equations())
        parts.append(PLocalMatrix.zeros(p, automatic, 1))
        b = PLocalMatrix.vstack(p, 1, *parts)
        combined = PLocalMatrix.hstack(p, matrix.rows, matrix, eq_space.relations)
        sol = solve(combined, b)
        if sol is None:
            return None
        return self.unpack(sol.column(0)[:matrix.cols])

    def unpack(self, vector: Sequence) -> Dict[str, PLocalMatrix]:
        offsets = self.variable_offsets()
        values = {}
        for k, var in enumerate(self.variables):
            chunk = vector[offsets[k]:offsets[k + 1]]
            values[var.name] = PLocalMatrix.unvec(self.p, chunk, var.target.ngens, var.source.ngens)
        return values

    def pack(self, values: Dict[str, PLocalMatrix]) -> PLocalMatrix:
        return PLocalMatrix.vstack(self.p, 1, *(values[v.name].vec() for v in self.variables))

    def is_solution(self, values: Dict[str, PLocalMatrix]) -> bool:
        matrix, eq_space = self.constraint_matrix()
        return eq_space.contains_columns(matrix @ self.pack(values))
