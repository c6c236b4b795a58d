import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from utils.errors import InternalError, PreconditionError
from utils.plocal import Number, format_scalar, reduce_mod, to_fraction, valuation

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)


class PLocalMatrix:
    """Dense immutable matrix over Z_(p)"""

    __slots__ = ("p", "rows", "cols", "_data", "_smith")

    def __init__(self, p: int, rows: int, cols: int, data: Sequence[Sequence[Fraction]]):
        if len(data) != rows or any(len(r) != cols for r in data):
            raise InternalError(f"Matrix data does not have shape {rows}x{cols}")
        for r in data:
            for x in r:
                if x.denominator % p:
                    continue
                raise InternalError(f"Entry {x} left Z_({p})")
        self.p = p
        self.rows = rows
        self.cols = cols
        self._data = [list(r) for r in data]
        self._smith = None

    # construction

    @classmethod
    def from_rows(cls, p: int, rows: Sequence[Sequence[Number]], cols: Optional[int] = None) -> "PLocalMatrix":
        data = [[to_fraction(x, p) for x in r] for r in rows]
        ncols = cols if cols is not None else (len(data[0]) if data else 0)
        return cls(p, len(data), ncols, data)

    @classmethod
    def zeros(cls, p: int, rows: int, cols: int) -> "PLocalMatrix":
        return cls(p, rows, cols, [[ZERO] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, p: int, n: int) -> "PLocalMatrix":
        return cls.scalar(p, n, ONE)

    @classmethod
    def scalar(cls, p: int, n: int, value: Fraction) -> "PLocalMatrix":
        return cls(p, n, n, [[value if i == j else ZERO for j in range(n)] for i in range(n)])

    @classmethod
    def diagonal(cls, p: int, values: Sequence[Fraction]) -> "PLocalMatrix":
        n = len(values)
        return cls(p, n, n, [[values[i] if i == j else ZERO for j in range(n)] for i in range(n)])

    @classmethod
    def column_vector(cls, p: int, values: Sequence[Fraction]) -> "PLocalMatrix":
        return cls(p, len(values), 1, [[v] for v in values])

    @staticmethod
    def hstack(p: int, rows: int, *blocks: "PLocalMatrix") -> "PLocalMatrix":
        data = [[] for _ in range(rows)]
        cols = 0
        for b in blocks:
            if b.rows != rows:
                raise InternalError(f"hstack: block has {b.rows} rows, expected {rows}")
            for i in range(rows):
                data[i].extend(b._data[i])
            cols += b.cols
        return PLocalMatrix(p, rows, cols, data)

    @staticmethod
    def vstack(p: int, cols: int, *blocks: "PLocalMatrix") -> "PLocalMatrix":
        data = []
        for b in blocks:
            if b.cols != cols:
                raise InternalError(f"vstack: block has {b.cols} columns, expected {cols}")
            data.extend(list(r) for r in b._data)
        return PLocalMatrix(p, len(data), cols, data)

    @staticmethod
    def block_diag(p: int, *blocks: "PLocalMatrix") -> "PLocalMatrix":
        rows = sum(b.rows for b in blocks)
        cols = sum(b.cols for b in blocks)
        data = [[ZERO] * cols for _ in range(rows)]
        r0 = c0 = 0
        for b in blocks:
            for i in range(b.rows):
                data[r0 + i][c0:c0 + b.cols] = b._data[i]
            r0 += b.rows
            c0 += b.cols
        return PLocalMatrix(p, rows, cols, data)

    @staticmethod
    def blocks(p: int, grid: Sequence[Sequence["PLocalMatrix"]]) -> "PLocalMatrix":
        """Assemble a block matrix from a grid of compatible blocks"""
        rows_out = []
        for row in grid:
            rows_out.append(PLocalMatrix.hstack(p, row[0].rows, *row))
        return PLocalMatrix.vstack(p, rows_out[0].cols if rows_out else 0, *rows_out)

    # access

    def entry(self, i: int, j: int) -> Fraction:
        return self._data[i][j]

    def to_lists(self) -> List[List[Fraction]]:
        return [list(r) for r in self._data]

    def to_strings(self) -> List[List[str]]:
        return [[format_scalar(x) for x in r] for r in self._data]

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "PLocalMatrix":
        return PLocalMatrix(self.p, len(rows), len(cols), [[self._data[i][j] for j in cols] for i in rows])

    def row_slice(self, start: int, stop: int) -> "PLocalMatrix":
        return PLocalMatrix(self.p, stop - start, self.cols, self._data[start:stop])

    def col_slice(self, start: int, stop: int) -> "PLocalMatrix":
        return PLocalMatrix(self.p, self.rows, stop - start, [r[start:stop] for r in self._data])

    def column(self, j: int) -> List[Fraction]:
        return [r[j] for r in self._data]

    def is_zero(self) -> bool:
        return all(not x for r in self._data for x in r)

    # arithmetic

    def __matmul__(self, other: "PLocalMatrix") -> "PLocalMatrix":
        if self.cols != other.rows:
            raise InternalError(f"Cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        ocols = other.cols
        odata = other._data
        out = []
        for row in self._data:
            acc = [ZERO] * ocols
            for k, a in enumerate(row):
                if not a:
                    continue
                orow = odata[k]
                for j in range(ocols):
                    b = orow[j]
                    if b:
                        acc[j] += a * b
            out.append(acc)
        return PLocalMatrix(self.p, self.rows, ocols, out)

    def _check_shape(self, other: "PLocalMatrix") -> None:
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise InternalError(f"Shape mismatch {self.rows}x{self.cols} vs {other.rows}x{other.cols}")

    def __add__(self, other: "PLocalMatrix") -> "PLocalMatrix":
        self._check_shape(other)
        return PLocalMatrix(self.p, self.rows, self.cols,
                            [[a + b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)])

    def __sub__(self, other: "PLocalMatrix") -> "PLocalMatrix":
        self._check_shape(other)
        return PLocalMatrix(self.p, self.rows, self.cols,
                            [[a - b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)])

    def __neg__(self) -> "PLocalMatrix":
        return self.scale(-ONE)

    def scale(self, c: Fraction) -> "PLocalMatrix":
        return PLocalMatrix(self.p, self.rows, self.cols, [[c * x for x in r] for r in self._data])

    def transpose(self) -> "PLocalMatrix":
        return PLocalMatrix(self.p, self.cols, self.rows,
                            [[self._data[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def kron(self, other: "PLocalMatrix") -> "PLocalMatrix":
        rows = self.rows * other.rows
        cols = self.cols * other.cols
        data = [[ZERO] * cols for _ in range(rows)]
        for i, r in enumerate(self._data):
            for j, a in enumerate(r):
                if not a:
                    continue
                for k, s in enumerate(other._data):
                    out = data[i * other.rows + k]
                    base = j * other.cols
                    for l, b in enumerate(s):
                        if b:
                            out[base + l] = a * b
        return PLocalMatrix(self.p, rows, cols, data)

    def vec(self) -> "PLocalMatrix":
        """Column-major vectorisation"""
        return PLocalMatrix(self.p, self.rows * self.cols, 1,
                            [[self._data[i][j]] for j in range(self.cols) for i in range(self.rows)])

    @classmethod
    def unvec(cls, p: int, vector: Sequence[Fraction], rows: int, cols: int) -> "PLocalMatrix":
        return cls(p, rows, cols, [[vector[j * rows + i] for j in range(cols)] for i in range(rows)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, PLocalMatrix):
            return NotImplemented
        return (self.p, self.rows, self.cols) == (other.p, other.rows, other.cols) and self._data == other._data

    def __hash__(self) -> int:
        return hash((self.p, self.rows, self.cols, tuple(tuple(r) for r in self._data)))

    def __repr__(self) -> str:
        return f"PLocalMatrix(p={self.p}, {self.rows}x{self.cols}, {self.to_strings()})"


@dataclass(frozen=True)
class SmithForm:
    """U A V = D with D diagonal p^e_1 | p^e_2 | ... and the inverses of U and V"""
    u: PLocalMatrix
    d: PLocalMatrix
    v: PLocalMatrix
    u_inv: PLocalMatrix
    v_inv: PLocalMatrix
    exponents: Tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.exponents)


def _find_pivot(a: List[List[Fraction]], k: int, p: int) -> Optional[Tuple[int, int, int]]:
    best = None
    for i in range(k, len(a)):
        row = a[i]
        for j in range(k, len(row)):
            x = row[j]
            if not x:
                continue
            v = valuation(x, p)
            if best is None or v < best[2]:
                best = (i, j, v)
                if v == 0:
                    return best
    return best


def smith_form(m: PLocalMatrix) -> SmithForm:
    """Smith normal form over the DVR Z_(p); cached on the matrix"""
    if m._smith is not None:
        return m._smith
    p, r, c = m.p, m.rows, m.cols
    a = m.to_lists()
    u = PLocalMatrix.identity(p, r).to_lists()
    u_inv = PLocalMatrix.identity(p, r).to_lists()
    v = PLocalMatrix.identity(p, c).to_lists()
    v_inv = PLocalMatrix.identity(p, c).to_lists()
    exponents = []
    for k in range(min(r, c)):
        pivot = _find_pivot(a, k, p)
        if pivot is None:
            break
        i, j, e = pivot
        if i != k:
            a[k], a[i] = a[i], a[k]
            u[k], u[i] = u[i], u[k]
            for row in u_inv:
                row[k], row[i] = row[i], row[k]
        if j != k:
            for row in a:
                row[k], row[j] = row[j], row[k]
            for row in v:
                row[k], row[j] = row[j], row[k]
            v_inv[k], v_inv[j] = v_inv[j], v_inv[k]
        power = Fraction(p ** e)
        unit = a[k][k] / power
        if unit != 1:
            inv = 1 / unit
            a[k] = [x * inv for x in a[k]]
            u[k] = [x * inv for x in u[k]]
            for row in u_inv:
                row[k] *= unit
        for i2 in range(r):
            if i2 == k or not a[i2][k]:
                continue
            f = a[i2][k] / power
            a[i2] = [x - f * y for x, y in zip(a[i2], a[k])]
            u[i2] = [x - f * y for x, y in zip(u[i2], u[k])]
            for row in u_inv:
                row[k] += f * row[i2]
        for j2 in range(c):
            if j2 == k or not a[k][j2]:
                continue
            f = a[k][j2] / power
            a[k][j2] = ZERO
            for row in v:
                row[j2] -= f * row[k]
            v_inv[k] = [x + f * y for x, y in zip(v_inv[k], v_inv[j2])]
        exponents.append(e)
    d = PLocalMatrix(p, r, c, a)
    result = SmithForm(
        u=PLocalMatrix(p, r, r, u),
        d=d,
        v=PLocalMatrix(p, c, c, v),
        u_inv=PLocalMatrix(p, r, r, u_inv),
        v_inv=PLocalMatrix(p, c, c, v_inv),
        exponents=tuple(exponents),
    )
    m._smith = result
    logger.debug(f"SNF of {r}x{c} matrix: exponents {exponents}")
    return result


def solve(a: PLocalMatrix, b: PLocalMatrix) -> Optional[PLocalMatrix]:
    """Some X over Z_(p) with A X = B, or None"""
    if a.rows != b.rows:
        raise InternalError(f"solve: {a.rows} rows against right-hand side with {b.rows}")
    p = a.p
    sf = smith_form(a)
    ub = (sf.u @ b).to_lists()
    y = [[ZERO] * b.cols for _ in range(a.cols)]
    for i, e in enumerate(sf.exponents):
        power = p ** e
        for j in range(b.cols):
            x = ub[i][j]
            if not x:
                continue
            if valuation(x, p) < e:
                return None
            y[i][j] = x / power
    for i in range(sf.rank, a.rows):
        if any(ub[i]):
            return None
    return sf.v @ PLocalMatrix(p, a.cols, b.cols, y)


def lattice_kernel(a: PLocalMatrix) -> PLocalMatrix:
    """Basis (as columns) of the saturated lattice {x : A x = 0}"""
    sf = smith_form(a)
    return sf.v.col_slice(sf.rank, a.cols)


def column_basis(a: PLocalMatrix) -> PLocalMatrix:
    """Basis (as columns) of the column span of A"""
    sf = smith_form(a)
    r = sf.rank
    scales = [Fraction(a.p ** e) for e in sf.exponents]
    return sf.u_inv.col_slice(0, r) @ PLocalMatrix.diagonal(a.p, scales)


def rank(a: PLocalMatrix) -> int:
    return smith_form(a).rank


@dataclass(frozen=True)
class ModuleInvariants:
    free_rank: int
    torsion: Tuple[int, ...]

    def to_dict(self) -> dict:
        return {"rank": self.free_rank, "torsion": list(self.torsion)}


class FPModule:
    """Z_(p)^ngens modulo the column span of the relations matrix"""

    __slots__ = ("p", "ngens", "relations", "_invariants")

    def __init__(self, relations: PLocalMatrix):
        self.p = relations.p
        self.ngens = relations.rows
        self.relations = relations
        self._invariants = None

    @classmethod
    def free(cls, p: int, n: int) -> "FPModule":
        return cls(PLocalMatrix.zeros(p, n, 0))

    @classmethod
    def zero(cls, p: int) -> "FPModule":
        return cls.free(p, 0)

    @classmethod
    def from_invariants(cls, p: int, free_rank: int, torsion: Sequence[int]) -> "FPModule":
        n = free_rank + len(torsion)
        rel = PLocalMatrix.zeros(p, n, len(torsion)).to_lists()
        for k, e in enumerate(torsion):
            rel[free_rank + k][k] = Fraction(p ** e)
        return cls(PLocalMatrix(p, n, len(torsion), rel))

    @classmethod
    def direct_sum(cls, p: int, *modules: "FPModule") -> "FPModule":
        return cls(PLocalMatrix.block_diag(p, *(m.relations for m in modules)))

    def power(self, k: int) -> "FPModule":
        """Direct sum of k copies, laid out as the column-major vec of a k-column matrix"""
        return FPModule(PLocalMatrix.identity(self.p, k).kron(self.relations))

    @property
    def invariants(self) -> ModuleInvariants:
        if self._invariants is None:
            sf = smith_form(self.relations)
            self._invariants = ModuleInvariants(
                free_rank=self.ngens - sf.rank,
                torsion=tuple(e for e in sf.exponents if e > 0),
            )
        return self._invariants

    def is_zero(self) -> bool:
        inv = self.invariants
        return inv.free_rank == 0 and not inv.torsion

    def is_finite(self) -> bool:
        return self.invariants.free_rank == 0

    @property
    def length(self) -> Optional[int]:
        """log_p of the order, None when infinite"""
        if not self.is_finite():
            return None
        return sum(self.invariants.torsion)

    def contains_columns(self, vectors: PLocalMatrix) -> bool:
        """True when every column is zero in the module"""
        if self.relations.cols == 0:
            return vectors.is_zero()
        return solve(self.relations, vectors) is not None

    def __str__(self) -> str:
        inv = self.invariants
        parts = [f"ℤ_({self.p})"] * inv.free_rank + [f"ℤ/{self.p ** e}" for e in inv.torsion]
        return " ⊕ ".join(parts) if parts else "0"

    def __repr__(self) -> str:
        return f"FPModule({self}, ngens={self.ngens})"


class ModuleMap:
    """Homomorphism of FP-modules given on generators"""

    __slots__ = ("source", "target", "matrix")

    def __init__(self, source: FPModule, target: FPModule, matrix: PLocalMatrix, check: bool = True):
        if (matrix.rows, matrix.cols) != (target.ngens, source.ngens):
            raise InternalError(
                f"Map matrix is {matrix.rows}x{matrix.cols}, expected {target.ngens}x{source.ngens}"
            )
        if check and not target.contains_columns(matrix @ source.relations):
            raise PreconditionError("Map sends a source relation outside the target relations",
                                    clause="map.well_defined")
        self.source = source
        self.target = target
        self.matrix = matrix


@dataclass(frozen=True)
class Subquotient:
    """A module presented on a lattice basis of cycles inside an ambient module"""
    module: FPModule
    basis: PLocalMatrix

    def coordinates(self, vectors: PLocalMatrix) -> PLocalMatrix:
        coords = solve(self.basis, vectors)
        if coords is None:
            raise InternalError("Vectors do not lie in the cycle lattice")
        return coords


class LinalgService:
    def snf(self, m: PLocalMatrix) -> Tuple[PLocalMatrix, PLocalMatrix, PLocalMatrix]:
        sf = smith_form(m)
        return sf.u, sf.d, sf.v

    def solve(self, a: PLocalMatrix, b: PLocalMatrix) -> Optional[PLocalMatrix]:
        return solve(a, b)

    def kernel(self, f: ModuleMap) -> Tuple[FPModule, ModuleMap]:
        """ker f with its inclusion into the source"""
        p = f.matrix.p
        a = f.source.ngens
        combined = PLocalMatrix.hstack(p, f.target.ngens, f.matrix, -f.target.relations)
        null = lattice_kernel(combined).row_slice(0, a)
        k = column_basis(null)
        z = solve(k, f.source.relations)
        if z is None:
            raise InternalError("Source relations are not inside the kernel lattice")
        module = FPModule(z)
        return module, ModuleMap(module, f.source, k, check=False)

    def cokernel(self, f: ModuleMap) -> Tuple[FPModule, ModuleMap]:
        p = f.matrix.p
        module = FPModule(PLocalMatrix.hstack(p, f.target.ngens, f.target.relations, f.matrix))
        return module, ModuleMap(f.target, module, PLocalMatrix.identity(p, f.target.ngens), check=False)

    def image(self, f: ModuleMap) -> Tuple[FPModule, ModuleMap]:
        """im f presented on the source generators, with its inclusion into the target"""
        _, inclusion = self.kernel(f)
        module = FPModule(inclusion.matrix)
        return module, ModuleMap(module, f.target, f.matrix, check=False)

    def homology(self, f: ModuleMap, g: ModuleMap) -> Subquotient:
        """ker g / im f for composable maps with g∘f = 0"""
        if g.source.ngens != f.target.ngens:
            raise InternalError("homology: maps are not composable")
        if not g.target.contains_columns(g.matrix @ f.matrix):
            raise PreconditionError("homology: composite is not zero", clause="homology.composite")
        kmod, inclusion = self.kernel(g)
        y = solve(inclusion.matrix, f.matrix)
        if y is None:
            raise InternalError("Image of the incoming map is not inside the cycle lattice")
        p = f.matrix.p
        module = FPModule(PLocalMatrix.hstack(p, kmod.ngens, kmod.relations, y))
        return Subquotient(module, inclusion.matrix)

    def is_zero_map(self, f: ModuleMap) -> bool:
        return f.target.contains_columns(f.matrix)

    def is_injective(self, f: ModuleMap) -> bool:
        return self.kernel(f)[0].is_zero()

    def is_surjective(self, f: ModuleMap) -> bool:
        return self.cokernel(f)[0].is_zero()

    def is_isomorphism(self, f: ModuleMap) -> bool:
        return self.is_injective(f) and self.is_surjective(f)

    def is_exact(self, f: ModuleMap, g: ModuleMap) -> bool:
        return self.homology(f, g).module.is_zero()

    def iso_test(self, m1: FPModule, m2: FPModule) -> bool:
        return m1.invariants == m2.invariants

    def compose(self, g: ModuleMap, f: ModuleMap) -> ModuleMap:
        return ModuleMap(f.source, g.target, g.matrix @ f.matrix, check=False)

    def zero_map(self, source: FPModule, target: FPModule) -> ModuleMap:
        return ModuleMap(source, target, PLocalMatrix.zeros(source.p, target.ngens, source.ngens), check=False)

    def module_inverse(self, f: ModuleMap) -> ModuleMap:
        """Inverse of an automorphism, as a matrix on generators"""
        p = f.matrix.p
        n = f.target.ngens
        sol = solve(PLocalMatrix.hstack(p, n, f.matrix, f.target.relations), PLocalMatrix.identity(p, n))
        if sol is None:
            raise PreconditionError("Map is not surjective, no inverse exists", clause="map.invertible")
        inverse = ModuleMap(f.target, f.source, sol.row_slice(0, f.source.ngens))
        if not f.source.contains_columns(inverse.matrix @ f.matrix - PLocalMatrix.identity(p, f.source.ngens)):
            raise PreconditionError("Map is not injective, no inverse exists", clause="map.invertible")
        return inverse

    def induced_endomorphism(self, basis: PLocalMatrix, operator: PLocalMatrix) -> PLocalMatrix:
        """Matrix of an operator restricted to the lattice spanned by basis"""
        result = solve(basis, operator @ basis)
        if result is None:
            raise InternalError("Operator does not preserve the lattice")
        return result

    def class_coordinates(self, module: FPModule, vector: PLocalMatrix) -> Tuple[Fraction, ...]:
        """Normal form of an element given in generator coordinates"""
        sf = smith_form(module.relations)
        u = (sf.u @ vector).column(0)
        coords = []
        for i, x in enumerate(u):
            if i < sf.rank:
                coords.append(Fraction(reduce_mod(x, module.p, sf.exponents[i])))
            else:
                coords.append(x)
        return tuple(coords)
