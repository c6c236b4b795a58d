import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import config
from services.adams_service import AdamsService, BMorphism, BObject
from services.hom_service import HomSystem
from services.linalg_service import (
    FPModule, LinalgService, ModuleMap, PLocalMatrix, column_basis, lattice_kernel, solve,
)
from utils.errors import InternalError, PreconditionError

logger = logging.getLogger(__name__)


class OperatorMatrix:
    """Matrix over Z_(p)[t, t^-1], stored as {degree: coefficient matrix}"""

    def __init__(self, p: int, rows: int, cols: int, coefficients: Dict[int, PLocalMatrix]):
        self.p = p
        self.rows = rows
        self.cols = cols
        self.coefficients = {k: m for k, m in coefficients.items() if not m.is_zero()}
        for m in self.coefficients.values():
            if (m.rows, m.cols) != (rows, cols):
                raise InternalError("Operator coefficient has the wrong shape")

    @classmethod
    def constant(cls, m: PLocalMatrix) -> "OperatorMatrix":
        return cls(m.p, m.rows, m.cols, {0: m})

    @classmethod
    def t_minus(cls, psi: PLocalMatrix) -> "OperatorMatrix":
        """t·I − psi"""
        return cls(psi.p, psi.rows, psi.cols, {0: -psi, 1: PLocalMatrix.identity(psi.p, psi.rows)})

    @classmethod
    def zeros(cls, p: int, rows: int, cols: int) -> "OperatorMatrix":
        return cls(p, rows, cols, {})

    @staticmethod
    def hstack(p: int, rows: int, *blocks: "OperatorMatrix") -> "OperatorMatrix":
        degrees = sorted(set().union(*(b.coefficients for b in blocks)))
        return OperatorMatrix(p, rows, sum(b.cols for b in blocks), {
            k: PLocalMatrix.hstack(p, rows, *(b.coefficient(k) for b in blocks)) for k in degrees
        })

    @staticmethod
    def vstack(p: int, cols: int, *blocks: "OperatorMatrix") -> "OperatorMatrix":
        degrees = sorted(set().union(*(b.coefficients for b in blocks)))
        return OperatorMatrix(p, sum(b.rows for b in blocks), cols, {
            k: PLocalMatrix.vstack(p, cols, *(b.coefficient(k) for b in blocks)) for k in degrees
        })

    def coefficient(self, k: int) -> PLocalMatrix:
        return self.coefficients.get(k, PLocalMatrix.zeros(self.p, self.rows, self.cols))

    @property
    def degree_range(self) -> Tuple[int, int]:
        if not self.coefficients:
            return 0, 0
        return min(self.coefficients), max(self.coefficients)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if self.cols != other.rows:
            raise InternalError("Operator matrices are not composable")
        out: Dict[int, PLocalMatrix] = {}
        for a, x in self.coefficients.items():
            for b, y in other.coefficients.items():
                term = x @ y
                out[a + b] = out[a + b] + term if a + b in out else term
        return OperatorMatrix(self.p, self.rows, other.cols, out)

    def is_zero(self) -> bool:
        return not self.coefficients

    def evaluate(self, psi: PLocalMatrix, augmentation: PLocalMatrix) -> PLocalMatrix:
        """sum_k psi^k · E · D_k for an augmentation E into a module with operator psi"""
        result = PLocalMatrix.zeros(self.p, augmentation.rows, self.cols)
        power = PLocalMatrix.identity(self.p, psi.rows)
        lo, hi = self.degree_range
        if lo < 0:
            raise InternalError("Negative operator degrees are not evaluated")
        for k in range(hi + 1):
            if k in self.coefficients:
                result = result + power @ augmentation @ self.coefficients[k]
            power = psi @ power
        return result

    def unroll(self, lo: int, hi: int, target_lo: int, target_hi: int) -> PLocalMatrix:
        """Z_(p)-matrix from source degrees [lo, hi] to target degrees [target_lo, target_hi]"""
        width = hi - lo + 1
        height = target_hi - target_lo + 1
        data = PLocalMatrix.zeros(self.p, height * self.rows, width * self.cols).to_lists()
        for deg in range(lo, hi + 1):
            for k, m in self.coefficients.items():
                t = deg + k
                if not target_lo <= t <= target_hi:
                    raise InternalError(f"Unrolled term leaves the target window at degree {t}")
                r0 = (t - target_lo) * self.rows
                c0 = (deg - lo) * self.cols
                for i in range(self.rows):
                    for j in range(self.cols):
                        x = m.entry(i, j)
                        if x:
                            data[r0 + i][c0 + j] += x
        return PLocalMatrix(self.p, height * self.rows, width * self.cols, data)

    def to_dict(self) -> Dict[str, List[List[str]]]:
        return {str(k): m.to_strings() for k, m in sorted(self.coefficients.items())}


@dataclass(frozen=True, eq=False)
class FreeResolution:
    """0 → Q2 → Q1 → Q0 → target over the operator ring; zero stages are dropped"""
    target: BObject
    presentation: PLocalMatrix
    psi0: PLocalMatrix
    psi1: PLocalMatrix
    ranks: Tuple[int, ...]
    differentials: Tuple[OperatorMatrix, ...]

    @property
    def length(self) -> int:
        return max(len(self.ranks) - 1, 0)


@dataclass(frozen=True, eq=False)
class HomComplex:
    """Hom over the operator ring from a resolution into a BObject"""
    resolution: FreeResolution
    target: BObject
    cochains: Tuple[FPModule, FPModule, FPModule]
    coboundaries: Tuple[PLocalMatrix, PLocalMatrix]


@dataclass(frozen=True, eq=False)
class ExtGroup:
    s: int
    source: BObject
    target: BObject
    module: FPModule
    basis: PLocalMatrix
    complex: HomComplex


@dataclass(frozen=True, eq=False)
class ShortExactSequence:
    """0 → sub →(inclusion) middle →(projection) quotient → 0"""
    sub: BObject
    middle: BObject
    quotient: BObject
    inclusion: PLocalMatrix
    projection: PLocalMatrix


@dataclass(frozen=True, eq=False)
class ExtClass:
    group: ExtGroup
    cocycle: PLocalMatrix
    realization: Optional[ShortExactSequence] = None


@dataclass(frozen=True, eq=False)
class LiftingResult:
    obstruction: ExtClass
    liftable: bool
    witness: Optional[BMorphism]


@dataclass(frozen=True, eq=False)
class SyzygySequence:
    """0 → L → K → C → 0 with K free over the operator ring and L resolved by sub_differentials"""
    sub_ranks: Tuple[int, ...]
    sub_differentials: Tuple[OperatorMatrix, ...]
    middle_rank: int
    inclusion: OperatorMatrix
    quotient: Optional[BObject]
    middle_differentials: Tuple[OperatorMatrix, ...] = ()


class HomalgService:
    def __init__(self):
        self.linalg = LinalgService()
        self.adams = AdamsService()

    # resolutions

    def build_resolution(self, m: BObject, presentation: Optional[PLocalMatrix] = None) -> FreeResolution:
        """Cone-type resolution built from an injective presentation of m.

        presentation, when given, must be an injective matrix spanning the relation lattice.
        """
        p = m.context.p
        n0 = m.ngens
        if n0 == 0:
            empty = PLocalMatrix.zeros(p, 0, 0)
            return FreeResolution(m, empty, empty, empty, (), ())
        r = presentation if presentation is not None else column_basis(m.relations)
        if presentation is not None:
            if lattice_kernel(r).cols or not (m.module.contains_columns(r)
                                              and FPModule(r).contains_columns(m.relations)):
                raise PreconditionError("Presentation is not an injective basis of the relations",
                                        clause="resolution.presentation")
        n1 = r.cols
        psi0 = m.psi
        psi1 = solve(r, psi0 @ r)
        if psi1 is None:
            raise InternalError("psi does not lift to the relation lattice")
        d1 = OperatorMatrix.hstack(p, n0, OperatorMatrix.constant(r), OperatorMatrix.t_minus(psi0))
        if n1 == 0:
            res = FreeResolution(m, r, psi0, psi1, (n0, n0), (d1,))
        else:
            d2 = OperatorMatrix.vstack(p, n1, OperatorMatrix.t_minus(psi1), OperatorMatrix.constant(-r))
            res = FreeResolution(m, r, psi0, psi1, (n0, n1 + n0, n1), (d1, d2))
        if len(res.ranks) > 3:
            raise InternalError("Resolution produced a third syzygy stage")
        logger.debug(f"Resolution of {m}: ranks {res.ranks}")
        return res

    def certify_complex(self, ranks: Sequence[int], differentials: Sequence[OperatorMatrix],
                        target: Optional[BObject], degree: int = config.UNROLL_DEGREE) -> bool:
        """Exactness of Q_L → … → Q_0 → target, checked on t-degrees 0..degree"""
        if not ranks:
            return target is None or target.is_zero()
        p = differentials[0].p if differentials else (target.context.p if target else config.DEFAULT_PRIME)
        for a, b in zip(differentials, differentials[1:]):
            if not (a @ b).is_zero():
                logger.debug("Consecutive differentials do not compose to zero")
                return False
        if target is not None:
            e = PLocalMatrix.identity(p, ranks[0])
            free0 = FPModule.free(p, ranks[0])
            if not self.linalg.is_surjective(ModuleMap(free0, target.module, e, check=False)):
                return False
            if differentials and not target.module.contains_columns(differentials[0].evaluate(target.psi, e)):
                return False
            blocks, power = [], e
            for _ in range(degree + 1):
                blocks.append(power)
                power = target.psi @ power
            unrolled = PLocalMatrix.hstack(p, target.ngens, *blocks)
            source = FPModule.free(p, ranks[0] * (degree + 1))
            _, inclusion = self.linalg.kernel(ModuleMap(source, target.module, unrolled, check=False))
            if not self._inside_image(inclusion.matrix, differentials[0] if differentials else None, degree):
                return False
        for s, d in enumerate(differentials, start=1):
            kernel = lattice_kernel(d.unroll(0, degree, 0, degree + 1))
            nxt = differentials[s] if s < len(differentials) else None
            if not self._inside_image(kernel, nxt, degree):
                return False
        return True

    def _inside_image(self, vectors: PLocalMatrix, incoming: Optional[OperatorMatrix], degree: int) -> bool:
        if vectors.cols == 0:
            return True
        if incoming is None:
            return vectors.is_zero()
        if degree == 0:
            return vectors.is_zero()
        image = incoming.unroll(0, degree - 1, 0, degree)
        return solve(image, vectors) is not None

    def certify_resolution(self, res: FreeResolution, degree: int = config.UNROLL_DEGREE) -> bool:
        ok = self.certify_complex(res.ranks, res.differentials, res.target, degree)
        if not ok:
            raise InternalError(f"Resolution of {res.target} failed its exactness certificate")
        return ok

    # Hom complex and Ext

    def hom_complex(self, res: FreeResolution, n: BObject) -> HomComplex:
        p = n.context.p
        r = res.presentation
        n0, n1 = r.rows, r.cols
        k = n.ngens
        ident = PLocalMatrix.identity(p, k)
        delta0 = PLocalMatrix.vstack(
            p, k * n0,
            r.transpose().kron(ident),
            PLocalMatrix.identity(p, n0).kron(n.psi) - res.psi0.transpose().kron(ident),
        )
        delta1 = PLocalMatrix.hstack(
            p, k * n1,
            PLocalMatrix.identity(p, n1).kron(n.psi) - res.psi1.transpose().kron(ident),
            -r.transpose().kron(ident),
        )
        c0 = n.module.power(n0)
        c1 = FPModule.direct_sum(p, n.module.power(n1), n.module.power(n0))
        c2 = n.module.power(n1)
        return HomComplex(res, n, (c0, c1, c2), (delta0, delta1))

    def ext(self, m: BObject, n: BObject, s: int, presentation: Optional[PLocalMatrix] = None) -> ExtGroup:
        if not 0 <= s <= config.MAX_EXT_DEGREE:
            raise PreconditionError(f"Ext^{s} is not computed; only s = 0..{config.MAX_EXT_DEGREE}", clause="ext.degree")
        cx = self.hom_complex(self.build_resolution(m, presentation), n)
        c0, c1, c2 = cx.cochains
        delta0, delta1 = cx.coboundaries
        zero = FPModule.zero(n.context.p)
        if s == 0:
            f, g = self.linalg.zero_map(zero, c0), ModuleMap(c0, c1, delta0, check=False)
        elif s == 1:
            f, g = ModuleMap(c0, c1, delta0, check=False), ModuleMap(c1, c2, delta1, check=False)
        else:
            f, g = ModuleMap(c1, c2, delta1, check=False), self.linalg.zero_map(c2, zero)
        sq = self.linalg.homology(f, g)
        logger.debug(f"Ext^{s}({m}, {n}) = {sq.module}")
        return ExtGroup(s, m, n, sq.module, sq.basis, cx)

    def ext_or_zero(self, m: BObject, n: BObject, s: int) -> FPModule:
        if s > config.MAX_EXT_DEGREE:
            return FPModule.zero(m.context.p)
        return self.ext(m, n, s).module

    # classes

    def cocycle_matrices(self, group: ExtGroup, vector: PLocalMatrix) -> Tuple[PLocalMatrix, PLocalMatrix]:
        r = group.complex.resolution.presentation
        k = group.target.ngens
        values = vector.column(0)
        split = k * r.cols
        g1 = PLocalMatrix.unvec(group.target.context.p, values[:split], k, r.cols)
        g0 = PLocalMatrix.unvec(group.target.context.p, values[split:], k, r.rows)
        return g1, g0

    def cocycle_vector(self, group: ExtGroup, g1: PLocalMatrix, g0: PLocalMatrix) -> PLocalMatrix:
        return PLocalMatrix.vstack(group.target.context.p, 1, g1.vec(), g0.vec())

    def make_class(self, group: ExtGroup, cocycle: PLocalMatrix) -> ExtClass:
        if group.s != 1:
            raise PreconditionError("Extension classes live in Ext^1", clause="ext.degree")
        c2 = group.complex.cochains[2]
        if not c2.contains_columns(group.complex.coboundaries[1] @ cocycle):
            raise PreconditionError("Vector is not a cocycle", clause="ext.cocycle")
        return ExtClass(group, cocycle)

    def class_from_generator(self, group: ExtGroup, coefficients: Sequence[int]) -> ExtClass:
        """The class sum_i c_i · (i-th generator of the group)"""
        p = group.target.context.p
        coeffs = PLocalMatrix.column_vector(p, [Fraction(c) for c in coefficients])
        return ExtClass(group, group.basis @ coeffs)

    def zero_class(self, group: ExtGroup) -> ExtClass:
        return ExtClass(group, PLocalMatrix.zeros(group.target.context.p, group.complex.cochains[1].ngens, 1))

    def _coordinates(self, cls: ExtClass) -> PLocalMatrix:
        coords = solve(cls.group.basis, cls.cocycle)
        if coords is None:
            raise InternalError("Cocycle is outside the cocycle lattice")
        return coords

    def class_coordinates(self, cls: ExtClass) -> Tuple[Fraction, ...]:
        return self.linalg.class_coordinates(cls.group.module, self._coordinates(cls))

    def is_zero_class(self, cls: ExtClass) -> bool:
        return cls.group.module.contains_columns(self._coordinates(cls))

    def classes_equal(self, a: ExtClass, b: ExtClass) -> bool:
        return self.is_zero_class(self.add_classes(a, self.negate_class(b)))

    def add_classes(self, a: ExtClass, b: ExtClass) -> ExtClass:
        if a.cocycle.rows != b.cocycle.rows:
            raise PreconditionError("Classes live in different Ext groups", clause="ext.shape")
        return ExtClass(a.group, a.cocycle + b.cocycle)

    def negate_class(self, a: ExtClass) -> ExtClass:
        return ExtClass(a.group, -a.cocycle)

    # realizations

    def realize(self, cls: ExtClass) -> ShortExactSequence:
        if cls.realization is not None:
            return cls.realization
        group = cls.group
        n, m = group.target, group.source
        p = n.context.p
        res = group.complex.resolution
        r = res.presentation
        g1, g0 = self.cocycle_matrices(group, cls.cocycle)
        k, n0 = n.ngens, m.ngens
        relations = PLocalMatrix.blocks(p, [
            [n.relations, -g1],
            [PLocalMatrix.zeros(p, n0, n.relations.cols), r],
        ])
        psi = PLocalMatrix.blocks(p, [
            [n.psi, g0],
            [PLocalMatrix.zeros(p, n0, k), m.psi],
        ])
        middle = BObject(n.context, FPModule(relations), psi, n.weights | m.weights)
        inclusion = PLocalMatrix.vstack(p, k, PLocalMatrix.identity(p, k), PLocalMatrix.zeros(p, n0, k))
        projection = PLocalMatrix.hstack(p, n0, PLocalMatrix.zeros(p, n0, k), PLocalMatrix.identity(p, n0))
        return ShortExactSequence(n, middle, m, inclusion, projection)

    def check_ses(self, ses: ShortExactSequence) -> None:
        i = self.adams.make_bmorphism(ses.sub, ses.middle, ses.inclusion)
        q = self.adams.make_bmorphism(ses.middle, ses.quotient, ses.projection)
        inc = ModuleMap(ses.sub.module, ses.middle.module, i.matrix, check=False)
        proj = ModuleMap(ses.middle.module, ses.quotient.module, q.matrix, check=False)
        if not ses.quotient.module.contains_columns(q.matrix @ i.matrix):
            raise PreconditionError("projection ∘ inclusion is not zero", clause="ses.composite")
        if not self.linalg.is_injective(inc):
            raise PreconditionError("inclusion is not injective", clause="ses.injective")
        if not self.linalg.is_surjective(proj):
            raise PreconditionError("projection is not surjective", clause="ses.surjective")
        if not self.linalg.is_exact(inc, proj):
            raise PreconditionError("sequence is not exact in the middle", clause="ses.exact")

    def ext_class_of(self, ses: ShortExactSequence) -> ExtClass:
        """Connecting cocycle of an exact sequence against the resolution of its quotient"""
        self.check_ses(ses)
        group = self.ext(ses.quotient, ses.sub, 1)
        p = ses.sub.context.p
        r = group.complex.resolution.presentation
        e, c = ses.middle, ses.quotient
        lifts = solve(PLocalMatrix.hstack(p, c.ngens, ses.projection, c.relations),
                      PLocalMatrix.identity(p, c.ngens))
        if lifts is None:
            raise PreconditionError("projection is not surjective", clause="ses.surjective")
        s = lifts.row_slice(0, e.ngens)
        into_sub = PLocalMatrix.hstack(p, e.ngens, ses.inclusion, e.relations)
        a = ses.sub.ngens
        g1 = solve(into_sub, s @ r)
        g0 = solve(into_sub, e.psi @ s - s @ c.psi)
        if g1 is None or g0 is None:
            raise InternalError("Lifted relations do not come from the sub-object")
        cocycle = self.cocycle_vector(group, g1.row_slice(0, a), g0.row_slice(0, a))
        return ExtClass(group, cocycle, ses)

    # functoriality

    def pushforward(self, f: BMorphism, cls: ExtClass) -> ExtClass:
        if f.source.ngens != cls.group.target.ngens:
            raise PreconditionError("pushforward: map source differs from the class target", clause="ext.shape")
        group = self.ext(cls.group.source, f.target, 1)
        g1, g0 = self.cocycle_matrices(cls.group, cls.cocycle)
        return ExtClass(group, self.cocycle_vector(group, f.matrix @ g1, f.matrix @ g0))

    def pullback(self, h: BMorphism, cls: ExtClass) -> ExtClass:
        if h.target.ngens != cls.group.source.ngens:
            raise PreconditionError("pullback: map target differs from the class source", clause="ext.shape")
        group = self.ext(h.source, cls.group.target, 1)
        a, b = self._lift_to_relations(cls.group, group, h.matrix)
        g1, g0 = self.cocycle_matrices(cls.group, cls.cocycle)
        return ExtClass(group, self.cocycle_vector(group, g1 @ a, g1 @ b + g0 @ h.matrix))

    def _lift_to_relations(self, old: ExtGroup, new: ExtGroup,
                           h: PLocalMatrix) -> Tuple[PLocalMatrix, PLocalMatrix]:
        """A, B with R A = H R' and R B = psi H − H psi' (the degree-one part of the chain lift)"""
        r = old.complex.resolution.presentation
        new_res = new.complex.resolution
        a = solve(r, h @ new_res.presentation)
        b = solve(r, old.complex.resolution.psi0 @ h - h @ new_res.psi0)
        if a is None or b is None:
            raise PreconditionError("Map is not a well-defined equivariant map", clause="morphism.equivariant")
        return a, b

    def pushout_sequence(self, f: BMorphism, ses: ShortExactSequence) -> ShortExactSequence:
        p = f.source.context.p
        n2, e = f.target, ses.middle
        relations = PLocalMatrix.blocks(p, [
            [n2.relations, PLocalMatrix.zeros(p, n2.ngens, e.relations.cols), f.matrix],
            [PLocalMatrix.zeros(p, e.ngens, n2.relations.cols), e.relations, -ses.inclusion],
        ])
        middle = BObject(e.context, FPModule(relations), PLocalMatrix.block_diag(p, n2.psi, e.psi),
                         n2.weights | e.weights)
        inclusion = PLocalMatrix.vstack(p, n2.ngens, PLocalMatrix.identity(p, n2.ngens),
                                        PLocalMatrix.zeros(p, e.ngens, n2.ngens))
        projection = PLocalMatrix.hstack(p, ses.quotient.ngens,
                                         PLocalMatrix.zeros(p, ses.quotient.ngens, n2.ngens), ses.projection)
        return ShortExactSequence(n2, middle, ses.quotient, inclusion, projection)

    def pullback_sequence(self, h: BMorphism, ses: ShortExactSequence) -> ShortExactSequence:
        p = h.source.context.p
        e, m2 = ses.middle, h.source
        total = self.adams.direct_sum(e, m2)
        fibre = ModuleMap(total.module, ses.quotient.module,
                          PLocalMatrix.hstack(p, ses.quotient.ngens, ses.projection, -h.matrix), check=False)
        module, inclusion = self.linalg.kernel(fibre)
        k = inclusion.matrix
        psi = self.linalg.induced_endomorphism(k, total.psi)
        middle = BObject(e.context, module, psi, total.weights)
        sub_into = solve(k, PLocalMatrix.vstack(p, ses.sub.ngens, ses.inclusion,
                                                PLocalMatrix.zeros(p, m2.ngens, ses.sub.ngens)))
        if sub_into is None:
            raise InternalError("Sub-object does not lie in the fibre product")
        projection = PLocalMatrix.hstack(p, m2.ngens, PLocalMatrix.zeros(p, m2.ngens, e.ngens),
                                         PLocalMatrix.identity(p, m2.ngens)) @ k
        return ShortExactSequence(ses.sub, middle, m2, sub_into, projection)

    # lifting

    def lifting_obstruction(self, f_b: BMorphism, f_g: BMorphism, s: ExtClass, s_tilde: ExtClass) -> LiftingResult:
        """Obstruction (f_B)_*(S) − (f_G)^*(S̃) and, when it vanishes, a middle map"""
        same = self.adams.same_presentation
        if not (same(f_b.source, s.group.target) and same(f_g.source, s.group.source)
                and same(f_b.target, s_tilde.group.target) and same(f_g.target, s_tilde.group.source)):
            raise PreconditionError("Ladder maps do not match the extension classes", clause="ladder.shape")
        obstruction = self.add_classes(self.pushforward(f_b, s), self.negate_class(self.pullback(f_g, s_tilde)))
        liftable = self.is_zero_class(obstruction)
        top, bottom = self.realize(s), self.realize(s_tilde)
        p = f_b.source.context.p
        system = HomSystem(p)
        system.add_variable("f_C", top.middle, bottom.middle)
        system.add_equation(bottom.middle.module, top.sub.ngens,
                            [(PLocalMatrix.identity(p, bottom.middle.ngens), 0, top.inclusion)])
        system.add_equation(bottom.quotient.module, top.middle.ngens,
                            [(bottom.projection, 0, PLocalMatrix.identity(p, top.middle.ngens))])
        values = system.solve_affine([bottom.inclusion @ f_b.matrix, f_g.matrix @ top.projection])
        if liftable != (values is not None):
            raise InternalError("Obstruction class disagrees with the solvability of the ladder")
        witness = BMorphism(top.middle, bottom.middle, values["f_C"]) if values else None
        logger.info(f"Lifting obstruction computed: liftable={liftable}")
        return LiftingResult(obstruction, liftable, witness)

    # dimension shifting

    def syzygy_sequence(self, res: FreeResolution) -> SyzygySequence:
        """0 → im(d1) → Q0 → target → 0 with the syzygy resolved by the tail"""
        p = res.target.context.p
        if not res.ranks:
            return SyzygySequence((), (), 0, OperatorMatrix.zeros(p, 0, 0), res.target)
        return SyzygySequence(res.ranks[1:], res.differentials[1:], res.ranks[0], res.differentials[0], res.target)

    def free_sequence(self, p: int, rank: int) -> SyzygySequence:
        """0 → 0 → Λ^rank → Λ^rank → 0, the case of a projective quotient"""
        return SyzygySequence((), (), rank, OperatorMatrix.zeros(p, rank, 0), None)

    def dimension_shift_check(self, seq: SyzygySequence, k: int) -> bool:
        """Certify the resolution of C spliced from K and the resolution of L; its length is len(L) + 1"""
        if seq.middle_differentials:
            raise PreconditionError("Middle term is not projective", clause="syzygy.projective")
        if seq.middle_rank == 0:
            return True
        ranks = (seq.middle_rank,) + tuple(seq.sub_ranks)
        differentials = ((seq.inclusion,) if seq.sub_ranks else ()) + tuple(seq.sub_differentials)
        spliced_ok = self.certify_complex(ranks, differentials, seq.quotient)
        logger.debug(f"Dimension shift: len(L)={len(seq.sub_ranks) - 1}, len(C)={len(ranks) - 1}, k={k}, "
                     f"spliced={spliced_ok}")
        return spliced_ok
