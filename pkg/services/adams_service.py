import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Tuple

import config
from services.hom_service import HomSystem
from services.linalg_service import FPModule, LinalgService, ModuleMap, PLocalMatrix, rank
from utils.errors import InternalError, PreconditionError
from utils.number_utils import NumberUtils

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Context:
    """The prime p and the Adams parameter g shared by every object"""
    p: int = config.DEFAULT_PRIME
    g: int = config.DEFAULT_GENERATOR

    def __post_init__(self):
        NumberUtils().check_context(self.p, self.g)

    @property
    def period(self) -> int:
        return 2 * self.p - 2

    def twist_unit(self, j: int) -> Fraction:
        return NumberUtils().twist_unit(self.g, self.p, j)


@dataclass(frozen=True, eq=False)
class BObject:
    """A finitely presented Z_(p)-module with the invertible operator psi = ψ^g"""
    context: Context
    module: FPModule
    psi: PLocalMatrix
    weights: FrozenSet[int] = field(default_factory=frozenset)

    def __post_init__(self):
        # well-definedness of psi is checked eagerly, the remaining invariants by check_bobject
        ModuleMap(self.module, self.module, self.psi)

    @property
    def ngens(self) -> int:
        return self.module.ngens

    @property
    def relations(self) -> PLocalMatrix:
        return self.module.relations

    def is_zero(self) -> bool:
        return self.module.is_zero()

    def __str__(self) -> str:
        return str(self.module)


@dataclass(frozen=True, eq=False)
class AObject:
    """Internal-degree components 0..2p-3; the rest follow from M_{n+2p-2} = twist(1)(M_n)"""
    context: Context
    components: Tuple[BObject, ...]

    def __post_init__(self):
        if len(self.components) != self.context.period:
            raise PreconditionError(
                f"AObject needs {self.context.period} components, got {len(self.components)}",
                clause="aobject.components",
            )

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def support(self) -> FrozenSet[int]:
        return frozenset(i for i, c in enumerate(self.components) if not c.is_zero())


@dataclass(frozen=True, eq=False)
class BMorphism:
    source: BObject
    target: BObject
    matrix: PLocalMatrix


@dataclass(frozen=True, eq=False)
class AMorphism:
    source: AObject
    target: AObject
    components: Tuple[BMorphism, ...]


class AdamsService:
    def __init__(self):
        self.linalg = LinalgService()

    # construction

    def make_bobject(self, context: Context, relations: PLocalMatrix, psi: PLocalMatrix,
                     weights: Iterable[int] = ()) -> BObject:
        return BObject(context, FPModule(relations), psi, frozenset(weights))

    def zero_b(self, context: Context) -> BObject:
        return BObject(context, FPModule.zero(context.p), PLocalMatrix.zeros(context.p, 0, 0))

    def free_b(self, context: Context, n: int, weight: int) -> BObject:
        """Z_(p)^n of pure weight with psi = g^{weight(p-1)}"""
        p = context.p
        return BObject(context, FPModule.free(p, n),
                       PLocalMatrix.scalar(p, n, context.twist_unit(weight)), frozenset({weight}))

    def cyclic_b(self, context: Context, exponent: int, unit: int = 1) -> BObject:
        """Z/p^exponent with psi acting by a unit scalar"""
        p = context.p
        return BObject(context, FPModule.from_invariants(p, 0, [exponent]),
                       PLocalMatrix.scalar(p, 1, Fraction(unit)))

    def zero_a(self, context: Context) -> AObject:
        return AObject(context, tuple(self.zero_b(context) for _ in range(context.period)))

    def make_bmorphism(self, source: BObject, target: BObject, matrix: PLocalMatrix) -> BMorphism:
        ModuleMap(source.module, target.module, matrix)
        defect = matrix @ source.psi - target.psi @ matrix
        if not target.module.contains_columns(defect):
            raise PreconditionError("Map does not commute with psi", clause="morphism.equivariant")
        return BMorphism(source, target, matrix)

    def make_amorphism(self, source: AObject, target: AObject, matrices: Iterable[PLocalMatrix]) -> AMorphism:
        comps = tuple(
            self.make_bmorphism(s, t, m) for s, t, m in zip(source.components, target.components, matrices)
        )
        return AMorphism(source, target, comps)

    # invariants

    def check_bobject(self, m: BObject) -> None:
        """Raise PreconditionError naming the first violated invariant"""
        psi_map = ModuleMap(m.module, m.module, m.psi)
        if not self.linalg.is_isomorphism(psi_map):
            raise PreconditionError("psi is not invertible on the module", clause="bobject.psi_invertible")
        if not self.satisfies_weight_condition(m):
            raise PreconditionError(
                f"Rational operator is not annihilated by the declared weights {sorted(m.weights)}",
                clause="bobject.weights",
            )

    def satisfies_weight_condition(self, m: BObject) -> bool:
        """prod_{j in weights} (psi - g^{j(p-1)}) vanishes on module ⊗ Q"""
        if not m.weights:
            return m.module.is_finite()
        p = m.context.p
        n = m.ngens
        product = PLocalMatrix.identity(p, n)
        for j in sorted(m.weights):
            product = (m.psi - PLocalMatrix.scalar(p, n, m.context.twist_unit(j))) @ product
        combined = PLocalMatrix.hstack(p, n, m.relations, product)
        return rank(combined) == rank(m.relations)

    def weight_profile(self, m: BObject) -> Dict[int, int]:
        """Rational eigenspace dimension for each declared weight"""
        p = m.context.p
        n = m.ngens
        profile = {}
        for j in sorted(m.weights):
            shifted = m.psi - PLocalMatrix.scalar(p, n, m.context.twist_unit(j))
            profile[j] = n - rank(PLocalMatrix.hstack(p, n, m.relations, shifted))
        return profile

    def same_presentation(self, m: BObject, n: BObject) -> bool:
        """Same generators, same relation lattice and same operator matrix"""
        if m.ngens != n.ngens or m.psi != n.psi:
            return False
        return m.module.contains_columns(n.relations) and n.module.contains_columns(m.relations)

    def occupied_weights(self, m: BObject) -> Dict[int, int]:
        """weight_profile without the declared weights whose eigenspace is empty"""
        return {j: k for j, k in self.weight_profile(m).items() if k}

    def is_isomorphic_shape(self, m: BObject, n: BObject) -> bool:
        """Isomorphic underlying modules with equal rational weight profiles"""
        if not self.linalg.iso_test(m.module, n.module):
            return False
        return self.occupied_weights(m) == self.occupied_weights(n)

    # functors

    def twist(self, j: int, m: BObject) -> BObject:
        if j == 0:
            return m
        unit = m.context.twist_unit(j)
        return BObject(m.context, m.module, m.psi.scale(unit), frozenset(w + j for w in m.weights))

    def twist_a(self, j: int, a: AObject) -> AObject:
        return AObject(a.context, tuple(self.twist(j, c) for c in a.components))

    def direct_sum(self, *objects: BObject) -> BObject:
        context = objects[0].context
        p = context.p
        return BObject(
            context,
            FPModule.direct_sum(p, *(o.module for o in objects)),
            PLocalMatrix.block_diag(p, *(o.psi for o in objects)),
            frozenset().union(*(o.weights for o in objects)),
        )

    def component_at(self, a: AObject, n: int) -> BObject:
        """M_n for any integer n, using M_{r+qP} = twist(q)(M_r)"""
        q, r = divmod(n, a.context.period)
        return self.twist(q, a.components[r])

    def split_embed(self, i: int, m: BObject) -> AObject:
        period = m.context.period
        q, r = divmod(i, period)
        comps = [self.zero_b(m.context) for _ in range(period)]
        comps[r] = self.twist(-q, m)
        return AObject(m.context, tuple(comps))

    def split_project(self, a: AObject) -> List[BObject]:
        return list(a.components)

    def shift_internal(self, i: int, a: AObject) -> AObject:
        """M[i]_n = M_{n-i}"""
        return AObject(a.context, tuple(self.component_at(a, n - i) for n in range(a.context.period)))

    def rotate(self, a: AObject, times: int = 1) -> AObject:
        """The self-equivalence T^{p-1} of C¹(𝒜): slot j receives twist(1) of slot j-1"""
        period = a.context.period
        step = 1 if times >= 0 else -1
        result = a
        for _ in range(abs(times)):
            result = AObject(a.context, tuple(
                self.twist(step, result.components[(j - step) % period]) for j in range(period)
            ))
        return result

    # Hom

    def hom_system(self, m: BObject, n: BObject) -> HomSystem:
        system = HomSystem(m.context.p)
        system.add_variable("f", m, n)
        return system

    def hom_b(self, m: BObject, n: BObject) -> FPModule:
        module, _ = self.hom_system(m, n).solution_space()
        logger.debug(f"hom_B({m}, {n}) = {module}")
        return module

    def hom_a(self, a: AObject, b: AObject) -> FPModule:
        parts = [self.hom_b(x, y) for x, y in zip(a.components, b.components)]
        return FPModule.direct_sum(a.context.p, *parts)

    def identity_morphism(self, m: BObject) -> BMorphism:
        return BMorphism(m, m, PLocalMatrix.identity(m.context.p, m.ngens))

    def compose(self, g: BMorphism, f: BMorphism) -> BMorphism:
        if f.target.ngens != g.source.ngens:
            raise InternalError("Morphisms are not composable")
        return BMorphism(f.source, g.target, g.matrix @ f.matrix)
