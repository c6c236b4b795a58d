import logging
from dataclasses import dataclass
from typing import List, Tuple

from services.adams_service import AObject, AdamsService, BObject, Context
from services.complex_service import FLAVOR_B, ComplexService, TwistedComplex
from services.hom_service import HomSystem
from services.homalg_service import ExtClass, HomalgService, ShortExactSequence
from services.linalg_service import FPModule, LinalgService, ModuleMap, PLocalMatrix, solve
from utils.errors import InternalError, PreconditionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DiagramData:
    """Per index i mod 2p-2: G_i, B_i, a surjection pi_i: G_i → B_i and a class in Ext¹(G_{i+1}, B_i).

    The class for i = 2p-3 has quotient twist(2p-2)(G_0).
    """
    context: Context
    g_objects: Tuple[BObject, ...]
    b_objects: Tuple[BObject, ...]
    pi: Tuple[PLocalMatrix, ...]
    extensions: Tuple[ExtClass, ...]

    def realization(self, i: int) -> ShortExactSequence:
        ses = self.extensions[i].realization
        if ses is None:
            raise PreconditionError(f"Extension {i} carries no realization", clause="diagram.realization")
        return ses


@dataclass(frozen=True, eq=False)
class HocolimComparison:
    degree: int
    kernel_part: BObject
    homology_part: BObject
    comparison: ModuleMap
    isomorphic: bool


@dataclass(frozen=True, eq=False)
class HocolimReport:
    comparisons: Tuple[HocolimComparison, ...]
    kernel_object: AObject
    homology_object: AObject

    @property
    def certified(self) -> bool:
        return all(c.isomorphic for c in self.comparisons)


@dataclass(frozen=True, eq=False)
class HomAssembly:
    n_module: FPModule
    kernel_part: FPModule
    n_prime: FPModule
    ext_target: FPModule
    kernel_map: ModuleMap
    restriction_map: ModuleMap
    obstruction_map: ModuleMap
    d_map: ModuleMap
    m_module: FPModule
    chain_maps: FPModule
    kernel_injective: bool
    exact_at_n: bool
    exact_at_n_prime: bool

    @property
    def m_matches(self) -> bool:
        return self.m_module.invariants == self.chain_maps.invariants


class QService:
    def __init__(self):
        self.linalg = LinalgService()
        self.adams = AdamsService()
        self.homalg = HomalgService()
        self.complexes = ComplexService()

    def g_next(self, d: DiagramData, i: int) -> BObject:
        """G_{i+1}, with G_{2p-2} = twist(2p-2)(G_0)"""
        period = d.context.period
        if i + 1 < period:
            return d.g_objects[i + 1]
        return self.adams.twist(period, d.g_objects[0])

    def validate(self, d: DiagramData) -> None:
        period = d.context.period
        if not (len(d.g_objects) == len(d.b_objects) == len(d.pi) == len(d.extensions) == period):
            raise PreconditionError(f"DiagramData needs {period} entries of each kind", clause="diagram.shape")
        same = self.adams.same_presentation
        for i in range(period):
            g, b = d.g_objects[i], d.b_objects[i]
            pi = self.adams.make_bmorphism(g, b, d.pi[i])
            if not self.linalg.is_surjective(ModuleMap(g.module, b.module, pi.matrix, check=False)):
                raise PreconditionError(f"pi_{i} is not surjective", clause="diagram.pi_surjective")
            ses = d.realization(i)
            self.homalg.check_ses(ses)
            if not same(ses.sub, b):
                raise PreconditionError(f"Realization {i} does not start at B_{i}", clause="diagram.realization")
            if not same(ses.quotient, self.g_next(d, i)):
                raise PreconditionError(f"Realization {i} does not end at G_{i + 1}", clause="diagram.realization")

    # Q-construction

    def q_build(self, d: DiagramData) -> TwistedComplex:
        """Levels C_i, differential ι_{i+1} ∘ π_{i+1} ∘ ρ_i, alpha = id"""
        self.validate(d)
        period = d.context.period
        window, diffs = [], []
        for i in range(period):
            ses = d.realization(i)
            nxt = d.realization((i + 1) % period)
            window.append(ses.middle)
            diffs.append(nxt.inclusion @ d.pi[(i + 1) % period] @ ses.projection)
        alpha = tuple(PLocalMatrix.identity(d.context.p, c.ngens) for c in window)
        complex_ = TwistedComplex(d.context, FLAVOR_B, tuple(window), tuple(diffs), alpha)
        self.complexes.validate(complex_)
        logger.info(f"Built Q-complex with levels {[str(c) for c in window]}")
        return complex_

    def q_inverse(self, c: TwistedComplex) -> DiagramData:
        """Boundaries and cokernels of a C2p2-B complex, normalised to alpha = id first"""
        c, _ = self.complexes.normalize_alpha(c)
        period = c.context.period
        p = c.context.p
        g_objects, b_objects, pis, extensions = [], [], [], []
        for i in range(period):
            b_objects.append(self._boundary_object(c, i - 1))
            g_objects.append(self._cokernel_object(c, i - 1))
            pis.append(PLocalMatrix.identity(p, c.window[(i - 1) % period].ngens))
        for i in range(period):
            level = self.complexes.level(c, i)
            ses = ShortExactSequence(
                sub=b_objects[i],
                middle=level,
                quotient=self._cokernel_object(c, i),
                inclusion=self.complexes.differential(c, i - 1),
                projection=PLocalMatrix.identity(p, level.ngens),
            )
            extensions.append(self.homalg.ext_class_of(ses))
        return DiagramData(c.context, tuple(g_objects), tuple(b_objects), tuple(pis), tuple(extensions))

    def _boundary_object(self, c: TwistedComplex, k: int) -> BObject:
        """im(d^k) presented on the generators of level k"""
        source = self.complexes.level(c, k)
        target = self.complexes.level(c, k + 1)
        module, _ = self.linalg.image(ModuleMap(source.module, target.module,
                                                self.complexes.differential(c, k), check=False))
        return BObject(c.context, module, source.psi, source.weights)

    def _cokernel_object(self, c: TwistedComplex, k: int) -> BObject:
        """C^k / im(d^{k-1}) presented on the generators of level k"""
        here = self.complexes.level(c, k)
        before = self.complexes.level(c, k - 1)
        module, _ = self.linalg.cokernel(ModuleMap(before.module, here.module,
                                                   self.complexes.differential(c, k - 1), check=False))
        return BObject(c.context, module, here.psi, here.weights)

    def round_trip_certificate(self, c: TwistedComplex) -> bool:
        """q_build(q_inverse(c)) reproduces the normalised complex generator for generator"""
        normal, _ = self.complexes.normalize_alpha(c)
        rebuilt = self.q_build(self.q_inverse(c))
        for x, y in zip(rebuilt.window, normal.window):
            if not self.adams.same_presentation(x, y):
                return False
        for k in range(normal.length):
            target = self.complexes.level(normal, k + 1)
            delta = rebuilt.differentials[k] - normal.differentials[k]
            if not target.module.contains_columns(delta):
                return False
        return True

    def image_certificate(self, d: DiagramData) -> bool:
        """im(d^{i-1}) ≅ B_i in every degree, through the inclusion ι_i"""
        c = self.q_build(d)
        for i in range(d.context.period):
            ses = d.realization(i)
            image_module, _ = self.linalg.image(ModuleMap(
                self.complexes.level(c, i - 1).module, ses.middle.module,
                self.complexes.differential(c, i - 1), check=False))
            if not self.linalg.iso_test(image_module, d.b_objects[i].module):
                return False
        return True

    # homotopy colimit comparison

    def hocolim_homology(self, d: DiagramData) -> HocolimReport:
        """ker(pi_i) against H^{i-1}(Q), compared by the map induced from rho_{i-1}"""
        c = self.q_build(d)
        period = d.context.period
        comparisons = []
        for i in range(period):
            g, b = d.g_objects[i], d.b_objects[i]
            kmod, kinc = self.linalg.kernel(ModuleMap(g.module, b.module, d.pi[i], check=False))
            kernel_part = BObject(d.context, kmod, self.linalg.induced_endomorphism(kinc.matrix, g.psi), g.weights)
            homology_part, sq = self.complexes.cohomology_at(c, i - 1)
            ses = d.realization((i - 1) % period)
            rho = ses.projection
            images = solve(kinc.matrix, rho @ sq.basis)
            if images is None:
                raise InternalError(f"rho_{i - 1} does not carry cycles into ker(pi_{i})")
            comparison = ModuleMap(homology_part.module, kernel_part.module, images, check=False)
            equivariant = kernel_part.module.contains_columns(
                images @ homology_part.psi - kernel_part.psi @ images)
            isomorphic = (equivariant and self.linalg.is_isomorphism(comparison)
                          and self.adams.is_isomorphic_shape(kernel_part, homology_part))
            comparisons.append(HocolimComparison(i, kernel_part, homology_part, comparison, isomorphic))
        kernel_object = self._assemble(d.context, [x.kernel_part for x in comparisons], offset=1)
        homology_object = self.complexes.assembled_cohomology(c)
        logger.info(f"Hocolim comparison certified={all(x.isomorphic for x in comparisons)}")
        return HocolimReport(tuple(comparisons), kernel_object, homology_object)

    def _assemble(self, context: Context, parts: List[BObject], offset: int) -> AObject:
        """Slot j holds twist(j)(X^{-j}) where X^k = parts[k + offset], read periodically"""
        period = context.period
        slots = []
        for j in range(period):
            q, r = divmod(-j + offset, period)
            slots.append(self.adams.twist(j + q * period, parts[r]))
        return AObject(context, tuple(slots))

    # Hom bookkeeping

    def assemble_hom(self, d1: DiagramData, d2: DiagramData) -> HomAssembly:
        self.validate(d1)
        self.validate(d2)
        p = d1.context.p
        period = d1.context.period
        rows = [(d1.realization(i), d2.realization(i)) for i in range(period)]

        # N: morphisms of the short exact sequences
        n_sys = HomSystem(p)
        for i, (s, t) in enumerate(rows):
            b = n_sys.add_variable(f"fB{i}", s.sub, t.sub)
            c = n_sys.add_variable(f"fC{i}", s.middle, t.middle)
            g = n_sys.add_variable(f"fG{i}", s.quotient, t.quotient)
            n_sys.add_equation(t.middle.module, s.sub.ngens, [
                (PLocalMatrix.identity(p, t.middle.ngens), c, s.inclusion),
                (-t.inclusion, b, PLocalMatrix.identity(p, s.sub.ngens)),
            ])
            n_sys.add_equation(t.quotient.module, s.middle.ngens, [
                (t.projection, c, PLocalMatrix.identity(p, s.middle.ngens)),
                (-PLocalMatrix.identity(p, t.quotient.ngens), g, s.projection),
            ])
        n_module, n_basis = n_sys.solution_space()
        n_values = [n_sys.unpack(n_basis.column(k)) for k in range(n_basis.cols)]

        # N': pairs of maps on the outer terms
        np_sys = HomSystem(p)
        for i in range(period):
            np_sys.add_variable(f"hB{i}", d1.b_objects[i], d2.b_objects[i])
        for i in range(period):
            np_sys.add_variable(f"hG{i}", d1.g_objects[i], d2.g_objects[i])
        n_prime, np_basis = np_sys.solution_space()

        restriction = []
        for values in n_values:
            image = {f"hB{i}": values[f"fB{i}"] for i in range(period)}
            image.update({f"hG{(i + 1) % period}": values[f"fG{i}"] for i in range(period)})
            restriction.append(np_sys.pack(image))
        restriction_map = self._to_generators(n_module, n_prime, np_basis, restriction)

        # kernel part: maps G_{i+1} → B̃_i pushed through ι̃ and ρ
        k_sys = HomSystem(p)
        for i, (s, t) in enumerate(rows):
            k_sys.add_variable(f"phi{i}", s.quotient, t.sub)
        kernel_part, k_basis = k_sys.solution_space()
        kernel_images = []
        for k in range(k_basis.cols):
            phis = k_sys.unpack(k_basis.column(k))
            values = {}
            for i, (s, t) in enumerate(rows):
                values[f"fB{i}"] = PLocalMatrix.zeros(p, t.sub.ngens, s.sub.ngens)
                values[f"fC{i}"] = t.inclusion @ phis[f"phi{i}"] @ s.projection
                values[f"fG{i}"] = PLocalMatrix.zeros(p, t.quotient.ngens, s.quotient.ngens)
            kernel_images.append(n_sys.pack(values))
        kernel_map = self._to_generators(kernel_part, n_module, n_basis, kernel_images)

        # obstruction map N' → ⊕ Ext¹(G_{i+1}, B̃_i)
        groups = [self.homalg.ext(s.quotient, t.sub, 1) for s, t in rows]
        ext_target = FPModule.direct_sum(p, *(g.module for g in groups))
        columns = []
        for k in range(np_basis.cols):
            h = np_sys.unpack(np_basis.column(k))
            coords = []
            for i, (s, t) in enumerate(rows):
                g_next = h[f"hG{(i + 1) % period}"]
                pushed = self.homalg.pushforward(self.adams.make_bmorphism(s.sub, t.sub, h[f"hB{i}"]),
                                                 d1.extensions[i])
                pulled = self.homalg.pullback(self.adams.make_bmorphism(s.quotient, t.quotient, g_next),
                                              d2.extensions[i])
                diff = self.homalg.add_classes(pushed, self.homalg.negate_class(pulled))
                coord = solve(groups[i].basis, diff.cocycle)
                if coord is None:
                    raise InternalError(f"Obstruction cocycle {i} is not a cocycle")
                coords.append(coord)
            columns.append(PLocalMatrix.vstack(p, 1, *coords))
        obstruction = PLocalMatrix.hstack(p, ext_target.ngens, *columns) if columns \
            else PLocalMatrix.zeros(p, ext_target.ngens, 0)
        obstruction_map = ModuleMap(n_prime, ext_target, obstruction, check=False)

        # D: N → ⊕ Hom(G_k, B̃_k), f ↦ fB_k ∘ π_k − π̃_k ∘ fG_{k-1}
        e_sys = HomSystem(p)
        for k in range(period):
            e_sys.add_variable(f"e{k}", d1.g_objects[k], d2.b_objects[k])
        e_module, e_basis = e_sys.solution_space()
        d_images = []
        for values in n_values:
            image = {}
            for k in range(period):
                image[f"e{k}"] = values[f"fB{k}"] @ d1.pi[k] - d2.pi[k] @ values[f"fG{(k - 1) % period}"]
            d_images.append(e_sys.pack(image))
        d_map = self._to_generators(n_module, e_module, e_basis, d_images)
        m_module, _ = self.linalg.kernel(d_map)

        chain_maps = self.chain_map_group(self.q_build(d1), self.q_build(d2))
        assembly = HomAssembly(
            n_module=n_module,
            kernel_part=kernel_part,
            n_prime=n_prime,
            ext_target=ext_target,
            kernel_map=kernel_map,
            restriction_map=restriction_map,
            obstruction_map=obstruction_map,
            d_map=d_map,
            m_module=m_module,
            chain_maps=chain_maps,
            kernel_injective=self.linalg.is_injective(kernel_map),
            exact_at_n=self.linalg.is_exact(kernel_map, restriction_map),
            exact_at_n_prime=self.linalg.is_exact(restriction_map, obstruction_map),
        )
        logger.info(f"Hom assembly: N={n_module}, N'={n_prime}, M={m_module}, chain maps={chain_maps}")
        return assembly

    def _to_generators(self, source: FPModule, target: FPModule, target_basis: PLocalMatrix,
                       images: List[PLocalMatrix]) -> ModuleMap:
        p = target.p
        if not images:
            return ModuleMap(source, target, PLocalMatrix.zeros(p, target.ngens, source.ngens), check=False)
        stacked = PLocalMatrix.hstack(p, target_basis.rows, *images)
        coords = solve(target_basis, stacked)
        if coords is None:
            raise InternalError("Image vectors fall outside the solution lattice")
        return ModuleMap(source, target, coords, check=False)

    def chain_map_system(self, c1: TwistedComplex, c2: TwistedComplex) -> HomSystem:
        """Unknowns f^i: C1^i → C2^i with f^{i+1} d^i = d̃^i f^i; both complexes have alpha = id"""
        p = c1.context.p
        system = HomSystem(p)
        n = c1.length
        for i in range(n):
            system.add_variable(f"f{i}", c1.window[i], c2.window[i])
        for i in range(n):
            j = (i + 1) % n
            system.add_equation(c2.window[j].module, c1.window[i].ngens, [
                (PLocalMatrix.identity(p, c2.window[j].ngens), j, c1.differentials[i]),
                (-c2.differentials[i], i, PLocalMatrix.identity(p, c1.window[i].ngens)),
            ])
        return system

    def chain_map_group(self, c1: TwistedComplex, c2: TwistedComplex) -> FPModule:
        module, _ = self.chain_map_system(c1, c2).solution_space()
        return module
