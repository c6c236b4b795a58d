import logging
from dataclasses import dataclass
from typing import Optional, Tuple

from services.adams_service import AObject, AdamsService, BObject, Context
from services.linalg_service import ONE, LinalgService, ModuleMap, PLocalMatrix, Subquotient
from utils.errors import InternalError, PreconditionError

logger = logging.getLogger(__name__)

FLAVOR_A = "C1-A"
FLAVOR_B = "C2p2-B"


@dataclass(frozen=True, eq=False)
class TwistedComplex:
    """A periodic cochain complex stored on one fundamental window.

    C2p2-B: window holds BObjects W^0..W^{N-1}, differentials[i]: W^i → W^{i+1}
    (the last one lands in T(W^0)), alpha[i] an automorphism of W^i.
    C1-A: window holds a single AObject M, differentials[0][j]: M_j → M_{j-1}
    and alpha[0][j] an automorphism of M_j.
    """
    context: Context
    flavor: str
    window: Tuple
    differentials: Tuple
    alpha: Tuple

    @property
    def length(self) -> int:
        return len(self.window)


@dataclass(frozen=True, eq=False)
class ComplexMorphism:
    source: TwistedComplex
    target: TwistedComplex
    levels: Tuple


@dataclass(frozen=True, eq=False)
class GradedHomology:
    complex: TwistedComplex
    groups: Tuple
    cycles: Tuple


class ComplexService:
    def __init__(self):
        self.linalg = LinalgService()
        self.adams = AdamsService()

    # periodic bookkeeping

    def _power(self, obj: BObject, matrix: PLocalMatrix, q: int) -> PLocalMatrix:
        """matrix^q for an automorphism of obj; negative q uses the module inverse"""
        p = obj.context.p
        if q < 0:
            matrix = self.linalg.module_inverse(ModuleMap(obj.module, obj.module, matrix, check=False)).matrix
            q = -q
        result = PLocalMatrix.identity(p, obj.ngens)
        for _ in range(q):
            result = matrix @ result
        return result

    def level(self, c: TwistedComplex, k: int) -> BObject:
        q, r = divmod(k, c.length)
        return self.adams.twist(q * c.context.period, c.window[r])

    def differential(self, c: TwistedComplex, k: int) -> PLocalMatrix:
        """d^k: C^k → C^{k+1} for any integer k"""
        n = c.length
        q, i = divmod(k, n)
        d = c.differentials[i]
        if q == 0:
            return d
        j = (i + 1) % n
        return self._power(c.window[j], c.alpha[j], q) @ d @ self._power(c.window[i], c.alpha[i], -q)

    def morphism_level(self, f: ComplexMorphism, k: int) -> PLocalMatrix:
        n = f.source.length
        q, i = divmod(k, n)
        if q == 0:
            return f.levels[i]
        return (self._power(f.target.window[i], f.target.alpha[i], q) @ f.levels[i]
                @ self._power(f.source.window[i], f.source.alpha[i], -q))

    # validation

    def validate(self, c: TwistedComplex) -> None:
        if c.flavor == FLAVOR_B:
            self._validate_b(c)
        elif c.flavor == FLAVOR_A:
            self._validate_a(c)
        else:
            raise PreconditionError(f"Unknown complex flavor {c.flavor!r}", clause="complex.flavor")

    def _validate_b(self, c: TwistedComplex) -> None:
        n = c.length
        if n != c.context.period:
            raise PreconditionError(f"Window must have {c.context.period} levels, got {n}", clause="complex.shape")
        if len(c.differentials) != n or len(c.alpha) != n:
            raise PreconditionError("Window, differentials and alpha lengths differ", clause="complex.shape")
        for i in range(n):
            self.adams.make_bmorphism(self.level(c, i), self.level(c, i + 1), c.differentials[i])
            self._check_automorphism(c.window[i], c.alpha[i])
        bad = self.nonzero_square(c)
        if bad is not None:
            raise PreconditionError(f"d∘d is not zero at degree {bad}", clause="complex.d_squared")

    def _validate_a(self, c: TwistedComplex) -> None:
        m = c.window[0]
        period = c.context.period
        d, a = c.differentials[0], c.alpha[0]
        for j in range(period):
            self.adams.make_bmorphism(m.components[j], self.adams.twist(1, m.components[j - 1]), d[j])
            self._check_automorphism(m.components[j], a[j])
        bad = self.nonzero_square(c)
        if bad is not None:
            raise PreconditionError(f"d∘d is not zero on component {bad}", clause="complex.d_squared")

    def nonzero_square(self, c: TwistedComplex) -> Optional[int]:
        """First degree (B) or component (A) where d∘d fails to vanish, None when it is a complex"""
        if c.flavor == FLAVOR_B:
            for i in range(c.length):
                square = self.differential(c, i + 1) @ self.differential(c, i)
                if not self.level(c, i + 2).module.contains_columns(square):
                    return i
            return None
        m, d, a = c.window[0], c.differentials[0], c.alpha[0]
        for j in range(c.context.period):
            inner = self._power(m.components[j - 1], a[j - 1], -1)
            square = d[j - 1] @ inner @ d[j]
            if not m.components[j - 2].module.contains_columns(square):
                return j
        return None

    def _check_automorphism(self, obj: BObject, matrix: PLocalMatrix) -> None:
        self.adams.make_bmorphism(obj, obj, matrix)
        if not self.linalg.is_isomorphism(ModuleMap(obj.module, obj.module, matrix, check=False)):
            raise PreconditionError("alpha is not an automorphism", clause="complex.alpha")

    def check_morphism(self, f: ComplexMorphism) -> None:
        """Equivariance and the chain condition over one period"""
        c, d = f.source, f.target
        if c.flavor != d.flavor or c.length != d.length:
            raise PreconditionError("Morphism between complexes of different shape", clause="morphism.shape")
        if c.flavor == FLAVOR_B:
            for i in range(c.length):
                self.adams.make_bmorphism(c.window[i], d.window[i], f.levels[i])
                lhs = self.differential(d, i) @ f.levels[i]
                rhs = self.morphism_level(f, i + 1) @ self.differential(c, i)
                if not self.level(d, i + 1).module.contains_columns(lhs - rhs):
                    raise PreconditionError(f"Chain condition fails at degree {i}", clause="morphism.chain")
            return
        m, n = c.window[0], d.window[0]
        fs = f.levels[0]
        a, b = c.alpha[0], d.alpha[0]
        for j in range(c.context.period):
            self.adams.make_bmorphism(m.components[j], n.components[j], fs[j])
            lhs = d.differentials[0][j] @ fs[j]
            rhs = b[j - 1] @ fs[j - 1] @ self._power(m.components[j - 1], a[j - 1], -1) @ c.differentials[0][j]
            if not n.components[j - 1].module.contains_columns(lhs - rhs):
                raise PreconditionError(f"Chain condition fails on component {j}", clause="morphism.chain")

    # morphisms

    def identity_morphism(self, c: TwistedComplex) -> ComplexMorphism:
        p = c.context.p
        if c.flavor == FLAVOR_B:
            return ComplexMorphism(c, c, tuple(PLocalMatrix.identity(p, w.ngens) for w in c.window))
        return ComplexMorphism(c, c, (tuple(PLocalMatrix.identity(p, m.ngens) for m in c.window[0].components),))

    def zero_morphism(self, c: TwistedComplex, d: TwistedComplex) -> ComplexMorphism:
        p = c.context.p
        if c.flavor == FLAVOR_B:
            return ComplexMorphism(c, d, tuple(
                PLocalMatrix.zeros(p, y.ngens, x.ngens) for x, y in zip(c.window, d.window)))
        return ComplexMorphism(c, d, (tuple(
            PLocalMatrix.zeros(p, y.ngens, x.ngens)
            for x, y in zip(c.window[0].components, d.window[0].components)),))

    def compose(self, g: ComplexMorphism, f: ComplexMorphism) -> ComplexMorphism:
        if f.source.flavor == FLAVOR_B:
            return ComplexMorphism(f.source, g.target, tuple(y @ x for x, y in zip(f.levels, g.levels)))
        return ComplexMorphism(f.source, g.target, (tuple(y @ x for x, y in zip(f.levels[0], g.levels[0])),))

    # cohomology

    def cohomology_at(self, c: TwistedComplex, k: int) -> Tuple[BObject, Subquotient]:
        """H^k of a C2p2-B complex with the operator it inherits"""
        here = self.level(c, k)
        incoming = ModuleMap(self.level(c, k - 1).module, here.module, self.differential(c, k - 1), check=False)
        outgoing = ModuleMap(here.module, self.level(c, k + 1).module, self.differential(c, k), check=False)
        sq = self.linalg.homology(incoming, outgoing)
        psi = self.linalg.induced_endomorphism(sq.basis, here.psi)
        return BObject(c.context, sq.module, psi, here.weights), sq

    def _cohomology_a(self, c: TwistedComplex) -> Tuple[AObject, Tuple[Subquotient, ...]]:
        m = c.window[0]
        d, a = c.differentials[0], c.alpha[0]
        period = c.context.period
        groups, cycles = [], []
        for j in range(period):
            here = m.components[j]
            nxt = (j + 1) % period
            source = m.components[nxt]
            incoming_matrix = self._power(here, a[j], -1) @ d[nxt] @ a[nxt]
            incoming = ModuleMap(source.module, here.module, incoming_matrix, check=False)
            outgoing = ModuleMap(here.module, m.components[j - 1].module, d[j], check=False)
            sq = self.linalg.homology(incoming, outgoing)
            psi = self.linalg.induced_endomorphism(sq.basis, here.psi)
            groups.append(BObject(c.context, sq.module, psi, here.weights))
            cycles.append(sq)
        return AObject(c.context, tuple(groups)), tuple(cycles)

    def cohomology(self, c: TwistedComplex) -> GradedHomology:
        if c.flavor == FLAVOR_A:
            h, cycles = self._cohomology_a(c)
            return GradedHomology(c, (h,), (cycles,))
        pairs = [self.cohomology_at(c, i) for i in range(c.length)]
        logger.debug(f"Cohomology over the window: {[str(h) for h, _ in pairs]}")
        return GradedHomology(c, tuple(h for h, _ in pairs), tuple(sq for _, sq in pairs))

    def is_acyclic(self, c: TwistedComplex) -> bool:
        h = self.cohomology(c)
        return all(g.is_zero() for g in h.groups)

    def assembled_cohomology(self, c: TwistedComplex) -> AObject:
        """The AObject ⊕_i H^i[-i]: slot j holds twist(j)(H^{-j})"""
        if c.flavor == FLAVOR_A:
            return self.cohomology(c).groups[0]
        if c.length != c.context.period:
            raise PreconditionError("Assembly needs a window of length 2p-2", clause="complex.shape")
        return AObject(c.context, tuple(
            self.adams.twist(j, self.cohomology_at(c, -j)[0]) for j in range(c.context.period)
        ))

    def _induced(self, source: Tuple[BObject, Subquotient], target: Tuple[BObject, Subquotient],
                 matrix: PLocalMatrix) -> ModuleMap:
        coords = target[1].coordinates(matrix @ source[1].basis)
        return ModuleMap(source[0].module, target[0].module, coords, check=False)

    def induced_map(self, f: ComplexMorphism, k: int) -> ModuleMap:
        return self._induced(self.cohomology_at(f.source, k), self.cohomology_at(f.target, k),
                             self.morphism_level(f, k))

    def is_quasi_iso(self, f: ComplexMorphism) -> bool:
        if f.source.flavor == FLAVOR_A:
            return self.is_quasi_iso(self.split_morphism(f))
        for k in range(f.source.length):
            if not self.linalg.is_isomorphism(self.induced_map(f, k)):
                logger.debug(f"Morphism fails to be a quasi-isomorphism in degree {k}")
                return False
        return True

    # cones

    def cone(self, f: ComplexMorphism) -> TwistedComplex:
        if f.source.flavor == FLAVOR_A:
            return self.unsplit_to_a(self.cone(self.split_morphism(f)))
        c, d = f.source, f.target
        p = c.context.p
        n = c.length
        window, diffs, alpha = [], [], []
        for i in range(n):
            window.append(self.adams.direct_sum(self.level(d, i), self.level(c, i + 1)))
            d_d = self.differential(d, i)
            d_c = self.differential(c, i + 1)
            top = PLocalMatrix.hstack(p, d_d.rows, d_d, self.morphism_level(f, i + 1))
            bottom = PLocalMatrix.hstack(p, d_c.rows, PLocalMatrix.zeros(p, d_c.rows, d_d.cols), -d_c)
            diffs.append(PLocalMatrix.vstack(p, top.cols, top, bottom))
            alpha.append(PLocalMatrix.block_diag(p, d.alpha[i], c.alpha[(i + 1) % n]))
        return TwistedComplex(c.context, FLAVOR_B, tuple(window), tuple(diffs), tuple(alpha))

    def long_exact_sequence_check(self, f: ComplexMorphism) -> bool:
        """Exactness of H(C) → H(D) → H(cone f) → H(C[1]) → H(D[1]) over the window"""
        if f.source.flavor == FLAVOR_A:
            return self.long_exact_sequence_check(self.split_morphism(f))
        c, d = f.source, f.target
        cone = self.cone(f)
        p = c.context.p
        for k in range(c.length):
            hc, hd, hcone = self.cohomology_at(c, k), self.cohomology_at(d, k), self.cohomology_at(cone, k)
            hc1, hd1 = self.cohomology_at(c, k + 1), self.cohomology_at(d, k + 1)
            nd, nc1 = self.level(d, k).ngens, self.level(c, k + 1).ngens
            include = PLocalMatrix.vstack(p, nd, PLocalMatrix.identity(p, nd), PLocalMatrix.zeros(p, nc1, nd))
            project = PLocalMatrix.hstack(p, nc1, PLocalMatrix.zeros(p, nc1, nd), PLocalMatrix.identity(p, nc1))
            f_k = self._induced(hc, hd, self.morphism_level(f, k))
            inc = self._induced(hd, hcone, include)
            proj = self._induced(hcone, hc1, project)
            f_k1 = self._induced(hc1, hd1, self.morphism_level(f, k + 1))
            if not (self.linalg.is_exact(f_k, inc) and self.linalg.is_exact(inc, proj)
                    and self.linalg.is_exact(proj, f_k1)):
                logger.warning(f"Cone long exact sequence fails near degree {k}")
                return False
        return True

    # alpha normalisation and splitting

    def normalize_alpha(self, c: TwistedComplex) -> Tuple[TwistedComplex, ComplexMorphism]:
        """An isomorphic complex with alpha = id, and the isomorphism from c"""
        p = c.context.p
        if c.flavor == FLAVOR_B:
            n = c.length
            diffs = list(c.differentials)
            diffs[n - 1] = self._power(c.window[0], c.alpha[0], -1) @ diffs[n - 1]
            alpha = tuple(PLocalMatrix.identity(p, w.ngens) for w in c.window)
            normal = TwistedComplex(c.context, FLAVOR_B, c.window, tuple(diffs), alpha)
            levels = tuple(PLocalMatrix.identity(p, w.ngens) for w in c.window)
            return normal, ComplexMorphism(c, normal, levels)
        m = c.window[0]
        d, a = c.differentials[0], c.alpha[0]
        diffs = tuple(self._power(m.components[j - 1], a[j - 1], -1) @ d[j] for j in range(c.context.period))
        alpha = tuple(PLocalMatrix.identity(p, x.ngens) for x in m.components)
        normal = TwistedComplex(c.context, FLAVOR_A, c.window, (diffs,), (alpha,))
        return normal, ComplexMorphism(c, normal, (alpha,))

    def split_to_b(self, c: TwistedComplex) -> TwistedComplex:
        """C2p2-B complex of internal-degree-0 components: W^i = twist(i)(M_{-i})"""
        if c.flavor != FLAVOR_A:
            raise PreconditionError("split_to_B expects a C1-A complex", clause="complex.flavor")
        m = c.window[0]
        period = c.context.period
        d, a = c.differentials[0], c.alpha[0]
        comps = m.components
        window, diffs, alpha = [], [], []
        for i in range(period):
            src = (-i) % period
            tgt = (-i - 1) % period
            window.append(self.adams.twist(i, comps[src]))
            diffs.append(self._power(comps[tgt], a[tgt], i) @ d[src] @ self._power(comps[src], a[src], -i))
            alpha.append(self._power(comps[src], a[src], period))
        return TwistedComplex(c.context, FLAVOR_B, tuple(window), tuple(diffs), tuple(alpha))

    def split_morphism(self, f: ComplexMorphism) -> ComplexMorphism:
        c, d = f.source, f.target
        period = c.context.period
        m, n = c.window[0], d.window[0]
        levels = []
        for i in range(period):
            j = (-i) % period
            levels.append(self._power(n.components[j], d.alpha[0][j], i) @ f.levels[0][j]
                          @ self._power(m.components[j], c.alpha[0][j], -i))
        return ComplexMorphism(self.split_to_b(c), self.split_to_b(d), tuple(levels))

    def unsplit_to_a(self, d: TwistedComplex) -> TwistedComplex:
        """C1-A complex with M_0 = W^0 and M_j = twist(j - P)(W^{P-j}) for j ≥ 1"""
        if d.flavor != FLAVOR_B:
            raise PreconditionError("unsplit_to_A expects a C2p2-B complex", clause="complex.flavor")
        period = d.context.period
        if d.length != period:
            raise PreconditionError(f"Window must have {period} levels", clause="complex.shape")
        normal, _ = self.normalize_alpha(d)
        comps, diffs = [], []
        for j in range(period):
            if j == 0:
                comps.append(normal.window[0])
            else:
                comps.append(self.adams.twist(j - period, normal.window[period - j]))
            diffs.append(normal.differentials[(-j) % period])
        p = d.context.p
        alpha = tuple(PLocalMatrix.identity(p, x.ngens) for x in comps)
        return TwistedComplex(d.context, FLAVOR_A, (AObject(d.context, tuple(comps)),), (tuple(diffs),), (alpha,))

    def split_round_trip(self, d: TwistedComplex) -> ComplexMorphism:
        """Certified isomorphism d → split_to_b(unsplit_to_a(d))"""
        normal, iso = self.normalize_alpha(d)
        back = self.split_to_b(self.unsplit_to_a(d))
        if back.differentials != normal.differentials or back.alpha != normal.alpha:
            raise InternalError("split_to_B ∘ unsplit_to_A differs from the normalised complex")
        for x, y in zip(back.window, normal.window):
            if not self.adams.same_presentation(x, y):
                raise InternalError("split_to_B ∘ unsplit_to_A changed a window level")
        morphism = ComplexMorphism(d, back, iso.levels)
        self.check_morphism(morphism)
        return morphism

    def unsplit_round_trip(self, c: TwistedComplex) -> ComplexMorphism:
        """Certified isomorphism c → unsplit_to_a(split_to_b(c)) with components a_j^{(-j) mod P}"""
        back = self.unsplit_to_a(self.split_to_b(c))
        period = c.context.period
        comps = c.window[0].components
        levels = tuple(self._power(comps[j], c.alpha[0][j], (-j) % period) for j in range(period))
        morphism = ComplexMorphism(c, back, (levels,))
        self.check_morphism(morphism)
        for x, y in zip(comps, back.window[0].components):
            if not self.adams.same_presentation(x, y):
                raise InternalError("unsplit_to_A ∘ split_to_B changed a component")
        return morphism

    # standard complexes

    def make_v(self, obj) -> TwistedComplex:
        """V(I)^n = twist(n)(I), d = 0, alpha = id"""
        context = obj.context
        p = context.p
        if isinstance(obj, AObject):
            comps = obj.components
            diffs = tuple(PLocalMatrix.zeros(p, comps[j - 1].ngens, comps[j].ngens) for j in range(context.period))
            alpha = tuple(PLocalMatrix.identity(p, x.ngens) for x in comps)
            return TwistedComplex(context, FLAVOR_A, (obj,), (diffs,), (alpha,))
        n = obj.ngens
        window = tuple(self.adams.twist(i, obj) for i in range(context.period))
        zero = PLocalMatrix.zeros(p, n, n)
        ident = PLocalMatrix.identity(p, n)
        return TwistedComplex(context, FLAVOR_B, window, (zero,) * context.period, (ident,) * context.period)

    def make_c(self, obj) -> TwistedComplex:
        """C(I)^n = twist(n)(I) ⊕ twist(n-1)(I) with d(a, b) = (0, a)"""
        context = obj.context
        p = context.p
        if isinstance(obj, AObject):
            period = context.period
            comps = tuple(
                self.adams.direct_sum(obj.components[j], self.adams.twist(-1, obj.components[(j + 1) % period]))
                for j in range(period)
            )
            diffs = []
            for j in range(period):
                nj = obj.components[j].ngens
                prev = obj.components[j - 1].ngens
                nxt = obj.components[(j + 1) % period].ngens
                block = PLocalMatrix.zeros(p, prev + nj, nj + nxt).to_lists()
                for k in range(nj):
                    block[prev + k][k] = ONE
                diffs.append(PLocalMatrix(p, prev + nj, nj + nxt, block))
            alpha = tuple(PLocalMatrix.identity(p, x.ngens) for x in comps)
            return TwistedComplex(context, FLAVOR_A, (AObject(context, comps),), (tuple(diffs),), (alpha,))
        n = obj.ngens
        window = tuple(self.adams.direct_sum(self.adams.twist(i, obj), self.adams.twist(i - 1, obj))
                       for i in range(context.period))
        zero = PLocalMatrix.zeros(p, n, n)
        d = PLocalMatrix.blocks(p, [[zero, zero], [PLocalMatrix.identity(p, n), zero]])
        ident = PLocalMatrix.identity(p, 2 * n)
        return TwistedComplex(context, FLAVOR_B, window, (d,) * context.period, (ident,) * context.period)

    def make_em(self, obj: AObject) -> TwistedComplex:
        """Zero-differential C2p2-B complex whose assembled cohomology is obj"""
        return self.split_to_b(self.make_v(obj))

    def zero_complex(self, context: Context, flavor: str = FLAVOR_B) -> TwistedComplex:
        if flavor == FLAVOR_A:
            return self.make_v(self.adams.zero_a(context))
        return self.make_v(self.adams.zero_b(context))
