import logging
import random
from fractions import Fraction
from typing import Dict, List

import config
from services.adams_service import AObject, AdamsService, BObject, Context
from services.complex_service import ComplexService, TwistedComplex
from services.homalg_service import HomalgService, ShortExactSequence
from services.json_service import InstanceFile
from services.linalg_service import FPModule, PLocalMatrix
from services.q_service import DiagramData, QService
from utils.errors import PreconditionError
from utils.plocal import reduce_mod

logger = logging.getLogger(__name__)

FREE_WEIGHTS = (-1, 0, 1, 2)

GEN_KINDS = {
    "bobject": "bobject",
    "aobject": "aobject",
    "pair": "pair",
    "ses": "ses",
    "complex": "complex",
    "acomplex": "complex",
    "diagram": "diagram",
    "ladder-liftable": "ladder",
    "ladder-nonliftable": "ladder",
    "e2-obstructed": "complex_pair",
    "sphere": "complex",
}


class GeneratorService:
    """Seeded random instances; the same (kind, seed, size, context) always gives the same instance"""

    def __init__(self):
        self.adams = AdamsService()
        self.homalg = HomalgService()
        self.complexes = ComplexService()
        self.q = QService()

    def generate(self, kind: str, seed: int = config.DEFAULT_SEED, size: int = config.DEFAULT_GEN_SIZE,
                 context: Context = None) -> InstanceFile:
        if kind not in GEN_KINDS:
            raise PreconditionError(f"Unknown instance kind {kind!r}", clause="gen.kind")
        if size < 1:
            raise PreconditionError("Instance size must be positive", clause="gen.size")
        context = context or Context()
        rng = random.Random(seed)
        builder = getattr(self, kind.replace("-", "_"))
        payload = builder(context, rng, size)
        logger.info(f"Generated {kind} instance (seed={seed}, size={size})")
        return InstanceFile(context, GEN_KINDS[kind], payload)

    # scalars

    def units(self, context: Context) -> List[int]:
        """Residues mod p² of the eigenvalues g^{j(p-1)}"""
        p = context.p
        return sorted({reduce_mod(context.twist_unit(j), p, 2) for j in range(p)})

    # objects

    def bobject(self, context: Context, rng: random.Random, size: int, allow_zero: bool = False) -> BObject:
        """Finite module ⊕ Z/p^{e_i} with psi = u·I plus an equivariance-safe upper triangle"""
        p = context.p
        k = rng.randint(0 if allow_zero else 1, size)
        if k == 0:
            return self.adams.zero_b(context)
        exps = [rng.randint(1, 2) for _ in range(k)]
        unit = rng.choice(self.units(context))
        psi = [[Fraction(0)] * k for _ in range(k)]
        for i in range(k):
            psi[i][i] = Fraction(unit)
            for j in range(i + 1, k):
                psi[i][j] = Fraction(rng.randrange(p) * p ** max(0, exps[i] - exps[j]))
        relations = PLocalMatrix.diagonal(p, [Fraction(p ** e) for e in exps])
        return BObject(context, FPModule(relations), PLocalMatrix(p, k, k, psi))

    def mixed_bobject(self, context: Context, rng: random.Random, size: int, allow_zero: bool = False) -> BObject:
        """Free rank-one summands of random weights ⊕ a finite part from bobject"""
        free = [self.adams.free_b(context, 1, rng.choice(FREE_WEIGHTS)) for _ in range(rng.randint(0, min(2, size)))]
        finite = self.bobject(context, rng, size, allow_zero=allow_zero or bool(free))
        return self.adams.direct_sum(*free, finite)

    def aobject(self, context: Context, rng: random.Random, size: int) -> AObject:
        return AObject(context, tuple(self.bobject(context, rng, size, allow_zero=True)
                                      for _ in range(context.period)))

    def pair(self, context: Context, rng: random.Random, size: int) -> Dict[str, BObject]:
        return {"source": self.bobject(context, rng, size), "target": self.bobject(context, rng, size)}

    def random_hom(self, source: BObject, target: BObject, rng: random.Random) -> PLocalMatrix:
        p = source.context.p
        system = self.adams.hom_system(source, target)
        _, basis = system.solution_space()
        coeffs = PLocalMatrix.column_vector(p, [Fraction(rng.randint(-2, 2)) for _ in range(basis.cols)])
        return system.unpack((basis @ coeffs).column(0))["f"]

    def random_class(self, quotient: BObject, sub: BObject, rng: random.Random):
        group = self.homalg.ext(quotient, sub, 1)
        p = sub.context.p
        return self.homalg.class_from_generator(group, [rng.randrange(p * p) for _ in range(group.basis.cols)])

    def ses(self, context: Context, rng: random.Random, size: int) -> ShortExactSequence:
        quotient = self.bobject(context, rng, size)
        sub = self.bobject(context, rng, size)
        return self.homalg.realize(self.random_class(quotient, sub, rng))

    # diagrams and complexes

    def diagram(self, context: Context, rng: random.Random, size: int) -> DiagramData:
        """G_i = B_i ⊕ K_i with pi_i the projection, random extension classes; summands may be free"""
        p = context.p
        period = context.period
        g_objects, b_objects, pis = [], [], []
        for _ in range(period):
            b = self.mixed_bobject(context, rng, size, allow_zero=True)
            k = self.mixed_bobject(context, rng, size, allow_zero=True)
            g_objects.append(self.adams.direct_sum(b, k))
            b_objects.append(b)
            pis.append(PLocalMatrix.hstack(p, b.ngens, PLocalMatrix.identity(p, b.ngens),
                                           PLocalMatrix.zeros(p, b.ngens, k.ngens)))
        extensions = []
        for i in range(period):
            g_next = g_objects[i + 1] if i + 1 < period else self.adams.twist(period, g_objects[0])
            cls = self.random_class(g_next, b_objects[i], rng)
            extensions.append(self.homalg.ext_class_of(self.homalg.realize(cls)))
        return DiagramData(context, tuple(g_objects), tuple(b_objects), tuple(pis), tuple(extensions))

    def automorphism(self, obj: BObject, rng: random.Random) -> PLocalMatrix:
        """unit · psi^e, which commutes with psi"""
        unit = Fraction(rng.choice(self.units(obj.context)))
        power = PLocalMatrix.identity(obj.context.p, obj.ngens)
        for _ in range(rng.randint(0, 1)):
            power = obj.psi @ power
        return power.scale(unit)

    def complex(self, context: Context, rng: random.Random, size: int) -> TwistedComplex:
        """A Q-complex carrying a non-trivial alpha"""
        normal = self.q.q_build(self.diagram(context, rng, size))
        alpha = tuple(self.automorphism(w, rng) for w in normal.window)
        diffs = list(normal.differentials)
        diffs[-1] = alpha[0] @ diffs[-1]
        return TwistedComplex(context, normal.flavor, normal.window, tuple(diffs), alpha)

    def acomplex(self, context: Context, rng: random.Random, size: int) -> TwistedComplex:
        normal = self.complexes.unsplit_to_a(self.complex(context, rng, size))
        comps = normal.window[0].components
        alpha = tuple(self.automorphism(m, rng) for m in comps)
        diffs = tuple(alpha[j - 1] @ d for j, d in enumerate(normal.differentials[0]))
        return TwistedComplex(context, normal.flavor, normal.window, (diffs,), (alpha,))

    # ladders

    def ladder_liftable(self, context: Context, rng: random.Random, size: int) -> Dict:
        """f_G = id and S̃ = (f_B)_* S, so the obstruction vanishes"""
        top = self.ses(context, rng, size)
        target = self.bobject(context, rng, size)
        f_b = self.random_hom(top.sub, target, rng)
        s = self.homalg.ext_class_of(top)
        pushed = self.homalg.pushforward(self.adams.make_bmorphism(top.sub, target, f_b), s)
        bottom = self.homalg.realize(pushed)
        f_g = PLocalMatrix.identity(context.p, top.quotient.ngens)
        return {"top": top, "bottom": bottom, "f_b": f_b, "f_g": f_g}

    def ladder_nonliftable(self, context: Context, rng: random.Random, size: int) -> Dict:
        """S̃ = (f_B)_* S + T with T a nonzero class, so the obstruction is -T"""
        p = context.p
        top = self.ses(context, rng, size)
        target = self.bobject(context, rng, size)
        group = self.homalg.ext(top.quotient, target, 1)
        if group.module.is_zero():
            # Ext¹(Z/p, Z/p) with trivial operator is never zero
            top = self.homalg.realize(self.random_class(self.adams.cyclic_b(context, 1),
                                                        self.bobject(context, rng, size), rng))
            target = self.adams.cyclic_b(context, 1)
            group = self.homalg.ext(top.quotient, target, 1)
        f_b = self.random_hom(top.sub, target, rng)
        s = self.homalg.ext_class_of(top)
        pushed = self.homalg.pushforward(self.adams.make_bmorphism(top.sub, target, f_b), s)
        nonzero = [k for k in range(group.basis.cols)
                   if not self.homalg.is_zero_class(self.homalg.class_from_generator(
                       group, [1 if j == k else 0 for j in range(group.basis.cols)]))]
        k = rng.choice(nonzero)
        t = self.homalg.class_from_generator(group, [1 if j == k else 0 for j in range(group.basis.cols)])
        bottom = self.homalg.realize(self.homalg.add_classes(pushed, t))
        f_g = PLocalMatrix.identity(p, top.quotient.ngens)
        return {"top": top, "bottom": bottom, "f_b": f_b, "f_g": f_g}

    # spectral sequence inputs

    def e2_obstructed(self, context: Context, rng: random.Random, size: int) -> List[TwistedComplex]:
        """Z/p in internal degrees 0 and 1 against Z/p in degree 0: E₂^{0,0} and E₂^{2,1} both survive"""
        zp = self.adams.cyclic_b(context, 1)
        zero = self.adams.zero_b(context)
        first = [zero] * context.period
        first[0], first[1] = zp, zp
        second = [zero] * context.period
        second[0] = zp
        return [self.complexes.make_em(AObject(context, tuple(first))),
                self.complexes.make_em(AObject(context, tuple(second)))]

    def sphere(self, context: Context, rng: random.Random, size: int) -> TwistedComplex:
        """V of Z_(p) with trivial operator placed in internal degree 0"""
        return self.complexes.make_v(self.adams.split_embed(0, self.adams.free_b(context, 1, 0)))
