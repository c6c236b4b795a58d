import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

import config
from services.adams_service import AObject, AdamsService
from services.complex_service import ComplexService, TwistedComplex
from services.homalg_service import HomalgService
from services.linalg_service import FPModule
from utils.errors import PreconditionError

logger = logging.getLogger(__name__)

EXT_DEGREES = tuple(range(config.MAX_EXT_DEGREE + 1))

STATUS_DETERMINED = "determined"
STATUS_GRADED = "associated-graded-only"
STATUS_UNDETERMINED = "undetermined-differential"


@dataclass(frozen=True, eq=False)
class E2Cell:
    s: int
    t: int
    module: FPModule
    pieces: Tuple[FPModule, ...]

    def is_zero(self) -> bool:
        return self.module.is_zero()

    def to_dict(self) -> dict:
        return {"s": self.s, "t": self.t, "invariants": self.module.invariants.to_dict()}


@dataclass(eq=False)
class E2Page:
    """E₂^{s,t} = ⊕_n Ext^s(Y1_{n+t}, Y2_n) for assembled cohomology objects Y1, Y2"""
    y1: AObject
    y2: AObject
    t_window: Tuple[int, int]
    cells: Dict[Tuple[int, int], E2Cell] = field(default_factory=dict)
    vanishing_certificate: List[Tuple[int, int, str]] = field(default_factory=list)
    collapse_certificate: Optional[List[Tuple[int, int, str]]] = None

    @property
    def context(self):
        return self.y1.context

    @property
    def period(self) -> int:
        return self.y1.context.period

    def t_range(self) -> range:
        lo, hi = self.t_window
        return range(lo, hi + 1)

    def allowed_residues(self) -> FrozenSet[int]:
        return frozenset((a - b) % self.period for a in self.y1.support() for b in self.y2.support())

    def offset(self) -> Optional[int]:
        """The single residue class carrying nonzero cells, when there is exactly one"""
        residues = self.allowed_residues()
        if len(residues) == 1:
            return next(iter(residues))
        return None


@dataclass(frozen=True)
class VanishingReport:
    passed: bool
    checked: int
    offset: Optional[int]
    failures: Tuple[Tuple[int, int, str], ...]
    structural_zeros: Tuple[Tuple[int, int, str], ...]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checked": self.checked,
            "offset": self.offset,
            "failures": [{"s": s, "t": t, "reason": r} for s, t, r in self.failures],
            "structural_zeros": [{"s": s, "t": t, "reason": r} for s, t, r in self.structural_zeros],
        }


@dataclass(frozen=True)
class CollapseResult:
    n: int
    pieces: Tuple[Tuple[int, int, FPModule], ...]
    status: str
    certificate: Optional[Tuple[Tuple[int, int, str], ...]]
    blockers: Tuple[Tuple[int, int], ...]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "status": self.status,
            "pieces": [{"s": s, "t": t, "invariants": m.invariants.to_dict(), "module": str(m)}
                       for s, t, m in self.pieces],
            "collapse_certificate": None if self.certificate is None
            else [{"s": s, "t": t, "reason": r} for s, t, r in self.certificate],
            "blockers": [{"s": s, "t": t} for s, t in self.blockers],
        }


class SpectralService:
    def __init__(self):
        self.adams = AdamsService()
        self.homalg = HomalgService()
        self.complexes = ComplexService()

    # pages

    def e2_page(self, c1: TwistedComplex, c2: TwistedComplex,
                t_window: Tuple[int, int] = config.DEFAULT_T_WINDOW) -> E2Page:
        y1 = self.complexes.assembled_cohomology(c1)
        y2 = self.complexes.assembled_cohomology(c2)
        return self.page_for_objects(y1, y2, t_window)

    def page_for_objects(self, y1: AObject, y2: AObject,
                         t_window: Tuple[int, int] = config.DEFAULT_T_WINDOW) -> E2Page:
        lo, hi = t_window
        if lo > hi:
            raise PreconditionError(f"Empty t window {lo}:{hi}", clause="e2.window")
        page = E2Page(y1, y2, (lo, hi))
        for s in EXT_DEGREES:
            for t in page.t_range():
                self.cell(page, s, t)
        page.vanishing_certificate = self._structural_zeros(page)
        page.collapse_certificate = self._collapse_certificate(page)
        logger.info(f"E2 page over t in [{lo}, {hi}]: {sum(not c.is_zero() for c in page.cells.values())} nonzero cells")
        return page

    def cell(self, page: E2Page, s: int, t: int) -> E2Cell:
        """E₂^{s,t}, computed on demand and cached on the page"""
        key = (s, t)
        if key in page.cells:
            return page.cells[key]
        p = page.context.p
        if s not in EXT_DEGREES:
            cell = E2Cell(s, t, FPModule.zero(p), ())
        else:
            pieces = []
            for n in range(page.period):
                source = self.adams.component_at(page.y1, n + t)
                target = page.y2.components[n]
                if source.is_zero() or target.is_zero():
                    pieces.append(FPModule.zero(p))
                else:
                    pieces.append(self.homalg.ext(source, target, s).module)
            cell = E2Cell(s, t, FPModule.direct_sum(p, *pieces), tuple(pieces))
        logger.debug(f"E2 cell ({s}, {t}) = {cell.module}")
        page.cells[key] = cell
        return cell

    def _structural_zeros(self, page: E2Page) -> List[Tuple[int, int, str]]:
        allowed = page.allowed_residues()
        zeros = []
        for s in EXT_DEGREES:
            for t in page.t_range():
                if t % page.period not in allowed:
                    zeros.append((s, t, f"t ≡ {t % page.period} mod {page.period} pairs no supported components"))
        return zeros

    # vanishing pattern

    def forbidden_by_lines(self, offset: int, s: int, t: int) -> bool:
        if offset == 0:
            return (t == s and s != 0) or t - s == 1
        if offset == 1:
            return (t - s == 1 and s != 0) or (t == s and s != 1)
        return False

    def vanishing_check(self, page: E2Page) -> VanishingReport:
        allowed = page.allowed_residues()
        offset = page.offset()
        failures = []
        checked = 0
        for (s, t), cell in sorted(page.cells.items()):
            checked += 1
            if s not in EXT_DEGREES and not cell.is_zero():
                failures.append((s, t, "cell above the Ext ceiling is nonzero"))
                continue
            if cell.is_zero():
                continue
            if t % page.period not in allowed:
                failures.append((s, t, f"nonzero cell at t ≡ {t % page.period} mod {page.period}"))
            elif offset is not None and self.forbidden_by_lines(offset, s, t):
                failures.append((s, t, f"nonzero cell on a vanishing line for offset {offset}"))
        if failures:
            logger.warning(f"Vanishing pattern fails at {len(failures)} cells")
        return VanishingReport(not failures, checked, offset, tuple(failures), tuple(page.vanishing_certificate))

    # collapse

    def _collapse_certificate(self, page: E2Page) -> Optional[List[Tuple[int, int, str]]]:
        certificate = []
        for (s, t), cell in sorted(page.cells.items()):
            if cell.is_zero():
                continue
            blocked = self._d2_neighbours(page, s, t)
            if blocked:
                return None
            certificate.append((s, t, "d2 source and target vanish"))
        return certificate

    def _d2_neighbours(self, page: E2Page, s: int, t: int) -> List[Tuple[int, int]]:
        """Nonzero cells that a d₂ could connect to (s, t)"""
        found = []
        for ds, dt in ((2, 1), (-2, -1)):
            other = (s + ds, t + dt)
            if other[0] in EXT_DEGREES and not self.cell(page, *other).is_zero():
                found.append(other)
        return found

    @staticmethod
    def _splits(pieces: List[Tuple[int, int, FPModule]]) -> bool:
        """Every piece above the deepest one is free, so each filtration step splits"""
        return all(not m.invariants.torsion for _, _, m in pieces[:-1])

    def collapse_and_assemble(self, page: E2Page, n: int) -> CollapseResult:
        """Associated-graded pieces E₂^{s, n+s} of total degree n and their status"""
        pieces = []
        blockers = []
        certificate = []
        for s in EXT_DEGREES:
            t = n + s
            cell = self.cell(page, s, t)
            if cell.is_zero():
                continue
            pieces.append((s, t, cell.module))
            neighbours = self._d2_neighbours(page, s, t)
            if neighbours:
                blockers.extend(neighbours)
            else:
                certificate.append((s, t, "d2 source and target vanish"))
        if blockers:
            status = STATUS_UNDETERMINED
            logger.warning(f"No collapse certificate in total degree {n}: possible d2 at {blockers}")
        elif self._splits(pieces):
            status = STATUS_DETERMINED
        else:
            status = STATUS_GRADED
            logger.warning(f"Total degree {n} has {len(pieces)} filtration pieces, extension left open")
        return CollapseResult(
            n=n,
            pieces=tuple(pieces),
            status=status,
            certificate=None if blockers else tuple(certificate),
            blockers=tuple(sorted(set(blockers))),
        )

    # rendering

    def chart_ascii(self, page: E2Page) -> str:
        """s vertical, t horizontal, '*' at nonzero cells"""
        ts = list(page.t_range())
        width = max(len(str(t)) for t in ts) + 1
        lines = []
        for s in reversed(EXT_DEGREES):
            marks = ["*" if not page.cells[(s, t)].is_zero() else "." for t in ts]
            lines.append(f"s={s} |" + "".join(m.rjust(width) for m in marks))
        lines.append("    +" + "-" * (width * len(ts)))
        lines.append("  t  " + "".join(str(t).rjust(width) for t in ts))
        return "\n".join(lines)

    def cell_map(self, page: E2Page) -> List[dict]:
        return [page.cells[key].to_dict() for key in sorted(page.cells)]
