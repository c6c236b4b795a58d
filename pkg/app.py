import logging
import sys
from typing import Callable, List, Optional, Tuple

import click

import config
from services.adams_service import Context
from services.complex_service import FLAVOR_A, FLAVOR_B, ComplexService
from services.generator_service import GEN_KINDS, GeneratorService
from services.homalg_service import HomalgService
from services.json_service import InstanceFile, JSONService
from services.linalg_service import FPModule
from services.q_service import QService
from services.report_service import Report, ReportService
from services.spectral_service import SpectralService
from utils.errors import EngineError, InternalError, ParseError, PreconditionError

# Set up logging; reports go to stdout, logs to stderr
logging.basicConfig(level=config.LOGGING_LEVEL)
logger = logging.getLogger(__name__)

# Initialize services
complex_service = ComplexService()
homalg_service = HomalgService()
q_service = QService()
spectral_service = SpectralService()
json_service = JSONService()
report_service = ReportService()
generator_service = GeneratorService()


class EngineGroup(click.Group):
    """Root group: usage errors exit like parse errors"""

    def main(self, args=None, prog_name=None, **extra):
        extra.pop("standalone_mode", None)
        try:
            rv = super().main(args=args, prog_name=prog_name, standalone_mode=False, **extra)
        except click.ClickException as e:
            e.show()
            sys.exit(ParseError.exit_code)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(ParseError.exit_code)
        sys.exit(rv if isinstance(rv, int) else 0)


def module_dict(m: FPModule) -> dict:
    return {"module": str(m), **m.invariants.to_dict()}


def command_echo(ctx: click.Context) -> List[str]:
    parts = ctx.command_path.split()[1:]
    parts.extend(f"{k}={v}" for k, v in sorted(ctx.params.items()) if v is not None)
    return parts


def run(ctx: click.Context, body: Callable[[Report], None]) -> None:
    """Run one command body, turning engine errors into a report and an exit code"""
    report = Report(command_echo(ctx))
    try:
        body(report)
        if not report.passed:
            report.exit_code = InternalError.exit_code
            logger.error(f"Certificate failed in {' '.join(report.command)}")
    except EngineError as e:
        logger.error(f"{type(e).__name__}: {e}")
        report.error = {"type": type(e).__name__, "message": str(e), "clause": getattr(e, "clause", "")}
        report.exit_code = e.exit_code
    except Exception as e:
        logger.error(f"Unexpected failure: {e!r}")
        report.error = {"type": "InternalError", "message": repr(e), "clause": ""}
        report.exit_code = InternalError.exit_code
    click.echo(report_service.render(report, ctx.obj["out"]), nl=False)
    ctx.exit(report.exit_code)


def load(ctx: click.Context, path: str, *kinds: str) -> InstanceFile:
    instance = json_service.load(path)
    if kinds:
        json_service.require_kind(instance, *kinds)
    if instance.context != ctx.obj["context"]:
        raise PreconditionError(
            f"{path} uses p={instance.context.p}, g={instance.context.g}; "
            f"run with --prime {instance.context.p} --generator {instance.context.g}",
            clause="context.mismatch",
        )
    return instance


DEFAULT_WINDOW = f"{config.DEFAULT_T_WINDOW[0]}:{config.DEFAULT_T_WINDOW[1]}"


def parse_window(text: str) -> Tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise ParseError(f"Window must look like 'a:b', got {text!r}")
    return lo, hi


@click.group(cls=EngineGroup)
@click.option("--prime", default=config.DEFAULT_PRIME, show_default=True, type=int, help="Odd prime p")
@click.option("--generator", default=config.DEFAULT_GENERATOR, show_default=True, type=int,
              help="Topological generator g of Z_p^x")
@click.option("--out", default=config.DEFAULT_OUTPUT, show_default=True, type=click.Choice(config.OUTPUT_FORMATS))
@click.option("--seed", default=config.DEFAULT_SEED, show_default=True, type=int, help="Seed for gen")
@click.option("--window", default=DEFAULT_WINDOW, show_default=True, help="t window a:b for e2chart")
@click.option("-v", "--verbose", is_flag=True, help="Debug logging on stderr")
@click.pass_context
def cli(ctx, prime, generator, out, seed, window, verbose):
    """Exact homological algebra for modules with Adams operations"""
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    ctx.ensure_object(dict)
    ctx.obj["out"] = out
    ctx.obj["seed"] = seed
    ctx.obj["window"] = window
    try:
        ctx.obj["context"] = Context(prime, generator)
    except PreconditionError as e:
        logger.error(f"Invalid context: {e}")
        report = Report(["context", f"prime={prime}", f"generator={generator}"], exit_code=e.exit_code,
                        error={"type": type(e).__name__, "message": str(e), "clause": e.clause})
        click.echo(report_service.render(report, out), nl=False)
        ctx.exit(e.exit_code)


@cli.command()
@click.argument("path", type=click.Path())
@click.pass_context
def check(ctx, path):
    """Validate the invariants of an instance file"""
    def body(report: Report):
        instance = load(ctx, path)
        adams = q_service.adams
        payload = instance.payload
        result = {"kind": instance.kind}
        if instance.kind == "bobject":
            adams.check_bobject(payload)
            result.update(module_dict(payload.module))
            result["weights"] = {str(k): v for k, v in adams.weight_profile(payload).items()}
        elif instance.kind == "aobject":
            for comp in payload.components:
                adams.check_bobject(comp)
            result["components"] = [str(c) for c in payload.components]
        elif instance.kind == "pair":
            adams.check_bobject(payload["source"])
            adams.check_bobject(payload["target"])
        elif instance.kind == "ses":
            homalg_service.check_ses(payload)
        elif instance.kind == "ladder":
            homalg_service.check_ses(payload["top"])
            homalg_service.check_ses(payload["bottom"])
            adams.make_bmorphism(payload["top"].sub, payload["bottom"].sub, payload["f_b"])
            adams.make_bmorphism(payload["top"].quotient, payload["bottom"].quotient, payload["f_g"])
        elif instance.kind == "complex":
            complex_service.validate(payload)
            result["flavor"] = payload.flavor
        elif instance.kind == "complex_pair":
            for c in payload:
                complex_service.validate(c)
        elif instance.kind == "diagram":
            q_service.validate(payload)
        report.result = result
        report.certify("invariants", True)
    run(ctx, body)


@cli.command()
@click.argument("path", type=click.Path())
@click.pass_context
def cohomology(ctx, path):
    """Cohomology of a twisted complex and its assembled object"""
    def body(report: Report):
        c = load(ctx, path, "complex").payload
        complex_service.validate(c)
        h = complex_service.cohomology(c)
        if c.flavor == FLAVOR_B:
            degrees = [{"degree": i, **module_dict(g.module)} for i, g in enumerate(h.groups)]
        else:
            degrees = [{"component": j, **module_dict(g.module)} for j, g in enumerate(h.groups[0].components)]
        assembled = complex_service.assembled_cohomology(c)
        report.result = {
            "flavor": c.flavor,
            "cohomology": degrees,
            "assembled": [str(x) for x in assembled.components],
            "acyclic": complex_service.is_acyclic(c),
        }
    run(ctx, body)


@cli.command()
@click.argument("path", type=click.Path())
@click.pass_context
def split(ctx, path):
    """C1-A complex to its C2p2-B counterpart"""
    def body(report: Report):
        c = load(ctx, path, "complex").payload
        if c.flavor != FLAVOR_A:
            raise PreconditionError("split expects a C1-A complex", clause="complex.flavor")
        complex_service.validate(c)
        report.result = json_service.write_complex(complex_service.split_to_b(c))
        back = complex_service.unsplit_round_trip(c)
        report.certify("unsplit_to_A ∘ split_to_B ≅ id", complex_service.is_quasi_iso(back))
    run(ctx, body)


@cli.command()
@click.argument("path", type=click.Path())
@click.pass_context
def unsplit(ctx, path):
    """C2p2-B complex to its C1-A counterpart"""
    def body(report: Report):
        c = load(ctx, path, "complex").payload
        if c.flavor != FLAVOR_B:
            raise PreconditionError("unsplit expects a C2p2-B complex", clause="complex.flavor")
        complex_service.validate(c)
        report.result = json_service.write_complex(complex_service.unsplit_to_a(c))
        back = complex_service.split_round_trip(c)
        report.certify("split_to_B ∘ unsplit_to_A ≅ id", complex_service.is_quasi_iso(back))
    run(ctx, body)


@cli.command()
@click.argument("path_m", type=click.Path())
@click.argument("path_n", type=click.Path(), required=False)
@click.option("-s", "--degree", default=1, show_default=True, type=int)
@click.pass_context
def ext(ctx, path_m, path_n, degree):
    """Ext^s(M, N) from two bobject files or one pair file"""
    def body(report: Report):
        if path_n is None:
            pair = load(ctx, path_m, "pair").payload
            m, n = pair["source"], pair["target"]
        else:
            m = load(ctx, path_m, "bobject").payload
            n = load(ctx, path_n, "bobject").payload
        group = homalg_service.ext(m, n, degree)
        res = group.complex.resolution
        report.result = {"s": degree, **module_dict(group.module), "resolution_ranks": list(res.ranks)}
        report.certify("resolution exact", homalg_service.certify_resolution(res))
        report.certify("resolution length ≤ 2", res.length <= 2)
    run(ctx, body)


@cli.command()
@click.argument("path_1", type=click.Path())
@click.argument("path_2", type=click.Path(), required=False)
@click.option("--window", default=None, help="Overrides the global --window")
@click.option("-n", "--total-degree", type=int, default=None, help="Assemble the pieces of this total degree")
@click.pass_context
def e2chart(ctx, path_1, path_2, window, total_degree):
    """E2 chart of the spectral sequence for Hom(C1, C2)"""
    def body(report: Report):
        t_window = parse_window(window or ctx.obj["window"])
        if path_2 is None:
            c1, c2 = load(ctx, path_1, "complex_pair").payload
        else:
            c1 = load(ctx, path_1, "complex").payload
            c2 = load(ctx, path_2, "complex").payload
        for c in (c1, c2):
            complex_service.validate(c)
        page = spectral_service.e2_page(c1, c2, t_window)
        vanishing = spectral_service.vanishing_check(page)
        result = {
            "window": list(page.t_window),
            "allowed_residues": sorted(page.allowed_residues()),
            "cells": spectral_service.cell_map(page),
            "vanishing": vanishing.to_dict(),
            "collapse_certificate": page.collapse_certificate is not None,
        }
        if total_degree is not None:
            result["assembly"] = spectral_service.collapse_and_assemble(page, total_degree).to_dict()
        report.result = result
        report.chart = spectral_service.chart_ascii(page)
        report.certify("vanishing pattern", vanishing.passed)
    run(ctx, body)


@cli.group()
def q():
    """Q-construction from diagram data"""


@q.command("build")
@click.argument("path", type=click.Path())
@click.pass_context
def q_build(ctx, path):
    def body(report: Report):
        d = load(ctx, path, "diagram").payload
        c = q_service.q_build(d)
        report.result = json_service.write_complex(c)
        report.certify("d∘d = 0", complex_service.nonzero_square(c) is None)
        report.certify("im(d) ≅ B", q_service.image_certificate(d))
    run(ctx, body)


@q.command("invert")
@click.argument("path", type=click.Path())
@click.pass_context
def q_invert(ctx, path):
    def body(report: Report):
        c = load(ctx, path, "complex").payload
        if c.flavor == FLAVOR_A:
            c = complex_service.split_to_b(c)
        complex_service.validate(c)
        d = q_service.q_inverse(c)
        report.result = json_service.write_diagram(d)
        report.certify("q_build ∘ q_inverse ≅ id", q_service.round_trip_certificate(c))
    run(ctx, body)


@q.command("check")
@click.argument("path", type=click.Path())
@click.pass_context
def q_check(ctx, path):
    """All Q-construction certificates for a diagram or a complex file"""
    def body(report: Report):
        instance = load(ctx, path, "diagram", "complex")
        if instance.kind == "complex":
            c = instance.payload
            if c.flavor == FLAVOR_A:
                c = complex_service.split_to_b(c)
            complex_service.validate(c)
            report.certify("q_build ∘ q_inverse ≅ id", q_service.round_trip_certificate(c))
            d = q_service.q_inverse(c)
        else:
            d = instance.payload
        report.certify("d∘d = 0", complex_service.nonzero_square(q_service.q_build(d)) is None)
        report.certify("im(d) ≅ B", q_service.image_certificate(d))
        hocolim = q_service.hocolim_homology(d)
        report.certify("ker(π) ≅ H(Q) per degree", hocolim.certified,
                       [{"degree": x.degree, "kernel": str(x.kernel_part), "homology": str(x.homology_part)}
                        for x in hocolim.comparisons])
        report.result = {
            "kernel_object": [str(x) for x in hocolim.kernel_object.components],
            "homology_object": [str(x) for x in hocolim.homology_object.components],
        }
    run(ctx, body)


@cli.group()
def hom():
    """Hom bookkeeping between Q-constructions"""


@hom.command("assemble")
@click.argument("path_1", type=click.Path())
@click.argument("path_2", type=click.Path())
@click.pass_context
def hom_assemble(ctx, path_1, path_2):
    def body(report: Report):
        d1 = load(ctx, path_1, "diagram").payload
        d2 = load(ctx, path_2, "diagram").payload
        a = q_service.assemble_hom(d1, d2)
        report.result = {
            "N": module_dict(a.n_module),
            "kernel_part": module_dict(a.kernel_part),
            "N_prime": module_dict(a.n_prime),
            "ext_target": module_dict(a.ext_target),
            "M": module_dict(a.m_module),
            "chain_maps": module_dict(a.chain_maps),
        }
        report.certify("kernel part injects into N", a.kernel_injective)
        report.certify("exact at N", a.exact_at_n)
        report.certify("exact at N'", a.exact_at_n_prime)
        report.certify("ker D ≅ chain maps", a.m_matches)
    run(ctx, body)


@cli.command()
@click.argument("path", type=click.Path())
@click.pass_context
def lift(ctx, path):
    """Lifting obstruction for a ladder of extensions"""
    def body(report: Report):
        ladder = load(ctx, path, "ladder").payload
        adams = q_service.adams
        top, bottom = ladder["top"], ladder["bottom"]
        f_b = adams.make_bmorphism(top.sub, bottom.sub, ladder["f_b"])
        f_g = adams.make_bmorphism(top.quotient, bottom.quotient, ladder["f_g"])
        s = homalg_service.ext_class_of(top)
        s_tilde = homalg_service.ext_class_of(bottom)
        result = homalg_service.lifting_obstruction(f_b, f_g, s, s_tilde)
        report.result = {
            "liftable": result.liftable,
            "obstruction": [str(x) for x in homalg_service.class_coordinates(result.obstruction)],
            "witness": result.witness.matrix.to_strings() if result.witness else None,
        }
        pushed = homalg_service.ext_class_of(homalg_service.pushout_sequence(f_b, top))
        pulled = homalg_service.ext_class_of(homalg_service.pullback_sequence(f_g, bottom))
        report.certify("obstruction agrees with pushout/pullback classes",
                       homalg_service.classes_equal(pushed, pulled) == result.liftable)
    run(ctx, body)


@cli.command()
@click.argument("kind", type=click.Choice(sorted(GEN_KINDS)))
@click.option("--size", default=config.DEFAULT_GEN_SIZE, show_default=True, type=int)
@click.option("-o", "--output", type=click.Path(), default=None, help="Write the instance here instead of stdout")
@click.pass_context
def gen(ctx, kind, size, output):
    """Seeded random instance file"""
    try:
        instance = generator_service.generate(kind, ctx.obj["seed"], size, ctx.obj["context"])
    except EngineError as e:
        logger.error(f"gen {kind} failed: {e}")
        ctx.exit(e.exit_code)
    text = json_service.dumps(instance)
    if output:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        click.echo(text, nl=False)


def main(argv: Optional[List[str]] = None) -> None:
    cli.main(args=argv, prog_name="adams-engine")


if __name__ == "__main__":
    main()
