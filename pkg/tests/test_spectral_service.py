import random

import pytest
from sympy import multiplicity

from services.adams_service import AObject
from services.linalg_service import FPModule
from services.spectral_service import STATUS_DETERMINED, STATUS_GRADED, STATUS_UNDETERMINED, E2Cell
from tests.helpers import scalar_bobject
from utils.errors import PreconditionError


@pytest.fixture
def sphere(generator, ctx):
    return generator.generate("sphere", 0, 1, ctx).payload


@pytest.fixture
def sphere_page(spectral, sphere):
    return spectral.e2_page(sphere, sphere, (-12, 12))


def test_sphere_cells(spectral, sphere_page):
    assert sphere_page.offset() == 0
    assert str(spectral.cell(sphere_page, 0, 0).module) == "ℤ_(3)"
    for k in range(-3, 4):
        if k == 0:
            continue
        cell = spectral.cell(sphere_page, 1, 4 * k)
        assert cell.module.invariants.torsion == (1 + multiplicity(3, abs(k)),)
        assert spectral.cell(sphere_page, 0, 4 * k).is_zero()
    for t in range(-12, 13):
        if t % 4:
            assert all(spectral.cell(sphere_page, s, t).is_zero() for s in (0, 1, 2))
        assert spectral.cell(sphere_page, 2, t).is_zero()


def test_sphere_image_of_j_at_t_12(spectral, sphere_page):
    assert str(spectral.cell(sphere_page, 1, 12).module) == "ℤ/9"


def test_vanishing_holds_on_wide_windows(spectral, sphere):
    report = spectral.vanishing_check(spectral.e2_page(sphere, sphere, (-6, 6)))
    assert report.passed
    assert report.offset == 0
    assert report.checked >= 3 * 13
    assert report.structural_zeros


def test_forged_cell_fails_vanishing(spectral, sphere_page):
    z3 = FPModule.from_invariants(3, 0, [1])
    sphere_page.cells[(1, 1)] = E2Cell(1, 1, z3, (z3,))
    sphere_page.cells[(3, 4)] = E2Cell(3, 4, z3, (z3,))
    report = spectral.vanishing_check(sphere_page)
    assert not report.passed
    assert {(s, t) for s, t, _ in report.failures} == {(1, 1), (3, 4)}


def test_vanishing_lines(spectral):
    lines = spectral.forbidden_by_lines
    assert lines(0, 1, 1) and lines(0, 0, 1) and not lines(0, 0, 0)
    assert lines(1, 1, 2) and not lines(1, 0, 1)
    assert lines(1, 0, 0) and not lines(1, 1, 1)
    assert not lines(2, 1, 1)


def test_empty_window(spectral, sphere):
    with pytest.raises(PreconditionError) as e:
        spectral.e2_page(sphere, sphere, (3, 2))
    assert e.value.clause == "e2.window"


def test_cells_above_ceiling_are_zero(spectral, sphere_page):
    assert spectral.cell(sphere_page, 3, 0).is_zero()
    assert spectral.cell(sphere_page, 7, 4).is_zero()


def test_cells_agree_with_ext(spectral, adams, homalg, generator, ctx):
    rng = random.Random(13)
    y1 = generator.aobject(ctx, rng, 2)
    y2 = generator.aobject(ctx, rng, 2)
    page = spectral.page_for_objects(y1, y2, (-4, 4))
    for (s, t), cell in page.cells.items():
        for n, piece in enumerate(cell.pieces):
            source = adams.component_at(y1, n + t)
            expected = homalg.ext_or_zero(source, y2.components[n], s)
            assert piece.invariants == expected.invariants


def test_periodicity_in_t(spectral, adams, generator, ctx):
    rng = random.Random(2)
    y1 = generator.aobject(ctx, rng, 2)
    y2 = generator.aobject(ctx, rng, 2)
    page = spectral.page_for_objects(y1, y2, (-4, 8))
    shifted = spectral.page_for_objects(adams.twist_a(1, y1), y2, (-4, 4))
    both = spectral.page_for_objects(adams.twist_a(3, y1), adams.twist_a(3, y2), (-4, 4))
    for s in (0, 1, 2):
        for t in range(-4, 5):
            here = page.cells[(s, t)].module.invariants
            assert page.cells[(s, t + ctx.period)].module.invariants == shifted.cells[(s, t)].module.invariants
            assert both.cells[(s, t)].module.invariants == here


@pytest.mark.parametrize("k", [1, 2, 3, -1])
def test_sphere_collapses_below_image_of_j(spectral, sphere_page, k):
    result = spectral.collapse_and_assemble(sphere_page, 4 * k - 1)
    assert result.status == STATUS_DETERMINED
    assert [(s, t) for s, t, _ in result.pieces] == [(1, 4 * k)]
    assert result.certificate


def test_sphere_page_has_collapse_certificate(sphere_page):
    assert sphere_page.collapse_certificate is not None


def test_obstructed_pair_is_undetermined(spectral, generator, ctx):
    c1, c2 = generator.generate("e2-obstructed", 0, 1, ctx).payload
    page = spectral.e2_page(c1, c2, (-4, 4))
    assert page.offset() is None
    assert not spectral.cell(page, 0, 0).is_zero()
    assert not spectral.cell(page, 2, 1).is_zero()
    assert page.collapse_certificate is None
    result = spectral.collapse_and_assemble(page, 0)
    assert result.status == STATUS_UNDETERMINED
    assert (2, 1) in result.blockers
    assert result.certificate is None


def test_free_top_piece_splits_the_extension(spectral, adams, ctx):
    i = adams.free_b(ctx, 1, 0)
    zero = adams.zero_b(ctx)
    y1 = AObject(ctx, (i, i, zero, zero))
    y2 = adams.split_embed(0, i)
    page = spectral.page_for_objects(y1, y2, (-2, 4))
    result = spectral.collapse_and_assemble(page, 0)
    assert [(s, t) for s, t, _ in result.pieces] == [(0, 0), (1, 1)]
    assert str(result.pieces[0][2]) == "ℤ_(3)"
    assert result.status == STATUS_DETERMINED


def test_torsion_top_piece_leaves_extension_open(spectral, adams, ctx):
    i = adams.free_b(ctx, 1, 0)
    zero = adams.zero_b(ctx)
    y1 = AObject(ctx, (i, i, zero, zero))
    y2 = adams.split_embed(0, scalar_bobject(ctx, [1], 1))
    page = spectral.page_for_objects(y1, y2, (-2, 4))
    result = spectral.collapse_and_assemble(page, 0)
    assert [(s, t) for s, t, _ in result.pieces] == [(0, 0), (1, 1)]
    assert str(result.pieces[0][2]) == "ℤ/3"
    assert result.status == STATUS_GRADED


def test_chart(spectral, sphere):
    page = spectral.e2_page(sphere, sphere, (-4, 4))
    chart = spectral.chart_ascii(page)
    lines = chart.splitlines()
    assert lines[0].startswith("s=2 |")
    assert lines[2].startswith("s=0 |")
    window = [page.cells[(s, t)] for s in (0, 1, 2) for t in range(-4, 5)]
    assert chart.count("*") == sum(not c.is_zero() for c in window)
    assert len(spectral.cell_map(page)) >= 3 * 9
