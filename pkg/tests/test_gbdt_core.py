"""Tests of the transformation pipeline: data, grids, fields, Darboux algebra."""

import cmath
import math

import numpy as np
import pytest

from nnls_gbdt import gbdt_core, numkit, oracles
from nnls_gbdt.errors import (
    AsymmetricGrid,
    DegenerateS,
    DimensionMismatch,
    SingularPoint,
    SpectralPole,
    UnsupportedSeed,
)
from conftest import make_random_triple


def _h(m):
    return m.conj().T


# ---------------------------------------------------------------- triples


def test_triple_derived_quantities(scalar_triple, jordan_triple):
    assert scalar_triple.kappa == 0
    assert np.array_equal(scalar_triple.jk, np.eye(2))
    assert jordan_triple.n == 2 and jordan_triple.m1 == 1 and jordan_triple.m2 == 1
    focusing = gbdt_core.GbdtTriple(
        sigma=-1, A=[[1.0]], S0=[[1.5]], theta1=[[2.0]], theta2=[[1.0]]
    )
    assert focusing.kappa == 1
    assert np.array_equal(focusing.j, np.diag([1.0, -1.0]))
    assert np.array_equal(focusing.jk, focusing.j)


def test_triple_shape_validation():
    with pytest.raises(ValueError):
        gbdt_core.GbdtTriple(sigma=0, A=[[1.0]], S0=[[1.0]], theta1=[[1.0]], theta2=[[1.0]])
    with pytest.raises(DimensionMismatch):
        gbdt_core.GbdtTriple(
            sigma=1, A=[[1.0]], S0=np.eye(2), theta1=[[1.0]], theta2=[[1.0]]
        )
    with pytest.raises(DimensionMismatch):
        gbdt_core.GbdtTriple(
            sigma=1, A=np.eye(2), S0=np.eye(2), theta1=[[1.0]], theta2=np.ones((2, 1))
        )


def test_complete_triple_scalar_values():
    plus = gbdt_core.complete_triple(1, [[1.0]], [[2.0]], [[1.0]])
    minus = gbdt_core.complete_triple(-1, [[1.0]], [[2.0]], [[1.0]])
    assert plus.S0[0, 0] == pytest.approx(2.5)
    assert minus.S0[0, 0] == pytest.approx(1.5)
    empty_second = gbdt_core.complete_triple(1, [[1.0]], [[2.0]], [[0.0]])
    assert empty_second.S0[0, 0] == pytest.approx(2.0)


def test_complete_triple_degenerate():
    # equal column weights under the focusing sign cancel exactly
    with pytest.raises(DegenerateS):
        gbdt_core.complete_triple(-1, [[1.0]], [[1.0]], [[1.0]])


def test_validate_triple_entries(scalar_triple):
    report = gbdt_core.validate_triple(scalar_triple)
    assert report.passed
    assert report.sylvester_route_available
    names = {e.name for e in report.entries}
    assert names == {"hermiticity", "determinant", "identity", "sylvester_margin"}
    with pytest.raises(KeyError):
        report.entry("missing")
    as_dict = report.as_dict()
    assert as_dict["identity"]["passed"] is True


def test_validate_triple_flags_broken_data(scalar_triple):
    skewed = gbdt_core.GbdtTriple(
        sigma=1, A=scalar_triple.A, S0=[[2.5 + 1j]],
        theta1=scalar_triple.theta1, theta2=scalar_triple.theta2,
    )
    report = gbdt_core.validate_triple(skewed)
    assert not report.entry("hermiticity").passed
    assert not report.passed

    clashing = gbdt_core.GbdtTriple(
        sigma=1, A=[[1j]], S0=[[1.0]], theta1=[[1.0]], theta2=[[1.0]]
    )
    clash_report = gbdt_core.validate_triple(clashing)
    assert not clash_report.entry("sylvester_margin").passed
    assert not clash_report.sylvester_route_available


# -------------------------------------------------------- generating matrix


def test_pi_at_scalar_exponentials():
    triple = gbdt_core.GbdtTriple(
        sigma=1, A=[[1j]], S0=[[1.0]], theta1=[[1.0]], theta2=[[1.0]]
    )
    out = gbdt_core.pi_at(triple, 1.0, 0.0)
    assert np.allclose(out, [[math.exp(-1.0), math.exp(1.0)]], atol=1e-14)
    # A^2 = -1 turns the time factor into a plain phase
    out_t = gbdt_core.pi_at(triple, 0.0, 0.3)
    assert np.allclose(
        out_t, [[cmath.exp(0.6j), cmath.exp(-0.6j)]], atol=1e-14
    )


def test_pi_at_jordan_closed_form(jordan_triple):
    """For a Jordan cell the exponential truncates to a linear polynomial."""
    a, b, c = 1.0, 2.0, 0.3
    x = 1.0
    out = gbdt_core.pi_at(jordan_triple, x, 0.0)
    ea = cmath.exp(1j * x * a)
    expected = np.array(
        [[1j * x * b * ea, -1j * x * c / ea], [b * ea, c / ea]]
    )
    assert np.allclose(out, expected, atol=1e-13)


def test_pi_via_blocks_agrees(scalar_triple, jordan_triple, wide_triple):
    rng = np.random.default_rng(21)
    triples = [scalar_triple, jordan_triple, wide_triple,
               make_random_triple(rng, -1, n=3)]
    for triple in triples:
        for x, t in ((0.0, 0.0), (0.8, -0.3), (-1.2, 0.4)):
            direct = gbdt_core.pi_at(triple, x, t)
            blocks = gbdt_core.pi_via_blocks(triple, x, t)
            assert np.linalg.norm(direct - blocks) <= 1e-11 * max(
                1.0, np.linalg.norm(direct)
            )


# ------------------------------------------------------------------- S(x,t)


def test_s_at_matches_scalar_closed_form(scalar_triple):
    p = oracles.Example1Params(a=1.0, theta1=2.0, theta2=1.0, kappa=0)
    for x, t in ((0.5, 0.0), (-0.7, 0.2), (1.3, -0.4)):
        s = gbdt_core.s_at(scalar_triple, x, t)
        assert s[0, 0] == pytest.approx(oracles.ex1_S(p, x, t), abs=1e-12)


def test_s_at_matches_jordan_determinant(jordan_triple):
    p = oracles.Example2Params(a=1.0, b=2.0, c=0.3, kappa=0)
    for x, t in ((0.0, 0.0), (0.6, 0.15), (-0.9, -0.2)):
        det = np.linalg.det(gbdt_core.s_at(jordan_triple, x, t))
        assert det == pytest.approx(oracles.ex2_detS(p, x, t), abs=1e-10)


def test_s_at_mirror_conjugation(jordan_triple):
    for x, t in ((0.4, 0.1), (1.1, -0.25)):
        left = gbdt_core.s_at(jordan_triple, -x, t)
        right = _h(gbdt_core.s_at(jordan_triple, x, t))
        assert np.linalg.norm(left - right) <= 1e-10 * max(
            1.0, np.linalg.norm(left)
        )


def test_s_via_integration_cross_route(jordan_triple):
    for x, t in ((0.7, 0.3), (-0.5, -0.2)):
        direct = gbdt_core.s_at(jordan_triple, x, t)
        integrated = gbdt_core.s_via_integration(jordan_triple, x, t, steps=400)
        assert np.linalg.norm(direct - integrated) <= 1e-8 * max(
            1.0, np.linalg.norm(direct)
        )


def test_s_propagation_closed_form_single_block():
    """With the second column block empty, S propagates by conjugation."""
    triple = gbdt_core.complete_triple(1, [[1.0]], [[2.0]], [[0.0]])
    a = triple.A
    for x, t in ((0.9, 0.2), (-1.4, -0.3)):
        e_here = numkit.expm(1j * (x * a - 2.0 * t * a @ a))
        e_mirror = numkit.expm(1j * (-x * a - 2.0 * t * a @ a))
        expected = e_here @ triple.S0 @ _h(e_mirror)
        assert np.allclose(gbdt_core.s_at(triple, x, t), expected, atol=1e-12)


def test_unitary_change_of_basis_preserves_u():
    rng = np.random.default_rng(30)
    base = make_random_triple(rng, 1, n=2, m1=1, m2=1)
    q, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    rotated = gbdt_core.complete_triple(
        1, q @ base.A @ _h(q), q @ base.theta1, q @ base.theta2
    )
    for x, t in ((0.3, 0.1), (-0.8, -0.2)):
        u0 = gbdt_core.u_tilde_at(base, x, t)
        u1 = gbdt_core.u_tilde_at(rotated, x, t)
        assert np.linalg.norm(u0 - u1) <= 1e-10 * max(1.0, np.linalg.norm(u0))
        s1 = gbdt_core.s_at(rotated, x, t)
        s0 = gbdt_core.s_at(base, x, t)
        assert np.linalg.norm(s1 - q @ s0 @ _h(q)) <= 1e-10 * max(
            1.0, np.linalg.norm(s0)
        )


# ----------------------------------------------------------------- u and xi


def test_u_tilde_matches_all_three_families(
    scalar_triple, scalar_focusing_triple, jordan_triple, wide_triple
):
    points = ((0.3, 0.05), (-0.9, 0.2), (1.4, -0.3))
    cases = [
        (scalar_triple,
         oracles.Example1Params(a=1.0, theta1=2.0, theta2=1.0, kappa=0),
         lambda p, x, t: np.array([[oracles.ex1_u(p, x, t)]])),
        (scalar_focusing_triple,
         oracles.Example1Params(a=1.0, theta1=2.0, theta2=1.0, kappa=1),
         lambda p, x, t: np.array([[oracles.ex1_u(p, x, t)]])),
        (jordan_triple,
         oracles.Example2Params(a=1.0, b=2.0, c=0.3, kappa=0),
         lambda p, x, t: np.array([[oracles.ex2_u(p, x, t)]])),
        (wide_triple,
         oracles.Example3Params(a=1.0, b1=2.0, b2=1.0, c=1.0, kappa=0),
         oracles.ex3_u),
    ]
    for triple, params, evaluate in cases:
        for x, t in points:
            got = gbdt_core.u_tilde_at(triple, x, t)
            expected = evaluate(params, x, t)
            assert np.linalg.norm(got - expected) <= 1e-12 * max(
                1.0, np.linalg.norm(expected)
            )


def test_u_tilde_zero_solution():
    triple = gbdt_core.complete_triple(1, [[1.0]], [[2.0]], [[0.0]])
    assert gbdt_core.u_tilde_at(triple, 0.7, 0.2) == pytest.approx(0.0)


def test_u_tilde_singular_point():
    triple = gbdt_core.GbdtTriple(
        sigma=-1, A=[[1.0]], S0=[[0.0]], theta1=[[1.0]], theta2=[[1.0]]
    )
    with pytest.raises(SingularPoint):
        gbdt_core.u_tilde_at(triple, 0.0, 0.0)


def test_xi_tilde_block_structure(jordan_triple):
    """Diagonal blocks vanish; corners carry u and its reflected adjoint."""
    x, t = 0.5, 0.15
    xi = gbdt_core.xi_tilde_at(jordan_triple, x, t)
    u = gbdt_core.u_tilde_at(jordan_triple, x, t)
    u_mirror = gbdt_core.u_tilde_at(jordan_triple, -x, t)
    sigma = jordan_triple.sigma
    assert abs(xi[0, 0]) <= 1e-12 and abs(xi[1, 1]) <= 1e-12
    assert xi[0, 1] == pytest.approx(u[0, 0], abs=1e-12)
    assert xi[1, 0] == pytest.approx(-sigma * u_mirror[0, 0].conjugate(), abs=1e-12)


# ------------------------------------------------------------ Darboux algebra


def test_darboux_inverse_pair(scalar_triple, scalar_focusing_triple, jordan_triple):
    rng = np.random.default_rng(40)
    for triple in (scalar_triple, scalar_focusing_triple, jordan_triple):
        for _ in range(5):
            x = float(rng.uniform(-1.5, 1.5))
            t = float(rng.uniform(-0.3, 0.3))
            z = complex(rng.normal(), rng.normal()) + 3.0
            sample = gbdt_core.darboux_at(triple, x, t, z)
            assert np.linalg.norm(sample.wa @ sample.wb - np.eye(triple.m)) <= 1e-9


def test_darboux_reflected_conjugate_inverse(jordan_triple):
    x, t, z = 0.6, 0.2, 1.5 + 0.4j
    sample = gbdt_core.darboux_at(jordan_triple, x, t, z)
    mirror = gbdt_core.darboux_at(jordan_triple, -x, t, -z.conjugate())
    jk = jordan_triple.jk
    assert np.linalg.norm(sample.wb - jk @ _h(mirror.wa) @ jk) <= 1e-9


def test_darboux_decay_at_large_z(scalar_triple):
    for z in (100.0, 1000.0):
        sample = gbdt_core.darboux_at(scalar_triple, 0.4, 0.1, z)
        assert np.linalg.norm(sample.wa - np.eye(2)) <= 5.0 / z


def test_darboux_spectral_pole(scalar_triple):
    with pytest.raises(SpectralPole):
        gbdt_core.darboux_at(scalar_triple, 0.0, 0.0, 1.0)
    with pytest.raises(SpectralPole):
        gbdt_core.darboux_at(scalar_triple, 0.0, 0.0, -1.0)


def test_wave_approaches_plain_phase(scalar_triple):
    """Far from the spectrum the wave reduces to the bare exponential factor."""
    x, t = 0.7, 0.2
    for z in (100.0, 1000.0):
        wave = gbdt_core.wave_at(scalar_triple, x, t, z)
        phase = 1j * (z * x - 2.0 * z * z * t)
        bare = np.diag([cmath.exp(-phase), cmath.exp(phase)])
        assert np.linalg.norm(wave - bare) <= 5.0 / z


# ------------------------------------------------------------------- grids


def test_grid_build_basic():
    grid = gbdt_core.Grid.build(2.0, 5, -0.3, 0.5, 9)
    assert np.array_equal(grid.x_values, [-2.0, -1.0, 0.0, 1.0, 2.0])
    assert grid.nt == 9
    assert 0.0 in grid.t_values
    assert grid.hx == pytest.approx(1.0)
    assert grid.mirror(0) == 4 and grid.mirror(2) == 2


def test_grid_exact_symmetry():
    grid = gbdt_core.Grid.build(1.7, 31, -0.4, 0.4, 11)
    assert np.array_equal(grid.x_values, -grid.x_values[::-1])


def test_grid_halved_interleaves():
    grid = gbdt_core.Grid.build(1.0, 5, 0.0, 0.4, 3)
    fine = grid.halved()
    assert fine.nx == 9 and fine.nt == 5
    assert np.array_equal(fine.x_values[::2], grid.x_values)
    assert np.array_equal(fine.t_values[::2], grid.t_values)


def test_grid_rejects_bad_shapes():
    with pytest.raises(AsymmetricGrid):
        gbdt_core.Grid.build(1.0, 4, -0.1, 0.1, 5)
    with pytest.raises(AsymmetricGrid):
        gbdt_core.Grid.build(1.0, 5, 0.1, 0.5, 5)
    with pytest.raises(AsymmetricGrid):
        gbdt_core.Grid(x_values=[0.0, 1.0, 2.0], t_values=[0.0, 0.1])
    with pytest.raises(AsymmetricGrid):
        gbdt_core.Grid(x_values=[-1.0, 0.0, 1.0], t_values=[0.1, 0.2])


# ------------------------------------------------------------------- fields


def test_solution_field_matches_pointwise(jordan_triple, small_grid):
    field = gbdt_core.solution_field(jordan_triple, small_grid)
    assert field.u.shape == (small_grid.nx, small_grid.nt, 1, 1)
    assert field.S.shape == (small_grid.nx, small_grid.nt, 2, 2)
    rng = np.random.default_rng(50)
    for _ in range(6):
        k = int(rng.integers(0, small_grid.nx))
        l = int(rng.integers(0, small_grid.nt))
        point = gbdt_core.u_tilde_at(
            jordan_triple, float(small_grid.x_values[k]), float(small_grid.t_values[l])
        )
        assert np.allclose(field.u[k, l], point, atol=1e-11)


def test_solution_field_masks_singular_column():
    """Equal focusing weights put a standing zero of det S at x = 0."""
    triple = gbdt_core.GbdtTriple(
        sigma=-1, A=[[1.0]], S0=[[0.0]], theta1=[[1.0]], theta2=[[1.0]]
    )
    grid = gbdt_core.Grid.build(1.0, 9, -0.2, 0.2, 5)
    field = gbdt_core.solution_field(triple, grid)
    center = (grid.nx - 1) // 2
    assert field.singular_mask[center].all()
    assert not field.singular_mask[center + 1].any()
    assert np.isnan(field.u[center, 0, 0, 0].real)
    off_mask = field.u[~field.singular_mask]
    assert np.all(np.isfinite(off_mask))


def test_solution_field_deterministic(wide_triple, small_grid):
    first = gbdt_core.solution_field(wide_triple, small_grid)
    second = gbdt_core.solution_field(wide_triple, small_grid)
    assert np.array_equal(first.u, second.u, equal_nan=True)
    assert np.array_equal(first.S, second.S)
    assert np.array_equal(first.detS, second.detS)


def test_solution_field_rejects_seed(scalar_triple, small_grid):
    with pytest.raises(UnsupportedSeed):
        gbdt_core.solution_field(scalar_triple, small_grid, seed="plane wave")
