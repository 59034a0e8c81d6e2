import math

import numpy as np
import pytest
from scipy import integrate

from epd_gossip.errors import (
    DomainError,
    QuadratureUnresolvedError,
    ResolutionTooLowError,
)
from epd_gossip.oracles import (
    EpdSolution,
    HeatSolution,
    default_quad_points,
    epd_eval,
    epd_filtered_on_lattice,
    epd_fourier,
    heat_eval,
    sinc_filter,
    uniform_ball_density,
)

Q_TRI = np.array([[2 / 3, 1 / 3], [1 / 3, 2 / 3]])


class TestHeat:
    def test_standard_gaussian_at_origin(self):
        sol = HeatSolution(1, [[1.0]], 1.0)
        assert heat_eval(sol, [0.0]) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-12)

    def test_even(self):
        sol = HeatSolution(2, Q_TRI, 3.0)
        rng = np.random.default_rng(0)
        for _ in range(20):
            y = rng.normal(size=2)
            assert heat_eval(sol, y) == pytest.approx(heat_eval(sol, -y), rel=1e-14)

    def test_trapezoid_mass_oracle(self):
        # independent full-grid quadrature, not the radial construction check
        sol = HeatSolution(1, [[1.0]], 1.0)
        ys = np.arange(-10.0, 10.0 + 1e-3, 1e-3).reshape(-1, 1)
        vals = heat_eval(sol, ys)
        mass = np.trapezoid(vals, dx=1e-3)
        assert mass == pytest.approx(1.0, abs=1e-8)

    def test_mass_check_2d_runs_at_construction(self):
        HeatSolution(2, Q_TRI, 7.0)  # raises if the radial mass check fails

    def test_requires_positive_time(self):
        with pytest.raises(DomainError):
            HeatSolution(1, [[1.0]], 0.0)


class TestEpdEval:
    def test_d1_alpha_half_value_and_support(self):
        sol = EpdSolution(0.5, 1, [[0.5]], 2.0)
        inside = epd_eval(sol, [0.5])
        assert inside == pytest.approx(0.3535533905932738, rel=1e-12)
        # support is {y^2 <= t^2 Q} = {|y| <= sqrt(2)}
        assert epd_eval(sol, [1.4]) == inside
        assert epd_eval(sol, [1.5]) == 0.0
        # analytic mass: constant * width
        assert inside * 2 * math.sqrt(2.0) == pytest.approx(1.0, rel=1e-12)

    def test_alpha_equals_half_d_constant_interior(self):
        sol = EpdSolution(1.0, 2, Q_TRI, 9.0)
        rng = np.random.default_rng(1)
        vals = []
        while len(vals) < 2:
            y = rng.uniform(-3, 3, size=2)
            if y @ np.linalg.inv(Q_TRI) @ y < 0.8 * 81:
                vals.append(epd_eval(sol, y))
        assert vals[0] == vals[1]

    def test_vanishes_continuously_above_half_d(self):
        sol = EpdSolution(1.5, 1, [[1.0]], 4.0)
        boundary = 4.0
        assert epd_eval(sol, [boundary]) == 0.0
        assert 0 < epd_eval(sol, [0.999 * boundary]) < epd_eval(sol, [0.9 * boundary])

    def test_reduction_identity_alpha_half_d(self):
        # general formula vs independent indicator closed form
        rng = np.random.default_rng(2)
        for d, q in ((1, np.array([[0.5]])), (2, Q_TRI)):
            sol = EpdSolution(d / 2.0, d, q, 5.0)
            for _ in range(100):
                y = rng.uniform(-7, 7, size=d)
                a = epd_eval(sol, y)
                b = uniform_ball_density(sol, y)
                assert a == pytest.approx(b, abs=1e-12)

    def test_integrability_guard(self):
        with pytest.raises(DomainError):
            EpdSolution(0.0, 2, Q_TRI, 1.0)

    def test_anisotropy_transform(self):
        # u_Q(y) = u_I(Q^(-1/2) y) (det Q)^(-1/2)
        sol_q = EpdSolution(1.0, 2, Q_TRI, 6.0)
        sol_i = EpdSolution(1.0, 2, np.eye(2), 6.0)
        eigval, eigvec = np.linalg.eigh(Q_TRI)
        inv_sqrt = eigvec @ np.diag(eigval**-0.5) @ eigvec.T
        det = float(np.linalg.det(Q_TRI))
        rng = np.random.default_rng(3)
        for _ in range(100):
            y = rng.uniform(-8, 8, size=2)
            lhs = epd_eval(sol_q, y)
            rhs = epd_eval(sol_i, inv_sqrt @ y) / math.sqrt(det)
            assert lhs == pytest.approx(rhs, abs=1e-10)

    def test_mass_normalization_at_construction_d1_singular_edge(self):
        # alpha < d/2 diverges at the boundary; the radial check must still pass
        EpdSolution(0.25, 1, [[0.5]], 5.0)
        EpdSolution(0.75, 1, [[0.5]], 5.0)
        EpdSolution(1.0, 2, Q_TRI, 5.0)


class TestEpdFourier:
    def test_unit_mass_at_zero(self):
        sol = EpdSolution(1.0, 2, Q_TRI, 5.0)
        assert epd_fourier(sol, [0.0, 0.0]) == 1.0

    def test_scale_invariance(self):
        zeta = np.array([1.0, 0.0])
        vals = []
        for t in (1.0, 2.0, 5.0):
            sol = EpdSolution(1.0, 2, Q_TRI, t, verify_mass=False)
            vals.append(epd_fourier(sol, zeta / t))
        assert vals[0] == pytest.approx(vals[1], rel=1e-12)
        assert vals[0] == pytest.approx(vals[2], rel=1e-12)

    def test_half_order_zero_at_pi(self):
        sol = EpdSolution(0.5, 1, [[1.0]], 1.0)
        assert epd_fourier(sol, [math.pi]) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("alpha", [0.5, 1.0])
    def test_matches_quadrature_of_density(self, alpha):
        # oracle: FT of the space-domain density by smooth-substitution quadrature
        t = 5.0
        q = 1.0
        sol = EpdSolution(alpha, 1, [[q]], t)
        b = t * math.sqrt(q)
        theta = np.linspace(-math.pi / 2, math.pi / 2, 20001)
        y = b * np.sin(theta)
        density = epd_eval(sol, y.reshape(-1, 1))
        for xi in np.linspace(-math.pi, math.pi, 20):
            integrand = density * np.exp(1j * xi * y) * b * np.cos(theta)
            val = np.trapezoid(integrand, theta)
            assert epd_fourier(sol, [xi]) == pytest.approx(float(val.real), abs=1e-6)


class TestSinc:
    def test_values(self):
        assert sinc_filter([0.0]) == 1.0
        assert sinc_filter([0.0, 0.0]) == 1.0
        assert sinc_filter([3.0]) == pytest.approx(0.0, abs=1e-16)
        assert sinc_filter([1.0, 2.0]) == pytest.approx(0.0, abs=1e-16)
        assert sinc_filter([0.5]) == pytest.approx(2 / math.pi, rel=1e-12)


class TestFilteredOnLattice:
    def test_default_resolution(self):
        assert default_quad_points(25.0) == 200
        assert default_quad_points(2.0) == 64

    def test_agrees_with_space_domain_convolution(self):
        # independent oracle: (u * psi)(v) = int u(z) psi(v - z) dz by direct
        # quadrature over the compact support of u
        t = 20.0
        sol = EpdSolution(0.5, 1, [[0.5]], t)
        fld = epd_filtered_on_lattice(sol, 25, 2048)
        b = t * math.sqrt(0.5)
        height = epd_eval(sol, [0.0])
        for v in (0, 3, 11, 25):
            direct, _ = integrate.quad(
                lambda z: height * np.sinc(v - z), -b, b, limit=800
            )
            assert fld.value_at((v,)) == pytest.approx(direct, abs=1e-4)
        # the band-limiting moves the center value only slightly
        assert fld.value_at((0,)) == pytest.approx(height, abs=5e-3)

    def test_mass_close_to_one(self):
        # sinc tails at integer points decay like 1/v^2, so "sufficiently
        # large" here means well beyond the minimum t sqrt(Q) + 10 box
        t = 20.0
        sol = EpdSolution(0.5, 1, [[0.5]], t)
        fld = epd_filtered_on_lattice(sol, 45, 2048)
        assert fld.mass() == pytest.approx(1.0, abs=1e-4)

    def test_doubling_stability_at_harness_resolution(self):
        sol = EpdSolution(0.5, 1, [[0.5]], 25.0)
        a = epd_filtered_on_lattice(sol, 30, 2048)
        b = epd_filtered_on_lattice(sol, 30, 4096)
        assert np.abs(a.values - b.values).max() < 1e-6

    def test_unresolved_raises(self):
        # the built-in default M at t=25 leaves ~5e-6 aliasing: doubling check trips
        sol = EpdSolution(0.5, 1, [[0.5]], 25.0)
        with pytest.raises(QuadratureUnresolvedError):
            epd_filtered_on_lattice(sol, 30)

    def test_resolution_floor(self):
        sol = EpdSolution(0.5, 1, [[0.5]], 25.0, verify_mass=False)
        with pytest.raises(ResolutionTooLowError):
            epd_filtered_on_lattice(sol, 200, 256)

    def test_2d_triangular_case(self):
        sol = EpdSolution(1.0, 2, Q_TRI, 20.0)
        fld = epd_filtered_on_lattice(sol, 40, 512)
        assert fld.mass() == pytest.approx(1.0, abs=1e-4)
        assert fld.dim == 2
