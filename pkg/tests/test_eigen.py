import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cauchylab.domains import DomainSpec, build_mesh, l2_norm
from cauchylab.eigen import annulus_cross_product, annulus_eigen_wavenumber, ground_state, v0_field
from cauchylab.specfun import bessel_j0_first_zero

DISK = DomainSpec.disk()
SQUARE = DomainSpec.square()
ANNULUS = DomainSpec.annulus(0.5, 1.0)
ALL = [DISK, SQUARE, ANNULUS, DomainSpec.disk(2.5), DomainSpec.rectangle(2.0, 0.5), DomainSpec.annulus(0.2, 1.3)]

# smallest root of the cross product for (0.5, 1): 1e-4 scan of (0, 20] with
# scipy.special.j0/y0, polished by scipy.optimize.brentq
ANNULUS_K1 = 6.246061839191384


def interior_samples(spec, n, seed=0, margin=0.05):
    rng = np.random.default_rng(seed)
    out = []
    lo = spec.center() - spec.diameter()
    while len(out) < n:
        z = lo + 2 * spec.diameter() * (rng.random() + 1j * rng.random())
        if spec.contains(z) and spec.distance_to_boundary(z) > margin * spec.diameter():
            out.append(z)
    return np.array(out)


def fd_laplacian(u, z, h):
    return (u(z + h) + u(z - h) + u(z + 1j * h) + u(z - 1j * h) - 4 * u(z)) / (h * h)


def fd_gradient(u, z, h):
    return (u(z + h) - u(z - h)) / (2 * h), (u(z + 1j * h) - u(z - 1j * h)) / (2 * h)


class TestAnnulusWavenumber:
    def test_root(self):
        k = annulus_eigen_wavenumber(0.5, 1.0)
        assert abs(annulus_cross_product(k, 0.5, 1.0)) < 1e-10
        assert abs(k - ANNULUS_K1) < 1e-10

    def test_scaling(self):
        assert abs(annulus_eigen_wavenumber(1.0, 2.0) - ANNULUS_K1 / 2) < 1e-9

    def test_exceeds_disk(self):
        assert annulus_eigen_wavenumber(0.5, 1.0) > bessel_j0_first_zero()

    def test_thin_annulus(self):
        # first root near pi / (R - r) lies beyond kR = 20 for r/R = 0.9
        k = annulus_eigen_wavenumber(0.9, 1.0)
        assert abs(annulus_cross_product(k, 0.9, 1.0)) < 1e-10
        assert abs(k - math.pi / 0.1) < 0.05 * k

    @given(st.floats(0.05, 0.95))
    def test_is_first_root(self, q):
        k = annulus_eigen_wavenumber(q, 1.0)
        ks = np.linspace(1e-3, k, 2000)[:-1]
        vals = annulus_cross_product(ks, q, 1.0)
        assert np.all(vals > 0) or np.all(vals < 0)

    @pytest.mark.parametrize("r,R", [(0.0, 1.0), (1.0, 1.0), (1.0, 0.5)])
    def test_invalid(self, r, R):
        with pytest.raises(ValueError):
            annulus_eigen_wavenumber(r, R)


class TestGroundState:
    def test_disk(self):
        pair = ground_state(DISK)
        assert pair.lambda1 == pytest.approx(2.4048255577**2, abs=1e-8)
        assert pair.lambda1 == pytest.approx(5.7832, abs=1e-4)

    def test_square(self):
        assert ground_state(SQUARE).lambda1 == pytest.approx(2 * math.pi**2, rel=1e-15)

    def test_annulus_boundary_and_positivity(self):
        pair = ground_state(ANNULUS)
        f, df = pair.radial_profile
        assert abs(f(0.5)) < 1e-14 and abs(f(1.0)) < 1e-12
        assert f(0.75) > 0
        assert np.all(f(np.linspace(0.51, 0.99, 50)) > 0)

    def test_annulus_hopf(self):
        f, df = ground_state(ANNULUS).radial_profile
        assert abs(df(0.5)) > 1e-3
        # Wronskian fixes f'(r) = 2 / (pi r) for this normalization
        assert df(0.5) == pytest.approx(4 / math.pi, rel=1e-12)

    @pytest.mark.parametrize("spec", ALL)
    def test_vanishes_on_boundary(self, spec):
        pair = ground_state(spec)
        assert np.max(np.abs(pair.u(spec.boundary_points(64)))) < 1e-9

    @pytest.mark.parametrize("spec", ALL)
    def test_positive_inside(self, spec):
        pair = ground_state(spec)
        pts = spec.sample_grid(25)
        assert np.all(pair.u(pts) > 0)
        if spec.kind == "annulus":
            mid = 0.5 * (spec.r_inner + spec.r_outer)
        elif spec.kind == "disk":
            mid = 0.5 * spec.radius
        else:
            mid = spec.center()
        assert pair.u(mid) > 0

    @pytest.mark.parametrize("spec", ALL)
    def test_pde_residual(self, spec):
        pair = ground_state(spec)
        z = interior_samples(spec, 100)
        h = 1e-5 * spec.diameter()
        lap = fd_laplacian(pair.u, z, h)
        u = pair.u(z)
        assert np.all(np.abs(-lap - pair.lambda1 * u) <= 1e-4 * pair.lambda1 * np.abs(u))

    @pytest.mark.parametrize("spec", ALL)
    def test_dz_u_matches_gradient(self, spec):
        pair = ground_state(spec)
        z = interior_samples(spec, 50, seed=1)
        ux, uy = fd_gradient(pair.u, z, 1e-6 * spec.diameter())
        dz = pair.dz_u(z)
        assert np.allclose(dz, 0.5 * (ux - 1j * uy), rtol=1e-5, atol=1e-7)
        # |u_z|^2 = |grad u|^2 / 4 for real u
        assert np.allclose(np.abs(dz) ** 2, 0.25 * (ux**2 + uy**2), rtol=1e-5, atol=1e-10)

    def test_square_dz_formula(self):
        pair = ground_state(SQUARE)
        z = 0.3 + 0.8j
        x, y = 0.3, 0.8
        ref = (math.pi / 2) * (math.cos(math.pi * x) * math.sin(math.pi * y) - 1j * math.sin(math.pi * x) * math.cos(math.pi * y))
        assert pair.dz_u(z) == pytest.approx(ref, abs=1e-15)

    def test_disk_dz_at_center(self):
        assert ground_state(DISK).dz_u(0j) == 0


class TestV0:
    def test_square_corner(self):
        assert v0_field(ground_state(SQUARE), 0j) == 0

    def test_disk_center(self):
        assert v0_field(ground_state(DISK), 0j) == 0

    @pytest.mark.parametrize("spec", ALL)
    def test_dbar_v0_is_u(self, spec):
        pair = ground_state(spec)
        z = interior_samples(spec, 50, seed=2)
        h = 1e-5 * spec.diameter()

        def v(w):
            return v0_field(pair, w)

        vx, vy = fd_gradient(v, z, h)
        dbar = 0.5 * (vx + 1j * vy)
        u = pair.u(z)
        assert np.all(np.abs(dbar - u) <= 1e-5 * np.abs(u))

    @pytest.mark.parametrize("spec", [DISK, SQUARE, ANNULUS])
    def test_norm_threshold(self, spec):
        pair = ground_state(spec)
        mesh = build_mesh(spec, 3)
        ratio = l2_norm(mesh, v0_field(pair, mesh.nodes)) / l2_norm(mesh, pair.u(mesh.nodes))
        assert ratio == pytest.approx(2 / math.sqrt(pair.lambda1), rel=1e-6)
