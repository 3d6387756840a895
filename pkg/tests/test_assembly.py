import numpy as np
import pytest

from hpvem import assembly as asm
from hpvem import degrees as dg
from hpvem import geometry as geo
from hpvem import local as lo
from hpvem.assembly import DIRICHLET, NEUMANN, BoundaryCondition, CoefficientField

NEU = BoundaryCondition(NEUMANN)
DIR = BoundaryCondition(DIRICHLET)


class TestDofMap:
    def test_single_square_neumann(self):
        mesh = geo.generate_cartesian(1, 1, (0, 1, 0, 1))
        dm = asm.build_dof_map(mesh, dg.assign_uniform(mesh, 1), NEU)
        assert dm.n_free == 4

    def test_single_square_dirichlet_rejected(self):
        mesh = geo.generate_cartesian(1, 1, (0, 1, 0, 1))
        with pytest.raises(ValueError, match="coarse"):
            asm.build_dof_map(mesh, dg.assign_uniform(mesh, 1), DIR)

    def test_2x2_p2_neumann_count(self):
        mesh = geo.generate_cartesian(2, 2, (0, 1, 0, 1))
        dm = asm.build_dof_map(mesh, dg.assign_uniform(mesh, 2), NEU)
        assert dm.n_free == 9 + 12 + 4

    def test_shared_edge_orientation(self):
        # edge DOFs seen from both sides must map to the same global slots
        mesh = geo.generate_cartesian(2, 1, (0, 2, 0, 1))
        dmap = asm.build_dof_map(mesh, dg.assign_uniform(mesh, 3), NEU)
        g0 = dmap.cell_to_global(0)
        g1 = dmap.cell_to_global(1)
        shared = set(g0.tolist()) & set(g1.tolist())
        eid = int(np.flatnonzero(~mesh.boundary_edges)[0])
        base = dmap.edge_offset[eid]
        assert {base, base + 1} <= shared

    def test_degree_map_mismatch(self):
        mesh = geo.generate_cartesian(2, 2, (0, 1, 0, 1))
        other = geo.generate_cartesian(3, 3, (0, 1, 0, 1))
        with pytest.raises(ValueError, match="degree map"):
            asm.build_dof_map(mesh, dg.assign_uniform(other, 1), NEU)


class TestAssemble:
    def test_neumann_constants_in_kernel(self):
        mesh = geo.generate_cartesian(3, 3, (0, 1, 0, 1))
        for p in (1, 2, 4):
            system = asm.assemble(mesh, dg.assign_uniform(mesh, p), None, lo.DRECIPE, NEU)
            c = asm.constant_vector(system.dof_map)
            assert np.abs(system.a @ c).max() < 1e-11 * max(1.0, abs(system.a).max())

    def test_symmetry(self):
        mesh = geo.generate_voronoi(9, (0, 1, 0, 1), lloyd_iterations=2, rng_seed=5)
        system = asm.assemble(mesh, dg.assign_uniform(mesh, 3), None, lo.EXPLICIT, NEU)
        for mat in (system.a, system.m):
            assert abs(mat - mat.T).max() <= 1e-12 * abs(mat).max()

    def test_2x2_dirichlet_p1_hand_values(self):
        mesh = geo.generate_cartesian(2, 2, (0, 1, 0, 1))
        dm = dg.assign_uniform(mesh, 1)
        sys_dr = asm.assemble(mesh, dm, None, lo.DRECIPE, DIR)
        assert sys_dr.n == 1
        m11 = 1 / 16 + 5 * np.sqrt(2) / 12
        assert sys_dr.a[0, 0] == pytest.approx(3.0, abs=1e-12)
        assert sys_dr.m[0, 0] == pytest.approx(m11, abs=1e-12)
        # the single-DOF Rayleigh quotient of the stabilized forms sits far
        # below the continuous value: the boundary mass stabilization
        # dominates M at this resolution
        assert sys_dr.a[0, 0] / sys_dr.m[0, 0] == pytest.approx(4.60295, abs=1e-4)
        sys_ex = asm.assemble(mesh, dm, None, lo.EXPLICIT, DIR)
        assert sys_ex.a[0, 0] == pytest.approx(2 + np.sqrt(2) / 6, abs=1e-12)

    def test_mass_positive_definite(self):
        mesh = geo.generate_voronoi(8, (0, 1, 0, 1), lloyd_iterations=1, rng_seed=2)
        system = asm.assemble(mesh, dg.assign_uniform(mesh, 2), None, lo.DRECIPE, NEU)
        np.linalg.cholesky(system.m.toarray())

    def test_neumann_laplace_rank_deficiency_one(self):
        mesh = geo.generate_cartesian(3, 3, (0, 1, 0, 1))
        system = asm.assemble(mesh, dg.assign_uniform(mesh, 2), None, lo.DRECIPE, NEU)
        a = system.a.toarray()
        vals = np.linalg.eigvalsh(a)
        scale = abs(vals).max()
        assert (np.abs(vals) < 1e-9 * scale).sum() == 1

    def test_hp_path_bit_identical_to_uniform(self):
        mesh = geo.generate_cartesian(2, 2, (0, 1, 0, 1))
        uniform = asm.assemble(mesh, dg.assign_uniform(mesh, 2), None, lo.DRECIPE, NEU)
        corners = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.5, 0.5]]
        layered = geo.compute_layers(mesh, corners, 1)
        hp = asm.assemble(mesh, dg.assign_hp(layered, 2), None, lo.DRECIPE, NEU)
        for lhs, rhs in ((uniform.a, hp.a), (uniform.m, hp.m)):
            assert np.array_equal(lhs.data, rhs.data)
            assert np.array_equal(lhs.indices, rhs.indices)
            assert np.array_equal(lhs.indptr, rhs.indptr)

    def test_cell_error_carries_id(self):
        mesh = geo.generate_cartesian(2, 2, (0, 1, 0, 1))

        class Broken:
            @staticmethod
            def k_at(x, y):
                raise RuntimeError("bad coefficient")

            @staticmethod
            def v_at(x, y):
                return None

        with pytest.raises(RuntimeError, match="cell 0"):
            asm.assemble(mesh, dg.assign_uniform(mesh, 1), Broken(), lo.DRECIPE, NEU)

    def test_graded_hp_assembly(self):
        layered = geo.generate_graded("Lshape", 3, 0.5)
        dm = dg.assign_hp(layered, 1)
        system = asm.assemble(layered.mesh, dm, None, lo.DRECIPE, NEU)
        c = asm.constant_vector(system.dof_map)
        assert np.abs(system.a @ c).max() < 1e-11 * abs(system.a).max()
        assert abs(system.a - system.a.T).max() <= 1e-12 * abs(system.a).max()


class TestCoefficientField:
    def test_constant_diffusion(self):
        cf = CoefficientField(diffusion=2.5)
        x = np.array([0.0, 1.0])
        kxx, kxy, kyy = cf.k_at(x, x)
        assert np.allclose(kxx, 2.5) and np.allclose(kxy, 0.0) and np.allclose(kyy, 2.5)

    def test_checkerboard_bounds(self):
        cf = CoefficientField(diffusion=lambda x, y: np.where(x * y > 0, 100.0, 1.0))
        pts = np.array([[0.5, 0.5], [-0.5, 0.5], [-0.5, -0.5], [0.5, -0.5]])
        (lo_k, hi_k), (lo_v, hi_v) = cf.sampled_bounds(pts)
        assert (lo_k, hi_k) == (1.0, 100.0)
        assert (lo_v, hi_v) == (0.0, 0.0)

    def test_potential_range(self):
        cf = CoefficientField(diffusion=0.5, potential=lambda x, y: 0.5 * (x**2 + y**2))
        pts = np.array([[0.0, 0.0], [2.0, 0.0]])
        _, (lo_v, hi_v) = cf.sampled_bounds(pts)
        assert lo_v == 0.0 and hi_v == 2.0

    def test_full_tensor(self):
        cf = CoefficientField(diffusion=lambda x, y: (1 + 0 * x, 0.25 + 0 * x, 2 + 0 * x))
        (lo_k, hi_k), _ = cf.sampled_bounds(np.array([[0.1, 0.2]]))
        disc = np.sqrt(0.25 + 0.0625)
        assert lo_k == pytest.approx(1.5 - disc)
        assert hi_k == pytest.approx(1.5 + disc)


class TestMatrixDump:
    def test_coo_roundtrip(self, tmp_path):
        mesh = geo.generate_cartesian(2, 2, (0, 1, 0, 1))
        system = asm.assemble(mesh, dg.assign_uniform(mesh, 2), None, lo.DRECIPE, NEU)
        path = tmp_path / "a.coo"
        asm.write_coo(path, system.a)
        back = asm.read_coo(path)
        assert abs(system.a - back).max() == 0.0
