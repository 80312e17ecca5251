# This file is part of ts_isofem.
#
# Developed for Vera C. Rubin Observatory Telescope and Site Systems.
# This product includes software developed by the LSST Project
# (https://www.lsst.org).
# See the COPYRIGHT file at the top-level directory of this distribution
# for details of code ownership.
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.

import pathlib
import tempfile
import unittest

import numpy as np
import pytest
import scipy.spatial
from lsst.ts import isofem

rng = np.random.default_rng(seed=8)


def run(**kwargs):
    """Run a study in memory and return its `ErrorReport`."""
    config = isofem.make_config(**kwargs)
    return isofem.ConvergenceStudy(config).run()


class ConvergenceStudyTestCase(unittest.TestCase):
    def check_orders(self, report, l2_range, h1_range, num_checked=2):
        for order in report.eoc_l2[-num_checked:]:
            assert l2_range[0] <= order <= l2_range[1], report.eoc_l2
        for order in report.eoc_h1[-num_checked:]:
            assert h1_range[0] <= order <= h1_range[1], report.eoc_h1

    def test_disk_degree_one(self):
        report = run(domain="unit-disk", degree=1, levels=5, h0=0.3)
        assert len(report.records) == 5
        self.check_orders(report, l2_range=(1.8, 2.2), h1_range=(0.85, 1.15))
        for record in report.records:
            assert record.solve_report.relative_residual <= 1e-12
        hs = [record.h for record in report.records]
        assert np.all(np.diff(hs) < 0)
        errors = [record.err_l2 for record in report.records]
        assert np.all(np.diff(errors) < 0)

    def test_disk_degree_two(self):
        report = run(domain="unit-disk", degree=2, levels=4, h0=0.3)
        self.check_orders(report, l2_range=(2.7, 3.3), h1_range=(1.8, 2.2))
        assert report.records[-1].h < 0.05
        assert report.records[-1].err_l2 < 1e-5

    def test_ball_degree_one(self):
        report = run(domain="unit-ball", degree=1, levels=3, h0=0.8)
        self.check_orders(
            report, l2_range=(1.7, 2.3), h1_range=(0.7, 1.3), num_checked=1
        )

    def test_ball_degree_two(self):
        report = run(domain="unit-ball", degree=2, levels=3, h0=0.8)
        self.check_orders(
            report, l2_range=(2.7, 3.3), h1_range=(1.7, 2.3), num_checked=1
        )

    def test_quasi_optimality(self):
        # The Galerkin error is within a constant of the interpolation error.
        config = isofem.make_config(domain="unit-disk", degree=1, levels=3, h0=0.3)
        study = isofem.ConvergenceStudy(config)
        for level, space in enumerate(study.spaces()):
            with self.subTest(level=level):
                u_h, _ = study.solve(space, level=level)
                _, solution_error = isofem.error_norms(space, u_h, study.exact)
                interpolant = isofem.interpolate(space, study.exact)
                _, interpolation_error = isofem.error_norms(
                    space, interpolant, study.exact
                )
                assert solution_error <= 5 * interpolation_error

    def test_variants(self):
        for variant in ("robin", "neumann"):
            with self.subTest(variant=variant):
                report = run(
                    domain="unit-disk",
                    degree=2,
                    levels=3,
                    h0=0.3,
                    variant=variant,
                    kappa=1,
                )
                assert report.beta == 0
                self.check_orders(
                    report, l2_range=(2.7, 3.3), h1_range=(1.7, 2.3), num_checked=1
                )

    def test_interpolation(self):
        for degree in (1, 2):
            with self.subTest(degree=degree):
                report = run(
                    domain="unit-disk",
                    degree=degree,
                    levels=3,
                    h0=0.3,
                    study="interpolate",
                )
                assert report.records[0].solve_report is None
                self.check_orders(
                    report,
                    l2_range=(degree + 0.7, degree + 1.3),
                    h1_range=(degree - 0.3, degree + 0.3),
                    num_checked=1,
                )

    def test_constant_solution(self):
        for study in ("solve", "interpolate"):
            with self.subTest(study=study):
                report = run(
                    domain="unit-disk",
                    degree=2,
                    levels=2,
                    h0=0.5,
                    solution="constant",
                    study=study,
                )
                for record in report.records:
                    assert record.err_l2 <= 1e-10
                    assert record.err_h1 <= 1e-10

    def test_solver_without_preconditioner(self):
        kwargs = dict(domain="unit-disk", degree=1, levels=2, h0=0.5)
        jacobi = run(**kwargs)
        plain = run(preconditioner="none", **kwargs)
        for jacobi_record, plain_record in zip(jacobi.records, plain.records):
            assert plain_record.err_l2 == pytest.approx(jacobi_record.err_l2, rel=1e-8)

    def test_renumbering_invariance(self):
        config = isofem.make_config(domain="unit-disk", degree=2, levels=2, h0=0.5)
        study = isofem.ConvergenceStudy(config)
        mesh = isofem.generate_linear_mesh(study.domain, config.h0)
        permutation = rng.permutation(mesh.num_vertices)
        shuffled = isofem.order_nodes_boundary_first(mesh.renumbered(permutation))
        errors = []
        for linear_mesh in (mesh, shuffled):
            space = isofem.build_space(linear_mesh, study.domain, config.degree)
            u_h, _ = study.solve(space)
            errors.append(
                isofem.error_components(space, u_h, study.exact).as_tuple()
            )
        assert errors[1] == pytest.approx(errors[0], rel=1e-6)

    def test_renumbering_gives_same_nodal_values(self):
        config = isofem.make_config(domain="unit-disk", degree=2, levels=2, h0=0.5)
        study = isofem.ConvergenceStudy(config)
        mesh = isofem.generate_linear_mesh(study.domain, config.h0)
        permutation = rng.permutation(mesh.num_vertices)
        shuffled = isofem.order_nodes_boundary_first(mesh.renumbered(permutation))
        spaces = [
            isofem.build_space(linear_mesh, study.domain, config.degree)
            for linear_mesh in (mesh, shuffled)
        ]
        distances, index = scipy.spatial.cKDTree(
            spaces[0].node_coordinates
        ).query(spaces[1].node_coordinates)
        assert np.max(distances) < 1e-12
        assert len(np.unique(index)) == spaces[0].num_dofs

        u_h, _ = study.solve(spaces[0])
        shuffled_u_h, _ = study.solve(spaces[1])
        np.testing.assert_allclose(
            shuffled_u_h.coefficients, u_h.coefficients[index], rtol=0, atol=1e-10
        )

    def test_meshes_and_spaces(self):
        config = isofem.make_config(domain="unit-disk", degree=2, levels=3, h0=0.3)
        study = isofem.ConvergenceStudy(config)
        meshes = list(study.meshes())
        assert [mesh.num_cells for mesh in meshes] == [96, 384, 1536]
        spaces = list(study.spaces())
        assert [space.num_dofs for space in spaces] == sorted(
            space.num_dofs for space in spaces
        )
        assert all(space.degree == 2 for space in spaces)


class StudyOutputTestCase(unittest.TestCase):
    def setUp(self):
        self.tempdir = tempfile.TemporaryDirectory()
        self.path = pathlib.Path(self.tempdir.name)

    def tearDown(self):
        self.tempdir.cleanup()

    def test_csv_is_reproducible(self):
        contents = []
        for name in ("first.csv", "second.csv"):
            config = isofem.make_config(
                degree=2, levels=2, h0=0.5, out=str(self.path / name)
            )
            isofem.run_study(config)
            contents.append((self.path / name).read_bytes())
        assert contents[0] == contents[1]

        lines = contents[0].decode().splitlines()
        assert lines[0] == ",".join(isofem.STUDY_CSV_HEADER)
        assert len(lines) == 3
        level0 = lines[1].split(",")
        assert level0[0] == "0"
        assert level0[5:] == ["", ""]
        assert float(lines[2].split(",")[5]) > 2

    def test_matrix_export(self):
        matrix_dir = self.path / "matrices"
        config = isofem.make_config(
            degree=1,
            levels=2,
            h0=0.5,
            out=str(self.path / "study.csv"),
            matrix_dir=str(matrix_dir),
        )
        isofem.run_study(config)
        assert sorted(path.name for path in matrix_dir.iterdir()) == [
            "K_level0.mtx",
            "K_level1.mtx",
        ]

    def test_geometry_diagnostics(self):
        disk = isofem.make_domain("unit-disk")
        for degree in (1, 3):
            with self.subTest(degree=degree):
                path = self.path / f"geometry{degree}.csv"
                config = isofem.make_config(
                    degree=degree, levels=3, h0=0.3, diagnostics=str(path)
                )
                records = isofem.run_geometry_diagnostics(config)
                assert len(records) == 3
                lines = path.read_text().splitlines()
                assert lines[0] == ",".join(isofem.DIAGNOSTICS_CSV_HEADER)
                assert len(lines) == 4

                hs = [record.h for record in records]
                volume_errors = [abs(record.volume - disk.volume) for record in records]
                surface_errors = [
                    abs(record.surface - disk.surface_area) for record in records
                ]
                for errors in (volume_errors, surface_errors):
                    order = isofem.eoc(errors, hs)[-1]
                    assert degree + 0.7 <= order <= degree + 1.4
                distances = [record.max_boundary_distance for record in records]
                assert np.all(np.diff(distances) < 0)
                for record in records:
                    assert record.min_jacobian > 0
                    assert 0 < record.max_ct < 1

    def test_ball_geometry(self):
        ball = isofem.make_domain("unit-ball")
        config = isofem.make_config(
            domain="unit-ball",
            degree=1,
            levels=3,
            h0=0.8,
            diagnostics=str(self.path / "ball.csv"),
        )
        records = isofem.run_geometry_diagnostics(config)
        hs = [record.h for record in records]
        for exact, attribute in (
            (ball.volume, "volume"),
            (ball.surface_area, "surface"),
        ):
            errors = [abs(getattr(record, attribute) - exact) for record in records]
            order = isofem.eoc(errors, hs)[-1]
            assert 1.7 <= order <= 2.4
        assert all(record.min_jacobian > 0 for record in records)
