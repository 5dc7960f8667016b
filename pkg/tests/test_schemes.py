import numpy as np
import pytest

from splitproj.instances import random_instance, random_start, three_lines
from splitproj.linalg import eigenvalues, load_matrix, operator_norm
from splitproj.schemes import (
    KINDS,
    AffineSubspace,
    InconsistentAffineError,
    ResolventOracle,
    affine_intersection_point,
    affine_resolvent,
    apply_generic_step,
    build_affine,
    build_campoy,
    build_mt,
    build_pocs,
    build_ryu,
    build_scheme,
    dump_scheme,
    subspace_resolvent,
)
from splitproj.subspaces import from_basis, full_space, intersection_via_nullspace


@pytest.fixture(scope="module")
def record():
    return random_instance(seed=1, instance_id=0)


@pytest.fixture(scope="module")
def schemes(record):
    return {kind: build_scheme(kind, record.subspaces) for kind in KINDS}


def blocks_of(x, d):
    return x.reshape(-1, d)


class TestTrivialFullSpaceCases:
    # With every subspace equal to the whole space the operators collapse to
    # simple hand-computable forms.
    def test_ryu(self):
        d = 4
        s = build_ryu(full_space(d), full_space(d), full_space(d))
        expected = np.zeros((2 * d, 2 * d))
        expected[:d, :d] = np.eye(d)
        assert np.allclose(s.T, expected, atol=1e-14)
        assert np.allclose(s.P_fix, expected, atol=1e-14)

    @pytest.mark.parametrize("builder", [build_mt, build_campoy])
    def test_mt_campoy_swap(self, builder):
        d = 4
        s = builder([full_space(d)] * 3)
        swap = np.block([[np.zeros((d, d)), np.eye(d)], [np.eye(d), np.zeros((d, d))]])
        averaging = 0.5 * np.block([[np.eye(d), np.eye(d)], [np.eye(d), np.eye(d)]])
        assert np.allclose(s.T, swap, atol=1e-14)
        assert np.allclose(s.P_fix, averaging, atol=1e-12)

    def test_pocs(self):
        s = build_pocs([full_space(3)] * 3)
        assert np.allclose(s.T, np.eye(3), atol=1e-14)
        assert np.allclose(s.P_fix, np.eye(3), atol=1e-12)


class TestSchemeInvariants:
    @pytest.mark.parametrize("kind", KINDS)
    def test_nonexpansive(self, schemes, kind):
        assert operator_norm(schemes[kind].T) <= 1.0 + 1e-9

    @pytest.mark.parametrize("kind", KINDS)
    def test_fix_projector(self, schemes, kind):
        p = schemes[kind].P_fix
        assert np.linalg.norm(p @ p - p) <= 1e-9
        assert np.linalg.norm(p - p.T) <= 1e-9

    @pytest.mark.parametrize("kind", KINDS)
    def test_fixed_points_are_fixed(self, schemes, kind):
        s = schemes[kind]
        assert np.linalg.norm(s.T @ s.P_fix - s.P_fix) <= 1e-9
        assert np.linalg.norm(s.P_fix @ s.T @ s.P_fix - s.P_fix) <= 1e-9

    @pytest.mark.parametrize("kind", KINDS)
    def test_solution_projector_matches_oracle(self, record, schemes, kind):
        oracle = intersection_via_nullspace(list(record.subspaces))
        assert np.linalg.norm(schemes[kind].P_Z - oracle.projector) <= 1e-8

    @pytest.mark.parametrize("kind", KINDS)
    def test_shadow_of_fixed_points_projects_reference(self, record, schemes, kind):
        s = schemes[kind]
        d = s.ambient_dim
        rng = np.random.default_rng(30)
        z = rng.standard_normal(s.state_dim)
        shadow_of_fix = s.shadow @ (s.P_fix @ z)
        if kind == "pocs":
            ref = z
        elif kind == "ryu":
            ref = z[:d]
        else:
            ref = blocks_of(z, d).mean(axis=0)
        assert np.linalg.norm(shadow_of_fix - s.P_Z @ ref) <= 1e-8


class TestFixedPointCharacterizations:
    def test_ryu_inner_outputs_agree(self, schemes):
        s = schemes["ryu"]
        d = s.ambient_dim
        rng = np.random.default_rng(31)
        z = s.P_fix @ rng.standard_normal(s.state_dim)
        m = blocks_of(s.M @ z, d)
        assert np.linalg.norm(m[0] - m[1]) <= 1e-8
        assert np.linalg.norm(m[1] - m[2]) <= 1e-8

    def test_mt_inner_output_diagonal(self, schemes):
        s = schemes["mt"]
        d = s.ambient_dim
        rng = np.random.default_rng(32)
        m = blocks_of(s.M @ (s.P_fix @ rng.standard_normal(s.state_dim)), d)
        for row in m[1:]:
            assert np.linalg.norm(row - m[0]) <= 1e-8

    def test_campoy_inner_resolvent_projects_average(self, schemes):
        s = schemes["campoy"]
        d = s.ambient_dim
        rng = np.random.default_rng(33)
        z = rng.standard_normal(s.state_dim)
        m = blocks_of(s.M @ (s.P_fix @ z), d)
        expected = s.P_Z @ blocks_of(z, d).mean(axis=0)
        for row in m:
            assert np.linalg.norm(row - expected) <= 1e-8


class TestPocsSpecifics:
    def test_three_quarters_relaxation_is_plain_composition(self, record, schemes):
        s = schemes["pocs"]
        pu, pv, pw = (sub.projector for sub in record.subspaces)
        t_34 = 0.25 * np.eye(s.state_dim) + 0.75 * s.T
        assert np.linalg.norm(t_34 - pw @ pv @ pu) <= 1e-12

    @pytest.mark.parametrize("lam,expected", [(1.0, -1.0 / 3.0), (4.0 / 3.0, -7.0 / 9.0)])
    def test_equal_angle_eigenvalue_collision(self, lam, expected):
        # At theta = pi/4 the two eigenvalues coincide at 1 - 4 lambda / 3.
        s = build_pocs(three_lines(np.pi / 4))
        residual = (1 - lam) * np.eye(2) + lam * s.T - s.P_fix
        ev = eigenvalues(residual)
        assert np.allclose(ev.real, expected, atol=1e-12)
        assert np.allclose(ev.imag, 0.0, atol=1e-12)

    def test_arity(self):
        with pytest.raises(ValueError):
            build_pocs([full_space(3)] * 4)


class TestBuilderValidation:
    def test_mt_needs_three(self):
        with pytest.raises(ValueError):
            build_mt([full_space(3)] * 2)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            build_ryu(full_space(2), full_space(3), full_space(2))

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            build_scheme("nope", [full_space(3)] * 3)

    def test_mt_four_subspaces(self):
        rng = np.random.default_rng(34)
        subs = [from_basis(rng.standard_normal((6, 5))) for _ in range(4)]
        for kind in ("mt", "campoy"):
            s = build_scheme(kind, subs)
            assert s.state_dim == 18
            assert operator_norm(s.T) <= 1.0 + 1e-9
            oracle = intersection_via_nullspace(subs)
            assert np.linalg.norm(s.P_Z - oracle.projector) <= 1e-8


class TestGenericStep:
    def test_identity_resolvents_ryu(self):
        ident = ResolventOracle(fn=lambda x: x, ambient_dim=3)
        state = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
        out = apply_generic_step("ryu", [ident] * 3, state)
        assert np.allclose(out, np.concatenate([state[:3], np.zeros(3)]))

    @pytest.mark.parametrize("kind", KINDS)
    def test_matches_matrix_path(self, record, schemes, kind):
        s = schemes[kind]
        resolvents = [subspace_resolvent(sub) for sub in record.subspaces]
        rng = np.random.default_rng(35)
        for _ in range(100):
            z = rng.standard_normal(s.state_dim)
            gap = np.linalg.norm(apply_generic_step(kind, resolvents, z) - s.T @ z)
            assert gap <= 1e-10

    def test_campoy_blockwise_update(self, record, schemes):
        # one step must equal z_i + 2 (x_i - p) with p the projected average
        s = schemes["campoy"]
        d = s.ambient_dim
        last = record.subspaces[-1].projector
        rng = np.random.default_rng(36)
        z = rng.standard_normal(s.state_dim)
        zb = blocks_of(z, d)
        p = last @ zb.mean(axis=0)
        resolvents = [subspace_resolvent(sub) for sub in record.subspaces]
        out = blocks_of(apply_generic_step("campoy", resolvents, z), d)
        for i, sub in enumerate(record.subspaces[:-1]):
            x_i = sub.projector @ (2.0 * p - zb[i])
            assert np.linalg.norm(out[i] - (zb[i] + 2.0 * (x_i - p))) <= 1e-12

    def test_arity_and_length_checks(self):
        ident = ResolventOracle(fn=lambda x: x, ambient_dim=3)
        with pytest.raises(ValueError):
            apply_generic_step("ryu", [ident] * 4, np.zeros(6))
        with pytest.raises(ValueError):
            apply_generic_step("mt", [ident] * 3, np.zeros(5))
        mixed = [ident, ident, ResolventOracle(fn=lambda x: x, ambient_dim=4)]
        with pytest.raises(ValueError):
            apply_generic_step("pocs", mixed, np.zeros(3))

    def test_spot_check_flags_expansive_oracle(self):
        bad = ResolventOracle(fn=lambda x: 2.0 * x, ambient_dim=3)
        ident = ResolventOracle(fn=lambda x: x, ambient_dim=3)
        with pytest.raises(ValueError, match="nonexpansive"):
            apply_generic_step("pocs", [bad, ident, ident], np.zeros(3), check=True)
        apply_generic_step("pocs", [ident] * 3, np.zeros(3), check=True)


class TestAffine:
    def test_zero_translation_reduces_to_linear(self, record):
        affines = [AffineSubspace(parallel=s, anchor=np.zeros(6)) for s in record.subspaces]
        for kind in KINDS:
            scheme, conj = build_affine(kind, affines)
            assert np.linalg.norm(conj.b) <= 1e-12
            assert np.linalg.norm(conj.a) <= 1e-10
            assert np.linalg.norm(conj.shadow_offset) <= 1e-12

    def test_common_translation(self, record):
        rng = np.random.default_rng(37)
        shift = rng.standard_normal(6)
        affines = [AffineSubspace(parallel=s, anchor=shift) for s in record.subspaces]
        point = affine_intersection_point(affines)
        for a in affines:
            assert np.linalg.norm(a.project(point) - point) <= 1e-9

    def test_affine_resolvent_is_affine_projection(self, record):
        rng = np.random.default_rng(38)
        a = AffineSubspace(parallel=record.subspaces[0], anchor=rng.standard_normal(6))
        r = affine_resolvent(a)
        x = rng.standard_normal(6)
        assert np.allclose(r(x), a.project(x), atol=1e-12)

    def test_inconsistent_detected_for_all_kinds(self):
        x_axis = from_basis(np.array([[1.0], [0.0]]))
        y_axis = from_basis(np.array([[0.0], [1.0]]))
        affines = [
            AffineSubspace(parallel=x_axis, anchor=np.array([0.0, 0.0])),
            AffineSubspace(parallel=x_axis, anchor=np.array([0.0, 1.0])),
            AffineSubspace(parallel=y_axis, anchor=np.array([0.0, 0.0])),
        ]
        with pytest.raises(InconsistentAffineError):
            affine_intersection_point(affines)
        for kind in KINDS:
            with pytest.raises(InconsistentAffineError):
                build_affine(kind, affines)


def test_dump_scheme_round_trips(tmp_path, schemes):
    s = schemes["mt"]
    paths = dump_scheme(s, tmp_path / "mt")
    assert [p.rsplit("/", 1)[-1] for p in paths] == [
        "T.txt", "M.txt", "P_fix.txt", "P_Z.txt", "shadow.txt"
    ]
    for path, name in zip(paths, ("T", "M", "P_fix", "P_Z", "shadow")):
        assert np.array_equal(load_matrix(path), getattr(s, name))


def test_long_run_governing_limit(record, schemes):
    # iterating the relaxed operator from a random state lands on P_fix z0
    rng = np.random.default_rng(39)
    for kind in KINDS:
        s = schemes[kind]
        z = rng.standard_normal(s.state_dim)
        target = s.P_fix @ z
        t_half = 0.5 * np.eye(s.state_dim) + 0.5 * s.T
        for _ in range(2000):
            z = t_half @ z
        assert np.linalg.norm(z - target) <= 1e-6


def test_start_vectors_differ_between_streams():
    a = random_start(seed=2, start_id=0, dim=6)
    b = random_start(seed=2, start_id=1, dim=6)
    assert np.linalg.norm(a - b) > 1e-3
