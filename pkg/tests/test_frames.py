import numpy as np
import pytest

from invariance import expr as ex
from invariance import frames as fr
from invariance.expr import SCALAR, const, parse_field_expr, time
from invariance.sampling import sample_points


RNG = np.random.default_rng(0xF00D)


def random_rotation_spec(rng):
    return fr.RotationSpec(axis=rng.normal(size=3),
                           rate=rng.uniform(-2, 2),
                           phase=rng.uniform(0, 2 * np.pi))


class TestRotationSpec:
    def test_orthogonality_and_det(self):
        for _ in range(20):
            spec = random_rotation_spec(RNG)
            for t in np.linspace(-3, 3, 11):
                q = spec.matrix(t)
                assert np.max(np.abs(q @ q.T - np.eye(3))) < 1e-12
                assert abs(np.linalg.det(q) - 1.0) < 1e-12

    def test_spin_constant_antisymmetric(self):
        for _ in range(10):
            spec = random_rotation_spec(RNG)
            omega = spec.spin()
            assert np.max(np.abs(omega + omega.T)) < 1e-12
            for t in np.linspace(-2, 2, 7):
                q, qd = spec.matrix(t), spec.matrix_dot(t)
                assert np.max(np.abs(q @ qd.T - omega)) < 1e-12

    def test_spin_matches_finite_difference_qdot(self):
        spec = fr.RotationSpec(axis=(1, 2, -1), rate=0.7, phase=0.3)
        h = 1e-7
        for t in (0.0, 0.5, 1.7):
            qd_fd = (spec.matrix(t + h) - spec.matrix(t - h)) / (2 * h)
            assert np.max(np.abs(qd_fd - spec.matrix_dot(t))) < 1e-6
            omega_fd = spec.matrix(t) @ qd_fd.T
            assert np.max(np.abs(omega_fd - spec.spin())) < 1e-6

    def test_quarter_turn(self):
        spec = fr.RotationSpec(axis=(0, 0, 1), rate=np.pi / 2)
        _, x = fr.map_point(spec, (1.0, np.array([1.0, 0, 0])))
        assert np.allclose(x, [0, 1, 0], atol=1e-12)

    def test_q_expr_matches_numeric(self):
        spec = random_rotation_spec(RNG)
        q_expr = spec.q_expr()
        for t in (0.0, 0.4, 1.3):
            got = ex.evaluate(q_expr, (t, (0, 0, 0))).payload
            assert np.allclose(got, spec.matrix(t), atol=1e-14)

    def test_spin_composition_law(self):
        # Omega~ = Q Omega Q^T + Q Qdot^T for stacked rotations
        s1 = random_rotation_spec(RNG)
        s2 = random_rotation_spec(RNG)
        for t in (0.0, 0.8):
            q1, q1d = s1.matrix(t), s1.matrix_dot(t)
            q2, q2d = s2.matrix(t), s2.matrix_dot(t)
            q, qd = q2 @ q1, q2d @ q1 + q2 @ q1d
            omega_total = q @ qd.T
            omega_law = q2 @ (q1 @ q1d.T) @ q2.T + q2 @ q2d.T
            assert np.max(np.abs(omega_total - omega_law)) < 1e-10


class TestGalilei:
    def test_boost_example(self):
        spec = fr.GalileiSpec(v=np.array([1.0, 0, 0]))
        _, x = fr.map_point(spec, (2.0, np.zeros(3)))
        assert np.allclose(x, [2, 0, 0])

    def test_rejects_improper_rotation(self):
        with pytest.raises(ValueError):
            fr.GalileiSpec(r=np.diag([1.0, 1.0, -1.0]))

    def test_group_composition(self):
        rng = np.random.default_rng(7)
        t, x = sample_points(200)
        for _ in range(5):
            g1 = fr.GalileiSpec.random(rng)
            g2 = fr.GalileiSpec.random(rng)
            t1, x1 = fr.map_point(g1, (t, x))
            t2, x2 = fr.map_point(g2, (t1, x1))
            tc, xc = fr.map_point(g2.compose(g1), (t, x))
            assert np.max(np.abs(t2 - tc)) < 1e-12
            assert np.max(np.abs(x2 - xc)) < 1e-12

    def test_inverse_round_trip(self):
        rng = np.random.default_rng(8)
        t, x = sample_points(200)
        g = fr.GalileiSpec.random(rng)
        tb, xb = fr.map_point_inv(g, fr.map_point(g, (t, x)))
        assert np.max(np.abs(tb - t)) < 1e-12
        assert np.max(np.abs(xb - x)) < 1e-12


class TestEuclidean:
    def test_parabolic_path_example(self):
        spec = fr.EuclideanSpec(path=(parse_field_expr("t*t"),
                                      const(0.0), const(0.0)))
        _, x = fr.map_point(spec, (1.0, np.zeros(3)))
        assert np.allclose(x, [1, 0, 0])

    def test_path_derivatives(self):
        spec = fr.EuclideanSpec(path=(parse_field_expr("0.5*t*t"),
                                      parse_field_expr("sin(t)"),
                                      const(0.0)))
        assert np.allclose(spec.cdot(2.0), [2.0, np.cos(2.0), 0.0])
        assert np.allclose(spec.cddot(2.0), [1.0, -np.sin(2.0), 0.0])

    def test_round_trip(self):
        spec = fr.EuclideanSpec(
            rotation=fr.RotationSpec(axis=(0, 1, 1), rate=0.6),
            path=(parse_field_expr("t*t"), parse_field_expr("cos(t)"),
                  const(0.2)),
            tau=0.4)
        t, x = sample_points(100)
        tb, xb = fr.map_point_inv(spec, fr.map_point(spec, (t, x)))
        assert np.max(np.abs(tb - t)) < 1e-12
        assert np.max(np.abs(xb - x)) < 1e-12


def all_ns_specs():
    return [
        fr.ns_galilei(c0=0.3, a_mat=fr.RotationSpec(axis=(1, 1, 0)).matrix(0.7),
                      c1=[0.5, -0.2, 0.1], c2=[1.0, 0.0, -0.3]),
        fr.ns_s1(0.4),
        fr.ns_s2([parse_field_expr("t*t"), parse_field_expr("sin(t)"),
                  const(0.0)]),
        fr.ns_s3(1),
        fr.ns_s4(),
        fr.ns_s5(0.25),
        fr.ns_s6(0.8),
        fr.ns_rotation_3d((0, 0, 1), 0.9),
    ]


class TestNSSpecs:
    @pytest.mark.parametrize("spec", all_ns_specs(),
                             ids=lambda s: s.tag)
    def test_point_map_round_trip(self, spec):
        t, x = sample_points(200)
        tb, xb = fr.map_point_inv(spec, fr.map_point(spec, (t, x)))
        assert np.max(np.abs(tb - t)) < 1e-10
        assert np.max(np.abs(xb - x)) < 1e-10

    def test_s2_requires_accelerated_f(self):
        with pytest.raises(ValueError):
            fr.ns_s2([parse_field_expr("2.0*t"), const(0.0), const(0.0)])

    def test_field_round_trip_scalings(self):
        # applying the transform and then its inverse restores the fields
        u = parse_field_expr(
            "vec(sin(comp(x,1))*cos(comp(x,2)), -cos(comp(x,1))*sin(comp(x,2)), 0)")
        p = parse_field_expr("0.25*(cos(2.0*comp(x,1)) + cos(2.0*comp(x,2)))")
        pairs = [
            (fr.ns_s1(0.4), fr.ns_s1(-0.4)),
            (fr.ns_s3(1), fr.ns_s3(1)),
            (fr.ns_s4(), fr.ns_s4()),
            (fr.ns_s5(0.25), fr.ns_s5(-0.25)),
        ]
        t, x = sample_points(100)
        for spec, inv_spec in pairs:
            u1, p1, _ = fr.transform_ns_fields(u, p, spec)
            u2, p2, _ = fr.transform_ns_fields(u1, p1, inv_spec)
            for e_ref, e_got in ((u, u2), (p, p2)):
                ref = ex.evaluate_many(e_ref, t, x)
                got = ex.evaluate_many(e_got, t, x)
                assert np.max(np.abs(ref - got)) < 1e-10

    def test_s1_one_parameter_group(self):
        u = parse_field_expr("vec(comp(x,2), -comp(x,1), 0)")
        p = parse_field_expr("dot(x, x)")
        t, x = sample_points(100)
        ua, pa, _ = fr.transform_ns_fields(u, p, fr.ns_s1(0.3))
        uab, pab, _ = fr.transform_ns_fields(ua, pa, fr.ns_s1(0.5))
        uc, pc, _ = fr.transform_ns_fields(u, p, fr.ns_s1(0.8))
        assert np.max(np.abs(ex.evaluate_many(uab, t, x)
                             - ex.evaluate_many(uc, t, x))) < 1e-12
        assert np.max(np.abs(ex.evaluate_many(pab, t, x)
                             - ex.evaluate_many(pc, t, x))) < 1e-12


class TestVelocityRules:
    def test_galilei_boost_rule(self):
        spec = fr.GalileiSpec(v=np.array([1.0, 0.5, 0.0]))
        rule = fr.velocity_rule_for(spec)
        assert rule.kind == "inhomogeneous"
        u = parse_field_expr("vec(comp(x,2), 0, 0)")
        ut = fr.transform_field(u, spec, rule)
        # at t=0 the map is the identity, so u~ = u + v pointwise
        got = ex.evaluate(ut, (0.0, (0.3, 0.7, 0.1))).payload
        assert np.allclose(got, [0.7 + 1.0, 0.5, 0.0])

    def test_rotation_rule_reproduces_transport(self):
        # u~(x~) must equal the transported velocity of a comoving particle
        spec = fr.RotationSpec(axis=(0, 0, 1), rate=0.9)
        rule = fr.velocity_rule_for(spec)
        u = parse_field_expr("vec(comp(x,2)*comp(x,2), comp(x,1), 1.0)")
        ut = fr.transform_field(u, spec, rule)
        t = 0.6
        x0 = np.array([0.4, -0.8, 0.3])
        # transport: d/dt [Q(t) x(t)] with xdot = u(x)
        q, qd = spec.matrix(t), spec.matrix_dot(t)
        u_val = ex.evaluate(u, (t, x0)).payload
        expect = q @ u_val + qd @ x0
        _, x_t = fr.map_point(spec, (t, x0))
        got = ex.evaluate(ut, (t, x_t)).payload
        assert np.allclose(got, expect, atol=1e-12)

    def test_non_coordinate_specs_marked(self):
        for spec in (fr.ns_s1(0.1), fr.ns_s5(0.1), fr.ns_s6(0.3)):
            assert fr.velocity_rule_for(spec) is fr.LISTED_RULES

    def test_scalar_transform_example(self):
        # |x| under a rotation: phi~(x~) = |Q^T x~| = |x~| numerically
        spec = fr.RotationSpec(axis=(1, 0, 2), rate=1.3)
        phi = parse_field_expr("norm(x)")
        phit = fr.transform_field(phi, spec, fr.SCALAR_RULE)
        t, x = sample_points(50)
        got = ex.evaluate_many(phit, t, x)
        assert np.max(np.abs(got - np.linalg.norm(x, axis=0))) < 1e-12
