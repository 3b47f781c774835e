import numpy as np
import pytest

from invariance import frames as fr
from invariance import mechanics as mech

RNG = np.random.default_rng(0xD1CE)


class TestIntegration:
    def test_oscillator_matches_cosine(self):
        traj = mech.integrate(mech.oscillator_model(),
                              (np.array([1.0, 0, 0]), np.zeros(3), 0.0),
                              1e-3, 10_000)
        assert np.max(np.abs(traj.x[0] - np.cos(traj.t))) < 1e-8

    def test_oscillator_energy_conserved(self):
        traj = mech.integrate(mech.oscillator_model(),
                              (np.array([1.0, 0, 0]), np.zeros(3), 0.0),
                              1e-3, 5_000)
        energy = 0.5 * np.sum(traj.v ** 2, axis=0) \
            + 0.5 * np.sum(traj.x ** 2, axis=0)
        assert np.max(np.abs(energy - energy[0])) < 1e-10

    def test_drag_gravity_terminal_speed(self):
        traj = mech.integrate(mech.drag_gravity_model(),
                              (np.zeros(3), np.zeros(3), 0.0),
                              5e-3, 4_000)
        assert abs(traj.v[2, -1] - (-1.0)) < 1e-6

    def test_free_particle_is_a_straight_line(self):
        v0 = np.array([0.3, -0.1, 0.2])
        traj = mech.integrate(mech.free_model(), (np.zeros(3), v0, 0.0),
                              1e-2, 500)
        assert np.max(np.abs(traj.x - v0[:, None] * traj.t)) < 1e-12


class TestStructuralCheck:
    def test_accepts_relative_argument_models(self):
        for model in (mech.oscillator_model(), mech.drag_gravity_model(),
                      mech.free_model()):
            ok, offenders = mech.structural_force_check(model)
            assert ok and not offenders

    def test_rejects_absolute_argument_models(self):
        for model in (mech.absolute_velocity_model(),
                      mech.absolute_position_model(),
                      mech.time_scaled_position_model()):
            ok, offenders = mech.structural_force_check(model)
            assert not ok and offenders


class TestFrameIndifference:
    def random_spec(self):
        return fr.GalileiSpec.random(RNG)

    def test_oscillator_force_frame_indifferent(self):
        v = mech.check_force_frame_indifference(mech.oscillator_model(),
                                                self.random_spec())
        assert v.objective.passed and v.objective.residual < 1e-10

    def test_drag_gravity_force_frame_indifferent(self):
        v = mech.check_force_frame_indifference(mech.drag_gravity_model(),
                                                self.random_spec())
        assert v.objective.passed

    def test_absolute_velocity_force_fails_under_boost(self):
        spec = fr.GalileiSpec(r=np.eye(3), v=np.array([1.0, 0, 0]),
                              c=np.zeros(3), tau=0.0)
        v = mech.check_force_frame_indifference(
            mech.absolute_velocity_model(), spec)
        assert not v.objective.passed
        # the defect is exactly the boost magnitude
        assert abs(v.objective.residual - 1.0) < 1e-12

    def test_frozen_references_break_frame_indifference(self):
        spec = fr.GalileiSpec(r=np.eye(3), v=np.array([1.0, 0, 0]),
                              c=np.zeros(3), tau=0.0)
        v = mech.check_force_frame_indifference(
            mech.drag_gravity_model(), spec, transport_refs=False)
        assert not v.objective.passed and v.objective.residual > 1e-3


class TestGalileiCovariance:
    def test_twenty_random_specs(self):
        dt, steps = 1e-3, 1_000
        ic = (np.array([0.3, -0.2, 0.1]), np.array([0.2, 0.1, 0.0]), 0.0)
        for _ in range(20):
            spec = fr.GalileiSpec.random(RNG)
            v = mech.check_galilei_covariance(mech.oscillator_model(),
                                              spec, ic, dt, steps)
            assert v.objective.passed
            assert v.objective.residual < 10 * dt ** 4


class TestNoninertialClosure:
    def setup_method(self):
        self.model = mech.drag_gravity_model()
        self.spec = fr.EuclideanSpec(
            rotation=fr.RotationSpec(axis=(0.0, 0.0, 1.0), rate=0.5))
        ic = (np.array([0.5, 0.2, 0.0]), np.array([0.1, 0.0, 0.0]), 0.0)
        self.traj = mech.integrate(self.model, ic, 2e-3, 1_500)

    def test_four_term_inertial_force_closes_the_balance(self):
        v = mech.check_noninertial_closure(self.model, self.spec,
                                           self.traj, drag_coeff=1.0)
        assert v.objective.passed and v.objective.residual < 1e-10

    def test_dropping_the_drag_term_breaks_it(self):
        v = mech.check_noninertial_closure(self.model, self.spec,
                                           self.traj, drag_coeff=1.0,
                                           include_drag_term=False)
        assert not v.objective.passed and v.objective.residual > 1e-3

    def test_drag_coeff_is_required(self):
        with pytest.raises(ValueError):
            mech.check_noninertial_closure(self.model, self.spec,
                                           self.traj)


class TestInertialForceOracles:
    def test_pure_translation_gives_m_cddot(self):
        # path c(t) = (t^2, 0, 0), no rotation: force is m*(2, 0, 0)
        from invariance import expr as ex
        path = (ex.parse_field_expr("t*t"), ex.const(0.0), ex.const(0.0))
        spec = fr.EuclideanSpec(
            rotation=fr.RotationSpec(axis=(0, 0, 1), rate=0.0), path=path)
        got = mech.inertial_force(spec, 1.3, np.zeros(3), np.zeros(3),
                                  m=2.0)
        assert np.max(np.abs(got - np.array([4.0, 0.0, 0.0]))) < 1e-12

    def test_uniform_rotation_centrifugal_magnitude(self):
        # at rest in the rotating frame the residual inertial force is
        # centrifugal with magnitude m omega^2 r
        omega = 0.9
        spec = fr.EuclideanSpec(
            rotation=fr.RotationSpec(axis=(0, 0, 1), rate=omega))
        x_star = np.array([1.5, 0.0, 0.0])
        got = mech.inertial_force(spec, 0.6, x_star, np.zeros(3), m=2.0)
        assert abs(np.linalg.norm(got) - 2.0 * omega ** 2 * 1.5) < 1e-12

    def test_inertial_frame_gives_zero(self):
        spec = fr.EuclideanSpec(
            rotation=fr.RotationSpec(axis=(0, 0, 1), rate=0.0))
        got = mech.inertial_force(spec, 0.6, RNG.normal(size=3),
                                  RNG.normal(size=3), m=1.0, a=0.7)
        assert np.max(np.abs(got)) < 1e-14


class TestTrajectoryTransport:
    def test_galilei_transform_preserves_relative_separation_norm(self):
        ic = (np.array([0.4, 0.0, 0.1]), np.array([0.0, 0.2, 0.0]), 0.0)
        traj = mech.integrate(mech.oscillator_model(), ic, 1e-2, 200)
        spec = fr.GalileiSpec.random(RNG)
        moved = mech.transform_trajectory(traj, spec)
        x0r_at, _, _ = mech.transport_references(mech.oscillator_model(),
                                                 spec)
        sep_old = traj.x - np.zeros(3)[:, None]
        sep_new = moved.x - np.stack([x0r_at(tk) for tk in moved.t],
                                     axis=1)
        assert np.max(np.abs(np.linalg.norm(sep_new, axis=0)
                             - np.linalg.norm(sep_old, axis=0))) < 1e-10
