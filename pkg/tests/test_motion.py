"""Tests for spacetime_agfem.deformation.motion module."""

import math

import numpy as np
import pytest

from spacetime_agfem.exceptions import ConfigurationError
from spacetime_agfem.deformation.motion import (
    CustomMotion,
    MovingBoundary,
    PitchingRotation,
    RampedMotion,
    RigidOscillation,
    SmoothCutoff,
    Static,
    TimeRamp,
    Translation,
    build_motion,
    check_fixed_loops,
    dirichlet_data,
    relative_displacement,
    swept_cutoff,
)
from spacetime_agfem.models import MotionKind

POINTS = np.array([[1.0, 1.0], [2.0, 1.5], [1.2, 1.9]])


def _finite_difference(motion, x, t, dt=1e-6):
    return (motion.position(x, t + dt) - motion.position(x, t - dt)) / (2.0 * dt)


class TestCatalog:
    """Tests for the catalog motions."""

    @pytest.mark.parametrize(
        "motion",
        [
            Translation((0.2, -0.1)),
            RigidOscillation((1.5, 1.5)),
            PitchingRotation((1.5, 1.5)),
            RampedMotion(RigidOscillation((1.5, 1.5))),
        ],
    )
    def test_identity_at_start(self, motion):
        """Test every catalog motion starts at the identity."""
        np.testing.assert_allclose(motion.position(POINTS, 0.0), POINTS, atol=1e-15)

    @pytest.mark.parametrize(
        "motion",
        [
            Translation((0.2, -0.1)),
            RigidOscillation((1.5, 1.5)),
            PitchingRotation((1.5, 1.5)),
            RampedMotion(PitchingRotation((1.5, 1.5)), TimeRamp(2.0, 0.25)),
        ],
    )
    def test_velocity_matches_positions(self, motion):
        """Test velocities agree with central differences of positions."""
        for t in (0.1, 0.4, 0.9):
            np.testing.assert_allclose(motion.velocity(POINTS, t), _finite_difference(motion, POINTS, t), atol=1e-6)

    @pytest.mark.parametrize("motion", [RigidOscillation((1.5, 1.5)), PitchingRotation((1.5, 1.5))])
    def test_rigid_motions_are_isometries(self, motion):
        """Test rigid motions preserve distances and invert."""
        moved = motion.position(POINTS, 0.7)
        np.testing.assert_allclose(
            np.linalg.norm(moved[0] - moved[1]), np.linalg.norm(POINTS[0] - POINTS[1])
        )
        np.testing.assert_allclose(motion.inverse(moved, 0.7), POINTS)

    def test_pitching_angle(self):
        """Test the pitching angle peaks at a quarter period."""
        motion = PitchingRotation((0.0, 0.0), theta_max=0.3, omega_theta=math.pi)
        assert motion.angle(0.5) == pytest.approx(0.3)

    def test_static(self):
        """Test the static motion does nothing."""
        motion = Static()
        np.testing.assert_allclose(motion.position(POINTS, 1.0), POINTS)
        np.testing.assert_allclose(motion.velocity(POINTS, 1.0), 0.0)


class TestTimeRamp:
    """Tests for TimeRamp and RampedMotion."""

    def test_zero_initial_slope(self):
        """Test the ramp starts at zero with zero rate."""
        ramp = TimeRamp(2.0, 0.125)
        assert ramp(0.0) == 0.0
        assert ramp.rate(0.0) == 0.0

    def test_continuous_at_switch(self):
        """Test value and rate match across t_a."""
        ramp = TimeRamp(3.0, 0.2)
        assert ramp(0.2 - 1e-12) == pytest.approx(ramp(0.2))
        assert ramp.rate(0.2 - 1e-12) == pytest.approx(ramp.rate(0.2))
        assert ramp(1.0) == pytest.approx(0.8 + 0.2 / 3.0)

    def test_ramped_velocity_zero_at_start(self):
        """Test the ramped motion is at rest initially."""
        motion = RampedMotion(Translation((1.0, 0.0)))
        np.testing.assert_allclose(motion.velocity(POINTS, 0.0), 0.0)

    def test_invalid(self):
        """Test gamma below one is refused."""
        with pytest.raises(ConfigurationError):
            TimeRamp(0.5, 0.1)


class TestCustomMotion:
    """Tests for CustomMotion."""

    def test_finite_difference_velocity(self):
        """Test velocity falls back to central differences."""
        motion = CustomMotion(lambda x, t: x + np.array([t**2, 0.0]))
        np.testing.assert_allclose(motion.velocity(POINTS, 0.5), [[1.0, 0.0]] * 3, atol=1e-8)

    def test_missing_inverse(self):
        """Test a custom motion without an inverse cannot be inverted."""
        with pytest.raises(ConfigurationError, match="no inverse"):
            CustomMotion(lambda x, t: x).inverse(POINTS, 0.5)


class TestBuildMotion:
    """Tests for build_motion."""

    def test_translation(self):
        """Test a translation from its parameters."""
        motion = build_motion("prescribed_translation", velocity=(0.5, 0.0))
        assert motion.kind == MotionKind.PRESCRIBED_TRANSLATION
        np.testing.assert_allclose(motion.position(POINTS, 2.0) - POINTS, [[1.0, 0.0]] * 3)

    def test_ramp_wraps_base(self):
        """Test the ramp builds its base from a kind name."""
        motion = build_motion(
            MotionKind.COMPOSED_WITH_TIME_RAMP, base="pitching_rotation", base_params={"theta_max": 0.2}, t_a=0.25
        )
        assert isinstance(motion, RampedMotion)
        assert motion.base.theta_max == 0.2
        assert motion.ramp.t_a == 0.25

    def test_unknown_kind(self):
        """Test unknown kinds list the choices."""
        with pytest.raises(ConfigurationError, match="expected one of"):
            build_motion("wobble")

    def test_nested_ramp(self):
        """Test a ramp cannot wrap a ramp."""
        with pytest.raises(ConfigurationError):
            build_motion("composed_with_time_ramp", base="composed_with_time_ramp")

    def test_custom_by_config(self):
        """Test custom motions cannot come from configuration."""
        with pytest.raises(ConfigurationError, match="programmatically"):
            build_motion("custom")


class TestMovingBoundary:
    """Tests for MovingBoundary and DirichletData."""

    def test_only_selected_loops_move(self, hole_boundary):
        """Test the box stays while the hole translates."""
        moving = MovingBoundary(hole_boundary, Translation((0.2, 0.0)), loops=[1])
        positions = moving.vertex_positions(1.0)
        np.testing.assert_allclose(positions[:4], hole_boundary.vertices[:4])
        np.testing.assert_allclose(positions[4:] - hole_boundary.vertices[4:], [[0.2, 0.0]] * 4)
        np.testing.assert_allclose(moving.vertex_velocities(0.3)[4:], [[0.2, 0.0]] * 4)
        assert moving.at(1.0).signed_area == pytest.approx(8.0)

    def test_invalid_loop(self, hole_boundary):
        """Test a loop index outside the boundary is refused."""
        with pytest.raises(ConfigurationError):
            MovingBoundary(hole_boundary, Static(), loops=[2])

    def test_dirichlet_data(self, hole_boundary):
        """Test slab data vanish at the slab start and interpolate along edges."""
        moving = MovingBoundary(hole_boundary, Translation((0.2, 0.0)), loops=[1])
        data = dirichlet_data(moving, 0.5)
        np.testing.assert_allclose(data.vertices(0.5), 0.0)
        edge = hole_boundary.loops[1][:1]
        values = data.on_edges(edge, np.array([[0.0, 0.5, 1.0]]), 1.0)
        np.testing.assert_allclose(values[0], [[0.1, 0.0]] * 3)
        box_edge = hole_boundary.loops[0][:1]
        np.testing.assert_allclose(data.on_edges(box_edge, np.array([[0.5]]), 1.0), 0.0)

    def test_relative_displacement(self):
        """Test relative displacement of a translation."""
        displacement = relative_displacement(Translation((0.2, 0.0)), POINTS, 0.25, 0.75)
        np.testing.assert_allclose(displacement, [[0.1, 0.0]] * 3)


class TestSmoothCutoff:
    """Tests for SmoothCutoff."""

    @pytest.fixture
    def cutoff(self):
        """Cut-off with support [1, 2]^2 in the box [0, 3]^2."""
        return SmoothCutoff((1.0, 1.0), (2.0, 2.0), (0.0, 0.0), (3.0, 3.0))

    def test_values(self, cutoff):
        """Test one on the support, zero on the box boundary, in between elsewhere."""
        values = cutoff(np.array([[1.5, 1.5], [0.0, 1.5], [3.0, 3.0], [0.5, 1.5]]))
        np.testing.assert_allclose(values, [1.0, 0.0, 0.0, 0.5])

    def test_gradient(self, cutoff):
        """Test the gradient against central differences."""
        x = np.array([[0.4, 1.3], [2.6, 0.7], [1.5, 1.5]])
        eps = 1e-6
        fd = np.stack(
            [(cutoff(x + eps * e) - cutoff(x - eps * e)) / (2 * eps) for e in np.eye(2)], axis=-1
        )
        np.testing.assert_allclose(cutoff.gradient(x), fd, atol=1e-6)

    def test_support_must_be_inside(self):
        """Test a support touching the box is refused."""
        with pytest.raises(ConfigurationError):
            SmoothCutoff((0.0, 1.0), (2.0, 2.0), (0.0, 0.0), (3.0, 3.0))


class TestSweptCutoff:
    """Tests for swept_cutoff and check_fixed_loops."""

    BREAKPOINTS = np.linspace(0.0, 1.0, 5)

    def test_padded_swept_box(self, hole_boundary):
        """Test the support is the swept hole padded by the margin."""
        moving = MovingBoundary(hole_boundary, Translation((0.2, 0.1)), loops=[1])
        cutoff = swept_cutoff(moving, self.BREAKPOINTS, (0.0, 0.0), (3.0, 3.0), margin=0.25)
        np.testing.assert_allclose(cutoff.support_lower, [0.75, 0.75])
        np.testing.assert_allclose(cutoff.support_upper, [2.45, 2.35])
        np.testing.assert_allclose(cutoff(hole_boundary.vertices[:4]), 0.0)

    def test_support_clamped_to_inset(self, hole_boundary):
        """Test a large margin is clamped to the inset of the box."""
        moving = MovingBoundary(hole_boundary, Static(), loops=[1])
        cutoff = swept_cutoff(moving, self.BREAKPOINTS, (0.0, 0.0), (3.0, 3.0), margin=2.0)
        np.testing.assert_allclose(cutoff.support_lower, [0.15, 0.15])
        np.testing.assert_allclose(cutoff.support_upper, [2.85, 2.85])

    def test_sweep_too_close(self, hole_boundary):
        """Test a hole sweeping into the inset is refused."""
        moving = MovingBoundary(hole_boundary, Translation((0.95, 0.0)), loops=[1])
        with pytest.raises(ConfigurationError, match="too close"):
            swept_cutoff(moving, self.BREAKPOINTS, (0.0, 0.0), (3.0, 3.0))

    def test_needs_a_moving_loop(self, hole_boundary):
        """Test a boundary without moving loops has no sweep."""
        moving = MovingBoundary(hole_boundary, Static(), loops=[])
        with pytest.raises(ConfigurationError, match="moving loop"):
            swept_cutoff(moving, self.BREAKPOINTS, (0.0, 0.0), (3.0, 3.0))

    def test_fixed_box_accepted(self, hole_boundary):
        """Test a fixed loop on the artificial boundary is left in place."""
        moving = MovingBoundary(hole_boundary, Translation((0.2, 0.1)), loops=[1])
        cutoff = swept_cutoff(moving, self.BREAKPOINTS, (0.0, 0.0), (3.0, 3.0))
        check_fixed_loops(cutoff, moving)

    def test_missing_cutoff_rejected(self, hole_boundary):
        """Test a rigid displacement without a cut-off would drag the box."""
        moving = MovingBoundary(hole_boundary, Translation((0.2, 0.1)), loops=[1])
        with pytest.raises(ConfigurationError, match="fixed boundary loop"):
            check_fixed_loops(None, moving)

    def test_fixed_interior_loop_rejected(self, hole_boundary):
        """Test a fixed hole inside the cut-off support is refused."""
        moving = MovingBoundary(hole_boundary, Translation((0.2, 0.1)), loops=[0])
        cutoff = SmoothCutoff((0.5, 0.5), (2.5, 2.5), (0.0, 0.0), (3.0, 3.0))
        with pytest.raises(ConfigurationError, match="fixed boundary loop"):
            check_fixed_loops(cutoff, moving)
