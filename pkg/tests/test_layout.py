import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floorseq.geometry import Frame, Pose, yaw_rotation
from floorseq.layout import RawLayout, column_azimuths, project_boundary, register_boundary


def _layout_with(theta, phi, W=8):
    """Raw layout whose column at azimuth ``theta`` has elevation ``phi`` (others pi/4)."""
    az = column_azimuths(W)
    j = int(np.argmin(np.abs(az - theta)))
    assert abs(az[j] - theta) < 1e-12
    values = np.full(W, np.pi / 4)
    values[j] = phi
    return RawLayout(values), j


@pytest.mark.parametrize("theta, phi, expected", [
    (0.0, np.pi / 4, (0.0, -1.0, 1.0)),
    (np.pi / 2, np.pi / 4, (1.0, -1.0, 0.0)),
    (0.0, np.arctan(1 / 3), (0.0, -1.0, 3.0)),
])
def test_project_boundary_examples(theta, phi, expected):
    raw, j = _layout_with(theta, phi)
    b = project_boundary(raw, 1.0)
    assert np.allclose(b.points[j], expected, atol=1e-12)
    assert len(b) == 8 and b.frame is Frame.CAMERA


def test_column_azimuths_cover_minus_pi_to_pi():
    az = column_azimuths(4)
    assert np.allclose(az, [-np.pi, -np.pi / 2, 0, np.pi / 2])


@pytest.mark.parametrize("bad", [0.0, np.pi / 2, -0.1, 2.0])
def test_raw_layout_rejects_phi_outside_open_interval(bad):
    with pytest.raises(ValueError, match=r"phi\[1\]"):
        RawLayout([0.3, bad, 0.3])


def test_register_identity_and_translation():
    raw = RawLayout(np.linspace(0.2, 1.2, 16), (3, 9))
    b = project_boundary(raw)
    same = register_boundary(b, Pose(np.eye(3), np.zeros(3)), 3.7)
    assert np.allclose(same.points, b.points) and same.wall_splits == (3, 9) and same.frame is Frame.WORLD
    moved = register_boundary(b, Pose(np.eye(3), [1.0, 0.0, 0.0]), 2.0)
    assert np.allclose(moved.points - b.points, [2.0, 0.0, 0.0])


def test_register_yaw_ninety_degrees():
    raw, j = _layout_with(0.0, np.pi / 4)
    b = register_boundary(project_boundary(raw), Pose(yaw_rotation(np.pi / 2), np.zeros(3)), 1.0)
    assert np.allclose(b.points[j], [1.0, -1.0, 0.0])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.05, 1.5), min_size=4, max_size=32), st.floats(0.3, 3.0))
def test_projected_radius_is_h_cot_phi(phis, h):
    raw = RawLayout(np.array(phis))
    b = project_boundary(raw, h)
    assert np.allclose(np.hypot(b.points[:, 0], b.points[:, 2]), h / np.tan(raw.phi), atol=1e-9)
    assert np.all(b.points[:, 1] == -h)


@settings(max_examples=40, deadline=None)
@given(st.floats(-np.pi, np.pi), st.floats(-5, 5), st.floats(-5, 5), st.floats(0.1, 5))
def test_registration_is_rigid_and_linear_in_scale(yaw, tx, tz, s):
    raw = RawLayout(np.linspace(0.3, 1.1, 12))
    b = project_boundary(raw)
    pose = Pose(yaw_rotation(yaw), [tx, 0.0, tz])
    w = register_boundary(b, pose, s).points
    d0 = np.linalg.norm(b.points[:, None] - b.points[None], axis=2)
    d1 = np.linalg.norm(w[:, None] - w[None], axis=2)
    assert np.allclose(d0, d1, atol=1e-9)
    rotated = b.points @ pose.rotation.T
    off1 = w - rotated
    off2 = register_boundary(b, pose, 2 * s).points - rotated
    assert np.allclose(off2, 2 * off1, atol=1e-9)
