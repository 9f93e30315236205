"""Tests for spacetime_agfem.config module."""

import json
import os
from pathlib import Path
from unittest.mock import patch

import pytest

from spacetime_agfem.config import RunConfig
from spacetime_agfem.exceptions import ConfigurationError


class TestRunConfigDefaults:
    """Tests for RunConfig default values."""

    def test_defaults_validate(self):
        """Test the defaults form a valid config."""
        assert RunConfig().validate() is not None

    def test_default_mesh(self):
        """Test the default mesh is 8 x 8 on [0, 3]^2."""
        config = RunConfig()
        assert config.mesh.counts == (8, 8)
        assert config.mesh.upper == (3.0, 3.0)
        assert not config.mesh.simplexify

    def test_default_problem(self):
        """Test the default problem is the manufactured solution."""
        config = RunConfig()
        assert config.problem.kind == "manufactured"
        assert config.motion.kind == "prescribed_translation"
        assert config.geometry.shape == "square_hole"

    def test_default_discretization(self):
        """Test p = q = 1 with the prescribed deformation."""
        disc = RunConfig().discretization
        assert (disc.p, disc.q) == (1, 1)
        assert disc.deformation == "prescribed"
        assert disc.nitsche_c0 == 10.0

    def test_default_output(self):
        """Test default output settings."""
        config = RunConfig()
        assert config.output_dir == Path("output")
        assert config.output.log_level == "INFO"


class TestRunConfigFromEnv:
    """Tests for RunConfig.from_env() method."""

    def test_from_env_no_variables(self):
        """Test from_env with no environment variables set."""
        with patch.dict(os.environ, {}, clear=True):
            config = RunConfig.from_env()
            assert config.output.directory == "output"
            assert config.output.log_level == "INFO"

    def test_from_env_output_dir(self, tmp_path):
        """Test from_env reads STAGFEM_OUTPUT_DIR."""
        with patch.dict(os.environ, {"STAGFEM_OUTPUT_DIR": str(tmp_path)}):
            config = RunConfig.from_env()
            assert config.output_dir == tmp_path

    def test_from_env_log_level(self):
        """Test from_env reads STAGFEM_LOG_LEVEL case-insensitively."""
        with patch.dict(os.environ, {"STAGFEM_LOG_LEVEL": "debug"}):
            config = RunConfig.from_env()
            assert config.output.log_level == "DEBUG"

    def test_from_env_log_level_invalid(self):
        """Test from_env ignores an invalid log level."""
        with patch.dict(os.environ, {"STAGFEM_LOG_LEVEL": "LOUD"}):
            config = RunConfig.from_env()
            assert config.output.log_level == "INFO"  # Default


class TestRunConfigFromDict:
    """Tests for strict loading from nested mappings."""

    def test_partial_blocks(self):
        """Test omitted keys keep their defaults."""
        config = RunConfig.from_dict({"mesh": {"counts": [16, 12]}, "time": {"end": 2.0}})
        assert config.mesh.counts == (16, 12)
        assert config.mesh.lengths == (3.0, 3.0)
        assert config.time.end == 2.0

    def test_integers_accepted_as_floats(self):
        """Test integer literals are accepted for float keys."""
        config = RunConfig.from_dict({"problem": {"mu": 2}})
        assert config.problem.mu == 2.0
        assert isinstance(config.problem.mu, float)

    def test_optional_null(self):
        """Test optional keys accept null."""
        config = RunConfig.from_dict({"time": {"slabs": None, "tau": 0.25}})
        assert config.time.slabs is None

    @pytest.mark.parametrize(
        "data,message",
        [
            ({"meshes": {}}, "unknown config key meshes"),
            ({"mesh": {"count": [4, 4]}}, "unknown config key mesh.count"),
            ({"mesh": {"counts": ["a", 4]}}, r"mesh.counts\[0\]: expected an integer"),
            ({"mesh": {"counts": [4]}}, "mesh.counts: expected 2 entries"),
            ({"mesh": {"counts": 4}}, "mesh.counts: expected a list"),
            ({"mesh": {"simplexify": 1}}, "mesh.simplexify: expected true or false"),
            ({"discretization": {"p": True}}, "discretization.p: expected an integer"),
            ({"problem": {"mu": "1"}}, "problem.mu: expected a number"),
            ({"problem": {"kind": None}}, "problem.kind: may not be null"),
            ({"mesh": []}, "mesh: expected an object"),
        ],
    )
    def test_type_errors_name_the_key(self, data, message):
        """Test wrong types and unknown keys name the dotted path."""
        with pytest.raises(ConfigurationError, match=message):
            RunConfig.from_dict(data)

    @pytest.mark.parametrize(
        "data,message",
        [
            ({"mesh": {"counts": [0, 4]}}, "mesh.counts"),
            ({"mesh": {"grading": {"alpha": 1.5}}}, "mesh.grading.alpha"),
            ({"time": {"end": 0.0}}, "time.end"),
            ({"time": {"tau": 0.1}}, "exactly one"),
            ({"problem": {"kind": "heat"}}, "problem.kind"),
            ({"problem": {"mu": 0.0}}, "problem.mu"),
            ({"geometry": {"shape": "file"}}, "geometry.boundary_file"),
            ({"geometry": {"gear_teeth": 2}}, "geometry.gear_teeth"),
            ({"motion": {"kind": "custom"}}, "motion.kind"),
            ({"motion": {"base": "composed_with_time_ramp"}}, "motion.base"),
            ({"discretization": {"p": 0}}, "discretization.p"),
            ({"discretization": {"deformation": "rigid"}}, "discretization.deformation"),
            ({"discretization": {"transfer_skip_threshold": 1.0}}, "transfer_skip_threshold"),
            ({"output": {"log_level": "LOUD"}}, "output.log_level"),
            ({"discretization": {"small_deformation_shortcut": True}}, "requires mesh.simplexify"),
        ],
    )
    def test_value_errors_name_the_key(self, data, message):
        """Test out-of-range values name the dotted path."""
        with pytest.raises(ConfigurationError, match=message):
            RunConfig.from_dict(data)

    def test_round_trip(self):
        """Test the resolved dict loads back into an equal config."""
        config = RunConfig.from_dict({"geometry": {"moving_loops": [1]}, "mesh": {"simplexify": True}})
        again = RunConfig.from_dict(config.to_dict())
        assert again == config
        json.dumps(config.to_dict())


class TestRunConfigFromJson:
    """Tests for RunConfig.from_json()."""

    def test_reads_file(self, tmp_path):
        """Test a JSON file is loaded and validated."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"time": {"slabs": 4}}))
        assert RunConfig.from_json(path).time.slabs == 4

    def test_missing_file(self, tmp_path):
        """Test a missing file raises ConfigurationError."""
        with pytest.raises(ConfigurationError, match="not found"):
            RunConfig.from_json(tmp_path / "missing.json")

    def test_invalid_json(self, tmp_path):
        """Test a JSON syntax error reports the line."""
        path = tmp_path / "bad.json"
        path.write_text('{\n  "mesh": ,\n}')
        with pytest.raises(ConfigurationError, match="line 2"):
            RunConfig.from_json(path)


class TestRunConfigSchema:
    """Tests for RunConfig.schema()."""

    def test_dotted_keys(self):
        """Test nested keys are flattened with their types."""
        schema = RunConfig.schema()
        assert schema["mesh.simplexify"] == "bool"
        assert schema["mesh.grading.alpha"] == "float"
        assert "int" in schema["time.slabs"]
        assert "output.log_level" in schema


class TestMotionParams:
    """Tests for MotionConfig.params()."""

    def test_translation(self):
        """Test the translation only needs its velocity."""
        assert RunConfig().motion.params() == {"velocity": (0.2, 0.0)}

    def test_ramp_nests_the_base(self):
        """Test the ramped motion carries the parameters of its base."""
        motion = RunConfig.from_dict({"motion": {"kind": "composed_with_time_ramp"}}).motion
        params = motion.params()
        assert params["base"] == "rigid_rotation_oscillation"
        assert params["base_params"]["center"] == (1.5, 1.5)
        assert params["gamma"] == 2.0

    def test_static_has_no_parameters(self):
        """Test the static motion takes no parameters."""
        assert RunConfig().motion.params("static") == {}


CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


class TestShippedConfigs:
    """Tests for the configs shipped with the repository."""

    @pytest.mark.parametrize("name", sorted(p.name for p in CONFIG_DIR.glob("*.json")))
    def test_loads(self, name):
        """Test every shipped config passes strict validation."""
        config = RunConfig.from_json(CONFIG_DIR / name)
        assert config.output_dir.parts[0] == "output"
