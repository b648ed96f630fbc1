"""Tests for config file parsing, env overrides, and validation."""

from __future__ import annotations

import pytest

from keystage.config import EngineConfig, load_config, parse_config_text
from keystage.errors import ResourceError, ValidationError


class TestParseConfigText:
    def test_full_grammar(self):
        text = """
        # service settings
        host = "0.0.0.0"
        port = 9000          # trailing comment
        token = "s3cret#not-a-comment"
        ratio = 0.25
        verbose = true
        quiet = false
        bare_path = /srv/model.json
        """
        values = parse_config_text(text)
        assert values == {
            "host": "0.0.0.0",
            "port": 9000,
            "token": "s3cret#not-a-comment",
            "ratio": 0.25,
            "verbose": True,
            "quiet": False,
            "bare_path": "/srv/model.json",
        }

    def test_escapes_in_quoted_strings(self):
        values = parse_config_text(r'token = "a\"b\\c\nd\te"')
        assert values["token"] == 'a"b\\c\nd\te'

    def test_empty_and_comment_only_text(self):
        assert parse_config_text("") == {}
        assert parse_config_text("# nothing\n\n  \n") == {}

    def test_missing_equals_rejected(self):
        with pytest.raises(ValidationError, match="line 1"):
            parse_config_text("port 8000")

    def test_bad_key_rejected(self):
        with pytest.raises(ValidationError, match="bad key"):
            parse_config_text("9port = 1")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ValidationError, match="duplicate"):
            parse_config_text("port = 1\nport = 2")

    def test_unterminated_string_rejected(self):
        with pytest.raises(ValidationError, match="unterminated"):
            parse_config_text('host = "open')

    def test_text_after_closing_quote_rejected(self):
        with pytest.raises(ValidationError, match="after closing quote"):
            parse_config_text('host = "a" b')

    def test_unsupported_escape_rejected(self):
        with pytest.raises(ValidationError, match="escape"):
            parse_config_text(r'host = "a\qb"')

    def test_missing_value_rejected(self):
        with pytest.raises(ValidationError, match="missing value"):
            parse_config_text("port = # nothing")


class TestEngineConfig:
    def test_defaults(self):
        config = EngineConfig()
        assert config.port == 8000
        assert config.request_limit_bytes == 1_048_576
        assert config.token_budget == 512
        assert config.model_path is None
        assert config.token is None

    @pytest.mark.parametrize("port", [0, 65536, -1])
    def test_port_range_enforced(self, port):
        with pytest.raises(ValidationError):
            EngineConfig(port=port)

    def test_positive_limits_enforced(self):
        with pytest.raises(ValidationError):
            EngineConfig(request_limit_bytes=0)
        with pytest.raises(ValidationError):
            EngineConfig(token_budget=0)


class TestLoadConfig:
    def test_defaults_without_file_or_env(self):
        assert load_config(env={}) == EngineConfig()

    def test_file_overrides_defaults(self, tmp_path):
        path = tmp_path / "engine.conf"
        path.write_text('port = 9100\nmodel_path = "m.json"\n')
        config = load_config(path, env={})
        assert config.port == 9100
        assert config.model_path == "m.json"
        assert config.host == "127.0.0.1"

    def test_env_overrides_file(self, tmp_path):
        path = tmp_path / "engine.conf"
        path.write_text("port = 9100\n")
        config = load_config(path, env={"ENGINE_PORT": "9200", "ENGINE_TOKEN": "t"})
        assert config.port == 9200
        assert config.token == "t"

    def test_env_alone(self):
        config = load_config(env={"ENGINE_MODEL_PATH": "/models/a.json"})
        assert config.model_path == "/models/a.json"

    def test_unrelated_env_ignored(self):
        config = load_config(env={"PATH": "/usr/bin", "HOME": "/root"})
        assert config == EngineConfig()

    def test_empty_env_string_clears_optional(self, tmp_path):
        path = tmp_path / "engine.conf"
        path.write_text('token = "secret"\n')
        config = load_config(path, env={"ENGINE_TOKEN": ""})
        assert config.token is None

    def test_missing_file(self, tmp_path):
        with pytest.raises(ResourceError):
            load_config(tmp_path / "absent.conf", env={})

    def test_unknown_file_key_rejected(self, tmp_path):
        path = tmp_path / "engine.conf"
        path.write_text("prot = 1\n")
        with pytest.raises(ValidationError, match="unknown config key"):
            load_config(path, env={})

    def test_unknown_env_override_rejected(self):
        with pytest.raises(ValidationError, match="ENGINE_PROT"):
            load_config(env={"ENGINE_PROT": "1"})

    def test_non_integer_port_rejected(self, tmp_path):
        path = tmp_path / "engine.conf"
        path.write_text('port = "eight"\n')
        with pytest.raises(ValidationError, match="integer"):
            load_config(path, env={})

    def test_non_integer_env_port_rejected(self):
        with pytest.raises(ValidationError, match="integer"):
            load_config(env={"ENGINE_PORT": "eight"})

    def test_numeric_string_field_rejected(self, tmp_path):
        path = tmp_path / "engine.conf"
        path.write_text("host = 3\n")
        with pytest.raises(ValidationError, match="string"):
            load_config(path, env={})

    def test_out_of_range_env_port_rejected(self):
        with pytest.raises(ValidationError, match="port"):
            load_config(env={"ENGINE_PORT": "70000"})

    def test_static_dir_from_file(self, tmp_path):
        path = tmp_path / "engine.conf"
        path.write_text('static_dir = "web/dist"\n')
        assert load_config(path, env={}).static_dir == "web/dist"

    def test_static_dir_from_env(self):
        config = load_config(env={"ENGINE_STATIC_DIR": "/srv/client"})
        assert config.static_dir == "/srv/client"
