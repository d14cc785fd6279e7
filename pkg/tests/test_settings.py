import os

import pytest

from src.config.settings import Settings


class TestSettings:
    def test_defaults(self):
        """Numeric policy defaults."""
        settings = Settings()
        assert settings.MEMBERSHIP_MARGIN == 1e-3
        assert settings.FALSIFY_TOL == 1e-9
        assert settings.CHECK_DEPTH == 4
        assert settings.ARC_NET_SIZE == 48
        assert settings.SCHEMA_VERSION == 1

    def test_env_override(self):
        """Environment variables with the ANOSOV_ prefix override defaults."""
        os.environ["ANOSOV_CHECK_DEPTH"] = "6"
        os.environ["ANOSOV_MEMBERSHIP_MARGIN"] = "0.01"
        try:
            settings = Settings()
            assert settings.CHECK_DEPTH == 6
            assert settings.MEMBERSHIP_MARGIN == 0.01
        finally:
            del os.environ["ANOSOV_CHECK_DEPTH"]
            del os.environ["ANOSOV_MEMBERSHIP_MARGIN"]

    def test_tolerances_must_be_positive(self):
        os.environ["ANOSOV_FALSIFY_TOL"] = "0"
        try:
            with pytest.raises(ValueError):
                Settings()
        finally:
            del os.environ["ANOSOV_FALSIFY_TOL"]

    def test_type_validation(self):
        os.environ["ANOSOV_ARC_NET_SIZE"] = "many"
        try:
            with pytest.raises(ValueError):
                Settings()
        finally:
            del os.environ["ANOSOV_ARC_NET_SIZE"]

    def test_round_digits_range(self):
        with pytest.raises(ValueError):
            Settings(ROUND_DIGITS=30)
