import logging

from src.utils.logging import SimLogger


def test_extra_rendered_sorted(caplog):
    """Test context pairs follow the message in key order"""
    sim_logger = SimLogger("is_antisensing.test")
    caplog.set_level(logging.INFO, logger="is_antisensing.test")

    sim_logger.info("Sweep finished", {"records": 9, "infeasible": 0})
    assert caplog.records[-1].getMessage() == "[info] Sweep finished | infeasible=0 records=9"
    assert caplog.records[-1].levelno == logging.INFO


def test_level_filtering(caplog):
    """Test messages below the configured level are dropped"""
    sim_logger = SimLogger("is_antisensing.quiet")
    caplog.set_level(logging.WARNING, logger="is_antisensing.quiet")

    sim_logger.debug("Selected candidate", {"index": 6})
    sim_logger.warning("Infeasible point")
    messages = [record.getMessage() for record in caplog.records if record.name == "is_antisensing.quiet"]
    assert messages == ["[warning] Infeasible point"]
