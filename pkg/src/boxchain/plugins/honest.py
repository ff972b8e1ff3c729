"""Honest agents."""
from typing import Optional, Type

from boxchain.config import HONEST, ScenarioConfig
from boxchain.plugins import hookimpl
from boxchain.plugins.base import AgentBehavior


class HonestBehavior(AgentBehavior):
    """Approve two eligible tips chosen uniformly, one of them the agent's previous transaction when possible."""

    name = HONEST


@hookimpl
def plugin_class() -> Type["AgentBehavior"]:
    """You should return your behaviour class here."""
    return HonestBehavior


@hookimpl
def handler(behavior: str, config: ScenarioConfig) -> Optional["AgentBehavior"]:
    """Handle honest agents."""
    if behavior == HONEST:
        return HonestBehavior(config)
    return None
