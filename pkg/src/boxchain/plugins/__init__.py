"""Hook specifications used by agent behaviour plugins.

.. note::

    The hook specifications and the behaviour classes are still experimental and considered as an internal API.
    They might change at any time; use at your own risk.
"""
from typing import TYPE_CHECKING, Optional, Type

import pluggy

from boxchain.constants import PROJECT_NAME

if TYPE_CHECKING:
    from boxchain.config import ScenarioConfig
    from boxchain.plugins.base import AgentBehavior


hookspec = pluggy.HookspecMarker(PROJECT_NAME)
hookimpl = pluggy.HookimplMarker(PROJECT_NAME)


@hookspec
def plugin_class() -> Type["AgentBehavior"]:
    """Return your behaviour class here (it should inherit from :py:class:`boxchain.plugins.base.AgentBehavior`)."""


@hookspec
def handler(behavior: str, config: "ScenarioConfig") -> Optional["AgentBehavior"]:  # pylint: disable=unused-argument
    """Return a valid :py:class:`boxchain.plugins.base.AgentBehavior` instance or ``None``.

    :return: A behaviour instance if your plugin handles this behaviour name.
        Return ``None`` if your plugin doesn't handle it.
    """
