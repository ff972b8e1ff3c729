"""The boxchain application: plugin manager and behaviour lookup."""
import logging
from typing import TYPE_CHECKING, List, Optional, Type

import pluggy
from pluggy import PluginManager

from boxchain import plugins
from boxchain.constants import PROJECT_NAME
from boxchain.exceptions import UnknownBehavior

if TYPE_CHECKING:
    from boxchain.config import ScenarioConfig
    from boxchain.plugins.base import AgentBehavior

LOGGER = logging.getLogger(__name__)


class BoxchainApp:
    """The boxchain application."""

    _current_app = None  # type: BoxchainApp

    plugin_manager = None  # type: PluginManager

    @classmethod
    def create_app(cls) -> "BoxchainApp":
        """Create a single application."""
        app = cls()
        cls._current_app = app
        app.plugin_manager = app.load_plugins()
        return app

    @staticmethod
    def load_plugins() -> PluginManager:
        """Load the built-in behaviours and the ones installed under the ``boxchain`` entry point."""
        # pylint: disable=import-outside-toplevel
        from boxchain.plugins import honest, lazy, malicious

        plugin_manager = pluggy.PluginManager(PROJECT_NAME)
        plugin_manager.add_hookspecs(plugins)
        for module in (honest, lazy, malicious):
            plugin_manager.register(module, name=module.__name__)
        plugin_manager.load_setuptools_entrypoints(PROJECT_NAME)
        return plugin_manager

    @classmethod
    def current(cls) -> "BoxchainApp":
        """Get the current app, creating one on first use."""
        if cls._current_app is None:
            return cls.create_app()
        return cls._current_app

    def behavior_classes(self) -> List[Type["AgentBehavior"]]:
        """Every registered behaviour class."""
        return list(self.plugin_manager.hook.plugin_class())

    def behavior_for(self, behavior: str, config: "ScenarioConfig") -> "AgentBehavior":
        """Instantiate the behaviour of a name; the first plugin that handles it wins."""
        instances = [
            instance
            for instance in self.plugin_manager.hook.handler(behavior=behavior, config=config)
            if instance is not None
        ]  # type: List[Optional[AgentBehavior]]
        if not instances:
            raise UnknownBehavior(behavior)
        LOGGER.debug("Behaviour %s handled by %s", behavior, type(instances[0]).__name__)
        return instances[0]
