"""
Base command class and command registry for the NP-LDA command line
"""
import argparse
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional, Type

from pydantic import BaseModel, ValidationError
from rich.console import Console

from app.core.config import get_settings
from app.core.errors import ConfigError
from app.core.logging import get_logger


class CommandRequest(BaseModel):
    """Validated arguments of one subcommand"""


class BaseCommand(ABC):
    """
    Base class for all subcommands

    Responsibilities:
    - declare its arguments on an argparse subparser
    - validate them into a pydantic request model
    - execute the request and render results on the console
    """

    name: str = ""
    help: str = ""
    request_model: Type[CommandRequest] = CommandRequest

    def __init__(self, console: Optional[Console] = None):
        self.console = console or Console()
        self.logger = get_logger(f"app.cli.{self.name}")
        self.settings = get_settings()

    @abstractmethod
    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        """Declare the subcommand's arguments"""

    @abstractmethod
    def execute(self, request: CommandRequest) -> int:
        """Run the request; returns the process exit code"""

    def build_request(self, args: argparse.Namespace) -> CommandRequest:
        values: Dict[str, Any] = {
            key: value
            for key, value in vars(args).items()
            if key in self.request_model.model_fields and value is not None
        }
        try:
            return self.request_model.model_validate(values)
        except ValidationError as exc:
            details = "; ".join(f"{'.'.join(map(str, e['loc'])) or '<root>'}: {e['msg']}" for e in exc.errors())
            raise ConfigError(f"invalid arguments for {self.name}: {details}", command=self.name) from exc

    def run(self, args: argparse.Namespace) -> int:
        request = self.build_request(args)
        self.logger.debug("command_started", command=self.name)
        return self.execute(request)


class CommandRegistry:
    """Registry for managing subcommand classes"""

    def __init__(self):
        self.command_types: Dict[str, Type[BaseCommand]] = {}

    def register(self, command_class: Type[BaseCommand]) -> Type[BaseCommand]:
        self.command_types[command_class.name] = command_class
        return command_class

    def names(self) -> List[str]:
        return list(self.command_types)

    def create(self, name: str, console: Optional[Console] = None) -> BaseCommand:
        if name not in self.command_types:
            raise ValueError(f"Unknown command: {name}")
        return self.command_types[name](console=console)


command_registry = CommandRegistry()
