# src/prompter.py

from typing import List, Optional

import questionary
from questionary import Choice

from .config_manager import ConfigManager
from .custom_logger import log


class Prompter:
    """
    Handles interactive questions of the benchmark CLI.
    """

    def __init__(self, config: Optional[ConfigManager] = None) -> None:
        """
        Initializes the Prompter with the given configuration.

        Args:
            config (Optional[ConfigManager]): Configuration manager instance.
        """
        self.config = config

    def prompt_problem_selection(self, problems: Optional[List[str]] = None) -> Optional[str]:
        """
        Prompts the user to select one of the benchmark problems.

        Args:
            problems (Optional[List[str]]): Problem ids to offer; defaults to every profile.

        Returns:
            Optional[str]: The selected problem id, or None when the prompt is cancelled.
        """
        if problems is None:
            problems = self.config.list_problems() if self.config else []
        if not problems:
            log.error("No problem profiles available to choose from.")
            return None
        try:
            selected = questionary.select(
                "Select a benchmark problem:",
                choices=[Choice(title=p, value=p) for p in problems],
            ).ask()
            log.debug(f"User selected problem: {selected}")
            return selected
        except Exception as e:
            log.error(f"Error during problem selection prompt: {e}")
            return None

    def confirm_paper_scale(self, problem: str) -> bool:
        """
        Asks before starting a paper-scale run, which can take hours.

        Returns:
            bool: True if the user confirms, False otherwise.
        """
        return self._prompt_user_confirmation(
            f"Paper-scale settings for '{problem}' can run for hours. Continue?"
        )

    def _prompt_user_confirmation(self, message: str) -> bool:
        """
        Prompts the user for a yes/no confirmation.

        Args:
            message (str): The message to display to the user.

        Returns:
            bool: True if the user confirms, False otherwise.
        """
        try:
            user_input = questionary.confirm(message, default=False).ask()
            log.debug(f"User confirmation received: {user_input}")
            return user_input or False
        except Exception as e:
            log.error(f"Error during user confirmation prompt: {e}")
            return False
