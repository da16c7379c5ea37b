from configparser import ConfigParser, Error as ConfigError
from pathlib import Path
from typing import Dict, Union

from cpdag_discovery_tool.errors import ValidationError


# Flat files have no section header, one is injected before parsing
_SECTION = "flat"


def parse_key_value(text: str, source: str = "<string>") -> Dict[str, str]:
    """Parse flat `key=value` text into a dictionary

    Blank lines and `;`/`#` comments are ignored. Keys are lower-cased by
    the parser, values are kept as written.

    Args:
        text (str): The file contents
        source (str, optional): Name used in error messages. Defaults to "<string>".

    Returns:
        Dict[str, str]: The key/value pairs in file order
    """
    parser = ConfigParser(interpolation=None)
    try:
        parser.read_string(f"[{_SECTION}]\n{text}", source=source)
    except ConfigError as err:
        raise ValidationError(f"{source}: malformed key=value file ({err})") from err
    return dict(parser.items(_SECTION))


def read_key_value(location: Union[str, Path]) -> Dict[str, str]:
    """Read a flat `key=value` file

    Args:
        location (Union[str, Path]): Path of the file

    Returns:
        Dict[str, str]: The key/value pairs in file order
    """
    location = Path(location)
    try:
        text = location.read_text()
    except OSError as err:
        raise OSError(f"cannot read {location}: {err.strerror or err}") from err
    return parse_key_value(text, source=str(location))


def format_key_value(values: Dict[str, object]) -> str:
    """Render a dictionary as flat `key=value` lines in insertion order"""
    return "".join(f"{key}={value}\n" for key, value in values.items())
