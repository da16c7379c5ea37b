import os
from typing import Callable, List, Optional


def get_filepaths_from_dir(dirpath, suffix: Optional[str] = None,
                           key: Optional[Callable] = None) -> List[str]:
    """List absolute file paths in a directory, sorted by name (or `key`)

    Args:
        dirpath: Directory to list
        suffix (Optional[str], optional): Keep only names ending with it. Defaults to None.
        key (Optional[Callable], optional): Sort key for the names. Defaults to None.

    Returns:
        List[str]: The file paths
    """
    filenames = sorted(os.listdir(dirpath), key=key)
    if suffix is not None:
        filenames = [name for name in filenames if name.endswith(suffix)]
    filepaths = [os.path.join(os.path.abspath(dirpath), filename)
                 for filename in filenames]
    return filepaths
