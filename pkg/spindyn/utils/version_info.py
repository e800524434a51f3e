"""
spindyn Version Information: Application Metadata and Build Details.

Central source of the version number and of the platform and dependency
details recorded in every run manifest.

Usage:
    from spindyn.utils.version_info import APP_NAME, VERSION, get_version_string
    print(get_version_string())

Dependencies:
- sys / platform: interpreter and platform details
- importlib.metadata: installed dependency versions

License: MIT
Version: 1.0.0
"""

import platform
import sys
from importlib import metadata
from typing import Dict

VERSION_MAJOR = 1
VERSION_MINOR = 0
VERSION_PATCH = 0

VERSION = f"{VERSION_MAJOR}.{VERSION_MINOR}.{VERSION_PATCH}"

APP_NAME = "spindyn"
APP_DESCRIPTION = "Entanglement dynamics of two interacting spins in a constant magnetic field"

PYTHON_VERSION = f"{sys.version_info.major}.{sys.version_info.minor}.{sys.version_info.micro}"

DEPENDENCIES = ("numpy", "scipy", "psutil")


def get_version_string() -> str:
    """
    Get a formatted version string for display.

    Returns:
        e.g. 'spindyn v1.0.0'
    """
    return f"{APP_NAME} v{VERSION}"


def get_system_info() -> Dict[str, str]:
    """
    Get system information for manifests and bug reports.

    Returns:
        Dictionary containing system information
    """
    return {
        "os": platform.system(),
        "os_release": platform.release(),
        "machine": platform.machine(),
        "python": PYTHON_VERSION,
        "python_implementation": platform.python_implementation(),
    }


def get_dependencies_info() -> Dict[str, str]:
    """
    Get installed versions of the numerical dependencies.

    Returns:
        Dictionary mapping package name to version ('Not installed' if absent)
    """
    dependencies = {}
    for name in DEPENDENCIES:
        try:
            dependencies[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            dependencies[name] = "Not installed"
    return dependencies
