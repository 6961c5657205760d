"""Generic, modular and incremental analysis of FlatCurry programs."""

from cass.analyses import REGISTRY, registry_list
from cass.api import Engine, analyze_generic, analyze_module
from cass.errors import CassError
from cass.framework import (
    Analysis,
    ProgInfo,
    Registry,
    cass_analysis,
    combined_dependency_func_analysis,
    combined_dependency_type_analysis,
    combined_func_analysis,
    combined_type_analysis,
    constructor_analysis,
    dependency_func_analysis,
    dependency_type_analysis,
    func_analysis,
    lookup_prog_info,
    type_analysis,
)
from cass.ir import QName, load_module

__version__ = "0.1.0"

__all__ = [
    "Analysis",
    "CassError",
    "Engine",
    "ProgInfo",
    "QName",
    "REGISTRY",
    "Registry",
    "analyze_generic",
    "analyze_module",
    "cass_analysis",
    "combined_dependency_func_analysis",
    "combined_dependency_type_analysis",
    "combined_func_analysis",
    "combined_type_analysis",
    "constructor_analysis",
    "dependency_func_analysis",
    "dependency_type_analysis",
    "func_analysis",
    "load_module",
    "lookup_prog_info",
    "registry_list",
    "type_analysis",
]
