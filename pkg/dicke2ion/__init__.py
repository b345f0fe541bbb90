__version__ = "0.1.0"

__all__ = [
    "errors",
    "algebra",
    "models",
    "ionsim",
    "dynamics",
    "observables",
    "mapping",
    "config",
    "presets",
    "scenario",
    "sweep",
    "locks",
    "cli",
    "utils",
]
