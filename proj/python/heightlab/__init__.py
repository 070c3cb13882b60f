"""Height processes of branching populations with interaction.

Thin wrapper over the compiled core.  The extension lives inside the package
in an installed wheel and next to it on the build-tree PYTHONPATH used by the
test harness, so both locations are tried.
"""

try:
    from ._heightlab import *  # noqa: F401,F403
    from ._heightlab import __doc__ as _core_doc
except ImportError:
    from _heightlab import *  # noqa: F401,F403
    from _heightlab import __doc__ as _core_doc

__all__ = [
    "LevyMeasure",
    "Mechanism",
    "psi",
    "phi",
    "seed_split",
    "InteractionFn",
    "linear_interaction",
    "logistic_interaction",
    "polynomial_interaction",
    "localize",
    "Extinction",
    "extinction_criterion",
    "LevyPath",
    "HeightPath",
    "simulate_levy",
    "simulate_levy_first_passage",
    "height_from_path",
    "first_passage_time",
    "local_time_field",
    "occupation_at_level",
    "PopulationPath",
    "simulate_csbp",
    "ks_two_sample",
]
