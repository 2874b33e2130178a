"""Multimodal command interpretation and mixed-initiative control for
multi-drone search missions.

Subsystems: gesture template classification, command grammar parsing,
late fusion of speech/gesture channels, RRT* path planning with quartic
spline trajectories, search-pattern generation, human trajectory blending,
and a deterministic mission simulator with a session service on top.
"""

__version__ = "0.1.0"
