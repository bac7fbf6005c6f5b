"""carbon-gmam - Most probable transitions in the upper-ocean carbonate model"""

__version__ = "1.0.0"
__author__ = "carbon-gmam developers"
