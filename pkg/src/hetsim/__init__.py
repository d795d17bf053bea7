"""System-level simulator for a macrocell with one femtocell: propagation,
a cell-selection game, SINR outage and voice/data channel pools."""

__version__ = "0.1.0"
