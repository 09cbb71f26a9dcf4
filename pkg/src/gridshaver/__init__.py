"""Deterministic PV-fed microgrid simulator with peak shaving and power-flow
management: two-diode array model, incremental-conductance MPPT,
switched-inductor boost converter, four-home HAN with smart metering, and a
smart control unit driving an islanded/grid-connected engine."""

__version__ = "0.1.0"
