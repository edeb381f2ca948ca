"""
fleetsim
Distributed consensus formation tracking simulator for fleets of 6-DOF underwater vessels
"""

__version__ = "0.1.0"
