"""Vessel dynamics, estimation, neurodynamics and distributed control laws"""
