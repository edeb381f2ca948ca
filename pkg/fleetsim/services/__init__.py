"""Simulation services: integration engine and run metrics"""
