"""Scenario configuration, builtin scenarios and trace files"""
