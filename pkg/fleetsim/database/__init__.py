"""Run history database"""
