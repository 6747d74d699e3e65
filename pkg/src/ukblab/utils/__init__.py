"""
report and JSON spec utilities
"""
