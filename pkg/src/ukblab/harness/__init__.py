"""
command-line harness, instance catalog and verification suite
"""
