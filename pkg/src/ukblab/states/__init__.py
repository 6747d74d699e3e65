"""
states, pure states and the GNS construction
"""
