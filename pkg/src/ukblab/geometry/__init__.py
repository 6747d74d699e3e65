"""
uniform Kähler bundles of pure states and their subbundles
"""
