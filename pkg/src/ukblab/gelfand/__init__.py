"""
Gelfand transform, tomographic inversion, star product and norm recovery
"""
