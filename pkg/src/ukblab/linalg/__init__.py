"""
dense complex linear algebra kernel
"""
