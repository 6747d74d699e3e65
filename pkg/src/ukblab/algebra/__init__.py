"""
finite-dimensional C*-algebras realized as *-subalgebras of matrix algebras
"""
