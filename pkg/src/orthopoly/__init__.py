# Orthonormal polynomials: recurrences, Gauss rules, Christoffel functions
