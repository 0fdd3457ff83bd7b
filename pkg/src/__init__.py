# Orthogonal polynomial expansions for exponential weights
