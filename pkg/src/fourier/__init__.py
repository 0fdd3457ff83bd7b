# Fourier-type expansions, kernels and tail integrals
