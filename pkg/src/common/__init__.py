# Shared utilities: logging, errors, quadrature, caching, checks
