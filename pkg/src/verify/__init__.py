# Theorem bounds, convergence experiments and the lemma suite
