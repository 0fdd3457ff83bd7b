# Exponential weight families and Mhaskar-Rakhmanov-Saff numbers
