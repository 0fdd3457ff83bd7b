# Bounded-variation function model and weighted variation
