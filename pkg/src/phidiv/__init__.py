"""Divisibility of modular polynomial coefficients at supersingular primes."""
