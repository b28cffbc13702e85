# Tests for the Diophantine spectral-flow decision procedures
