# Hamiltonian and initial-state models
