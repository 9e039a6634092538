"""Lattice coding for two-way relay line networks.

The library is layered bottom-up: exact lattice arithmetic
(lattice_core), prime-field messages and their codeword maps
(field_codec), encoders, decoders and the relay transform (scheme),
the Block-Markov line simulator (netsim) and the closed-form rate
analysis (rates). Domain errors live in latticeway.exceptions; the
ports the CLI shell implements live in latticeway.ports.
"""
