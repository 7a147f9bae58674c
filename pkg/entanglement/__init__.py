# Entanglement measures module
