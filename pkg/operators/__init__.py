# Operator algebra module
