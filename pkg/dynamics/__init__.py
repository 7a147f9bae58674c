# Open-system dynamics module
