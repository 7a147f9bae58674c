# Scenario configuration and runner
