"""Infrastructure implementations.

Import from the specific submodules:
- bin.cli.infrastructure.json_store
- bin.cli.infrastructure.config_source
- bin.cli.infrastructure.csv_artifacts
"""
