"""fairgauge: repository FAIRness, quality, and impact analyzer."""

__version__ = "0.1.0"

TOOL_NAME = "fairgauge"
