"""Train status assistant: delay models, journey analytics, and a chat agent."""

__version__ = "0.1.0"
