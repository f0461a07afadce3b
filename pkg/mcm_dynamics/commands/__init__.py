"""
Command-line sub-commands.
Each module exposes ``register(subparsers)`` and ``handle(args) -> int``.
"""
