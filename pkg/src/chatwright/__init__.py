"""chatwright: build a chatbot by talking to a dev-bot.

The system keeps an explicit, editable representation of what it understood
(knowledge base, logic rules, variables), executes it as a live test-bot,
and versions every change with rollback, diffing, and direct edits.
"""

__version__ = "0.1.0"
