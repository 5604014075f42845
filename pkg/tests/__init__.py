"""symnorm tests."""
