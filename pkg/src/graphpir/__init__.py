"""Private information retrieval from graph-structured, non-replicated storage."""
