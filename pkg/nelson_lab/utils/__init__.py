"""Run manifest writer and run catalog CRUD."""
