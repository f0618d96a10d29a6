"""Event-triggered broadcast coverage control: geometry, simulator and CLI."""
