"""Shared fixtures. Every test runs with network access disabled."""

import socket

import pytest


class _NetworkRefused(RuntimeError):
    pass


@pytest.fixture(autouse=True)
def no_network(monkeypatch):
    """Refuse any socket connection for the duration of each test."""

    def refuse(*args, **kwargs):
        raise _NetworkRefused("network access attempted during tests")

    monkeypatch.setattr(socket.socket, "connect", refuse)
    monkeypatch.setattr(socket, "create_connection", refuse)
    yield
