"""Thin client used by the CLI.

Without a server URL the FastAPI app is driven in process (no sockets, no
background server), which keeps commands deterministic and usable offline;
with --server the same calls go over HTTP to a running `mindlink serve`.
"""

from __future__ import annotations

import httpx

from .errors import MindlinkError


class ServiceError(MindlinkError):
    """Non-2xx response from the service."""

    def __init__(self, status_code: int, detail):
        self.status_code = status_code
        self.detail = detail
        if isinstance(detail, dict) and "message" in detail:
            message = f"{detail.get('error', 'error')}: {detail['message']}"
        else:
            message = str(detail)
        super().__init__(message)


class ServiceClient:
    """Uniform POST/GET front end over in-process or remote transport."""

    def __init__(self, server_url: str | None = None):
        if server_url:
            self._client = httpx.Client(base_url=server_url, timeout=600.0)
        else:
            # imported lazily so remote-only use never touches the app
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import app

            self._client = TestClient(app)

    def post(self, path: str, payload: dict) -> dict:
        response = self._client.post(path, json=payload)
        return self._unwrap(response)

    def get(self, path: str) -> dict:
        response = self._client.get(path)
        return self._unwrap(response)

    @staticmethod
    def _unwrap(response) -> dict:
        if response.status_code != 200:
            try:
                detail = response.json().get("detail", response.text)
            except ValueError:
                detail = response.text
            raise ServiceError(response.status_code, detail)
        return response.json()

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "ServiceClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
