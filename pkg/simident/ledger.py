import hashlib
import json
import os
import re
import sqlite3
import sys
from tempfile import NamedTemporaryFile
from typing import IO, Any, Dict, Optional, Union, cast

if sys.version_info >= (3, 9):
    from collections.abc import Iterator, Mapping
else:
    from typing import Iterator, Mapping

from .logger import logger

Document = Dict[str, Any]


def create_temporary_db_file() -> IO[bytes]:
    return NamedTemporaryFile(prefix="simident_", suffix=".db")


def ledger_table_name(table_name: str) -> str:
    """``table_name`` reduced to ASCII letters, digits and underscores; a leading digit gets a ``runs_`` prefix."""
    ret = re.sub(r"[^0-9A-Za-z_]", "", table_name)
    if len(ret) == 0:
        raise ValueError(f"ledger table name {table_name!r} has no usable characters")
    if ret[0].isdigit():
        ret = f"runs_{ret}"
    if ret != table_name:
        logger.warning(f"ledger table {table_name!r} is stored as {ret}")
    return ret


def open_ledger_connection(connection: Union[str, "os.PathLike[str]", sqlite3.Connection]) -> sqlite3.Connection:
    if isinstance(connection, sqlite3.Connection):
        return connection
    if isinstance(connection, (str, os.PathLike)):
        return sqlite3.connect(os.fspath(connection))
    raise TypeError(f"a ledger needs a path or a sqlite3.Connection, not '{type(connection).__name__}'")


def serialize_document(document: Document) -> str:
    """Deterministic JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def document_digest(document: Document) -> str:
    """sha256 of the compact canonical JSON of ``document`` without its ``digest`` field."""
    body = {k: v for k, v in document.items() if k != "digest"}
    text = json.dumps(body, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class _LedgerDatabaseDriver:
    schema_version = "0"
    container_type = "ReportLedger"

    @classmethod
    def initialize_metadata_table(cls, cur: sqlite3.Cursor) -> None:
        cur.execute(
            """
            CREATE TABLE IF NOT EXISTS metadata (
                table_name TEXT PRIMARY KEY,
                schema_version TEXT NOT NULL,
                container_type TEXT NOT NULL,
                UNIQUE (table_name, container_type)
            )
            """
        )

    @classmethod
    def get_schema_version(cls, table_name: str, cur: sqlite3.Cursor) -> Optional[str]:
        cur.execute(
            "SELECT schema_version FROM metadata WHERE table_name=? AND container_type=?",
            (table_name, cls.container_type),
        )
        buf = cur.fetchone()
        return None if buf is None else cast(str, buf[0])

    @classmethod
    def initialize_table(cls, table_name: str, cur: sqlite3.Cursor) -> None:
        version = cls.get_schema_version(table_name, cur)
        if version is None:
            cur.execute(
                f"CREATE TABLE {table_name} ("
                "digest TEXT NOT NULL UNIQUE, "
                "document TEXT NOT NULL, "
                "item_order INTEGER PRIMARY KEY)"
            )
            cur.execute(
                "INSERT INTO metadata (table_name, schema_version, container_type) VALUES (?, ?, ?)",
                (table_name, cls.schema_version, cls.container_type),
            )
        elif version != cls.schema_version:
            raise ValueError(f"table {table_name} has schema version {version}, expected {cls.schema_version}")

    @classmethod
    def get_document(cls, table_name: str, cur: sqlite3.Cursor, digest: str) -> Optional[str]:
        cur.execute(f"SELECT document FROM {table_name} WHERE digest=?", (digest,))
        res = cur.fetchone()
        return None if res is None else cast(str, res[0])

    @classmethod
    def get_digests(cls, table_name: str, cur: sqlite3.Cursor) -> Iterator[str]:
        cur.execute(f"SELECT digest FROM {table_name} ORDER BY item_order")
        for row in cur:
            yield cast(str, row[0])

    @classmethod
    def get_count(cls, table_name: str, cur: sqlite3.Cursor) -> int:
        cur.execute(f"SELECT COUNT(*) FROM {table_name}")
        return cast(int, cur.fetchone()[0])

    @classmethod
    def insert_document(cls, table_name: str, cur: sqlite3.Cursor, digest: str, document: str) -> None:
        cur.execute(f"INSERT OR IGNORE INTO {table_name} (digest, document) VALUES (?, ?)", (digest, document))


class ReportLedger(Mapping[str, Document]):
    """Append-only store of run documents keyed by their digest, kept in an sqlite table.

    Without a connection the ledger lives in a temporary database file that is removed by :meth:`close`.
    """

    def __init__(
        self,
        connection: Optional[Union[str, "os.PathLike[str]", sqlite3.Connection]] = None,
        table_name: str = "runs",
    ):
        self._tempfile: Optional[IO[bytes]] = None
        if connection is None:
            self._tempfile = create_temporary_db_file()
            connection = self._tempfile.name
        self._connection = open_ledger_connection(connection)
        self._table_name = ledger_table_name(table_name)
        cur = self._connection.cursor()
        _LedgerDatabaseDriver.initialize_metadata_table(cur)
        _LedgerDatabaseDriver.initialize_table(self._table_name, cur)
        self._connection.commit()

    def close(self) -> None:
        """Close a temporary ledger and delete its file; a ledger on a caller's path or connection is left open."""
        if self._tempfile is None:
            return
        self._connection.close()
        self._tempfile.close()
        self._tempfile = None

    @property
    def connection(self) -> sqlite3.Connection:
        return self._connection

    @property
    def table_name(self) -> str:
        return self._table_name

    def append(self, document: Document) -> str:
        """Store ``document`` and return its digest; storing the same document twice keeps one copy."""
        digest = document_digest(document)
        cur = self._connection.cursor()
        _LedgerDatabaseDriver.insert_document(self._table_name, cur, digest, serialize_document(document))
        self._connection.commit()
        logger.info(f"ledger {self._table_name}: recorded run {digest[:12]}")
        return digest

    def __getitem__(self, digest: str) -> Document:
        cur = self._connection.cursor()
        text = _LedgerDatabaseDriver.get_document(self._table_name, cur, digest)
        if text is None:
            raise KeyError(digest)
        return cast(Document, json.loads(text))

    def __iter__(self) -> Iterator[str]:
        cur = self._connection.cursor()
        yield from list(_LedgerDatabaseDriver.get_digests(self._table_name, cur))

    def __len__(self) -> int:
        return _LedgerDatabaseDriver.get_count(self._table_name, self._connection.cursor())

    def __contains__(self, digest: object) -> bool:
        if not isinstance(digest, str):
            return False
        return _LedgerDatabaseDriver.get_document(self._table_name, self._connection.cursor(), digest) is not None
