"""
Run registry module for the crude oil correlation toolkit

This module keeps a small SQLite history of successful CLI runs: the command,
its seed, the config echo and the headline numbers of the manifest.
"""

import json
import logging
import os
import sqlite3

from utils import round_floats


logger = logging.getLogger(__name__)

# Database configuration
DB_DIR = "data"
DB_NAME = "runs.db"
DB_PATH = os.path.join(DB_DIR, DB_NAME)


def init_database():
    """
    Create the registry directory and the runs table.

    Returns:
        bool: True if successful, False otherwise
    """
    try:
        if DB_DIR and not os.path.exists(DB_DIR):
            os.makedirs(DB_DIR)

        conn = get_connection()
        cursor = conn.cursor()
        cursor.execute("""
            CREATE TABLE IF NOT EXISTS runs (
                run_id INTEGER PRIMARY KEY AUTOINCREMENT,
                command TEXT NOT NULL,
                seed INTEGER,
                config_json TEXT NOT NULL,
                output_dir TEXT,
                headline_json TEXT,
                run_date TIMESTAMP DEFAULT CURRENT_TIMESTAMP
            )
        """)
        conn.commit()
        conn.close()

        logger.debug("Run registry ready at %s", DB_PATH)
        return True

    except sqlite3.Error as e:
        logger.error("Registry initialization error: %s", e)
        return False
    except OSError as e:
        logger.error("Cannot create registry directory %s: %s", DB_DIR, e)
        return False


def get_connection():
    """
    Return a database connection object.

    Returns:
        sqlite3.Connection: Connection with name-based row access

    Raises:
        sqlite3.Error: If connection fails
    """
    try:
        conn = sqlite3.connect(DB_PATH)
        conn.row_factory = sqlite3.Row
        return conn
    except sqlite3.Error as e:
        logger.error("Registry connection error: %s", e)
        raise


def execute_query(query, params=None):
    """
    Execute a SQL statement with parameter binding.

    Args:
        query (str): SQL statement
        params (tuple, optional): Bound parameters

    Returns:
        int: lastrowid of the statement

    Raises:
        sqlite3.Error: If execution fails
    """
    conn = get_connection()
    try:
        cursor = conn.cursor()
        cursor.execute(query, params or ())
        conn.commit()
        return cursor.lastrowid
    except sqlite3.Error as e:
        logger.error("Query execution error: %s", e)
        raise
    finally:
        conn.close()


def fetch_all(query, params=None):
    """
    Fetch all rows of a query as dictionaries.

    Returns:
        list: Rows, or an empty list on error
    """
    try:
        conn = get_connection()
        cursor = conn.cursor()
        cursor.execute(query, params or ())
        rows = cursor.fetchall()
        conn.close()
        return [dict(row) for row in rows]
    except sqlite3.Error as e:
        logger.error("Fetch error: %s", e)
        return []


def fetch_one(query, params=None):
    """
    Fetch a single row as a dictionary.

    Returns:
        dict: The row, or None if not found or on error
    """
    try:
        conn = get_connection()
        cursor = conn.cursor()
        cursor.execute(query, params or ())
        row = cursor.fetchone()
        conn.close()
        return dict(row) if row else None
    except sqlite3.Error as e:
        logger.error("Fetch error: %s", e)
        return None


def record_run(command, config, output_dir=None, headline=None):
    """
    Store one successful run.

    Args:
        command (str): CLI subcommand name
        config (dict): Config echo of the run
        output_dir (str, optional): Where the outputs went
        headline (dict, optional): Headline numbers of the run

    Returns:
        int: run_id of the new row, or None if the registry is unavailable
    """
    if not init_database():
        return None
    try:
        return execute_query(
            "INSERT INTO runs (command, seed, config_json, output_dir, headline_json) VALUES (?, ?, ?, ?, ?)",
            (command, config.get("seed"), json.dumps(round_floats(config), sort_keys=True),
             output_dir, json.dumps(round_floats(headline or {}), sort_keys=True)),
        )
    except sqlite3.Error:
        return None


def get_run(run_id):
    """
    One recorded run with its config and headline decoded.

    Returns:
        dict: The run, or None if no such run exists
    """
    if not init_database():
        return None
    row = fetch_one("SELECT * FROM runs WHERE run_id = ?", (int(run_id),))
    if row is None:
        return None
    row["config"] = json.loads(row.pop("config_json") or "{}")
    row["headline"] = json.loads(row.pop("headline_json") or "{}")
    return row


def recent_runs(limit=20):
    """
    Most recent runs first.

    Args:
        limit (int): Maximum number of rows

    Returns:
        list: Rows with headline_json decoded into 'headline'
    """
    if not init_database():
        return []
    rows = fetch_all(
        "SELECT run_id, command, seed, output_dir, headline_json, run_date FROM runs "
        "ORDER BY run_id DESC LIMIT ?",
        (int(limit),),
    )
    for row in rows:
        row["headline"] = json.loads(row.pop("headline_json") or "{}")
    return rows
